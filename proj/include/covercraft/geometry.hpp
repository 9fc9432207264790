#pragma once

#include "covercraft/common.hpp"

#include <Eigen/Core>

#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

namespace covercraft {

// ---------------------------------------------------------------------------
// Point clouds
// ---------------------------------------------------------------------------

struct PointCloud {
    // n rows, one point per row; row-major so per-point access is contiguous.
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> points;

    int n() const { return static_cast<int>(points.rows()); }
    int dim() const { return static_cast<int>(points.cols()); }

    void validate() const {
        if (points.rows() < 1 || points.cols() < 1)
            throw invariant_error("PointCloud: need at least one point and one coordinate");
        if (!points.allFinite())
            throw invariant_error("PointCloud: non-finite coordinate");
    }

    double squared_distance(int a, int b) const { return (points.row(a) - points.row(b)).squaredNorm(); }
    double distance(int a, int b) const { return std::sqrt(squared_distance(a, b)); }
};

inline PointCloud load_point_cloud_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open point cloud file: " + path);
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        const auto toks = split_csv_line(line);
        std::vector<double> row;
        row.reserve(toks.size());
        for (const auto& t : toks) row.push_back(parse_double(t));
        if (!rows.empty() && row.size() != rows.front().size())
            throw std::invalid_argument("ragged CSV row in " + path);
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw std::invalid_argument("empty point cloud file: " + path);
    PointCloud X;
    X.points.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j) X.points(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    X.validate();
    return X;
}

inline void save_point_cloud_csv(const PointCloud& X, std::ostream& out) {
    for (int i = 0; i < X.n(); ++i) {
        for (int j = 0; j < X.dim(); ++j) {
            if (j) out << ',';
            out << fmt_double(X.points(i, j));
        }
        out << '\n';
    }
}

inline void save_point_cloud_csv(const PointCloud& X, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::invalid_argument("cannot write point cloud file: " + path);
    save_point_cloud_csv(X, out);
}

// ---------------------------------------------------------------------------
// Weighted graphs
// ---------------------------------------------------------------------------

struct WeightedGraph {
    struct Edge {
        int u, v;
        double w;
    };

    int n = 0;
    std::vector<Edge> edges; // u < v, sorted by (u, v), no duplicates

    double total_weight() const {
        double W = 0.0;
        for (const auto& e : edges) W += e.w;
        return W;
    }

    void validate() const {
        int pu = -1, pv = -1;
        for (const auto& e : edges) {
            if (e.u < 0 || e.v >= n || e.u >= e.v)
                throw invariant_error("WeightedGraph: bad edge endpoints");
            if (!(e.w > 0.0) || !std::isfinite(e.w))
                throw invariant_error("WeightedGraph: edge weight must be positive and finite");
            if (e.u < pu || (e.u == pu && e.v <= pv))
                throw invariant_error("WeightedGraph: edges must be strictly sorted by (u,v)");
            pu = e.u;
            pv = e.v;
        }
    }

    std::vector<std::vector<std::pair<int, double>>> adjacency() const {
        std::vector<std::vector<std::pair<int, double>>> adj(static_cast<std::size_t>(n));
        for (const auto& e : edges) {
            adj[static_cast<std::size_t>(e.u)].emplace_back(e.v, e.w);
            adj[static_cast<std::size_t>(e.v)].emplace_back(e.u, e.w);
        }
        return adj;
    }
};

namespace detail {

// Exact k-nearest neighbors by brute force, ties broken by index.
// Returns per-point lists of (distance, neighbor) sorted ascending.
inline std::vector<std::vector<std::pair<double, int>>> knn_neighbors(const PointCloud& X, int k) {
    const int n = X.n();
    std::vector<std::vector<std::pair<double, int>>> nbrs(static_cast<std::size_t>(n));
    parallel_for(n, [&](std::int64_t i) {
        std::vector<std::pair<double, int>> cand;
        cand.reserve(static_cast<std::size_t>(n - 1));
        for (int j = 0; j < n; ++j) {
            if (j == static_cast<int>(i)) continue;
            cand.emplace_back(X.squared_distance(static_cast<int>(i), j), j);
        }
        std::partial_sort(cand.begin(), cand.begin() + k, cand.end());
        cand.resize(static_cast<std::size_t>(k));
        for (auto& [d2, j] : cand) d2 = std::sqrt(d2);
        nbrs[static_cast<std::size_t>(i)] = std::move(cand);
    });
    return nbrs;
}

} // namespace detail

/// Symmetrized k-nearest-neighbor graph under Euclidean distance, all weights 1.
inline WeightedGraph knn_graph(const PointCloud& X, int n_neigh) {
    X.validate();
    const int n = X.n();
    if (n_neigh < 1 || n_neigh >= n)
        throw std::invalid_argument("knn_graph: need 1 <= n_neigh < n");
    const auto nbrs = detail::knn_neighbors(X, n_neigh);
    std::vector<std::pair<int, int>> pairs;
    pairs.reserve(static_cast<std::size_t>(n) * static_cast<std::size_t>(n_neigh));
    for (int i = 0; i < n; ++i)
        for (const auto& [d, j] : nbrs[static_cast<std::size_t>(i)])
            pairs.emplace_back(std::min(i, j), std::max(i, j));
    std::sort(pairs.begin(), pairs.end());
    pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
    WeightedGraph G;
    G.n = n;
    G.edges.reserve(pairs.size());
    for (const auto& [u, v] : pairs) G.edges.push_back({u, v, 1.0});
    G.validate();
    return G;
}

/// Weighted neighborhood graph of the UMAP algorithm: per-point local kernels
/// exp(-max(0, d - rho)/sigma) with sigma solved by bisection so that the
/// kernel sums to log2(n_neigh), combined by the probabilistic union
/// a + b - a*b. Edges with combined weight below 1e-6 are dropped.
inline WeightedGraph umap_graph(const PointCloud& X, int n_neigh) {
    X.validate();
    const int n = X.n();
    if (n_neigh < 2 || n_neigh >= n)
        throw std::invalid_argument("umap_graph: need 2 <= n_neigh < n");
    const auto nbrs = detail::knn_neighbors(X, n_neigh);
    const double target = std::log2(static_cast<double>(n_neigh));

    std::vector<std::vector<double>> dir_w(static_cast<std::size_t>(n));
    parallel_for(n, [&](std::int64_t ii) {
        const auto& nb = nbrs[static_cast<std::size_t>(ii)];
        const double rho = nb.front().first;
        std::vector<double> w(nb.size(), 1.0);
        // Degenerate: all neighbors at distance rho, no sigma can meet the target.
        if (nb.back().first - rho >= 1e-12) {
            double lo = 1e-8, hi = 1e3;
            for (int it = 0; it < 64; ++it) {
                const double mid = 0.5 * (lo + hi);
                double s = 0.0;
                for (const auto& [d, j] : nb) s += std::exp(-std::max(0.0, d - rho) / mid);
                (s > target ? hi : lo) = mid;
            }
            const double sigma = 0.5 * (lo + hi);
            for (std::size_t a = 0; a < nb.size(); ++a)
                w[a] = std::exp(-std::max(0.0, nb[a].first - rho) / sigma);
        }
        dir_w[static_cast<std::size_t>(ii)] = std::move(w);
    });

    std::map<std::pair<int, int>, std::pair<double, double>> directed;
    for (int i = 0; i < n; ++i) {
        const auto& nb = nbrs[static_cast<std::size_t>(i)];
        for (std::size_t a = 0; a < nb.size(); ++a) {
            const int j = nb[a].second;
            auto key = std::make_pair(std::min(i, j), std::max(i, j));
            auto& slot = directed[key];
            (i < j ? slot.first : slot.second) = std::max((i < j ? slot.first : slot.second), dir_w[static_cast<std::size_t>(i)][a]);
        }
    }
    WeightedGraph G;
    G.n = n;
    for (const auto& [key, ab] : directed) {
        const double w = ab.first + ab.second - ab.first * ab.second;
        if (w >= 1e-6) G.edges.push_back({key.first, key.second, w});
    }
    G.validate();
    return G;
}

/// Greedy epsilon-net in seeded random insertion order. The result is
/// eps-separated and eps-covering.
inline std::vector<int> epsilon_net(const PointCloud& X, double eps, std::uint64_t seed) {
    X.validate();
    if (!(eps > 0.0)) throw std::invalid_argument("epsilon_net: eps must be positive");
    const int n = X.n();
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    Rng rng(seed);
    rng.shuffle(order);
    const double eps2 = eps * eps;
    std::vector<int> net;
    for (int i : order) {
        bool far = true;
        for (int c : net) {
            if (X.squared_distance(i, c) <= eps2) {
                far = false;
                break;
            }
        }
        if (far) net.push_back(i);
    }
    return net;
}

/// Furthest-point (maxmin) subsample of m indices; the first index is seeded,
/// later ones maximize the minimum distance to the chosen set, ties broken by
/// smallest index.
inline std::vector<int> furthest_point_subsample(const PointCloud& X, int m, std::uint64_t seed) {
    X.validate();
    const int n = X.n();
    if (m < 1 || m > n) throw std::invalid_argument("furthest_point_subsample: need 1 <= m <= n");
    Rng rng(seed);
    std::vector<int> chosen;
    chosen.reserve(static_cast<std::size_t>(m));
    chosen.push_back(static_cast<int>(rng.next_below(static_cast<std::uint64_t>(n))));
    std::vector<double> min_d2(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());
    while (static_cast<int>(chosen.size()) < m) {
        const int last = chosen.back();
        int best = -1;
        double best_d2 = -1.0;
        for (int i = 0; i < n; ++i) {
            min_d2[static_cast<std::size_t>(i)] = std::min(min_d2[static_cast<std::size_t>(i)], X.squared_distance(i, last));
            if (min_d2[static_cast<std::size_t>(i)] > best_d2) {
                best_d2 = min_d2[static_cast<std::size_t>(i)];
                best = i;
            }
        }
        chosen.push_back(best);
    }
    return chosen;
}

// ---------------------------------------------------------------------------
// Synthetic datasets
// ---------------------------------------------------------------------------

/// n uniform points on the unit sphere S^dim in R^{dim+1} (dim 2 or 3),
/// via normalized standard Gaussians.
inline PointCloud sample_sphere(int dim, int n, std::uint64_t seed) {
    if (dim != 2 && dim != 3) throw std::invalid_argument("sample_sphere: dim must be 2 or 3");
    if (n < 1) throw std::invalid_argument("sample_sphere: n must be positive");
    Rng rng(seed);
    PointCloud X;
    X.points.resize(n, dim + 1);
    for (int i = 0; i < n; ++i) {
        double norm2 = 0.0;
        do {
            norm2 = 0.0;
            for (int j = 0; j <= dim; ++j) {
                const double g = rng.next_normal();
                X.points(i, j) = g;
                norm2 += g * g;
            }
        } while (norm2 < 1e-24);
        X.points.row(i) /= std::sqrt(norm2);
    }
    return X;
}

/// n points at uniform random angles on the unit circle in R^2.
inline PointCloud sample_circle(int n, std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("sample_circle: n must be positive");
    Rng rng(seed);
    PointCloud X;
    X.points.resize(n, 2);
    for (int i = 0; i < n; ++i) {
        const double t = 6.283185307179586476925286766559 * rng.next_double();
        X.points(i, 0) = std::cos(t);
        X.points(i, 1) = std::sin(t);
    }
    return X;
}

/// Two well-separated Gaussian blobs in R^2 (centers (+-3, 0), std 0.5);
/// the first ceil(n/2) points belong to the left blob.
inline PointCloud sample_blobs(int n, std::uint64_t seed) {
    if (n < 2) throw std::invalid_argument("sample_blobs: n must be at least 2");
    Rng rng(seed);
    PointCloud X;
    X.points.resize(n, 2);
    const int half = (n + 1) / 2;
    for (int i = 0; i < n; ++i) {
        const double cx = i < half ? -3.0 : 3.0;
        X.points(i, 0) = cx + 0.5 * rng.next_normal();
        X.points(i, 1) = 0.5 * rng.next_normal();
    }
    return X;
}

} // namespace covercraft
