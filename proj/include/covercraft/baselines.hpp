#pragma once

#include "covercraft/common.hpp"
#include "covercraft/complex.hpp"
#include "covercraft/geometry.hpp"

#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace covercraft {

// ---------------------------------------------------------------------------
// Interval covers of the real line (1D Mapper)
// ---------------------------------------------------------------------------

struct IntervalCover {
    std::vector<std::pair<double, double>> intervals; // (lo, hi), sorted by lo

    void validate() const {
        double prev_lo = -std::numeric_limits<double>::infinity();
        for (const auto& [lo, hi] : intervals) {
            if (!(lo < hi)) throw invariant_error("IntervalCover: need lo < hi");
            if (lo < prev_lo) throw invariant_error("IntervalCover: intervals must be sorted by lo");
            prev_lo = lo;
        }
    }

    bool contains(double v) const {
        for (const auto& [a, b] : intervals)
            if (v >= a && v <= b) return true;
        return false;
    }
};

/// k equal-length intervals covering [lo, hi] whose consecutive overlap is
/// `gain` as a fraction of the interval length.
inline IntervalCover uniform_cover(double lo, double hi, int k, double gain) {
    if (!(lo < hi)) throw std::invalid_argument("uniform_cover: need lo < hi");
    if (k < 1) throw std::invalid_argument("uniform_cover: need k >= 1");
    if (!(gain >= 0.0 && gain < 1.0)) throw std::invalid_argument("uniform_cover: gain must be in [0,1)");
    IntervalCover cover;
    const double len = (hi - lo) / (1.0 + (k - 1) * (1.0 - gain));
    const double step = len * (1.0 - gain);
    for (int i = 0; i < k; ++i) {
        // pin the outer endpoints so the cover reaches hi despite rounding
        const double a = i == 0 ? lo : lo + i * step;
        const double b = i == k - 1 ? hi : lo + i * step + len;
        cover.intervals.emplace_back(a, b);
    }
    cover.validate();
    return cover;
}

// ---------------------------------------------------------------------------
// Ball Mapper and the Witness complex with v = 0
// ---------------------------------------------------------------------------

/// Cover by closed eps-balls centered at a greedy eps-net.
inline Cover ball_mapper(const PointCloud& X, double eps, std::uint64_t seed) {
    if (!(eps > 0.0)) throw std::invalid_argument("ball_mapper: eps must be positive");
    const std::vector<int> landmarks = epsilon_net(X, eps, seed);
    Cover c;
    c.n = X.n();
    c.members.resize(landmarks.size());
    const double eps2 = eps * eps;
    for (std::size_t i = 0; i < landmarks.size(); ++i)
        for (int x = 0; x < X.n(); ++x)
            if (X.squared_distance(landmarks[i], x) <= eps2) c.members[i].push_back(x);
    c.validate(/*require_total=*/true);
    return c;
}

/// Witness complex with parameter v=0 on the given landmarks: a simplex enters
/// at the smallest eps for which some data point is within eps of all its
/// vertices, i.e. at min over witnesses of the max vertex distance.
inline FilteredComplex witness_v0(const PointCloud& X, const std::vector<int>& landmarks, int max_dim) {
    if (landmarks.empty()) throw std::invalid_argument("witness_v0: landmarks must be nonempty");
    if (max_dim < 0) throw std::invalid_argument("witness_v0: max_dim must be >= 0");
    const int n = X.n();
    const int m = static_cast<int>(landmarks.size());
    // distance matrix landmarks x witnesses
    Eigen::MatrixXd D(m, n);
    parallel_for(m, [&](std::int64_t i) {
        for (int x = 0; x < n; ++x)
            D(static_cast<int>(i), x) = X.distance(landmarks[static_cast<std::size_t>(i)], x);
    });

    FilteredComplex K;
    std::vector<int> idx; // landmark positions of the current simplex
    Eigen::VectorXd cur_max(n);
    // enumerate all simplices on landmark positions up to max_dim; the value
    // of sigma+{v} reuses the running per-witness max of sigma
    std::function<void(int, int)> rec = [&](int next, int depth) {
        for (int v = next; v < m; ++v) {
            Eigen::VectorXd saved;
            if (depth == 0) {
                cur_max = D.row(v);
            } else {
                saved = cur_max;
                cur_max = cur_max.cwiseMax(D.row(v).transpose());
            }
            idx.push_back(v);
            Simplex s;
            s.reserve(idx.size());
            for (int p : idx) s.push_back(p);
            K.simplices.emplace_back(std::move(s), cur_max.minCoeff());
            if (depth + 1 <= max_dim) rec(v + 1, depth + 1);
            idx.pop_back();
            if (depth != 0) cur_max = saved;
        }
    };
    rec(0, 0);
    std::sort(K.simplices.begin(), K.simplices.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second < b.second;
        if (a.first.size() != b.first.size()) return a.first.size() < b.first.size();
        return a.first < b.first;
    });
    K.check_monotone();
    return K;
}

// ---------------------------------------------------------------------------
// 1D Mapper
// ---------------------------------------------------------------------------

/// Clusterer contract: given the cloud and a subset of point ids, return a
/// partition of those ids into clusters.
using Clusterer = std::function<std::vector<std::vector<int>>(const PointCloud&, const std::vector<int>&)>;

/// Single-linkage clustering with a distance cutoff: connected components of
/// the pairs at distance <= cutoff.
inline Clusterer single_linkage_clusterer(double cutoff) {
    return [cutoff](const PointCloud& X, const std::vector<int>& ids) {
        const int m = static_cast<int>(ids.size());
        std::vector<int> parent(static_cast<std::size_t>(m));
        for (int i = 0; i < m; ++i) parent[static_cast<std::size_t>(i)] = i;
        std::function<int(int)> find = [&](int a) {
            while (parent[static_cast<std::size_t>(a)] != a) {
                parent[static_cast<std::size_t>(a)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(a)])];
                a = parent[static_cast<std::size_t>(a)];
            }
            return a;
        };
        const double c2 = cutoff * cutoff;
        for (int i = 0; i < m; ++i)
            for (int j = i + 1; j < m; ++j)
                if (X.squared_distance(ids[static_cast<std::size_t>(i)], ids[static_cast<std::size_t>(j)]) <= c2)
                    parent[static_cast<std::size_t>(find(i))] = find(j);
        std::vector<std::vector<int>> by_root(static_cast<std::size_t>(m));
        for (int i = 0; i < m; ++i) by_root[static_cast<std::size_t>(find(i))].push_back(ids[static_cast<std::size_t>(i)]);
        std::vector<std::vector<int>> clusters;
        for (auto& c : by_root)
            if (!c.empty()) clusters.push_back(std::move(c));
        return clusters;
    };
}

/// DBSCAN-style clustering; noise points become singleton clusters so that
/// Mapper covers stay total.
inline Clusterer dbscan_clusterer(double eps, int min_pts) {
    return [eps, min_pts](const PointCloud& X, const std::vector<int>& ids) {
        const int m = static_cast<int>(ids.size());
        const double e2 = eps * eps;
        std::vector<std::vector<int>> nbrs(static_cast<std::size_t>(m));
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j)
                if (i != j && X.squared_distance(ids[static_cast<std::size_t>(i)], ids[static_cast<std::size_t>(j)]) <= e2)
                    nbrs[static_cast<std::size_t>(i)].push_back(j);
        std::vector<char> core(static_cast<std::size_t>(m), 0);
        for (int i = 0; i < m; ++i)
            core[static_cast<std::size_t>(i)] = static_cast<int>(nbrs[static_cast<std::size_t>(i)].size()) + 1 >= min_pts;
        std::vector<int> label(static_cast<std::size_t>(m), -1);
        int next_label = 0;
        for (int i = 0; i < m; ++i) {
            if (label[static_cast<std::size_t>(i)] != -1 || !core[static_cast<std::size_t>(i)]) continue;
            // grow a cluster from this core point
            std::vector<int> stack{i};
            label[static_cast<std::size_t>(i)] = next_label;
            while (!stack.empty()) {
                const int cur = stack.back();
                stack.pop_back();
                if (!core[static_cast<std::size_t>(cur)]) continue;
                for (int nb : nbrs[static_cast<std::size_t>(cur)]) {
                    if (label[static_cast<std::size_t>(nb)] == -1) {
                        label[static_cast<std::size_t>(nb)] = next_label;
                        stack.push_back(nb);
                    }
                }
            }
            ++next_label;
        }
        std::vector<std::vector<int>> clusters(static_cast<std::size_t>(next_label));
        for (int i = 0; i < m; ++i) {
            if (label[static_cast<std::size_t>(i)] >= 0) {
                clusters[static_cast<std::size_t>(label[static_cast<std::size_t>(i)])].push_back(ids[static_cast<std::size_t>(i)]);
            } else {
                clusters.push_back({ids[static_cast<std::size_t>(i)]}); // noise
            }
        }
        return clusters;
    };
}

/// 1D Mapper cover: cluster the preimage of each interval under f and take
/// the union of all clusters. Empty preimages are skipped.
inline Cover mapper_1d(const PointCloud& X, const std::vector<double>& f, const IntervalCover& cover,
                       const Clusterer& clusterer) {
    X.validate();
    cover.validate();
    if (static_cast<int>(f.size()) != X.n())
        throw std::invalid_argument("mapper_1d: filter size must match point count");
    for (double v : f)
        if (!cover.contains(v))
            throw std::invalid_argument("mapper_1d: interval cover does not cover the range of f");
    Cover out;
    out.n = X.n();
    for (const auto& [lo, hi] : cover.intervals) {
        std::vector<int> preimage;
        for (int x = 0; x < X.n(); ++x)
            if (f[static_cast<std::size_t>(x)] >= lo && f[static_cast<std::size_t>(x)] <= hi) preimage.push_back(x);
        if (preimage.empty()) continue;
        for (auto& cluster : clusterer(X, preimage)) {
            std::sort(cluster.begin(), cluster.end());
            out.members.push_back(std::move(cluster));
        }
    }
    out.validate();
    return out;
}

// ---------------------------------------------------------------------------
// Vietoris--Rips
// ---------------------------------------------------------------------------

constexpr long kRipsSimplexGuard = 10'000'000;

/// Clique filtration of the distance graph truncated at max_radius; the value
/// of a simplex is its largest pairwise distance. Refuses to build more than
/// kRipsSimplexGuard simplices.
inline FilteredComplex vietoris_rips(const PointCloud& X, int max_dim, double max_radius) {
    X.validate();
    if (max_dim < 0) throw std::invalid_argument("vietoris_rips: max_dim must be >= 0");
    if (!(max_radius >= 0.0)) throw std::invalid_argument("vietoris_rips: max_radius must be nonnegative");
    const int n = X.n();
    std::vector<std::vector<int>> adj(static_cast<std::size_t>(n)); // neighbors with larger id
    Eigen::MatrixXd D(n, n);
    for (int i = 0; i < n; ++i) {
        D(i, i) = 0.0;
        for (int j = i + 1; j < n; ++j) {
            const double d = X.distance(i, j);
            D(i, j) = D(j, i) = d;
            if (d <= max_radius) adj[static_cast<std::size_t>(i)].push_back(j);
        }
    }
    FilteredComplex K;
    long count = 0;
    auto add = [&](Simplex s, double v) {
        if (++count > kRipsSimplexGuard)
            throw capacity_error("vietoris_rips: simplex count exceeds guard (" +
                                 std::to_string(kRipsSimplexGuard) + ")");
        K.simplices.emplace_back(std::move(s), v);
    };
    std::vector<int> idx;
    std::function<void(const std::vector<int>&, double, int)> rec =
        [&](const std::vector<int>& cand, double val, int depth) {
            for (std::size_t a = 0; a < cand.size(); ++a) {
                const int v = cand[a];
                double nval = val;
                for (int u : idx) nval = std::max(nval, D(u, v));
                if (nval > max_radius) continue;
                idx.push_back(v);
                Simplex s(idx.begin(), idx.end());
                add(std::move(s), idx.size() == 1 ? 0.0 : nval);
                if (depth + 1 <= max_dim) {
                    std::vector<int> next = detail::intersect_sorted(
                        std::vector<int>(cand.begin() + static_cast<std::ptrdiff_t>(a) + 1, cand.end()),
                        adj[static_cast<std::size_t>(v)]);
                    rec(next, nval, depth + 1);
                }
                idx.pop_back();
            }
        };
    std::vector<int> all(static_cast<std::size_t>(n));
    std::iota(all.begin(), all.end(), 0);
    rec(all, 0.0, 0);
    std::sort(K.simplices.begin(), K.simplices.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second < b.second;
        if (a.first.size() != b.first.size()) return a.first.size() < b.first.size();
        return a.first < b.first;
    });
    K.check_monotone();
    return K;
}

} // namespace covercraft
