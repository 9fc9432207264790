#include "covercraft/geometry.hpp"
#include "oracles.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <set>

using namespace covercraft;

namespace {

std::set<std::pair<int, int>> edge_set(const WeightedGraph& g) {
    std::set<std::pair<int, int>> s;
    for (const auto& e : g.edges) s.emplace(e.u, e.v);
    return s;
}

// Brute-force oracle: full distance sort per point, then symmetrize.
std::set<std::pair<int, int>> brute_knn_edges(const PointCloud& X, int k) {
    std::set<std::pair<int, int>> out;
    for (int i = 0; i < X.n(); ++i) {
        std::vector<std::pair<double, int>> d;
        for (int j = 0; j < X.n(); ++j)
            if (j != i) d.emplace_back(X.distance(i, j), j);
        std::sort(d.begin(), d.end());
        for (int a = 0; a < k; ++a) out.emplace(std::min(i, d[static_cast<std::size_t>(a)].second),
                                                std::max(i, d[static_cast<std::size_t>(a)].second));
    }
    return out;
}

PointCloud from_rows(const std::vector<std::vector<double>>& rows) {
    PointCloud X;
    X.points.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j) X.points(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    return X;
}

const PointCloud kSquare = from_rows({{0, 0}, {1, 0}, {1, 1}, {0, 1}});

} // namespace

TEST_CASE("knn_graph: collinear equidistant points") {
    const PointCloud X = from_rows({{0.0}, {1.0}, {2.0}});
    const WeightedGraph g = knn_graph(X, 1);
    CHECK(edge_set(g) == std::set<std::pair<int, int>>{{0, 1}, {1, 2}});
    for (const auto& e : g.edges) CHECK(e.w == 1.0);
}

TEST_CASE("knn_graph: unit square with two neighbors excludes diagonals") {
    const WeightedGraph g = knn_graph(kSquare, 2);
    CHECK(edge_set(g) == brute_knn_edges(kSquare, 2));
    CHECK(edge_set(g) == std::set<std::pair<int, int>>{{0, 1}, {0, 3}, {1, 2}, {2, 3}});
}

TEST_CASE("knn_graph: n_neigh = n-1 gives the complete graph") {
    Rng rng(7);
    const PointCloud X = oracles::random_cloud(rng, 9, 3);
    const WeightedGraph g = knn_graph(X, 8);
    CHECK(static_cast<int>(g.edges.size()) == 9 * 8 / 2);
}

TEST_CASE("knn_graph: rejects n_neigh >= n") {
    Rng rng(3);
    const PointCloud X = oracles::random_cloud(rng, 5, 2);
    CHECK_THROWS_AS(knn_graph(X, 5), std::invalid_argument);
}

TEST_CASE("umap_graph: nearest-neighbor edges carry weight 1") {
    Rng rng(11);
    const PointCloud X = oracles::random_cloud(rng, 20, 2);
    const WeightedGraph g = umap_graph(X, 4);
    const auto nbrs = detail::knn_neighbors(X, 1);
    for (int i = 0; i < X.n(); ++i) {
        const int nn = nbrs[static_cast<std::size_t>(i)].front().second;
        bool found = false;
        for (const auto& e : g.edges)
            if (e.u == std::min(i, nn) && e.v == std::max(i, nn)) {
                // one directed side is exp(0)=1, and 1 + b - b = 1
                CHECK(e.w == Catch::Approx(1.0).margin(1e-12));
                found = true;
            }
        CHECK(found);
    }
}

TEST_CASE("umap_graph: equilateral triangle degenerates to equal weights") {
    const double s = std::sqrt(3.0) / 2.0;
    const PointCloud X = from_rows({{0, 0}, {1, 0}, {0.5, s}});
    const WeightedGraph g = umap_graph(X, 2);
    REQUIRE(g.edges.size() == 3);
    for (const auto& e : g.edges) CHECK(e.w == Catch::Approx(g.edges.front().w));
}

namespace {

// Oracle: per-point sigma solved by long bisection on a wide bracket, then
// the probabilistic union, with no drop threshold applied.
std::map<std::pair<int, int>, double> umap_oracle_weights(const PointCloud& X, int k) {
    std::map<std::pair<int, int>, std::pair<double, double>> directed;
    for (int i = 0; i < X.n(); ++i) {
        std::vector<std::pair<double, int>> d;
        for (int j = 0; j < X.n(); ++j)
            if (j != i) d.emplace_back(X.distance(i, j), j);
        std::sort(d.begin(), d.end());
        d.resize(static_cast<std::size_t>(k));
        const double rho = d.front().first;
        const double target = std::log2(static_cast<double>(k));
        double sigma;
        if (d.back().first - rho < 1e-12) {
            sigma = std::numeric_limits<double>::infinity(); // degenerate, weights 1
        } else {
            double lo = 1e-12, hi = 1e6;
            for (int it = 0; it < 200; ++it) {
                const double mid = 0.5 * (lo + hi);
                double sum = 0.0;
                for (const auto& [dist, j] : d) sum += std::exp(-std::max(0.0, dist - rho) / mid);
                (sum > target ? hi : lo) = mid;
            }
            sigma = 0.5 * (lo + hi);
        }
        for (const auto& [dist, j] : d) {
            auto key = std::make_pair(std::min(i, j), std::max(i, j));
            const double w = std::isinf(sigma) ? 1.0 : std::exp(-std::max(0.0, dist - rho) / sigma);
            auto& slot = i < j ? directed[key].first : directed[key].second;
            slot = std::max(slot, w);
        }
    }
    std::map<std::pair<int, int>, double> out;
    for (const auto& [key, ab] : directed) out[key] = ab.first + ab.second - ab.first * ab.second;
    return out;
}

} // namespace

TEST_CASE("umap_graph: circle weights match an independent recomputation") {
    PointCloud X;
    X.points.resize(10, 2);
    for (int i = 0; i < 10; ++i) {
        const double t = 2.0 * M_PI * i / 10.0;
        X.points(i, 0) = std::cos(t);
        X.points(i, 1) = std::sin(t);
    }
    const int k = 3;
    const WeightedGraph g = umap_graph(X, k);
    std::map<std::pair<int, int>, double> expected;
    for (const auto& [key, w] : umap_oracle_weights(X, k))
        if (w >= 1e-6) expected[key] = w;
    REQUIRE(g.edges.size() == expected.size());
    for (const auto& e : g.edges) {
        REQUIRE(expected.count({e.u, e.v}) == 1);
        CHECK(e.w == Catch::Approx(expected.at({e.u, e.v})).epsilon(1e-6));
    }
}

TEST_CASE("umap_graph and knn_graph share edge sets up to the weight drop") {
    // The edge sets coincide except where the combined UMAP weight falls
    // below the documented 1e-6 drop threshold.
    Rng rng(23);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 10 + static_cast<int>(rng.next_below(20));
        const int k = 3 + static_cast<int>(rng.next_below(4));
        const PointCloud X = oracles::random_cloud(rng, n, 2 + static_cast<int>(rng.next_below(2)));
        const auto knn_edges = edge_set(knn_graph(X, k));
        const auto umap_edges = edge_set(umap_graph(X, k));
        const auto oracle = umap_oracle_weights(X, k);
        for (const auto& e : umap_edges) CHECK(knn_edges.count(e) == 1);
        for (const auto& e : knn_edges) {
            if (umap_edges.count(e)) continue;
            REQUIRE(oracle.count(e) == 1);
            CHECK(oracle.at(e) < 1e-6);
        }
    }
}

TEST_CASE("umap_graph weights lie in (0,1]") {
    Rng rng(29);
    const PointCloud X = oracles::random_cloud(rng, 40, 3);
    for (const auto& e : umap_graph(X, 5).edges) {
        CHECK(e.w > 0.0);
        CHECK(e.w <= 1.0 + 1e-15);
    }
}

TEST_CASE("epsilon_net: basic cases") {
    SECTION("eps beyond the diameter leaves one landmark") {
        Rng rng(5);
        const PointCloud X = oracles::random_cloud(rng, 30, 2);
        CHECK(epsilon_net(X, 10.0, 1).size() == 1);
    }
    SECTION("two points at distance 1 with eps 0.5 are both chosen") {
        const PointCloud X = from_rows({{0.0}, {1.0}});
        CHECK(epsilon_net(X, 0.5, 42).size() == 2);
    }
}

TEST_CASE("epsilon_net: separated and covering on a grid") {
    PointCloud X;
    X.points.resize(100, 2);
    for (int i = 0; i < 10; ++i)
        for (int j = 0; j < 10; ++j) {
            X.points(10 * i + j, 0) = i / 9.0;
            X.points(10 * i + j, 1) = j / 9.0;
        }
    const double eps = 0.3;
    const auto net = epsilon_net(X, eps, 3);
    for (std::size_t a = 0; a < net.size(); ++a)
        for (std::size_t b = a + 1; b < net.size(); ++b)
            CHECK(X.distance(net[a], net[b]) > eps);
    for (int x = 0; x < X.n(); ++x) {
        double best = std::numeric_limits<double>::infinity();
        for (int c : net) best = std::min(best, X.distance(x, c));
        CHECK(best <= eps);
    }
}

TEST_CASE("sample_sphere: norms, symmetry, determinism") {
    const PointCloud X = sample_sphere(2, 10000, 99);
    for (int i = 0; i < X.n(); ++i)
        CHECK(std::abs(X.points.row(i).norm() - 1.0) <= 1e-12);
    for (int j = 0; j < 3; ++j)
        CHECK(std::abs(X.points.col(j).mean()) < 0.05);
    const PointCloud Y = sample_sphere(2, 10000, 99);
    CHECK(X.points == Y.points);
    const PointCloud Z = sample_sphere(3, 50, 1);
    CHECK(Z.dim() == 4);
}

TEST_CASE("furthest_point_subsample: exhaustion is a permutation") {
    Rng rng(17);
    const PointCloud X = oracles::random_cloud(rng, 12, 2);
    auto ids = furthest_point_subsample(X, 12, 4);
    std::sort(ids.begin(), ids.end());
    for (int i = 0; i < 12; ++i) CHECK(ids[static_cast<std::size_t>(i)] == i);
}

TEST_CASE("furthest_point_subsample: second corner is the diagonal") {
    const auto ids = furthest_point_subsample(kSquare, 2, 0);
    CHECK(ids[1] == (ids[0] + 2) % 4);
}

TEST_CASE("furthest_point_subsample: matches exhaustive argmax steps") {
    Rng rng(31);
    const PointCloud X = oracles::random_cloud(rng, 10, 2);
    const auto ids = furthest_point_subsample(X, 3, 77);
    std::vector<int> chosen{ids[0]};
    for (int step = 1; step < 3; ++step) {
        int best = -1;
        double best_d = -1.0;
        for (int i = 0; i < X.n(); ++i) {
            double mind = std::numeric_limits<double>::infinity();
            for (int c : chosen) mind = std::min(mind, X.distance(i, c));
            if (mind > best_d) {
                best_d = mind;
                best = i;
            }
        }
        CHECK(ids[static_cast<std::size_t>(step)] == best);
        chosen.push_back(best);
    }
}

TEST_CASE("point cloud CSV round-trips and rejects ragged rows") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "covercraft_geom_test";
    fs::create_directories(dir);
    const std::string path = (dir / "cloud.csv").string();

    const PointCloud X = sample_circle(25, 8);
    save_point_cloud_csv(X, path);
    const PointCloud Y = load_point_cloud_csv(path);
    CHECK(X.points == Y.points);

    const std::string ragged = (dir / "ragged.csv").string();
    std::ofstream bad(ragged);
    bad << "1,2\n3\n";
    bad.close();
    CHECK_THROWS_AS(load_point_cloud_csv(ragged), std::invalid_argument);
}
