#include "covercraft/complex.hpp"
#include "oracles.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <set>
#include <sstream>

using namespace covercraft;

namespace {

FuzzyCover indicator_partition(int n, int k) {
    FuzzyCover fc;
    fc.g = Eigen::MatrixXd::Zero(n, k);
    for (int x = 0; x < n; ++x) fc.g(x, x % k) = 1.0;
    return fc;
}

std::set<Simplex> simplex_set(const SimplicialComplex& K) {
    return {K.simplices.begin(), K.simplices.end()};
}

// Brute-force nerve: test every subset of members up to max_dim+1 directly.
std::set<Simplex> brute_nerve(const Cover& c, int max_dim) {
    std::set<Simplex> out;
    const int k = c.k();
    for (int mask = 1; mask < (1 << k); ++mask) {
        Simplex s;
        for (int i = 0; i < k; ++i)
            if (mask & (1 << i)) s.push_back(i);
        if (static_cast<int>(s.size()) > max_dim + 1) continue;
        std::set<int> common(c.members[static_cast<std::size_t>(s[0])].begin(),
                             c.members[static_cast<std::size_t>(s[0])].end());
        for (std::size_t a = 1; a < s.size(); ++a) {
            std::set<int> next;
            for (int x : c.members[static_cast<std::size_t>(s[a])])
                if (common.count(x)) next.insert(x);
            common = std::move(next);
        }
        if (!common.empty()) out.insert(s);
    }
    return out;
}

double lambda_of(const FuzzyCover& fc, const Simplex& s) {
    double best = 0.0;
    for (int x = 0; x < fc.n(); ++x) {
        double m = 1.0;
        for (int i : s) m = std::min(m, fc.g(x, i));
        best = std::max(best, m);
    }
    return best;
}

} // namespace

TEST_CASE("threshold: indicator partition reproduces the partition") {
    const FuzzyCover fc = indicator_partition(9, 3);
    for (double lambda : {0.1, 0.5, 0.9}) {
        const Cover c = threshold(fc, lambda);
        c.validate(true);
        for (int i = 0; i < 3; ++i)
            for (int x : c.members[static_cast<std::size_t>(i)]) CHECK(x % 3 == i);
        std::size_t total = 0;
        for (const auto& m : c.members) total += m.size();
        CHECK(total == 9);
    }
}

TEST_CASE("threshold: strict inequality keeps both memberships at 0.5") {
    FuzzyCover fc;
    fc.g.resize(1, 2);
    fc.g << 1.0, 0.6;
    const Cover c = threshold(fc, 0.5);
    CHECK(c.members[0] == std::vector<int>{0});
    CHECK(c.members[1] == std::vector<int>{0});
}

TEST_CASE("threshold: lambda 0 yields supports, union total") {
    Rng rng(12);
    FuzzyCover fc;
    fc.g = oracles::random_fuzzy_matrix(rng, 15, 4);
    const Cover c = threshold(fc, 0.0);
    c.validate(true);
    for (int i = 0; i < 4; ++i) {
        std::vector<int> support;
        for (int x = 0; x < 15; ++x)
            if (fc.g(x, i) > 0.0) support.push_back(x);
        CHECK(c.members[static_cast<std::size_t>(i)] == support);
    }
}

TEST_CASE("threshold: rejects lambda outside [0,1)") {
    const FuzzyCover fc = indicator_partition(4, 2);
    CHECK_THROWS_AS(threshold(fc, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(threshold(fc, -0.1), std::invalid_argument);
}

TEST_CASE("FuzzyCover validation rejects rows without a 1") {
    FuzzyCover fc;
    fc.g.resize(2, 2);
    fc.g << 1.0, 0.2, 0.4, 0.3;
    CHECK_THROWS_AS(fc.validate(), invariant_error);
}

TEST_CASE("nerve: disjoint partition gives isolated vertices, empty members omitted") {
    Cover c;
    c.n = 6;
    c.members = {{0, 1}, {2, 3}, {}, {4, 5}};
    const SimplicialComplex K = nerve(c, 2);
    CHECK(simplex_set(K) == std::set<Simplex>{{0}, {1}, {3}});
}

TEST_CASE("nerve: three sets with a common point form a triangle") {
    Cover c;
    c.n = 5;
    c.members = {{0, 1, 2}, {1, 2, 3}, {2, 3, 4}};
    const SimplicialComplex K = nerve(c, 2);
    CHECK(simplex_set(K).count({0, 1, 2}) == 1);
    CHECK(K.max_dim == 2);
}

TEST_CASE("nerve: four arcs on a 12-point circle form a 4-cycle") {
    // arcs overlap cyclically with no triple overlaps
    Cover c;
    c.n = 12;
    c.members = {{0, 1, 2, 3}, {3, 4, 5, 6}, {6, 7, 8, 9}, {0, 9, 10, 11}};
    const SimplicialComplex K = nerve(c, 2);
    CHECK(simplex_set(K) == brute_nerve(c, 2));
    CHECK(simplex_set(K) ==
          std::set<Simplex>{{0}, {1}, {2}, {3}, {0, 1}, {1, 2}, {2, 3}, {0, 3}});
}

TEST_CASE("nerve: restriction to lower dimensions is consistent") {
    Rng rng(44);
    for (int trial = 0; trial < 10; ++trial) {
        Cover c;
        c.n = 12;
        const int k = 3 + static_cast<int>(rng.next_below(3));
        c.members.resize(static_cast<std::size_t>(k));
        for (int x = 0; x < c.n; ++x)
            for (int i = 0; i < k; ++i)
                if (rng.next_double() < 0.4) c.members[static_cast<std::size_t>(i)].push_back(x);
        for (int d = 1; d <= 3; ++d) {
            const auto full = simplex_set(nerve(c, d));
            const auto lower = simplex_set(nerve(c, d - 1));
            std::set<Simplex> restricted;
            for (const auto& s : full)
                if (static_cast<int>(s.size()) <= d) restricted.insert(s);
            CHECK(restricted == lower);
        }
        CHECK(simplex_set(nerve(c, 3)) == brute_nerve(c, 3));
    }
}

TEST_CASE("fuzzy_nerve_filtration: indicator partition has only vertices at 0") {
    const FuzzyCover fc = indicator_partition(8, 4);
    const FilteredComplex K = fuzzy_nerve_filtration(fc, 2);
    REQUIRE(K.size() == 4);
    for (const auto& [s, v] : K.simplices) {
        CHECK(s.size() == 1);
        CHECK(v == 0.0);
    }
}

TEST_CASE("fuzzy_nerve_filtration: single point with memberships (1, 0.5)") {
    FuzzyCover fc;
    fc.g.resize(1, 2);
    fc.g << 1.0, 0.5;
    const FilteredComplex K = fuzzy_nerve_filtration(fc, 1);
    REQUIRE(K.size() == 3);
    std::map<Simplex, double> vals(K.simplices.begin(), K.simplices.end());
    CHECK(vals.at({0}) == 0.0);
    CHECK(vals.at({1}) == Catch::Approx(0.6931471805599453));
    CHECK(vals.at({0, 1}) == Catch::Approx(0.6931471805599453));
}

TEST_CASE("fuzzy_nerve_filtration: thresholding commutes with sublevels") {
    Rng rng(91);
    FuzzyCover fc;
    fc.g = oracles::random_fuzzy_matrix(rng, 20, 3);
    const FilteredComplex K = fuzzy_nerve_filtration(fc, 2);
    for (int step = 0; step < 100; ++step) {
        const double lambda = (step + 0.5) / 101.0;
        const auto expected = simplex_set(nerve(threshold(fc, lambda), 2));
        std::set<Simplex> got;
        for (const auto& [s, v] : K.simplices)
            if (std::exp(-v) > lambda) got.insert(s);
        CHECK(got == expected);
    }
}

TEST_CASE("fuzzy_nerve_filtration: compatibility over random covers") {
    Rng rng(301);
    for (int trial = 0; trial < 25; ++trial) {
        const int n = 2 + static_cast<int>(rng.next_below(29));
        const int k = 1 + static_cast<int>(rng.next_below(5));
        const int d = static_cast<int>(rng.next_below(3));
        FuzzyCover fc;
        fc.g = oracles::random_fuzzy_matrix(rng, n, k);
        // sprinkle exact zeros so empty members and absent simplices occur
        for (int x = 0; x < n; ++x)
            for (int i = 0; i < k; ++i)
                if (fc.g(x, i) < 1.0 && rng.next_double() < 0.3) fc.g(x, i) = 0.0;
        const FilteredComplex K = fuzzy_nerve_filtration(fc, d);
        for (const auto& [s, v] : K.simplices)
            CHECK(std::exp(-v) == Catch::Approx(lambda_of(fc, s)).margin(1e-15));
        const double lambda = rng.next_double() * 0.98;
        const auto expected = simplex_set(nerve(threshold(fc, lambda), d));
        std::set<Simplex> got;
        for (const auto& [s, v] : K.simplices)
            if (std::exp(-v) > lambda) got.insert(s);
        CHECK(got == expected);
    }
}

TEST_CASE("FilteredComplex monotonicity check trips on bad input") {
    FilteredComplex K;
    K.simplices = {{{0}, 0.5}, {{1}, 0.0}, {{0, 1}, 0.2}};
    CHECK_THROWS_AS(K.check_monotone(), invariant_error);
    FilteredComplex missing;
    missing.simplices = {{{0}, 0.0}, {{0, 1}, 0.5}};
    CHECK_THROWS_AS(missing.check_monotone(), invariant_error);
}

TEST_CASE("filtered complex JSON round-trips") {
    FuzzyCover fc;
    Rng rng(5);
    fc.g = oracles::random_fuzzy_matrix(rng, 10, 3);
    const FilteredComplex K = fuzzy_nerve_filtration(fc, 2);
    std::ostringstream buf;
    save_filtered_complex_json(K, buf);
    std::istringstream in(buf.str());
    const FilteredComplex L = load_filtered_complex_json(in);
    REQUIRE(K.size() == L.size());
    for (std::size_t i = 0; i < K.size(); ++i) {
        CHECK(K.simplices[i].first == L.simplices[i].first);
        CHECK(K.simplices[i].second == L.simplices[i].second);
    }
    std::ostringstream buf2;
    save_filtered_complex_json(L, buf2);
    CHECK(buf.str() == buf2.str());
}

TEST_CASE("cover JSON and fuzzy CSV round-trip") {
    Cover c;
    c.n = 7;
    c.members = {{0, 1, 2}, {2, 3}, {}, {4, 5, 6}};
    std::ostringstream buf;
    save_cover_json(c, buf);
    std::istringstream in(buf.str());
    const Cover d = load_cover_json(in);
    CHECK(d.n == c.n);
    CHECK(d.members == c.members);
}

TEST_CASE("nerve exports carry the plotting attributes") {
    Cover c;
    c.n = 6;
    c.members = {{0, 1, 2}, {2, 3, 4}, {4, 5}};
    const SimplicialComplex K = nerve(c, 1);
    std::ostringstream dot;
    save_nerve_dot(K, c, dot);
    CHECK(dot.str().find("penwidth=") != std::string::npos);
    CHECK(dot.str().find("len=1") != std::string::npos); // |U0 inter U1| = 1
    std::vector<std::string> labels = {"a", "a", "b", "b", "b", "a"};
    std::ostringstream gml;
    save_nerve_graphml(K, c, gml, &labels);
    CHECK(gml.str().find("<graphml") != std::string::npos);
    CHECK(gml.str().find("a:2,b:1") != std::string::npos); // member 0 histogram
}
