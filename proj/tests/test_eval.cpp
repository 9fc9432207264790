#include "covercraft/eval.hpp"
#include "oracles.hpp"

#include <catch2/catch_amalgamated.hpp>

using namespace covercraft;

namespace {

Barcode random_barcode(Rng& rng) {
    Barcode bc;
    const int bars = 1 + static_cast<int>(rng.next_below(10));
    for (int i = 0; i < bars; ++i) {
        const int dim = static_cast<int>(rng.next_below(3));
        const double birth = 2.0 * rng.next_double();
        const double death = rng.next_double() < 0.2 ? kInfDeath : birth + 0.05 + rng.next_double();
        bc.bars.push_back({dim, birth, death});
    }
    return bc;
}

int alive_at(const Barcode& bc, int dim, double r) {
    int count = 0;
    for (const auto& bar : bc.bars)
        if (bar.dim == dim && bar.birth <= r && r < bar.death) ++count;
    return count;
}

} // namespace

TEST_CASE("hrq: perfect and impossible targets") {
    Barcode bc;
    bc.bars = {{0, 0.0, kInfDeath}, {1, 1.0, 3.0}};
    // on [1,3): beta = (1,1); window is [1,3]
    CHECK(homology_recovery_quotient(bc, BettiTarget{{1, 1}}) == Catch::Approx(1.0));
    CHECK(homology_recovery_quotient(bc, BettiTarget{{2, 1}}) == 0.0);
}

TEST_CASE("hrq: extra essential component spoils the window") {
    // one infinite H0 bar born at 0 plus a finite H0 bar [0,1): beta_0 = 2 on
    // the whole window, so target {1} is never met
    Barcode bc;
    bc.bars = {{0, 0.0, kInfDeath}, {0, 0.0, 1.0}};
    const auto res = homology_recovery_quotient_full(bc, BettiTarget{{1}});
    CHECK(res.quotient == 0.0);
    CHECK(res.window_lo == 0.0);
    CHECK(res.window_hi == 1.0);
}

TEST_CASE("hrq: degenerate windows return zero with the flag set") {
    Barcode only_inf;
    only_inf.bars = {{0, 0.5, kInfDeath}};
    const auto res = homology_recovery_quotient_full(only_inf, BettiTarget{{1}});
    CHECK(res.quotient == 0.0);
    CHECK(res.degenerate_window);
    const auto empty = homology_recovery_quotient_full(Barcode{}, BettiTarget{{1}});
    CHECK(empty.quotient == 0.0);
    CHECK(empty.degenerate_window);
}

TEST_CASE("hrq: partial match measures exactly") {
    Barcode bc;
    bc.bars = {{0, 0.0, kInfDeath}, {0, 0.0, 2.0}, {1, 1.0, 4.0}};
    // window [0,4]; beta on [0,2): (2,*) fails; [1,2): still 2 components;
    // [2,4): beta=(1,1) matches
    CHECK(homology_recovery_quotient(bc, BettiTarget{{1, 1}}) == Catch::Approx(0.5));
}

TEST_CASE("hrq: invariant under affine reparametrization") {
    Rng rng(21);
    for (int trial = 0; trial < 50; ++trial) {
        const Barcode bc = random_barcode(rng);
        BettiTarget target{{1, static_cast<int>(rng.next_below(3))}};
        const double q = homology_recovery_quotient(bc, target);
        CHECK(q >= 0.0);
        CHECK(q <= 1.0);
        const double c = 0.1 + 3.0 * rng.next_double();
        const double s = 5.0 * rng.next_double() - 2.5;
        Barcode scaled;
        for (const auto& bar : bc.bars)
            scaled.bars.push_back({bar.dim, c * bar.birth + s,
                                   std::isfinite(bar.death) ? c * bar.death + s : kInfDeath});
        CHECK(homology_recovery_quotient(scaled, target) == Catch::Approx(q).margin(1e-12));
    }
}

TEST_CASE("hrq: agrees with a dense Monte Carlo estimate") {
    Rng rng(22);
    for (int trial = 0; trial < 10; ++trial) {
        const Barcode bc = random_barcode(rng);
        BettiTarget target;
        target.betti = {1 + static_cast<int>(rng.next_below(2)), static_cast<int>(rng.next_below(2)),
                        static_cast<int>(rng.next_below(2))};
        const auto res = homology_recovery_quotient_full(bc, target);
        if (res.degenerate_window) continue;
        Rng mc(1000 + static_cast<std::uint64_t>(trial));
        const int samples = 100000;
        int hits = 0;
        for (int i = 0; i < samples; ++i) {
            // stratified sampling keeps the estimator error well below the margin
            const double u = (static_cast<double>(i) + mc.next_double()) / samples;
            const double r = res.window_lo + (res.window_hi - res.window_lo) * u;
            bool ok = true;
            for (std::size_t d = 0; d < target.betti.size() && ok; ++d)
                ok = alive_at(bc, static_cast<int>(d), r) == target.betti[d];
            hits += ok;
        }
        CHECK(res.quotient == Catch::Approx(static_cast<double>(hits) / samples).margin(2e-3));
    }
}

TEST_CASE("complex_size: counts vertices and simplices") {
    CHECK(complex_size(FilteredComplex{}) == std::pair<int, long>{0, 0});

    FilteredComplex tri;
    for (int v = 0; v < 3; ++v) tri.simplices.push_back({{v}, 0.0});
    tri.simplices.push_back({{0, 1}, 0.0});
    tri.simplices.push_back({{0, 2}, 0.0});
    tri.simplices.push_back({{1, 2}, 0.0});
    tri.simplices.push_back({{0, 1, 2}, 0.0});
    CHECK(complex_size(tri) == std::pair<int, long>{3, 7});

    Rng rng(23);
    FuzzyCover fc;
    fc.g = oracles::random_fuzzy_matrix(rng, 15, 4);
    const FilteredComplex K = fuzzy_nerve_filtration(fc, 2);
    std::set<int> verts;
    for (const auto& [s, v] : K.simplices)
        for (int x : s) verts.insert(x);
    const auto [nv, ns] = complex_size(K);
    CHECK(nv == static_cast<int>(verts.size()));
    CHECK(ns == static_cast<long>(K.size()));
}

TEST_CASE("inference_harness: rips on a circle recovers the loop") {
    DatasetSpec ds{"circle", 120, ""};
    MethodSpec ms;
    ms.kind = "subsample_rips";
    const HarnessReport rep = inference_harness(ds, ms, 30, BettiTarget{{1, 1}}, 5, 3);
    CHECK(rep.vertices == 30);
    CHECK(rep.quotient > 0.0);
    CHECK(rep.simplices > 30);
}

TEST_CASE("inference_harness: shape_discover cell runs end to end") {
    DatasetSpec ds{"circle", 120, ""};
    MethodSpec ms;
    ms.kind = "shape_discover";
    ms.learn.n_epoch = 120;
    const HarnessReport rep = inference_harness(ds, ms, 4, BettiTarget{{1, 1}}, 1, 1);
    CHECK(rep.vertices <= 4);
    CHECK(rep.quotient >= 0.0);
    CHECK(rep.optimize_seconds > 0.0);
}

TEST_CASE("inference_harness: a budget of one point cannot match nontrivial targets") {
    DatasetSpec ds{"blobs", 40, ""};
    MethodSpec ms;
    ms.kind = "witness";
    const HarnessReport rep = inference_harness(ds, ms, 1, BettiTarget{{1, 1}}, 2, 1);
    CHECK(rep.vertices == 1);
    CHECK(rep.quotient == 0.0);
}

TEST_CASE("harness csv row shape") {
    HarnessReport r;
    r.method = "witness";
    r.dataset = "circle";
    r.vertices = 7;
    r.simplices = 42;
    r.quotient = 0.25;
    const std::string row = harness_csv_row(r);
    const std::string header = harness_csv_header();
    CHECK(row.substr(0, 22) == "witness,circle,7,42,0.");
    CHECK(std::count(header.begin(), header.end(), ',') == std::count(row.begin(), row.end(), ','));
}
