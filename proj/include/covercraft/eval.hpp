#pragma once

#include "covercraft/baselines.hpp"
#include "covercraft/common.hpp"
#include "covercraft/complex.hpp"
#include "covercraft/geometry.hpp"
#include "covercraft/learner.hpp"
#include "covercraft/persistence.hpp"

#include <chrono>
#include <set>
#include <string>
#include <vector>

namespace covercraft {

struct BettiTarget {
    std::vector<int> betti; // beta_0 .. beta_d

    void validate() const {
        if (betti.empty()) throw invariant_error("BettiTarget: must prescribe at least beta_0");
        for (int b : betti)
            if (b < 0) throw invariant_error("BettiTarget: Betti numbers are nonnegative");
    }
};

struct QuotientResult {
    double quotient = 0.0;
    bool degenerate_window = false; // no finite bars, or b <= a
    double window_lo = 0.0, window_hi = 0.0;
};

/// Fraction of the window [a, b] on which every Betti number matches the
/// target, where a (resp. b) is the smallest (resp. largest) finite endpoint
/// over the finite bars. Infinite bars contribute to the Betti curves but not
/// to the window.
inline QuotientResult homology_recovery_quotient_full(const Barcode& bc, const BettiTarget& target) {
    target.validate();
    QuotientResult res;
    double a = std::numeric_limits<double>::infinity();
    double b = -std::numeric_limits<double>::infinity();
    for (const auto& bar : bc.bars) {
        if (!std::isfinite(bar.death)) continue;
        a = std::min(a, bar.birth);
        b = std::max(b, bar.death);
    }
    if (!std::isfinite(a) || !std::isfinite(b) || b <= a) {
        res.degenerate_window = true;
        return res;
    }
    res.window_lo = a;
    res.window_hi = b;

    const int dims = static_cast<int>(target.betti.size());
    std::vector<BettiCurve> curves;
    curves.reserve(static_cast<std::size_t>(dims));
    for (int d = 0; d < dims; ++d) curves.push_back(betti_curve(bc, d));

    std::set<double> cuts{a, b};
    for (const auto& curve : curves)
        for (const auto& [v, lvl] : curve.steps)
            if (v > a && v < b) cuts.insert(v);
    std::vector<double> pts(cuts.begin(), cuts.end());

    double matched = 0.0;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        bool ok = true;
        for (int d = 0; d < dims && ok; ++d)
            ok = curves[static_cast<std::size_t>(d)].at(pts[i]) == target.betti[static_cast<std::size_t>(d)];
        if (ok) matched += pts[i + 1] - pts[i];
    }
    res.quotient = matched / (b - a);
    return res;
}

inline double homology_recovery_quotient(const Barcode& bc, const BettiTarget& target) {
    return homology_recovery_quotient_full(bc, target).quotient;
}

/// (distinct vertices, total simplex count) of a filtered complex.
inline std::pair<int, long> complex_size(const FilteredComplex& K) {
    std::set<int> verts;
    for (const auto& [s, v] : K.simplices)
        for (int x : s) verts.insert(x);
    return {static_cast<int>(verts.size()), static_cast<long>(K.simplices.size())};
}

// ---------------------------------------------------------------------------
// Efficient-topological-representation harness
// ---------------------------------------------------------------------------

struct DatasetSpec {
    std::string kind; // sphere2 | sphere3 | circle | blobs | csv
    int n = 0;
    std::string path; // for kind == csv
};

struct MethodSpec {
    std::string kind;         // shape_discover | subsample_rips | witness
    LearnConfig learn;        // used by shape_discover (n_cov comes from the budget)
    int complex_max_dim = -1; // default: target dimension span
};

struct HarnessReport {
    std::string method, dataset;
    int vertices = 0;
    long simplices = 0;
    double quotient = 0.0;
    double graph_seconds = 0.0, init_seconds = 0.0, optimize_seconds = 0.0, barcode_seconds = 0.0;
    double total_seconds = 0.0;
};

inline PointCloud make_dataset(const DatasetSpec& ds, std::uint64_t seed) {
    if (ds.kind == "sphere2") return sample_sphere(2, ds.n, seed);
    if (ds.kind == "sphere3") return sample_sphere(3, ds.n, seed);
    if (ds.kind == "circle") return sample_circle(ds.n, seed);
    if (ds.kind == "blobs") return sample_blobs(ds.n, seed);
    if (ds.kind == "csv") return load_point_cloud_csv(ds.path);
    throw std::invalid_argument("unknown dataset kind: " + ds.kind);
}

namespace detail {

// Radius past which a Rips-type complex on Y is a cone (min over points of
// the max distance); the barcode is complete when truncated there.
inline double enclosing_radius(const PointCloud& Y) {
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < Y.n(); ++i) {
        double mx = 0.0;
        for (int j = 0; j < Y.n(); ++j) mx = std::max(mx, Y.squared_distance(i, j));
        best = std::min(best, mx);
    }
    return std::sqrt(best) * (1.0 + 1e-12);
}

inline HarnessReport harness_single(const DatasetSpec& ds, const MethodSpec& ms, int budget,
                                    const BettiTarget& target, std::uint64_t seed) {
    using clock = std::chrono::steady_clock;
    const PointCloud X = make_dataset(ds, seed);
    const int target_dims = static_cast<int>(target.betti.size());

    HarnessReport rep;
    rep.method = ms.kind;
    rep.dataset = ds.kind;
    const auto t_start = clock::now();
    FilteredComplex K;
    if (ms.kind == "shape_discover") {
        LearnConfig cfg = ms.learn;
        cfg.n_cov = budget;
        cfg.seed = seed;
        auto [cover, trace] = shape_discover(X, cfg);
        rep.graph_seconds = trace.graph_seconds;
        rep.init_seconds = trace.init_seconds;
        rep.optimize_seconds = trace.optimize_seconds;
        // dim-(target) simplices are needed for full pairs one dimension below
        const int nerve_dim = ms.complex_max_dim >= 0 ? ms.complex_max_dim : target_dims;
        K = fuzzy_nerve_filtration(cover, nerve_dim);
    } else if (ms.kind == "subsample_rips") {
        const auto t0 = clock::now();
        const std::vector<int> ids = furthest_point_subsample(X, budget, seed);
        PointCloud Y;
        Y.points.resize(budget, X.dim());
        for (int i = 0; i < budget; ++i) Y.points.row(i) = X.points.row(ids[static_cast<std::size_t>(i)]);
        const int rips_dim = ms.complex_max_dim >= 0 ? ms.complex_max_dim : target_dims;
        K = vietoris_rips(Y, rips_dim, enclosing_radius(Y));
        rep.init_seconds = std::chrono::duration<double>(clock::now() - t0).count();
    } else if (ms.kind == "witness") {
        const auto t0 = clock::now();
        const std::vector<int> landmarks = furthest_point_subsample(X, budget, seed);
        const int wit_dim = ms.complex_max_dim >= 0 ? ms.complex_max_dim : target_dims;
        K = witness_v0(X, landmarks, wit_dim);
        rep.init_seconds = std::chrono::duration<double>(clock::now() - t0).count();
    } else {
        throw std::invalid_argument("unknown harness method: " + ms.kind);
    }
    const auto t_bar = clock::now();
    const Barcode bc = reduce_barcode(K, target_dims - 1);
    rep.barcode_seconds = std::chrono::duration<double>(clock::now() - t_bar).count();
    rep.quotient = homology_recovery_quotient(bc, target);
    auto [nv, ns] = complex_size(K);
    rep.vertices = nv;
    rep.simplices = ns;
    rep.total_seconds = std::chrono::duration<double>(clock::now() - t_start).count();
    return rep;
}

} // namespace detail

/// Runs a method at a vertex budget on a dataset over `runs` consecutive
/// seeds and reports the run with the median quotient.
inline HarnessReport inference_harness(const DatasetSpec& ds, const MethodSpec& ms, int budget,
                                       const BettiTarget& target, std::uint64_t seed, int runs = 3) {
    target.validate();
    if (budget < 1) throw std::invalid_argument("inference_harness: budget must be positive");
    if (runs < 1) throw std::invalid_argument("inference_harness: runs must be positive");
    std::vector<HarnessReport> reports;
    reports.reserve(static_cast<std::size_t>(runs));
    for (int r = 0; r < runs; ++r)
        reports.push_back(detail::harness_single(ds, ms, budget, target, seed + static_cast<std::uint64_t>(r)));
    std::sort(reports.begin(), reports.end(),
              [](const HarnessReport& a, const HarnessReport& b) { return a.quotient < b.quotient; });
    return reports[reports.size() / 2];
}

/// CSV header/row matching the report-table column discipline.
inline std::string harness_csv_header() {
    return "method,dataset,vertices,simplices,quotient,graph_s,init_s,optimize_s,barcode_s,total_s";
}

inline std::string harness_csv_row(const HarnessReport& r) {
    std::string out = r.method + "," + r.dataset + "," + std::to_string(r.vertices) + "," +
                      std::to_string(r.simplices) + "," + fmt_double(r.quotient) + "," +
                      fmt_double(r.graph_seconds) + "," + fmt_double(r.init_seconds) + "," +
                      fmt_double(r.optimize_seconds) + "," + fmt_double(r.barcode_seconds) + "," +
                      fmt_double(r.total_seconds);
    return out;
}

} // namespace covercraft
