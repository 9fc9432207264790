#pragma once

#include "covercraft/common.hpp"
#include "covercraft/complex.hpp"
#include "covercraft/geometry.hpp"

#include <fstream>
#include <limits>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace covercraft {

constexpr double kInfDeath = std::numeric_limits<double>::infinity();

struct Bar {
    int dim;
    double birth;
    double death; // +inf for essential classes
};

struct Barcode {
    std::vector<Bar> bars;
};

// ---------------------------------------------------------------------------
// Zero-dimensional suplevel persistence on a vertex-filtered graph
// ---------------------------------------------------------------------------

/// One finite reduced-H0 bar with the simplices responsible for it: the bar is
/// [death_value, birth_value] in decreasing-threshold order, created by
/// birth_vertex and killed by death_edge (whose smaller-valued endpoint is
/// death_argmin). Carries the subgradient of the bar length.
struct H0Bar {
    int birth_vertex;
    std::pair<int, int> death_edge;
    int death_argmin;
    double birth_value;
    double death_value;
};

struct H0Attribution {
    std::vector<H0Bar> bars;
};

/// Reduced 0-dimensional suplevel persistence of a vertex function on a graph:
/// a vertex enters at f(x), an edge at min of its endpoint values, thresholds
/// decrease from 1 to 0. The elder rule kills the component with the smaller
/// birth value; one essential class per connected graph component is excluded.
/// Returns the total (sum of finite bar lengths) and the per-bar attribution.
inline std::pair<double, H0Attribution> h0_suplevel(const WeightedGraph& graph, std::span<const double> f) {
    const int n = graph.n;
    if (static_cast<int>(f.size()) != n)
        throw std::invalid_argument("h0_suplevel: f size must match vertex count");
    for (double v : f)
        if (!(v >= 0.0 && v <= 1.0))
            throw std::domain_error("h0_suplevel: f values must lie in [0,1]");

    struct Event {
        double val;
        int kind; // 0 vertex (processed first at ties), 1 edge
        int a, b;
    };
    std::vector<Event> events;
    events.reserve(static_cast<std::size_t>(n) + graph.edges.size());
    for (int x = 0; x < n; ++x) events.push_back({f[static_cast<std::size_t>(x)], 0, x, -1});
    for (const auto& e : graph.edges)
        events.push_back({std::min(f[static_cast<std::size_t>(e.u)], f[static_cast<std::size_t>(e.v)]), 1, e.u, e.v});
    std::sort(events.begin(), events.end(), [](const Event& l, const Event& r) {
        if (l.val != r.val) return l.val > r.val;
        if (l.kind != r.kind) return l.kind < r.kind;
        if (l.a != r.a) return l.a < r.a;
        return l.b < r.b;
    });

    std::vector<int> parent(static_cast<std::size_t>(n), -1); // -1: not yet entered
    std::vector<double> birth_val(static_cast<std::size_t>(n));
    std::vector<int> birth_vtx(static_cast<std::size_t>(n));
    auto find = [&](int x) {
        while (parent[static_cast<std::size_t>(x)] != x) {
            parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
            x = parent[static_cast<std::size_t>(x)];
        }
        return x;
    };

    double total = 0.0;
    H0Attribution attr;
    for (const auto& ev : events) {
        if (ev.kind == 0) {
            parent[static_cast<std::size_t>(ev.a)] = ev.a;
            birth_val[static_cast<std::size_t>(ev.a)] = ev.val;
            birth_vtx[static_cast<std::size_t>(ev.a)] = ev.a;
            continue;
        }
        const int ru = find(ev.a), rv = find(ev.b);
        if (ru == rv) continue;
        // Elder rule: the larger birth value survives; equal births keep the
        // smaller birth vertex alive.
        int elder = ru, young = rv;
        if (birth_val[static_cast<std::size_t>(rv)] > birth_val[static_cast<std::size_t>(ru)] ||
            (birth_val[static_cast<std::size_t>(rv)] == birth_val[static_cast<std::size_t>(ru)] &&
             birth_vtx[static_cast<std::size_t>(rv)] < birth_vtx[static_cast<std::size_t>(ru)])) {
            elder = rv;
            young = ru;
        }
        const double birth = birth_val[static_cast<std::size_t>(young)];
        if (birth > ev.val) {
            const double fu = f[static_cast<std::size_t>(ev.a)], fv = f[static_cast<std::size_t>(ev.b)];
            const int argmin = fu < fv ? ev.a : (fv < fu ? ev.b : std::min(ev.a, ev.b));
            attr.bars.push_back({birth_vtx[static_cast<std::size_t>(young)],
                                 {ev.a, ev.b},
                                 argmin,
                                 birth,
                                 ev.val});
            total += birth - ev.val;
        }
        parent[static_cast<std::size_t>(young)] = elder;
    }
    return {total, std::move(attr)};
}

/// Subgradient of h0_suplevel's total with respect to f: +1 at each bar's
/// birth vertex, -1 at the smaller-valued endpoint of its death edge.
inline std::vector<double> h0_subgradient(const H0Attribution& attr, int n) {
    std::vector<double> grad(static_cast<std::size_t>(n), 0.0);
    for (const auto& bar : attr.bars) {
        grad[static_cast<std::size_t>(bar.birth_vertex)] += 1.0;
        grad[static_cast<std::size_t>(bar.death_argmin)] -= 1.0;
    }
    return grad;
}

// ---------------------------------------------------------------------------
// General persistence via boundary-matrix reduction over Z/2
// ---------------------------------------------------------------------------

/// Barcode of a monotone filtered complex, unreduced convention (H0 essential
/// classes appear as infinite bars). Simplices are ordered by (filtration
/// value, dimension, lexicographic tuple); zero-length bars are dropped unless
/// keep_zero_bars is set.
inline Barcode reduce_barcode(const FilteredComplex& K, int max_hom_dim, bool keep_zero_bars = false) {
    if (max_hom_dim < 0) throw std::invalid_argument("reduce_barcode: max_hom_dim must be >= 0");
    K.check_monotone();

    struct Entry {
        const Simplex* s;
        double val;
    };
    std::vector<Entry> order;
    order.reserve(K.size());
    for (const auto& [s, v] : K.simplices) order.push_back({&s, v});
    std::sort(order.begin(), order.end(), [](const Entry& a, const Entry& b) {
        if (a.val != b.val) return a.val < b.val;
        if (a.s->size() != b.s->size()) return a.s->size() < b.s->size();
        return *a.s < *b.s;
    });
    std::unordered_map<Simplex, int, SimplexHash> position;
    position.reserve(order.size() * 2);
    for (int i = 0; i < static_cast<int>(order.size()); ++i) position[*order[static_cast<std::size_t>(i)].s] = i;

    const int m = static_cast<int>(order.size());
    std::vector<std::vector<int>> column(static_cast<std::size_t>(m)); // reduced boundary, sorted rows
    std::vector<int> pivot_owner(static_cast<std::size_t>(m), -1);     // row -> column with that pivot
    std::vector<char> is_cycle(static_cast<std::size_t>(m), 0);

    std::vector<int> tmp;
    Simplex facet;
    for (int j = 0; j < m; ++j) {
        const Simplex& s = *order[static_cast<std::size_t>(j)].s;
        const int d = static_cast<int>(s.size()) - 1;
        if (d == 0) {
            is_cycle[static_cast<std::size_t>(j)] = 1;
            continue;
        }
        if (d > max_hom_dim + 1) continue; // pairs above the requested range are irrelevant
        auto& col = column[static_cast<std::size_t>(j)];
        for (std::size_t drop = 0; drop < s.size(); ++drop) {
            facet.clear();
            for (std::size_t a = 0; a < s.size(); ++a)
                if (a != drop) facet.push_back(s[a]);
            col.push_back(position.at(facet));
        }
        std::sort(col.begin(), col.end());
        while (!col.empty()) {
            const int piv = col.back();
            const int owner = pivot_owner[static_cast<std::size_t>(piv)];
            if (owner < 0) break;
            // symmetric difference with the owner column (Z/2 addition)
            tmp.clear();
            std::set_symmetric_difference(col.begin(), col.end(),
                                          column[static_cast<std::size_t>(owner)].begin(),
                                          column[static_cast<std::size_t>(owner)].end(),
                                          std::back_inserter(tmp));
            col.swap(tmp);
        }
        if (col.empty()) {
            is_cycle[static_cast<std::size_t>(j)] = 1;
        } else {
            pivot_owner[static_cast<std::size_t>(col.back())] = j;
        }
    }

    Barcode bc;
    for (int j = 0; j < m; ++j) {
        if (!is_cycle[static_cast<std::size_t>(j)]) continue;
        const int d = static_cast<int>(order[static_cast<std::size_t>(j)].s->size()) - 1;
        if (d > max_hom_dim) continue;
        const double birth = order[static_cast<std::size_t>(j)].val;
        const int killer = pivot_owner[static_cast<std::size_t>(j)];
        const double death = killer < 0 ? kInfDeath : order[static_cast<std::size_t>(killer)].val;
        if (death > birth || keep_zero_bars) bc.bars.push_back({d, birth, death});
    }
    std::sort(bc.bars.begin(), bc.bars.end(), [](const Bar& a, const Bar& b) {
        if (a.dim != b.dim) return a.dim < b.dim;
        if (a.birth != b.birth) return a.birth < b.birth;
        return a.death < b.death;
    });
    return bc;
}

// ---------------------------------------------------------------------------
// Betti curves
// ---------------------------------------------------------------------------

/// Right-continuous step function r -> beta_dim(r), as breakpoints
/// (value, level): the level holds on [value, next value).
struct BettiCurve {
    std::vector<std::pair<double, int>> steps;

    int at(double r) const {
        int level = 0;
        for (const auto& [v, b] : steps) {
            if (v > r) break;
            level = b;
        }
        return level;
    }
};

inline BettiCurve betti_curve(const Barcode& bc, int dim) {
    std::vector<std::pair<double, int>> events; // (value, delta)
    for (const auto& bar : bc.bars) {
        if (bar.dim != dim) continue;
        events.emplace_back(bar.birth, +1);
        if (std::isfinite(bar.death)) events.emplace_back(bar.death, -1);
    }
    std::sort(events.begin(), events.end());
    BettiCurve curve;
    int level = 0;
    for (std::size_t i = 0; i < events.size();) {
        const double v = events[i].first;
        while (i < events.size() && events[i].first == v) level += events[i++].second;
        if (curve.steps.empty() || curve.steps.back().second != level) curve.steps.emplace_back(v, level);
    }
    return curve;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

/// CSV rows: dim,birth,death with "inf" for essential classes.
inline void save_barcode_csv(const Barcode& bc, std::ostream& out) {
    for (const auto& bar : bc.bars)
        out << bar.dim << ',' << fmt_double(bar.birth) << ',' << fmt_double(bar.death) << '\n';
}

inline Barcode load_barcode_csv(std::istream& in) {
    Barcode bc;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        const auto toks = split_csv_line(line);
        if (toks.size() != 3) throw std::invalid_argument("barcode CSV row must have 3 fields");
        bc.bars.push_back({static_cast<int>(parse_double(toks[0])), parse_double(toks[1]), parse_double(toks[2])});
    }
    return bc;
}

} // namespace covercraft
