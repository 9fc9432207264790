#pragma once

#include "covercraft/common.hpp"
#include "covercraft/geometry.hpp"

#include <Eigen/Core>
#include <json.hpp>

#include <fstream>
#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace covercraft {

using Simplex = std::vector<int>; // sorted ascending vertex ids

struct SimplexHash {
    std::size_t operator()(const Simplex& s) const {
        std::size_t h = 0xcbf29ce484222325ULL;
        for (int v : s) {
            h ^= static_cast<std::size_t>(v) + 0x9e3779b9 + (h << 6) + (h >> 2);
        }
        return h;
    }
};

// ---------------------------------------------------------------------------
// Covers
// ---------------------------------------------------------------------------

struct Cover {
    int n = 0;                            // ground-set size
    std::vector<std::vector<int>> members; // sorted vertex-id lists, may be empty

    int k() const { return static_cast<int>(members.size()); }

    void validate(bool require_total = false) const {
        std::vector<char> hit(static_cast<std::size_t>(n), 0);
        for (const auto& m : members) {
            int prev = -1;
            for (int x : m) {
                if (x < 0 || x >= n) throw invariant_error("Cover: member id out of range");
                if (x <= prev) throw invariant_error("Cover: member ids must be strictly increasing");
                prev = x;
                hit[static_cast<std::size_t>(x)] = 1;
            }
        }
        if (require_total)
            for (char h : hit)
                if (!h) throw invariant_error("Cover: not total");
    }
};

struct FuzzyCover {
    Eigen::MatrixXd g; // n x k, entries in [0,1], per-row max = 1

    int n() const { return static_cast<int>(g.rows()); }
    int k() const { return static_cast<int>(g.cols()); }

    void validate() const {
        if (g.rows() < 1 || g.cols() < 1) throw invariant_error("FuzzyCover: empty matrix");
        for (int x = 0; x < g.rows(); ++x) {
            double row_max = 0.0;
            for (int i = 0; i < g.cols(); ++i) {
                const double v = g(x, i);
                if (!(v >= 0.0 && v <= 1.0 + 1e-12))
                    throw invariant_error("FuzzyCover: entry outside [0,1]");
                row_max = std::max(row_max, v);
            }
            if (std::abs(row_max - 1.0) > 1e-9)
                throw invariant_error("FuzzyCover: row max must be 1");
        }
    }
};

/// Suplevel-set cover {x : g[x,i] > lambda}; total for every lambda < 1
/// because each row attains 1.
inline Cover threshold(const FuzzyCover& fc, double lambda) {
    if (!(lambda >= 0.0 && lambda < 1.0))
        throw std::invalid_argument("threshold: lambda must be in [0,1)");
    Cover c;
    c.n = fc.n();
    c.members.resize(static_cast<std::size_t>(fc.k()));
    for (int i = 0; i < fc.k(); ++i)
        for (int x = 0; x < fc.n(); ++x)
            if (fc.g(x, i) > lambda) c.members[static_cast<std::size_t>(i)].push_back(x);
    return c;
}

// ---------------------------------------------------------------------------
// Simplicial complexes
// ---------------------------------------------------------------------------

struct SimplicialComplex {
    std::vector<Simplex> simplices; // face-closed, sorted lexicographically
    int max_dim = 0;

    bool contains(const Simplex& s) const {
        return std::binary_search(simplices.begin(), simplices.end(), s);
    }
};

struct FilteredComplex {
    std::vector<std::pair<Simplex, double>> simplices; // sorted lexicographically by simplex

    std::size_t size() const { return simplices.size(); }

    /// Throws unless every facet is present with a smaller-or-equal value.
    void check_monotone() const {
        std::unordered_map<Simplex, double, SimplexHash> val;
        val.reserve(simplices.size() * 2);
        for (const auto& [s, v] : simplices) {
            if (!std::is_sorted(s.begin(), s.end()) || std::adjacent_find(s.begin(), s.end()) != s.end())
                throw invariant_error("FilteredComplex: simplex must be a sorted set");
            val[s] = v;
        }
        if (val.size() != simplices.size())
            throw invariant_error("FilteredComplex: duplicate simplex");
        Simplex facet;
        for (const auto& [s, v] : simplices) {
            if (s.size() < 2) continue;
            for (std::size_t drop = 0; drop < s.size(); ++drop) {
                facet.clear();
                for (std::size_t a = 0; a < s.size(); ++a)
                    if (a != drop) facet.push_back(s[a]);
                auto it = val.find(facet);
                if (it == val.end())
                    throw invariant_error("FilteredComplex: missing facet");
                if (it->second > v)
                    throw invariant_error("FilteredComplex: filtration not monotone");
            }
        }
    }

    /// Simplices with value <= r, as a plain complex.
    SimplicialComplex sublevel(double r) const {
        SimplicialComplex K;
        for (const auto& [s, v] : simplices)
            if (v <= r) {
                K.simplices.push_back(s);
                K.max_dim = std::max(K.max_dim, static_cast<int>(s.size()) - 1);
            }
        std::sort(K.simplices.begin(), K.simplices.end());
        return K;
    }
};

namespace detail {

// Intersection of two sorted id lists; gallops through the larger list when
// the sizes are badly skewed.
inline std::vector<int> intersect_sorted(const std::vector<int>& a, const std::vector<int>& b) {
    const std::vector<int>& s = a.size() <= b.size() ? a : b;
    const std::vector<int>& l = a.size() <= b.size() ? b : a;
    std::vector<int> out;
    if (s.empty()) return out;
    if (s.size() * 32 < l.size()) {
        auto lo = l.begin();
        for (int x : s) {
            lo = std::lower_bound(lo, l.end(), x);
            if (lo == l.end()) break;
            if (*lo == x) out.push_back(x);
        }
        return out;
    }
    std::set_intersection(s.begin(), s.end(), l.begin(), l.end(), std::back_inserter(out));
    return out;
}

// Generic flag-complex style expansion: vertices and an adjacency relation
// seed the complex; a candidate simplex is tested only if all its facets were
// accepted. `accept` either rejects the simplex or returns its payload.
template <typename Accept>
void expand_nerve(const std::vector<int>& vertex_ids,
                  const std::vector<std::vector<int>>& adj, // per vertex position, sorted positions
                  int max_dim, Accept&& accept) {
    const int nv = static_cast<int>(vertex_ids.size());
    std::unordered_set<Simplex, SimplexHash> present;
    std::vector<Simplex> frontier; // simplices of the previous dimension, as positions
    for (int p = 0; p < nv; ++p) {
        frontier.push_back({p});
        present.insert({p});
    }
    for (int d = 1; d <= max_dim && !frontier.empty(); ++d) {
        std::vector<Simplex> next;
        for (const auto& sigma : frontier) {
            std::vector<int> cand = adj[static_cast<std::size_t>(sigma[0])];
            for (std::size_t a = 1; a < sigma.size(); ++a)
                cand = intersect_sorted(cand, adj[static_cast<std::size_t>(sigma[a])]);
            for (int v : cand) {
                if (v <= sigma.back()) continue;
                Simplex tau = sigma;
                tau.push_back(v);
                bool facets_ok = true;
                Simplex facet;
                for (std::size_t drop = 0; drop + 1 < tau.size() && facets_ok; ++drop) {
                    facet.clear();
                    for (std::size_t a = 0; a < tau.size(); ++a)
                        if (a != drop) facet.push_back(tau[a]);
                    facets_ok = present.count(facet) > 0;
                }
                if (!facets_ok) continue;
                if (accept(tau)) {
                    present.insert(tau);
                    next.push_back(std::move(tau));
                }
            }
        }
        frontier = std::move(next);
    }
}

} // namespace detail

/// Nerve of a cover up to max_dim: one vertex per nonempty member (keeping
/// the original member index), a simplex per nonempty intersection.
inline SimplicialComplex nerve(const Cover& c, int max_dim) {
    if (max_dim < 0) throw std::invalid_argument("nerve: max_dim must be >= 0");
    c.validate();
    std::vector<int> vertex_ids; // original member index per vertex position
    std::vector<const std::vector<int>*> sets;
    for (int i = 0; i < c.k(); ++i)
        if (!c.members[static_cast<std::size_t>(i)].empty()) {
            vertex_ids.push_back(i);
            sets.push_back(&c.members[static_cast<std::size_t>(i)]);
        }
    const int nv = static_cast<int>(vertex_ids.size());

    SimplicialComplex K;
    for (int p = 0; p < nv; ++p) K.simplices.push_back({vertex_ids[static_cast<std::size_t>(p)]});
    if (max_dim >= 1 && nv > 1) {
        std::vector<std::vector<int>> adj(static_cast<std::size_t>(nv));
        for (int p = 0; p < nv; ++p)
            for (int q = p + 1; q < nv; ++q)
                if (!detail::intersect_sorted(*sets[static_cast<std::size_t>(p)], *sets[static_cast<std::size_t>(q)]).empty()) {
                    adj[static_cast<std::size_t>(p)].push_back(q);
                    adj[static_cast<std::size_t>(q)].push_back(p);
                }
        detail::expand_nerve(vertex_ids, adj, max_dim, [&](const Simplex& tau_pos) {
            std::vector<int> common = *sets[static_cast<std::size_t>(tau_pos[0])];
            for (std::size_t a = 1; a < tau_pos.size() && !common.empty(); ++a)
                common = detail::intersect_sorted(common, *sets[static_cast<std::size_t>(tau_pos[a])]);
            if (common.empty()) return false;
            Simplex s;
            for (int p : tau_pos) s.push_back(vertex_ids[static_cast<std::size_t>(p)]);
            K.simplices.push_back(std::move(s));
            return true;
        });
    }
    std::sort(K.simplices.begin(), K.simplices.end());
    K.max_dim = 0;
    for (const auto& s : K.simplices) K.max_dim = std::max(K.max_dim, static_cast<int>(s.size()) - 1);
    return K;
}

/// Filtered nerve of a fuzzy cover. A simplex sigma carries
/// lambda(sigma) = max_x min_{j in sigma} g[x,j], the largest threshold at
/// which the intersection of suplevel sets is nonempty; it enters the complex
/// iff lambda > 0, at filtration value -log(lambda).
inline FilteredComplex fuzzy_nerve_filtration(const FuzzyCover& fc, int max_dim) {
    if (max_dim < 0) throw std::invalid_argument("fuzzy_nerve_filtration: max_dim must be >= 0");
    fc.validate();
    const int n = fc.n();
    const int k = fc.k();

    auto lambda_of = [&](const std::vector<int>& cols) {
        double best = 0.0;
        for (int x = 0; x < n; ++x) {
            double m = fc.g(x, cols[0]);
            for (std::size_t a = 1; a < cols.size() && m > 0.0; ++a)
                m = std::min(m, fc.g(x, cols[a]));
            best = std::max(best, m);
        }
        return best;
    };

    std::vector<int> vertex_ids;
    std::vector<double> vertex_lambda;
    for (int i = 0; i < k; ++i) {
        const double l = lambda_of({i});
        if (l > 0.0) {
            vertex_ids.push_back(i);
            vertex_lambda.push_back(l);
        }
    }
    const int nv = static_cast<int>(vertex_ids.size());

    FilteredComplex K;
    for (int p = 0; p < nv; ++p)
        K.simplices.emplace_back(Simplex{vertex_ids[static_cast<std::size_t>(p)]},
                                 -std::log(vertex_lambda[static_cast<std::size_t>(p)]));
    if (max_dim >= 1 && nv > 1) {
        std::vector<std::vector<int>> adj(static_cast<std::size_t>(nv));
        for (int p = 0; p < nv; ++p)
            for (int q = p + 1; q < nv; ++q)
                if (lambda_of({vertex_ids[static_cast<std::size_t>(p)], vertex_ids[static_cast<std::size_t>(q)]}) > 0.0) {
                    adj[static_cast<std::size_t>(p)].push_back(q);
                    adj[static_cast<std::size_t>(q)].push_back(p);
                }
        detail::expand_nerve(vertex_ids, adj, max_dim, [&](const Simplex& tau_pos) {
            Simplex s;
            for (int p : tau_pos) s.push_back(vertex_ids[static_cast<std::size_t>(p)]);
            const double l = lambda_of(s);
            if (l <= 0.0) return false;
            K.simplices.emplace_back(std::move(s), -std::log(l));
            return true;
        });
    }
    std::sort(K.simplices.begin(), K.simplices.end(),
              [](const auto& a, const auto& b) { return a.first != b.first ? a.first < b.first : a.second < b.second; });
    K.check_monotone();
    return K;
}

// ---------------------------------------------------------------------------
// Exports
// ---------------------------------------------------------------------------

namespace detail {

inline std::vector<int> member_of(const Cover& c, int id) { return c.members[static_cast<std::size_t>(id)]; }

inline std::string label_histogram(const Cover& c, int id, const std::vector<std::string>& labels) {
    std::map<std::string, int> hist;
    for (int x : c.members[static_cast<std::size_t>(id)]) hist[labels[static_cast<std::size_t>(x)]]++;
    std::string out;
    for (const auto& [lab, cnt] : hist) {
        if (!out.empty()) out += ',';
        out += lab + ":" + std::to_string(cnt);
    }
    return out;
}

} // namespace detail

/// DOT export of the nerve 1-skeleton with the plotting attributes:
/// vertex size log(|U_i|+1), edge thickness log(|U_i inter U_j|+1), edge
/// length 1/|U_i inter U_j|; optional per-vertex label histograms.
inline void save_nerve_dot(const SimplicialComplex& K, const Cover& c, std::ostream& out,
                           const std::vector<std::string>* labels = nullptr) {
    out << "graph nerve {\n";
    for (const auto& s : K.simplices) {
        if (s.size() == 1) {
            const int i = s[0];
            const double sz = std::log(static_cast<double>(c.members[static_cast<std::size_t>(i)].size()) + 1.0);
            out << "  v" << i << " [size=" << fmt_double(sz);
            if (labels) out << ", hist=\"" << detail::label_histogram(c, i, *labels) << "\"";
            out << "];\n";
        } else if (s.size() == 2) {
            const auto common = detail::intersect_sorted(c.members[static_cast<std::size_t>(s[0])],
                                                         c.members[static_cast<std::size_t>(s[1])]);
            const double thick = std::log(static_cast<double>(common.size()) + 1.0);
            const double len = 1.0 / static_cast<double>(common.size());
            out << "  v" << s[0] << " -- v" << s[1] << " [penwidth=" << fmt_double(thick)
                << ", len=" << fmt_double(len) << "];\n";
        }
    }
    out << "}\n";
}

/// GraphML export of the nerve 1-skeleton; same attributes as the DOT export.
inline void save_nerve_graphml(const SimplicialComplex& K, const Cover& c, std::ostream& out,
                               const std::vector<std::string>* labels = nullptr) {
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n"
        << "  <key id=\"size\" for=\"node\" attr.name=\"size\" attr.type=\"double\"/>\n"
        << "  <key id=\"hist\" for=\"node\" attr.name=\"hist\" attr.type=\"string\"/>\n"
        << "  <key id=\"thickness\" for=\"edge\" attr.name=\"thickness\" attr.type=\"double\"/>\n"
        << "  <key id=\"length\" for=\"edge\" attr.name=\"length\" attr.type=\"double\"/>\n"
        << "  <graph edgedefault=\"undirected\">\n";
    int eid = 0;
    for (const auto& s : K.simplices) {
        if (s.size() == 1) {
            const int i = s[0];
            out << "    <node id=\"v" << i << "\"><data key=\"size\">"
                << fmt_double(std::log(static_cast<double>(c.members[static_cast<std::size_t>(i)].size()) + 1.0))
                << "</data>";
            if (labels) out << "<data key=\"hist\">" << detail::label_histogram(c, i, *labels) << "</data>";
            out << "</node>\n";
        } else if (s.size() == 2) {
            const auto common = detail::intersect_sorted(c.members[static_cast<std::size_t>(s[0])],
                                                         c.members[static_cast<std::size_t>(s[1])]);
            out << "    <edge id=\"e" << eid++ << "\" source=\"v" << s[0] << "\" target=\"v" << s[1]
                << "\"><data key=\"thickness\">"
                << fmt_double(std::log(static_cast<double>(common.size()) + 1.0))
                << "</data><data key=\"length\">" << fmt_double(1.0 / static_cast<double>(common.size()))
                << "</data></edge>\n";
        }
    }
    out << "  </graph>\n</graphml>\n";
}

/// JSON export: list of {"simplex": [ids], "filtration": value}.
inline void save_filtered_complex_json(const FilteredComplex& K, std::ostream& out) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& [s, v] : K.simplices) {
        nlohmann::json item;
        item["simplex"] = s;
        item["filtration"] = v;
        arr.push_back(item);
    }
    out << arr.dump(2) << '\n';
}

inline FilteredComplex load_filtered_complex_json(std::istream& in) {
    nlohmann::json arr = nlohmann::json::parse(in);
    FilteredComplex K;
    for (const auto& item : arr) {
        Simplex s = item.at("simplex").get<std::vector<int>>();
        K.simplices.emplace_back(std::move(s), item.at("filtration").get<double>());
    }
    K.check_monotone();
    return K;
}

// Fuzzy cover CSV: n rows, k columns.
inline void save_fuzzy_cover_csv(const FuzzyCover& fc, std::ostream& out) {
    for (int x = 0; x < fc.n(); ++x) {
        for (int i = 0; i < fc.k(); ++i) {
            if (i) out << ',';
            out << fmt_double(fc.g(x, i));
        }
        out << '\n';
    }
}

inline FuzzyCover load_fuzzy_cover_csv(const std::string& path) {
    const PointCloud raw = load_point_cloud_csv(path);
    FuzzyCover fc;
    fc.g = raw.points;
    fc.validate();
    return fc;
}

// Cover JSON: {"n": int, "members": [[ids], ...]}.
inline void save_cover_json(const Cover& c, std::ostream& out) {
    nlohmann::json j;
    j["n"] = c.n;
    j["members"] = c.members;
    out << j.dump(2) << '\n';
}

inline Cover load_cover_json(std::istream& in) {
    nlohmann::json j = nlohmann::json::parse(in);
    Cover c;
    c.n = j.at("n").get<int>();
    c.members = j.at("members").get<std::vector<std::vector<int>>>();
    c.validate();
    return c;
}

} // namespace covercraft
