#pragma once

#include "covercraft/common.hpp"
#include "covercraft/geometry.hpp"
#include "covercraft/persistence.hpp"

#include <Eigen/Core>

#include <utility>
#include <vector>

namespace covercraft {

struct LossWeights {
    double alpha_m = 1.0;
    double alpha_g = 0.0;
    double alpha_t = 1.0;
    double alpha_r = 0.0;

    /// Objective weights of the driver: M + reg*G + T0 + reg*R.
    static LossWeights from_reg(double reg) { return {1.0, reg, 1.0, reg}; }
};

/// Normalization constants depending only on the graph and the cover size,
/// chosen so the four losses live in comparable ranges.
struct LossNormalization {
    double eta_m, eta_g, eta_t, eta_r;

    static LossNormalization compute(const WeightedGraph& graph, int k) {
        const double n = static_cast<double>(graph.n);
        const double W = graph.total_weight();
        const double kd = static_cast<double>(k);
        return {1.0 / (kd * n * n), 1.0 / (kd * W * W), 1.0 / (kd * n), 1.0 / (kd * W)};
    }
};

struct LossReport {
    double m = 0.0, g_loss = 0.0, t0 = 0.0, r = 0.0, total = 0.0;
    Eigen::MatrixXd gradient; // n x k, d total / d g
};

/// eta_m * sum_i (sum_x g_i(x))^2
inline std::pair<double, Eigen::MatrixXd> measure_loss(const Eigen::MatrixXd& g, double eta_m) {
    const Eigen::VectorXd col_sums = g.colwise().sum();
    const double value = eta_m * col_sums.squaredNorm();
    Eigen::MatrixXd grad(g.rows(), g.cols());
    for (int i = 0; i < g.cols(); ++i) grad.col(i).setConstant(eta_m * 2.0 * col_sums(i));
    return {value, std::move(grad)};
}

/// eta_g * sum_i (sum_{(x,y)} w |g_i(x)-g_i(y)|)^2, subgradient with sign(0)=0
inline std::pair<double, Eigen::MatrixXd> geometry_loss(const Eigen::MatrixXd& g, const WeightedGraph& graph,
                                                        double eta_g) {
    if (graph.n != g.rows()) throw std::invalid_argument("geometry_loss: graph and cover sizes differ");
    const int k = static_cast<int>(g.cols());
    double value = 0.0;
    Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(g.rows(), g.cols());
    for (int i = 0; i < k; ++i) {
        double s = 0.0;
        for (const auto& e : graph.edges) s += e.w * std::abs(g(e.u, i) - g(e.v, i));
        value += eta_g * s * s;
        const double scale = eta_g * 2.0 * s;
        for (const auto& e : graph.edges) {
            const double d = g(e.u, i) - g(e.v, i);
            const double sgn = d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0);
            grad(e.u, i) += scale * e.w * sgn;
            grad(e.v, i) -= scale * e.w * sgn;
        }
    }
    return {value, std::move(grad)};
}

/// eta_r * sum_i sum_{(x,y)} w (g_i(x)-g_i(y))^2, smooth gradient
inline std::pair<double, Eigen::MatrixXd> regularization_loss(const Eigen::MatrixXd& g, const WeightedGraph& graph,
                                                              double eta_r) {
    if (graph.n != g.rows()) throw std::invalid_argument("regularization_loss: graph and cover sizes differ");
    double value = 0.0;
    Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(g.rows(), g.cols());
    for (int i = 0; i < g.cols(); ++i) {
        for (const auto& e : graph.edges) {
            const double d = g(e.u, i) - g(e.v, i);
            value += eta_r * e.w * d * d;
            grad(e.u, i) += eta_r * 2.0 * e.w * d;
            grad(e.v, i) -= eta_r * 2.0 * e.w * d;
        }
    }
    return {value, std::move(grad)};
}

/// Fresh H0 attributions of every cover column on the graph.
inline std::vector<H0Attribution> topology_attributions(const Eigen::MatrixXd& g, const WeightedGraph& graph) {
    const int k = static_cast<int>(g.cols());
    std::vector<H0Attribution> attrs(static_cast<std::size_t>(k));
    std::vector<double> col(static_cast<std::size_t>(g.rows()));
    for (int i = 0; i < k; ++i) {
        for (int x = 0; x < g.rows(); ++x) col[static_cast<std::size_t>(x)] = g(x, i);
        attrs[static_cast<std::size_t>(i)] = h0_suplevel(graph, col).second;
    }
    return attrs;
}

/// eta_t * sum_i total_i^2 where the bar pairing is frozen in `attrs` and bar
/// lengths are re-evaluated at the current g (the big-step evaluation).
inline std::pair<double, Eigen::MatrixXd> topology_from_attributions(const Eigen::MatrixXd& g,
                                                                     const std::vector<H0Attribution>& attrs,
                                                                     double eta_t) {
    const int k = static_cast<int>(g.cols());
    double value = 0.0;
    Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(g.rows(), g.cols());
    for (int i = 0; i < k; ++i) {
        const auto& bars = attrs[static_cast<std::size_t>(i)].bars;
        double total = 0.0;
        for (const auto& bar : bars) {
            const double fu = g(bar.death_edge.first, i), fv = g(bar.death_edge.second, i);
            total += g(bar.birth_vertex, i) - std::min(fu, fv);
        }
        value += eta_t * total * total;
        const double scale = eta_t * 2.0 * total;
        for (const auto& bar : bars) {
            const double fu = g(bar.death_edge.first, i), fv = g(bar.death_edge.second, i);
            const int argmin = fu < fv ? bar.death_edge.first
                                       : (fv < fu ? bar.death_edge.second
                                                  : std::min(bar.death_edge.first, bar.death_edge.second));
            grad(bar.birth_vertex, i) += scale;
            grad(argmin, i) -= scale;
        }
    }
    return {value, std::move(grad)};
}

/// eta_t * sum_i ||g_i||_{H0}^2 with a fresh persistence computation.
inline std::pair<double, Eigen::MatrixXd> topology_loss(const Eigen::MatrixXd& g, const WeightedGraph& graph,
                                                        double eta_t) {
    if (graph.n != g.rows()) throw std::invalid_argument("topology_loss: graph and cover sizes differ");
    return topology_from_attributions(g, topology_attributions(g, graph), eta_t);
}

/// Weighted sum of the four losses with the Appendix-H normalizations; when
/// `frozen` is supplied the topology term reuses that pairing (big steps).
inline LossReport combined_loss(const Eigen::MatrixXd& g, const WeightedGraph& graph, const LossWeights& w,
                                const std::vector<H0Attribution>* frozen = nullptr) {
    const auto eta = LossNormalization::compute(graph, static_cast<int>(g.cols()));
    LossReport rep;
    rep.gradient = Eigen::MatrixXd::Zero(g.rows(), g.cols());
    if (w.alpha_m != 0.0) {
        auto [v, grad] = measure_loss(g, eta.eta_m);
        rep.m = v;
        rep.gradient += w.alpha_m * grad;
    }
    if (w.alpha_g != 0.0) {
        auto [v, grad] = geometry_loss(g, graph, eta.eta_g);
        rep.g_loss = v;
        rep.gradient += w.alpha_g * grad;
    }
    if (w.alpha_t != 0.0) {
        auto [v, grad] = frozen ? topology_from_attributions(g, *frozen, eta.eta_t)
                                : topology_loss(g, graph, eta.eta_t);
        rep.t0 = v;
        rep.gradient += w.alpha_t * grad;
    }
    if (w.alpha_r != 0.0) {
        auto [v, grad] = regularization_loss(g, graph, eta.eta_r);
        rep.r = v;
        rep.gradient += w.alpha_r * grad;
    }
    rep.total = w.alpha_m * rep.m + w.alpha_g * rep.g_loss + w.alpha_t * rep.t0 + w.alpha_r * rep.r;
    return rep;
}

} // namespace covercraft
