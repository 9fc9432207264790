#pragma once

#include "covercraft/common.hpp"
#include "covercraft/complex.hpp"
#include "covercraft/geometry.hpp"
#include "covercraft/losses.hpp"

#include <Eigen/Dense>

#include <chrono>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace covercraft {

enum class GraphKind { unit_knn, umap };

struct LearnConfig {
    int n_cov = 0;
    int n_neigh = 15;
    double reg = 10.0;
    double lr = 0.1;
    int n_epoch = 500;
    double p = 5.0;
    double lambda = 0.5;
    std::uint64_t seed = 0;
    GraphKind graph_kind = GraphKind::umap;
    int max_dim = 2;
    int big_step = 1;         // recompute persistence every this many epochs (1 = vanilla)
    double init_margin = 4.0; // scale of the logit lift of the initial clustering

    void validate() const {
        if (n_cov < 1) throw std::invalid_argument("LearnConfig: n_cov must be positive");
        if (n_neigh < 1) throw std::invalid_argument("LearnConfig: n_neigh must be positive");
        if (!(reg >= 0.0)) throw std::invalid_argument("LearnConfig: reg must be nonnegative");
        if (!(lr > 0.0)) throw std::invalid_argument("LearnConfig: lr must be positive");
        if (n_epoch < 0) throw std::invalid_argument("LearnConfig: n_epoch must be nonnegative");
        if (!(p >= 1.0)) throw std::invalid_argument("LearnConfig: p must be >= 1");
        if (!(lambda >= 0.0 && lambda < 1.0)) throw std::invalid_argument("LearnConfig: lambda must be in [0,1)");
        if (max_dim < 0 || max_dim > 4) throw std::invalid_argument("LearnConfig: max_dim must be in [0,4]");
        if (big_step < 1) throw std::invalid_argument("LearnConfig: big_step must be >= 1");
    }
};

// ---------------------------------------------------------------------------
// Parametric fuzzy covers: pi_p . softmax . theta
// ---------------------------------------------------------------------------

/// Row-wise softmax with max subtraction.
inline Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& theta) {
    Eigen::MatrixXd out(theta.rows(), theta.cols());
    for (int x = 0; x < theta.rows(); ++x) {
        const double mx = theta.row(x).maxCoeff();
        double denom = 0.0;
        for (int i = 0; i < theta.cols(); ++i) {
            const double e = std::exp(theta(x, i) - mx);
            out(x, i) = e;
            denom += e;
        }
        out.row(x) /= denom;
    }
    return out;
}

/// Row-wise normalization by the p-norm; p = infinity divides by the row max.
inline Eigen::MatrixXd pi_p(const Eigen::MatrixXd& h, double p) {
    if (!(p >= 1.0)) throw std::invalid_argument("pi_p: p must be >= 1");
    Eigen::MatrixXd out(h.rows(), h.cols());
    for (int x = 0; x < h.rows(); ++x) {
        double norm;
        if (std::isinf(p)) {
            norm = h.row(x).maxCoeff();
        } else {
            double s = 0.0;
            for (int i = 0; i < h.cols(); ++i) s += std::pow(h(x, i), p);
            norm = std::pow(s, 1.0 / p);
        }
        if (!(norm > 0.0)) throw invariant_error("pi_p: zero row");
        out.row(x) = h.row(x) / norm;
    }
    return out;
}

/// Exact gradient of L(pi_p(softmax(theta))) given dL/d(pi_p . softmax).
inline Eigen::MatrixXd chain_gradient(const Eigen::MatrixXd& theta, double p, const Eigen::MatrixXd& upstream) {
    if (std::isinf(p)) throw std::invalid_argument("chain_gradient: p must be finite");
    const Eigen::MatrixXd s = softmax_rows(theta);
    Eigen::MatrixXd grad(theta.rows(), theta.cols());
    const int k = static_cast<int>(theta.cols());
    for (int x = 0; x < theta.rows(); ++x) {
        double norm_p = 0.0;
        for (int i = 0; i < k; ++i) norm_p += std::pow(s(x, i), p);
        const double N = std::pow(norm_p, 1.0 / p);
        const double Nip = std::pow(N, -(p + 1.0)); // N^{-(p+1)}
        double us = 0.0;
        for (int i = 0; i < k; ++i) us += upstream(x, i) * s(x, i);
        // through pi_p: v_j = u_j / N - (u.s) s_j^{p-1} N^{-(p+1)}
        Eigen::VectorXd v(k);
        for (int j = 0; j < k; ++j)
            v(j) = upstream(x, j) / N - us * std::pow(s(x, j), p - 1.0) * Nip;
        // through softmax: dL/dtheta_t = s_t (v_t - v.s)
        double vs = 0.0;
        for (int j = 0; j < k; ++j) vs += v(j) * s(x, j);
        for (int t = 0; t < k; ++t) grad(x, t) = s(x, t) * (v(t) - vs);
    }
    return grad;
}

// ---------------------------------------------------------------------------
// Spectral-clustering initialization
// ---------------------------------------------------------------------------

namespace detail {

// k-means with k-means++ seeding, Lloyd iterations, multiple restarts; keeps
// the assignment with the best inertia. Deterministic given the rng state.
inline std::vector<int> kmeans(const Eigen::MatrixXd& rows, int k, Rng& rng, int restarts = 10,
                               int max_iter = 100) {
    const int n = static_cast<int>(rows.rows());
    std::vector<int> best_assign(static_cast<std::size_t>(n), 0);
    double best_inertia = std::numeric_limits<double>::infinity();
    for (int rs = 0; rs < restarts; ++rs) {
        // k-means++ seeding
        Eigen::MatrixXd centers(k, rows.cols());
        centers.row(0) = rows.row(static_cast<int>(rng.next_below(static_cast<std::uint64_t>(n))));
        Eigen::VectorXd d2 = (rows.rowwise() - centers.row(0)).rowwise().squaredNorm();
        for (int c = 1; c < k; ++c) {
            const double sum = d2.sum();
            int pick = 0;
            if (sum > 0.0) {
                double target = rng.next_double() * sum, acc = 0.0;
                for (int i = 0; i < n; ++i) {
                    acc += d2(i);
                    if (acc >= target) {
                        pick = i;
                        break;
                    }
                }
            } else {
                pick = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(n)));
            }
            centers.row(c) = rows.row(pick);
            d2 = d2.cwiseMin((rows.rowwise() - centers.row(c)).rowwise().squaredNorm());
        }
        // Lloyd
        std::vector<int> assign(static_cast<std::size_t>(n), -1);
        for (int it = 0; it < max_iter; ++it) {
            bool changed = false;
            for (int i = 0; i < n; ++i) {
                int arg = 0;
                double best = (rows.row(i) - centers.row(0)).squaredNorm();
                for (int c = 1; c < k; ++c) {
                    const double d = (rows.row(i) - centers.row(c)).squaredNorm();
                    if (d < best) {
                        best = d;
                        arg = c;
                    }
                }
                if (assign[static_cast<std::size_t>(i)] != arg) {
                    assign[static_cast<std::size_t>(i)] = arg;
                    changed = true;
                }
            }
            if (!changed) break;
            Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, rows.cols());
            std::vector<int> counts(static_cast<std::size_t>(k), 0);
            for (int i = 0; i < n; ++i) {
                sums.row(assign[static_cast<std::size_t>(i)]) += rows.row(i);
                counts[static_cast<std::size_t>(assign[static_cast<std::size_t>(i)])]++;
            }
            for (int c = 0; c < k; ++c) {
                if (counts[static_cast<std::size_t>(c)] > 0) {
                    centers.row(c) = sums.row(c) / counts[static_cast<std::size_t>(c)];
                } else {
                    // revive an empty cluster at the point farthest from its centroid
                    int far = 0;
                    double far_d = -1.0;
                    for (int i = 0; i < n; ++i) {
                        const double d = (rows.row(i) - centers.row(assign[static_cast<std::size_t>(i)])).squaredNorm();
                        if (d > far_d) {
                            far_d = d;
                            far = i;
                        }
                    }
                    centers.row(c) = rows.row(far);
                    assign[static_cast<std::size_t>(far)] = c;
                }
            }
        }
        double inertia = 0.0;
        for (int i = 0; i < n; ++i) inertia += (rows.row(i) - centers.row(assign[static_cast<std::size_t>(i)])).squaredNorm();
        if (inertia < best_inertia) {
            best_inertia = inertia;
            best_assign = assign;
        }
    }
    return best_assign;
}

// Top-k eigenpairs of the symmetric normalized adjacency by block-Krylov
// Rayleigh--Ritz with full reorthogonalization and thick restarts. Handles
// eigenvalue multiplicities (disconnected graphs) through the block start.
inline Eigen::MatrixXd block_krylov_topk(const std::vector<std::vector<std::pair<int, double>>>& adj_scaled,
                                         int n, int k, Rng& rng, double tol = 1e-8) {
    auto matvec = [&](const Eigen::MatrixXd& v, Eigen::MatrixXd& out) {
        out.setZero(n, v.cols());
        for (int u = 0; u < n; ++u)
            for (const auto& [w, nw] : adj_scaled[static_cast<std::size_t>(u)]) out.row(u) += nw * v.row(w);
        out += v; // shift by +I so the spectrum is nonnegative
    };

    Eigen::MatrixXd V(n, k);
    for (int j = 0; j < k; ++j)
        for (int i = 0; i < n; ++i) V(i, j) = rng.next_normal();

    const int max_basis = std::min(n, std::max(8 * k + 32, 96));
    const int rounds = 60;
    Eigen::MatrixXd basis(n, max_basis), W;
    for (int round = 0; round < rounds; ++round) {
        // build an orthonormal block-Krylov basis starting from V
        int m = 0;
        Eigen::MatrixXd blk = V;
        while (m < max_basis) {
            for (int c = 0; c < blk.cols() && m < max_basis; ++c) {
                Eigen::VectorXd w = blk.col(c);
                for (int pass = 0; pass < 2; ++pass)
                    for (int b = 0; b < m; ++b) w -= basis.col(b).dot(w) * basis.col(b);
                const double nrm = w.norm();
                if (nrm > 1e-10) basis.col(m++) = w / nrm;
            }
            if (m == 0) {
                for (int i = 0; i < n; ++i) basis(i, 0) = rng.next_normal();
                basis.col(0).normalize();
                m = 1;
            }
            if (m >= max_basis) break;
            matvec(basis.leftCols(m).rightCols(std::min(m, k)), W);
            blk = W;
        }
        // Rayleigh--Ritz on the basis
        matvec(basis.leftCols(m), W);
        const Eigen::MatrixXd H = basis.leftCols(m).transpose() * W;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (H + H.transpose()));
        const Eigen::MatrixXd ritz = basis.leftCols(m) * es.eigenvectors().rightCols(k);
        const Eigen::VectorXd vals = es.eigenvalues().tail(k);
        matvec(ritz, W);
        double resid = 0.0;
        for (int j = 0; j < k; ++j)
            resid = std::max(resid, (W.col(j) - vals(j) * ritz.col(j)).norm() / std::max(1.0, std::abs(vals(j))));
        V = ritz;
        if (resid < tol) break;
    }
    return V;
}

} // namespace detail

/// Spectral-clustering initialization: bottom-n_cov eigenvectors of the
/// symmetric normalized Laplacian, rows D^{-1/2}-scaled and unit-normalized,
/// clustered by seeded k-means. The hard clustering is returned as an
/// indicator fuzzy cover.
inline FuzzyCover spectral_init(const WeightedGraph& graph, int k, std::uint64_t seed) {
    const int n = graph.n;
    if (k < 1 || k > n) throw std::invalid_argument("spectral_init: need 1 <= k <= n");
    Eigen::VectorXd deg = Eigen::VectorXd::Zero(n);
    for (const auto& e : graph.edges) {
        deg(e.u) += e.w;
        deg(e.v) += e.w;
    }
    for (int i = 0; i < n; ++i)
        if (deg(i) <= 0.0) deg(i) = 1e-12; // isolated-vertex regularization
    const Eigen::VectorXd dinv_sqrt = deg.cwiseSqrt().cwiseInverse();

    Rng rng(seed);
    Eigen::MatrixXd U(n, k);
    if (n <= 3000) {
        Eigen::MatrixXd N = Eigen::MatrixXd::Zero(n, n);
        for (const auto& e : graph.edges) {
            const double nw = e.w * dinv_sqrt(e.u) * dinv_sqrt(e.v);
            N(e.u, e.v) = nw;
            N(e.v, e.u) = nw;
        }
        // bottom of L = I - N is the top of N
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(N);
        U = es.eigenvectors().rightCols(k);
    } else {
        std::vector<std::vector<std::pair<int, double>>> adj_scaled(static_cast<std::size_t>(n));
        for (const auto& e : graph.edges) {
            const double nw = e.w * dinv_sqrt(e.u) * dinv_sqrt(e.v);
            adj_scaled[static_cast<std::size_t>(e.u)].emplace_back(e.v, nw);
            adj_scaled[static_cast<std::size_t>(e.v)].emplace_back(e.u, nw);
        }
        U = detail::block_krylov_topk(adj_scaled, n, k, rng);
    }

    for (int i = 0; i < n; ++i) {
        U.row(i) *= dinv_sqrt(i);
        const double nrm = U.row(i).norm();
        if (nrm > 1e-300) U.row(i) /= nrm;
    }
    const std::vector<int> assign = detail::kmeans(U, k, rng);

    FuzzyCover fc;
    fc.g = Eigen::MatrixXd::Zero(n, k);
    for (int i = 0; i < n; ++i) fc.g(i, assign[static_cast<std::size_t>(i)]) = 1.0;
    fc.validate();
    return fc;
}

/// Logit-like lift of an initial fuzzy cover into model parameters. The
/// paper's direct copy theta <- g collapses under softmax for 0/1 matrices,
/// so entries are scaled by `margin` to keep the argmax structure.
inline Eigen::MatrixXd theta_from_cover(const FuzzyCover& g0, double margin = 4.0) {
    return margin * g0.g;
}

// ---------------------------------------------------------------------------
// Adam
// ---------------------------------------------------------------------------

struct AdamState {
    Eigen::MatrixXd m, v;
    long t = 0;
    double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
};

inline void adam_step(Eigen::MatrixXd& theta, const Eigen::MatrixXd& grad, AdamState& st, double lr) {
    if (st.t == 0) {
        st.m = Eigen::MatrixXd::Zero(theta.rows(), theta.cols());
        st.v = Eigen::MatrixXd::Zero(theta.rows(), theta.cols());
    }
    st.t += 1;
    st.m = st.beta1 * st.m + (1.0 - st.beta1) * grad;
    st.v = st.beta2 * st.v + (1.0 - st.beta2) * grad.cwiseProduct(grad);
    const double bc1 = 1.0 - std::pow(st.beta1, static_cast<double>(st.t));
    const double bc2 = 1.0 - std::pow(st.beta2, static_cast<double>(st.t));
    const Eigen::ArrayXXd mhat = st.m.array() / bc1;
    const Eigen::ArrayXXd vhat = st.v.array() / bc2;
    theta.array() -= lr * mhat / (vhat.sqrt() + st.eps);
}

// ---------------------------------------------------------------------------
// ShapeDiscover driver
// ---------------------------------------------------------------------------

struct EpochLoss {
    double m, g_loss, t0, r, total;
};

struct TrainTrace {
    std::vector<EpochLoss> history;
    FuzzyCover final_cover;
    double graph_seconds = 0.0;
    double init_seconds = 0.0;
    double optimize_seconds = 0.0;
    int epochs_run = 0;
};

/// Full cover-learning pipeline: neighborhood graph, spectral initialization,
/// full-batch Adam on (M + reg*G + T0 + reg*R)(pi_p . softmax . theta), and
/// the pi_inf readout. Stops early when the relative change of the total loss
/// over 20 epochs falls below 1e-7.
inline std::pair<FuzzyCover, TrainTrace> shape_discover(const PointCloud& X, const LearnConfig& cfg) {
    cfg.validate();
    X.validate();
    if (X.n() < cfg.n_cov) throw std::invalid_argument("shape_discover: need n >= n_cov");
    using clock = std::chrono::steady_clock;
    TrainTrace trace;

    auto t0 = clock::now();
    const WeightedGraph graph = cfg.graph_kind == GraphKind::unit_knn ? knn_graph(X, cfg.n_neigh)
                                                                      : umap_graph(X, cfg.n_neigh);
    auto t1 = clock::now();
    trace.graph_seconds = std::chrono::duration<double>(t1 - t0).count();

    const FuzzyCover g0 = spectral_init(graph, cfg.n_cov, cfg.seed);
    Eigen::MatrixXd theta = theta_from_cover(g0, cfg.init_margin);
    auto t2 = clock::now();
    trace.init_seconds = std::chrono::duration<double>(t2 - t1).count();

    const LossWeights weights = LossWeights::from_reg(cfg.reg);
    AdamState adam;
    std::vector<H0Attribution> frozen;
    for (int epoch = 0; epoch < cfg.n_epoch; ++epoch) {
        const Eigen::MatrixXd g = pi_p(softmax_rows(theta), cfg.p);
        const bool refresh = cfg.big_step <= 1 || epoch % cfg.big_step == 0;
        if (refresh) frozen = topology_attributions(g, graph);
        const LossReport rep = combined_loss(g, graph, weights, &frozen);
        if (!std::isfinite(rep.total))
            throw std::runtime_error("shape_discover: non-finite loss at epoch " + std::to_string(epoch) +
                                     " (m=" + fmt_double(rep.m) + ", g=" + fmt_double(rep.g_loss) +
                                     ", t0=" + fmt_double(rep.t0) + ", r=" + fmt_double(rep.r) + ")");
        trace.history.push_back({rep.m, rep.g_loss, rep.t0, rep.r, rep.total});
        const Eigen::MatrixXd grad_theta = chain_gradient(theta, cfg.p, rep.gradient);
        adam_step(theta, grad_theta, adam, cfg.lr);
        trace.epochs_run = epoch + 1;
        if (trace.history.size() > 20) {
            const double then = trace.history[trace.history.size() - 21].total;
            const double now = rep.total;
            if (std::abs(now - then) < 1e-7 * std::max(std::abs(then), 1e-30)) break;
        }
    }
    auto t3 = clock::now();
    trace.optimize_seconds = std::chrono::duration<double>(t3 - t2).count();

    FuzzyCover out;
    out.g = pi_p(softmax_rows(theta), std::numeric_limits<double>::infinity());
    out.validate();
    trace.final_cover = out;
    return {std::move(out), std::move(trace)};
}

} // namespace covercraft
