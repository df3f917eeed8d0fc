#include "gpe/admm_init.hpp"

#include <cmath>

#include "gpe/errors.hpp"

namespace gpe {

double mcp_penalty(double t, double lambda, double gamma) {
    if (t < 0.0) throw input_error("mcp_penalty: t must be non-negative");
    if (gamma <= 1.0) throw input_error("mcp_penalty: gamma must exceed 1");
    if (lambda < 0.0) throw input_error("mcp_penalty: lambda must be non-negative");
    if (lambda == 0.0) return 0.0;
    if (t > gamma * lambda) return gamma * lambda * lambda / 2.0;
    return lambda * t - t * t / (2.0 * gamma);
}

double eta_update(double xi, double lambda, double gamma, double omega) {
    if (gamma * omega <= 1.0)
        throw input_error("eta_update: gamma * omega must exceed 1");
    const double abs_xi = std::abs(xi);
    if (abs_xi > gamma * lambda) return xi;
    if (abs_xi == 0.0) return 0.0;
    const double shrink = std::max(0.0, 1.0 - (lambda / omega) / abs_xi);
    return gamma / (gamma - 1.0 / omega) * xi * shrink;
}

namespace {

// Pairwise-difference operator applied to beta: (A beta)_t = beta_j - beta_j'
// over lexicographic pairs j < j'.
void apply_pairwise(const Eigen::VectorXd& beta, Eigen::VectorXd& out) {
    const int p = static_cast<int>(beta.size());
    int t = 0;
    for (int j = 0; j < p; ++j)
        for (int jp = j + 1; jp < p; ++jp) out[t++] = beta[j] - beta[jp];
}

// A'v for v over pairs: accumulates +v into j and -v into j'.
void apply_pairwise_adjoint(const Eigen::VectorXd& v, Eigen::VectorXd& out) {
    const int p = static_cast<int>(out.size());
    out.setZero();
    int t = 0;
    for (int j = 0; j < p; ++j)
        for (int jp = j + 1; jp < p; ++jp) {
            out[j] += v[t];
            out[jp] -= v[t];
            ++t;
        }
}

double augmented_lagrangian(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                            const AdmmConfig& cfg, double omega,
                            const Eigen::VectorXd& beta, const Eigen::VectorXd& eta,
                            const Eigen::VectorXd& nu, const Eigen::VectorXd& abeta) {
    const Eigen::VectorXd resid = y - X * beta;
    double value = 0.5 * resid.squaredNorm();
    for (int t = 0; t < eta.size(); ++t)
        value += mcp_penalty(std::abs(eta[t]), cfg.lambda, cfg.gamma);
    const Eigen::VectorXd gap = abeta - eta;
    value += nu.dot(gap) + 0.5 * omega * gap.squaredNorm();
    return value;
}

}  // namespace

AdmmState admm_fuse(const FitFrame& frame, const AdmmConfig& cfg) {
    const int p = static_cast<int>(frame.p());
    if (p < 2) throw input_error("admm_fuse: need p >= 2");
    if (cfg.gamma <= 1.0) throw input_error("admm_fuse: gamma must exceed 1");
    if (cfg.gamma * cfg.omega <= 1.0)
        throw input_error("admm_fuse: gamma * omega must exceed 1");
    if (cfg.omega <= 0.0) throw input_error("admm_fuse: omega must be positive");

    const Eigen::MatrixXd& X = frame.data.X;
    // Standardize the response so the fixed (gamma, lambda, omega) operate
    // on a scale-free problem; the selection rule's scale invariance then
    // carries through the initializer. All returned quantities are scaled
    // back to the raw problem.
    const double y_sd = std::sqrt(
        (frame.data.y.array() - frame.data.y.mean()).square().sum() / frame.n());
    const double scale = y_sd > 0.0 ? y_sd : 1.0;
    const Eigen::VectorXd y = frame.data.y / scale;
    const double tol = cfg.tol / scale;
    const int d = p * (p - 1) / 2;
    const Eigen::MatrixXd gram = X.transpose() * X;
    const Eigen::VectorXd xty = X.transpose() * y;

    double omega = cfg.omega;
    const double omega_floor = 1.001 / cfg.gamma;  // keep gamma * omega > 1

    Eigen::LDLT<Eigen::MatrixXd> solver;
    auto factorize = [&]() {
        // A'A = p I - 11'.
        Eigen::MatrixXd system = gram;
        system.array() -= omega;
        system.diagonal().array() += omega * static_cast<double>(p);
        solver.compute(system);
        if (solver.info() != Eigen::Success || solver.rcond() < 1e-12) {
            // Only the all-ones direction can lack curvature; ridge it.
            system.array() += 1e-8 / static_cast<double>(p);
            solver.compute(system);
            if (solver.info() != Eigen::Success || solver.rcond() < 1e-14)
                throw numeric_error("admm_fuse: singular system, rcond = " +
                                    std::to_string(solver.rcond()));
        }
    };
    factorize();

    AdmmState state;
    state.beta = Eigen::VectorXd::Zero(p);
    state.eta = Eigen::VectorXd::Zero(d);
    state.nu = Eigen::VectorXd::Zero(d);

    Eigen::VectorXd abeta(d), adjoint(p), eta_prev(d);
    apply_pairwise(state.beta, abeta);
    state.primal_residual = (abeta - state.eta).norm();

    for (int s = 0; s < cfg.max_iter; ++s) {
        apply_pairwise_adjoint(state.eta - state.nu / omega, adjoint);
        state.beta = solver.solve(omega * adjoint + xty);
        apply_pairwise(state.beta, abeta);

        eta_prev = state.eta;
        for (int t = 0; t < d; ++t) {
            const double xi = abeta[t] + state.nu[t] / omega;
            state.eta[t] = eta_update(xi, cfg.lambda, cfg.gamma, omega);
        }
        state.nu += omega * (abeta - state.eta);

        state.iterations = s + 1;
        state.primal_residual = (abeta - state.eta).norm();
        state.lagrangian_trace.push_back(augmented_lagrangian(
            X, y, cfg, omega, state.beta, state.eta, state.nu, abeta));

        apply_pairwise_adjoint(state.eta - eta_prev, adjoint);
        const double dual_residual = omega * adjoint.norm();
        if (state.primal_residual < tol && dual_residual < tol) {
            state.converged = true;
            break;
        }
        if (cfg.adapt_omega && (s + 1) % 10 == 0) {
            if (state.primal_residual > 10.0 * dual_residual) {
                omega *= 2.0;
                factorize();
            } else if (dual_residual > 10.0 * state.primal_residual &&
                       omega / 2.0 >= omega_floor) {
                omega /= 2.0;
                factorize();
            }
        }
    }
    state.beta *= scale;
    state.eta *= scale;
    state.nu *= scale;
    state.primal_residual *= scale;
    return state;
}

Eigen::VectorXd snap_to_clusters(const Eigen::VectorXd& beta0, double width) {
    if (width <= 0.0) return beta0;
    const int p = static_cast<int>(beta0.size());
    std::vector<int> order(p);
    for (int j = 0; j < p; ++j) order[j] = j;
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return beta0[a] < beta0[b]; });
    Eigen::VectorXd snapped(p);
    int start = 0;
    while (start < p) {
        int end = start;
        double sum = 0.0;
        while (end < p && beta0[order[end]] - beta0[order[start]] <= width) {
            sum += beta0[order[end]];
            ++end;
        }
        const double mean = sum / (end - start);
        for (int i = start; i < end; ++i) snapped[order[i]] = mean;
        start = end;
    }
    return snapped;
}

InitialGrouping discretize_beta(const Eigen::VectorXd& beta0, const FitFrame& frame,
                                int k) {
    const int p = static_cast<int>(frame.p());
    if (beta0.size() != p) throw input_error("initial grouping: beta0 length must equal p");
    const int n_groupable = frame.n_groupable();
    if (k > n_groupable)
        throw input_error("initial grouping: k exceeds groupable coordinate count");
    if (k < 1 && n_groupable > 0)
        throw input_error("initial grouping: k must be >= 1");

    std::vector<int> groupable;
    groupable.reserve(n_groupable);
    for (int j = 0; j < p; ++j)
        if (frame.groupable(j)) groupable.push_back(j);

    InitialGrouping out;
    out.beta0 = beta0;

    Eigen::VectorXd sub(n_groupable);
    for (int i = 0; i < n_groupable; ++i) sub[i] = beta0[groupable[i]];

    const int n_fixed = static_cast<int>(frame.ungrouped_columns.size());
    const int k_total = k + n_fixed;
    std::vector<int> labels(p, -1);
    out.centers.resize(k_total);

    if (n_groupable > 0) {
        const Clustering1D clustering = kmeans_1d_exact(sub, k);
        for (int i = 0; i < n_groupable; ++i)
            labels[groupable[i]] = clustering.assignment.labels[i];
        out.centers.head(k) = clustering.centers;
    }
    int g = k;
    std::vector<bool> fixed(p, false);
    for (int j : frame.ungrouped_columns) {  // std::set iterates ascending
        labels[j] = g;
        out.centers[g] = beta0[j];
        fixed[j] = true;
        ++g;
    }
    out.assignment = GroupAssignment::from_labels(std::move(labels), k_total,
                                                  std::move(fixed));
    return out;
}

InitialGrouping initial_grouping(const AdmmState& state, const FitFrame& frame,
                                 double fuse_tol, int k) {
    InitialGrouping out = discretize_beta(state.beta, frame, k);
    out.fused_pairs = static_cast<int>(
        (state.eta.cwiseAbs().array() < fuse_tol).count());
    return out;
}

}  // namespace gpe
