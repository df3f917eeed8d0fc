#include "gpe/comparators.hpp"

#include <algorithm>
#include <cmath>

#include "gpe/errors.hpp"
#include "gpe/normal.hpp"

namespace gpe {

ComparatorFit ols_fit(const FitFrame& frame) {
    const int n = static_cast<int>(frame.n());
    const int p = static_cast<int>(frame.p());
    if (p + (frame.intercept ? 1 : 0) >= n)
        throw input_error("ols_fit: infeasible, p >= n");
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(frame.data.X);
    if (qr.rank() < p) throw numeric_error("ols_fit: rank-deficient design");
    ComparatorFit fit;
    fit.beta_hat = qr.solve(frame.data.y);
    fit.selected.assign(p, true);
    fit.model_size = p;
    fit.residuals = frame.data.y - frame.data.X * fit.beta_hat;
    return fit;
}

LassoResult lasso_cd(const FitFrame& frame, double lambda,
                     const Eigen::VectorXd& loadings) {
    const int n = static_cast<int>(frame.n());
    const int p = static_cast<int>(frame.p());
    if (lambda <= 0.0) throw input_error("lasso_cd: lambda must be positive");
    if (loadings.size() != p || (loadings.array() <= 0.0).any())
        throw input_error("lasso_cd: loadings must be positive, length p");

    const Eigen::MatrixXd& X = frame.data.X;
    const Eigen::VectorXd& y = frame.data.y;
    Eigen::VectorXd col_norms(p);
    for (int j = 0; j < p; ++j) col_norms[j] = X.col(j).squaredNorm();

    LassoResult out;
    out.beta = Eigen::VectorXd::Zero(p);
    Eigen::VectorXd resid = y;

    auto soft = [](double z, double t) {
        if (z > t) return z - t;
        if (z < -t) return z + t;
        return 0.0;
    };
    auto objective = [&]() {
        return resid.squaredNorm() / n +
               (lambda / n) * (loadings.array() * out.beta.array().abs()).sum();
    };

    constexpr int kMaxSweeps = 10000;
    constexpr double kTol = 1e-9;
    for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
        double max_change = 0.0;
        for (int j = 0; j < p; ++j) {
            const double old = out.beta[j];
            // Partial-residual inner product, then soft-threshold at
            // lambda * loading / 2 (the objective's 1/n cancels).
            const double z = X.col(j).dot(resid) + col_norms[j] * old;
            const double next = soft(z, lambda * loadings[j] / 2.0) / col_norms[j];
            if (next != old) {
                resid -= X.col(j) * (next - old);
                out.beta[j] = next;
                max_change = std::max(max_change, std::abs(next - old));
            }
        }
        out.sweeps = sweep + 1;
        out.objective_trace.push_back(objective());
        if (max_change < kTol) {
            out.converged = true;
            break;
        }
    }
    return out;
}

namespace {

double plugin_lambda(double sigma, int n, int p) {
    const double gamma_pen = 0.1 / std::log(std::max(p, n));
    return 2.0 * 1.1 * std::sqrt(static_cast<double>(n)) * sigma *
           norm_quantile(1.0 - gamma_pen / (2.0 * p));
}

}  // namespace

ComparatorFit plasso_fit(const FitFrame& frame, const std::set<int>& amelioration) {
    const int n = static_cast<int>(frame.n());
    const int p = static_cast<int>(frame.p());
    const Eigen::MatrixXd& X = frame.data.X;
    const Eigen::VectorXd& y = frame.data.y;
    for (int j : amelioration)
        if (j < 0 || j >= p)
            throw input_error("plasso_fit: amelioration index out of range");

    // sigma_hat refreshed twice from residuals, starting at sd(y); the
    // second refresh prices the final first-stage fit.
    const Eigen::VectorXd loadings = Eigen::VectorXd::Ones(p);
    double sigma = std::sqrt((y.array() - y.mean()).square().sum() / n);
    Eigen::VectorXd beta1;
    for (int it = 0; it < 2; ++it) {
        beta1 = lasso_cd(frame, plugin_lambda(sigma, n, p), loadings).beta;
        sigma = std::max(std::sqrt((y - X * beta1).squaredNorm() / n), 1e-12);
    }

    ComparatorFit fit;
    fit.selected.assign(p, false);
    std::vector<int> active;
    for (int j = 0; j < p; ++j)
        if (beta1[j] != 0.0 || amelioration.count(j)) {
            fit.selected[j] = true;
            active.push_back(j);
        }

    fit.beta_hat = Eigen::VectorXd::Zero(p);
    if (active.empty()) {
        fit.model_size = 0;
        fit.residuals = y;
        return fit;
    }

    Eigen::MatrixXd sub(n, static_cast<int>(active.size()));
    for (std::size_t i = 0; i < active.size(); ++i) sub.col(i) = X.col(active[i]);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(sub);
    if (qr.rank() < sub.cols()) {
        // Drop the non-pivot columns and refit on the independent ones.
        fit.rank_flag = true;
        const auto& perm = qr.colsPermutation().indices();
        std::vector<int> kept;
        for (int r = 0; r < qr.rank(); ++r) kept.push_back(active[perm[r]]);
        std::sort(kept.begin(), kept.end());
        fit.selected.assign(p, false);
        for (int j : kept) fit.selected[j] = true;
        active = kept;
        sub.resize(n, static_cast<int>(active.size()));
        for (std::size_t i = 0; i < active.size(); ++i) sub.col(i) = X.col(active[i]);
        qr.compute(sub);
    }
    const Eigen::VectorXd coef = qr.solve(y);
    for (std::size_t i = 0; i < active.size(); ++i) fit.beta_hat[active[i]] = coef[i];
    fit.model_size = static_cast<int>(active.size());
    fit.residuals = y - sub * coef;
    return fit;
}

GpeFit oracle_gpe(const FitFrame& frame, const Eigen::VectorXd& beta_true,
                  GpeOptions options) {
    if (beta_true.size() != frame.p())
        throw input_error("oracle_gpe: beta_true length must equal p");
    options.init = GpeInit::oracle(beta_true);
    return fit_gpe(frame, options);
}

}  // namespace gpe
