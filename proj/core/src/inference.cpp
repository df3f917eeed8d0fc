#include "gpe/inference.hpp"

#include <cmath>

#include "gpe/errors.hpp"
#include "gpe/normal.hpp"

namespace gpe {

double hc0_variance(const Eigen::MatrixXd& X, const Eigen::VectorXd& residuals,
                    const Eigen::VectorXd& tau) {
    const double n = static_cast<double>(X.rows());
    const Eigen::MatrixXd gram = X.transpose() * X / n;
    Eigen::LDLT<Eigen::MatrixXd> solver(gram);
    if (solver.info() != Eigen::Success || solver.rcond() < 1e-14)
        throw numeric_error("hc0_variance: singular Gram matrix");
    const Eigen::VectorXd a = solver.solve(tau);
    const Eigen::MatrixXd weighted = X.array().colwise() * residuals.array();
    const Eigen::MatrixXd meat = weighted.transpose() * weighted / n;
    const double sigma2 = a.dot(meat * a);
    return sigma2 / n;
}

double robust_variance(const FitFrame& frame, const GpeFit& fit,
                       const Eigen::VectorXd& tau) {
    if (tau.size() != frame.p())
        throw input_error("robust_variance: tau length must equal p");
    if (std::abs(tau.norm() - 1.0) > 1e-8)
        throw input_error("robust_variance: tau must have unit norm");
    if (fit.residuals.size() != frame.n())
        throw input_error("robust_variance: fit and frame disagree on n");

    const Eigen::MatrixXd Z = grouped_design(frame, fit.assignment);
    Eigen::VectorXd tau_grouped = Eigen::VectorXd::Zero(fit.assignment.k);
    for (int j = 0; j < fit.assignment.p(); ++j)
        tau_grouped[fit.assignment.labels[j]] += tau[j];
    return hc0_variance(Z, fit.residuals, tau_grouped);
}

Eigen::VectorXd theta_functional(int p) {
    if (p < 1) throw input_error("theta_functional: p must be positive");
    return Eigen::VectorXd::Constant(p, 1.0 / std::sqrt(static_cast<double>(p)));
}

RobustSummary t_test(const FitFrame& frame, const GpeFit& fit,
                     const Eigen::VectorXd& tau, double theta_0, double level) {
    if (level <= 0.0 || level >= 1.0)
        throw input_error("t_test: level must lie in (0,1)");
    RobustSummary out;
    out.tau = tau;
    out.level = level;
    out.theta_hat = tau.dot(fit.beta_hat);
    const double var = robust_variance(frame, fit, tau);
    out.se_theta = std::sqrt(std::max(0.0, var));
    if (out.se_theta == 0.0) {
        if (out.theta_hat == theta_0) {
            out.t_stat = 0.0;
            out.p_value = 1.0;
        } else {
            out.t_stat = std::numeric_limits<double>::infinity();
            out.p_value = 0.0;
            out.degenerate = true;
        }
    } else {
        out.t_stat = (out.theta_hat - theta_0) / out.se_theta;
        out.p_value = two_sided_p(out.t_stat);
    }
    out.reject = out.p_value < level;
    return out;
}

Eigen::VectorXd comparator_se_convention(const std::vector<bool>& selected,
                                         const Eigen::VectorXd& tau) {
    if (static_cast<Eigen::Index>(selected.size()) != tau.size())
        throw input_error("comparator_se_convention: length mismatch");
    Eigen::VectorXd restricted = tau;
    for (Eigen::Index j = 0; j < tau.size(); ++j)
        if (!selected[j]) restricted[j] = 0.0;
    return restricted;
}

}  // namespace gpe
