#pragma once

#include <Eigen/Dense>
#include <vector>

#include "gpe/dataset.hpp"
#include "gpe/estimator.hpp"

namespace gpe {

struct RobustSummary {
    double theta_hat = 0.0;
    double se_theta = 0.0;
    double t_stat = 0.0;
    double p_value = 1.0;
    bool reject = false;
    double level = 0.05;
    Eigen::VectorXd tau;
    bool degenerate = false;  // zero variance with theta_hat != theta_0
};

/// Heteroskedasticity-robust (HC0) variance of tau' beta_hat built from the
/// grouped design: tau' m A^{-1} m' E_n[x'x e^2] m A^{-1} m' tau / n.
/// Requires ||tau|| = 1.
double robust_variance(const FitFrame& frame, const GpeFit& fit,
                       const Eigen::VectorXd& tau);

/// tau = (1, ..., 1) / sqrt(p), the scalar summary functional.
Eigen::VectorXd theta_functional(int p);

/// Two-sided t-test of H0: tau' beta = theta_0 against the standard normal.
RobustSummary t_test(const FitFrame& frame, const GpeFit& fit,
                     const Eigen::VectorXd& tau, double theta_0,
                     double level = 0.05);

/// Comparator convention: coefficients shrunk away in the first stage are
/// treated as constants, so tau is zeroed off the selected set.
Eigen::VectorXd comparator_se_convention(const std::vector<bool>& selected,
                                         const Eigen::VectorXd& tau);

/// HC0 sandwich variance of tau' beta_ols for an arbitrary design; used by
/// the comparators and the k = p equivalence checks.
double hc0_variance(const Eigen::MatrixXd& X, const Eigen::VectorXd& residuals,
                    const Eigen::VectorXd& tau);

}  // namespace gpe
