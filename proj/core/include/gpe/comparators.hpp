#pragma once

#include <Eigen/Dense>
#include <set>
#include <vector>

#include "gpe/dataset.hpp"
#include "gpe/estimator.hpp"

namespace gpe {

struct ComparatorFit {
    Eigen::VectorXd beta_hat;    // length p; exact zeros off the selected set
    std::vector<bool> selected;  // second-stage columns; all-true for OLS
    int model_size = 0;
    Eigen::VectorXd residuals;
    bool rank_flag = false;  // collinear second-stage columns were dropped
};

/// Plain least squares via QR. Infeasible when p >= n (accounting for the
/// intercept consumed by centering).
ComparatorFit ols_fit(const FitFrame& frame);

struct LassoResult {
    Eigen::VectorXd beta;
    std::vector<double> objective_trace;  // per sweep
    int sweeps = 0;
    bool converged = false;
};

/// Cyclic coordinate descent for E_n[(y - x beta)^2] + (lambda/n) sum_j
/// loadings_j |beta_j|, soft-thresholding each coordinate, until the largest
/// coefficient change falls below 1e-9 or 10000 sweeps.
LassoResult lasso_cd(const FitFrame& frame, double lambda,
                     const Eigen::VectorXd& loadings);

/// Post-LASSO: plug-in penalty first stage, then OLS on the selected columns
/// plus the amelioration set.
ComparatorFit plasso_fit(const FitFrame& frame,
                         const std::set<int>& amelioration = {});

/// GPE started at the true coefficient vector.
GpeFit oracle_gpe(const FitFrame& frame, const Eigen::VectorXd& beta_true,
                  GpeOptions options);

}  // namespace gpe
