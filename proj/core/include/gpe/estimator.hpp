#pragma once

#include <Eigen/Dense>
#include <vector>

#include "gpe/admm_init.hpp"
#include "gpe/cluster1d.hpp"
#include "gpe/dataset.hpp"

namespace gpe {

enum class InitKind { Admm, Provided, Oracle };

struct GpeInit {
    InitKind kind = InitKind::Admm;
    Eigen::VectorXd beta0;  // used by Provided and Oracle

    static GpeInit admm() { return {}; }
    static GpeInit provided(Eigen::VectorXd beta0) {
        return {InitKind::Provided, std::move(beta0)};
    }
    static GpeInit oracle(Eigen::VectorXd beta_true) {
        return {InitKind::Oracle, std::move(beta_true)};
    }
};

struct GpeOptions {
    int k = 1;            // groups over groupable columns
    int max_iter = 100;   // full coordinate sweeps
    double tol = 1e-8;    // objective-improvement guard at the fixed point
    GpeInit init;
    AdmmConfig admm;      // initializer settings when init.kind == Admm
    double fuse_tol = 1e-6;  // diagnostic threshold on |eta|
    // A coefficient changes group only when the gain in center distance
    // exceeds reassign_z standard errors of its one-dimensional update;
    // keeps near-tied groups from absorbing sample noise.
    double reassign_z = 2.0;
    // Multi-start over the fusion penalty level: one ADMM run per value,
    // best final objective wins. The right fusion strength depends on the
    // unknown coefficient separations, and over-fusion cannot be undone
    // downstream. Empty: use admm.lambda alone.
    std::vector<double> admm_lambdas{4.0, 1.0, 0.25, 0.1};
    // Starting values within snap_z standard errors of each other are
    // collapsed to exact ties before discretization, so sub-noise splits
    // are positional rather than noise-ranked.
    double snap_z = 8.0;
    // Resolution floor for reassignments, set internally to the snap width
    // of the start in use: sweeps do not resolve finer than the initializer.
    double min_move_gain = 0.0;
};

struct GpeFit {
    Eigen::VectorXd beta_hat;    // length p
    GroupAssignment assignment;  // k groupable groups plus fixed singletons
    Eigen::VectorXd delta_hat;   // one entry per group
    double intercept_hat = 0.0;
    bool has_intercept = false;
    Eigen::VectorXd residuals;   // length n
    double objective = 0.0;      // Q_n at the returned iterate
    std::vector<double> objective_trace;
    int iterations = 0;
    bool converged = false;
    int k = 0;  // groupable group count
};

/// Aggregated design X m: one column per group, each the sum of its member
/// columns (fixed singletons pass through).
Eigen::MatrixXd grouped_design(const FitFrame& frame, const GroupAssignment& assignment);

/// Least-squares group coefficients for a fixed assignment, solved by QR on
/// the aggregated design. Throws numeric_error on rank deficiency.
Eigen::VectorXd solve_delta(const FitFrame& frame, const GroupAssignment& assignment);

/// Q_n(m delta): mean squared residual divided by p.
double objective(const FitFrame& frame, const GroupAssignment& assignment,
                 const Eigen::VectorXd& delta);

/// Unpenalized one-dimensional least-squares update for coordinate j holding
/// the other coefficients at their working values.
double update_coefficient(const FitFrame& frame, int j,
                          const Eigen::VectorXd& beta_working);

GpeFit fit_gpe(const FitFrame& frame, const GpeOptions& options);

/// Runs the iterative fit from an explicit starting assignment.
GpeFit fit_gpe_from_assignment(const FitFrame& frame, const GpeOptions& options,
                               const GroupAssignment& start);

/// Snap resolution implied by the residual scale of beta0 on this frame.
double snap_width(const FitFrame& frame, const Eigen::VectorXd& beta0, double snap_z);

/// Starting values snapped into exact ties at the coordinate noise scale.
Eigen::VectorXd snapped_start(const FitFrame& frame, const Eigen::VectorXd& beta0,
                              double snap_z);

/// The initializer configurations fit_gpe tries (one per penalty level).
std::vector<AdmmConfig> admm_lambda_grid(const GpeOptions& options);

struct OriginalScaleFit {
    Eigen::VectorXd beta;
    double intercept = 0.0;
    bool has_intercept = false;
};

/// Undoes centering: the intercept absorbs the shift, the slopes are
/// unchanged.
OriginalScaleFit fitted_beta_original_scale(const GpeFit& fit, const FitFrame& frame);

}  // namespace gpe
