#pragma once

#include <Eigen/Dense>
#include <vector>

#include "gpe/cluster1d.hpp"
#include "gpe/dataset.hpp"

namespace gpe {

struct AdmmConfig {
    double gamma = 2.0;   // MCP concavity, must exceed 1
    double lambda = 1.0;  // penalty level
    double omega = 1.0;   // initial augmentation weight; gamma * omega > 1
    double tol = 1e-6;    // on the primal residual ||A beta - eta||
    int max_iter = 2000;
    // Residual balancing (rescale omega when primal and dual residuals
    // diverge by 10x). omega is solver-internal; the objective depends on
    // (gamma, lambda) only.
    bool adapt_omega = true;
};

struct AdmmState {
    Eigen::VectorXd beta;  // length p
    Eigen::VectorXd eta;   // length d = p(p-1)/2, lexicographic over pairs j < j'
    Eigen::VectorXd nu;    // length d
    int iterations = 0;
    double primal_residual = 0.0;
    bool converged = false;
    std::vector<double> lagrangian_trace;  // augmented Lagrangian per iterate
};

/// MCP value lambda * int_0^t (1 - u/(gamma*lambda))_+ du for t >= 0.
double mcp_penalty(double t, double lambda, double gamma);

/// Firm-threshold update for a scalar eta-subproblem input xi: scaled
/// soft-thresholding inside |xi| <= gamma*lambda, identity outside.
/// Requires gamma * omega > 1.
double eta_update(double xi, double lambda, double gamma, double omega);

/// Pairwise-fusion regression with MCP penalty solved by ADMM; produces the
/// starting coefficients for the grouped fit. Non-convergence within
/// max_iter is not an error: the state comes back flagged.
AdmmState admm_fuse(const FitFrame& frame, const AdmmConfig& config = {});

struct InitialGrouping {
    Eigen::VectorXd beta0;       // length p
    GroupAssignment assignment;  // k groupable groups plus fixed singletons
    Eigen::VectorXd centers;     // per group; fixed groups carry their beta0 value
    int fused_pairs = 0;         // count of |eta| < fuse_tol, diagnostic only
};

/// Discretizes the ADMM coefficients into k groups by exact 1-D k-means over
/// groupable coordinates; ungrouped columns are appended as fixed singleton
/// groups in column order.
InitialGrouping initial_grouping(const AdmmState& state, const FitFrame& frame,
                                 double fuse_tol, int k);

/// The same discretization applied to an arbitrary coefficient vector
/// (provided or oracle starting values).
InitialGrouping discretize_beta(const Eigen::VectorXd& beta0, const FitFrame& frame,
                                int k);

/// Collapses values into exact ties by walking the sorted vector in windows
/// of the given width and snapping each window to its mean. Splits below
/// the width then fall back to deterministic positional rules downstream.
Eigen::VectorXd snap_to_clusters(const Eigen::VectorXd& beta0, double width);

}  // namespace gpe
