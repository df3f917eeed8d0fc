#include "gpe/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gpe/errors.hpp"

namespace gpe {

Eigen::MatrixXd grouped_design(const FitFrame& frame, const GroupAssignment& assignment) {
    if (assignment.p() != frame.p())
        throw input_error("grouped_design: assignment and frame disagree on p");
    Eigen::MatrixXd Z = Eigen::MatrixXd::Zero(frame.n(), assignment.k);
    for (int j = 0; j < assignment.p(); ++j)
        Z.col(assignment.labels[j]) += frame.data.X.col(j);
    return Z;
}

Eigen::VectorXd solve_delta(const FitFrame& frame, const GroupAssignment& assignment) {
    const Eigen::MatrixXd Z = grouped_design(frame, assignment);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Z);
    if (qr.rank() < Z.cols()) {
        const Eigen::JacobiSVD<Eigen::MatrixXd> svd(Z);
        throw numeric_error("solve_delta: rank-deficient grouped design, smallest "
                            "singular value " +
                            std::to_string(svd.singularValues().minCoeff()));
    }
    return qr.solve(frame.data.y);
}

double objective(const FitFrame& frame, const GroupAssignment& assignment,
                 const Eigen::VectorXd& delta) {
    if (delta.size() != assignment.k)
        throw input_error("objective: delta length must equal group count");
    const Eigen::VectorXd resid = frame.data.y - grouped_design(frame, assignment) * delta;
    return resid.squaredNorm() / static_cast<double>(frame.n()) /
           static_cast<double>(frame.p());
}

double update_coefficient(const FitFrame& frame, int j,
                          const Eigen::VectorXd& beta_working) {
    if (j < 0 || j >= frame.p()) throw input_error("update_coefficient: bad column index");
    const Eigen::VectorXd resid = frame.data.y - frame.data.X * beta_working;
    const double denom = frame.data.X.col(j).squaredNorm();
    if (denom == 0.0) throw input_error("update_coefficient: zero-variance column");
    return beta_working[j] + frame.data.X.col(j).dot(resid) / denom;
}

namespace {

// Working state of one iterative fit: labels, per-group running means over
// the working coefficients, and the maintained full residual.
struct WorkState {
    std::vector<int> labels;
    std::vector<double> group_sum;
    std::vector<int> group_count;
    Eigen::VectorXd beta;
    Eigen::VectorXd resid;

    double center(int g) const { return group_sum[g] / group_count[g]; }
};

// Donates the non-fixed coefficient with the largest absolute deviation from
// its running center into the emptied group. Donor groups keep >= 1 member.
void repair_empty_group(WorkState& w, int empty, const std::vector<int>& groupable_cols,
                        const std::vector<bool>& fixed) {
    int donor = -1;
    double worst = -1.0;
    for (int j : groupable_cols) {
        if (fixed[j]) continue;
        const int g = w.labels[j];
        if (g == empty || w.group_count[g] < 2) continue;
        const double dev = std::abs(w.beta[j] - w.center(g));
        if (dev > worst) {
            worst = dev;
            donor = j;
        }
    }
    if (donor < 0)
        throw numeric_error("fit_gpe: cannot repair empty group");
    const int src = w.labels[donor];
    w.group_sum[src] -= w.beta[donor];
    --w.group_count[src];
    w.labels[donor] = empty;
    w.group_sum[empty] += w.beta[donor];
    ++w.group_count[empty];
}

struct Snapshot {
    std::vector<int> labels;
    Eigen::VectorXd delta;
    Eigen::VectorXd beta;
    Eigen::VectorXd resid;
    double objective = std::numeric_limits<double>::infinity();
};

// Relabels so groupable groups come first in ascending-center order and
// fixed singletons follow in column order.
GroupAssignment canonical_assignment(const std::vector<int>& labels,
                                     const Eigen::VectorXd& delta, int k_groupable,
                                     const std::vector<bool>& fixed,
                                     Eigen::VectorXd& delta_out) {
    const int k_total = static_cast<int>(delta.size());
    std::vector<int> order(k_groupable);
    for (int g = 0; g < k_groupable; ++g) order[g] = g;
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return delta[a] < delta[b]; });
    std::vector<int> remap(k_total);
    for (int pos = 0; pos < k_groupable; ++pos) remap[order[pos]] = pos;
    for (int g = k_groupable; g < k_total; ++g) remap[g] = g;

    delta_out.resize(k_total);
    for (int g = 0; g < k_total; ++g) delta_out[remap[g]] = delta[g];
    std::vector<int> new_labels(labels.size());
    for (std::size_t j = 0; j < labels.size(); ++j) new_labels[j] = remap[labels[j]];
    return GroupAssignment::from_labels(std::move(new_labels), k_total,
                                        std::vector<bool>(fixed));
}

}  // namespace

GpeFit fit_gpe_from_assignment(const FitFrame& frame, const GpeOptions& options,
                               const GroupAssignment& start) {
    start.validate();
    if (start.p() != frame.p())
        throw input_error("fit_gpe: assignment and frame disagree on p");
    const int p = static_cast<int>(frame.p());
    const int n = static_cast<int>(frame.n());
    const int k_total = start.k;
    const int n_fixed = static_cast<int>(frame.ungrouped_columns.size());
    const int k_groupable = k_total - n_fixed;
    if (k_total > std::min(p, n - 2))
        throw input_error("fit_gpe: k must satisfy k <= min(p, n-2)");

    const Eigen::MatrixXd& X = frame.data.X;
    const Eigen::VectorXd& y = frame.data.y;
    Eigen::VectorXd col_norms(p);
    for (int j = 0; j < p; ++j) col_norms[j] = X.col(j).squaredNorm();

    std::vector<int> groupable_cols;
    groupable_cols.reserve(p - n_fixed);
    std::vector<bool> fixed(start.fixed);
    for (int j = 0; j < p; ++j)
        if (!fixed[j]) groupable_cols.push_back(j);

    WorkState w;
    w.labels = start.labels;
    w.group_sum.assign(k_total, 0.0);
    w.group_count.assign(k_total, 0);

    auto resolve_delta = [&]() {
        GroupAssignment current = GroupAssignment::from_labels(
            w.labels, k_total, std::vector<bool>(fixed));
        Eigen::VectorXd delta;
        try {
            delta = solve_delta(frame, current);
        } catch (const numeric_error&) {
            // One repair retry: an emptied group is the expected cause.
            bool repaired = false;
            for (int g = 0; g < k_total; ++g) {
                if (std::count(w.labels.begin(), w.labels.end(), g) == 0) {
                    repair_empty_group(w, g, groupable_cols, fixed);
                    repaired = true;
                }
            }
            if (!repaired) throw;
            current = GroupAssignment::from_labels(w.labels, k_total,
                                                   std::vector<bool>(fixed));
            delta = solve_delta(frame, current);
        }
        return delta;
    };

    // Step (a): group coefficients for the starting assignment, snapped.
    Eigen::VectorXd delta = resolve_delta();
    w.beta.resize(p);
    for (int j = 0; j < p; ++j) w.beta[j] = delta[w.labels[j]];
    w.resid = y - X * w.beta;
    for (int j = 0; j < p; ++j) {
        w.group_sum[w.labels[j]] += w.beta[j];
        ++w.group_count[w.labels[j]];
    }

    GpeFit fit;
    fit.k = k_groupable;
    fit.has_intercept = frame.intercept;
    fit.objective_trace.push_back(w.resid.squaredNorm() / n / p);

    Snapshot best;
    auto take_snapshot = [&](double obj) {
        best.labels = w.labels;
        best.delta = delta;
        best.beta = w.beta;
        best.resid = w.resid;
        best.objective = obj;
    };
    take_snapshot(fit.objective_trace.back());

    std::vector<int> prev_labels;
    double prev_objective = best.objective;

    for (int sweep = 0; sweep < options.max_iter; ++sweep) {
        prev_labels = w.labels;
        // Residual scale for the reassignment gate, fixed over the sweep.
        const double sigma_hat = std::sqrt(w.resid.squaredNorm() / n);

        // Step (b): coordinate update, nearest-center reassignment, running
        // group means.
        for (int j : groupable_cols) {
            const double old = w.beta[j];
            const double u = old + X.col(j).dot(w.resid) / col_norms[j];
            w.resid -= X.col(j) * (u - old);
            w.beta[j] = u;

            int nearest = 0;
            double best_dist = std::numeric_limits<double>::infinity();
            for (int g = 0; g < k_groupable; ++g) {
                const double dist = std::abs(u - w.center(g));
                if (dist < best_dist) {
                    best_dist = dist;
                    nearest = g;
                }
            }
            const int src = w.labels[j];
            // A move must beat the update's sampling noise, or near-tied
            // groups absorb it coefficient by coefficient.
            const double margin =
                std::max(options.reassign_z * sigma_hat / std::sqrt(col_norms[j]),
                         options.min_move_gain);
            if (nearest == src ||
                std::abs(u - w.center(src)) - best_dist <= margin) {
                w.group_sum[src] += u - old;
            } else {
                w.group_sum[src] -= old;
                --w.group_count[src];
                w.labels[j] = nearest;
                w.group_sum[nearest] += u;
                ++w.group_count[nearest];
                if (w.group_count[src] == 0)
                    repair_empty_group(w, src, groupable_cols, fixed);
            }
        }

        // Step (c): re-solve the group coefficients and snap.
        delta = resolve_delta();
        for (int j = 0; j < p; ++j) w.beta[j] = delta[w.labels[j]];
        w.resid = y - X * w.beta;
        std::fill(w.group_sum.begin(), w.group_sum.end(), 0.0);
        std::fill(w.group_count.begin(), w.group_count.end(), 0);
        for (int j = 0; j < p; ++j) {
            w.group_sum[w.labels[j]] += w.beta[j];
            ++w.group_count[w.labels[j]];
        }

        const double obj = w.resid.squaredNorm() / n / p;
        fit.objective_trace.push_back(obj);
        fit.iterations = sweep + 1;
        if (obj < best.objective) take_snapshot(obj);

        // Step (d): assignment fixed point plus objective guard.
        if (w.labels == prev_labels && prev_objective - obj < options.tol) {
            fit.converged = true;
            break;
        }
        prev_objective = obj;
    }

    fit.assignment = canonical_assignment(best.labels, best.delta, k_groupable, fixed,
                                          fit.delta_hat);
    fit.beta_hat = best.beta;
    fit.residuals = best.resid;
    fit.objective = best.objective;
    if (frame.intercept)
        fit.intercept_hat = frame.y_mean - frame.column_means.dot(fit.beta_hat);
    return fit;
}

double snap_width(const FitFrame& frame, const Eigen::VectorXd& beta0,
                  double snap_z) {
    if (snap_z <= 0.0) return 0.0;
    const int p = static_cast<int>(frame.p());
    std::vector<double> norms(p);
    for (int j = 0; j < p; ++j) norms[j] = frame.data.X.col(j).norm();
    std::nth_element(norms.begin(), norms.begin() + p / 2, norms.end());
    const double typical_norm = std::max(norms[p / 2], 1e-12);
    const double sigma0 = std::sqrt(
        (frame.data.y - frame.data.X * beta0).squaredNorm() / frame.n());
    return snap_z * sigma0 / typical_norm;
}

Eigen::VectorXd snapped_start(const FitFrame& frame, const Eigen::VectorXd& beta0,
                              double snap_z) {
    return snap_to_clusters(beta0, snap_width(frame, beta0, snap_z));
}

GpeFit fit_gpe(const FitFrame& frame, const GpeOptions& options) {
    const int n_groupable = frame.n_groupable();
    if (options.k < 1 || options.k > n_groupable)
        throw input_error("fit_gpe: k must lie in [1, groupable column count]");

    if (options.init.kind == InitKind::Admm && frame.p() < 2) {
        // Pairwise fusion needs two columns; a single-column fit has only
        // the trivial grouping.
        const InitialGrouping init =
            discretize_beta(Eigen::VectorXd::Zero(frame.p()), frame, options.k);
        return fit_gpe_from_assignment(frame, options, init.assignment);
    }
    if (options.init.kind != InitKind::Admm) {
        const double width = snap_width(frame, options.init.beta0, options.snap_z);
        const InitialGrouping init = discretize_beta(
            snap_to_clusters(options.init.beta0, width), frame, options.k);
        GpeOptions opts = options;
        opts.min_move_gain = width;
        return fit_gpe_from_assignment(frame, opts, init.assignment);
    }

    GpeFit best;
    bool have = false;
    for (const AdmmConfig& cfg : admm_lambda_grid(options)) {
        const AdmmState state = admm_fuse(frame, cfg);
        const double width = snap_width(frame, state.beta, options.snap_z);
        const InitialGrouping init = discretize_beta(
            snap_to_clusters(state.beta, width), frame, options.k);
        GpeOptions opts = options;
        opts.min_move_gain = width;
        GpeFit fit = fit_gpe_from_assignment(frame, opts, init.assignment);
        if (!have || fit.objective < best.objective) {
            best = std::move(fit);
            have = true;
        }
    }
    return best;
}

std::vector<AdmmConfig> admm_lambda_grid(const GpeOptions& options) {
    std::vector<AdmmConfig> configs;
    if (options.admm_lambdas.empty()) {
        configs.push_back(options.admm);
    } else {
        for (double lambda : options.admm_lambdas) {
            AdmmConfig cfg = options.admm;
            cfg.lambda = lambda;
            configs.push_back(cfg);
        }
    }
    return configs;
}

OriginalScaleFit fitted_beta_original_scale(const GpeFit& fit, const FitFrame& frame) {
    if (fit.beta_hat.size() != frame.p())
        throw input_error("fitted_beta_original_scale: fit and frame disagree on p");
    OriginalScaleFit out;
    out.beta = fit.beta_hat;
    out.has_intercept = frame.intercept;
    out.intercept = frame.intercept
                        ? frame.y_mean - frame.column_means.dot(fit.beta_hat)
                        : 0.0;
    return out;
}

}  // namespace gpe
