#include "gpe/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "gpe/errors.hpp"
#include "gpe/inference.hpp"
#include "gpe/normal.hpp"
#include "gpe/rng.hpp"
#include "gpe/selection.hpp"

namespace gpe {

std::string to_string(DgpName name) {
    switch (name) {
        case DgpName::CnS: return "cns";
        case DgpName::CaS1: return "cas1";
        case DgpName::CaS2: return "cas2";
        case DgpName::DS1: return "ds1";
        case DgpName::MnS: return "mns";
        case DgpName::MS: return "ms";
        case DgpName::DnS: return "dns";
        case DgpName::DS2: return "ds2";
        case DgpName::DaS2: return "das2";
    }
    return "?";
}

std::vector<std::string> dgp_names() {
    return {"cns", "cas1", "cas2", "ds1", "mns", "ms", "dns", "ds2", "das2"};
}

DgpName dgp_from_string(const std::string& name) {
    std::string lower(name);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    if (lower == "cns") return DgpName::CnS;
    if (lower == "cas1") return DgpName::CaS1;
    if (lower == "cas2") return DgpName::CaS2;
    if (lower == "ds1" || lower == "d-s1") return DgpName::DS1;
    if (lower == "mns") return DgpName::MnS;
    if (lower == "ms" || lower == "m-s") return DgpName::MS;
    if (lower == "dns") return DgpName::DnS;
    if (lower == "ds2" || lower == "d-s2") return DgpName::DS2;
    if (lower == "das2") return DgpName::DaS2;
    std::string valid;
    for (const auto& v : dgp_names()) valid += (valid.empty() ? "" : ", ") + v;
    throw input_error("unknown DGP '" + name + "'; valid names: " + valid);
}

std::string to_string(EstimatorKind kind) {
    switch (kind) {
        case EstimatorKind::Gpe: return "GPE";
        case EstimatorKind::Plasso: return "pLASSO";
        case EstimatorKind::Ols: return "OLS";
        case EstimatorKind::OracleOls: return "Orac.OLS";
        case EstimatorKind::OracleGpe: return "Orac.GPE";
    }
    return "?";
}

EstimatorKind estimator_from_string(const std::string& name) {
    std::string lower(name);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    if (lower == "gpe") return EstimatorKind::Gpe;
    if (lower == "plasso") return EstimatorKind::Plasso;
    if (lower == "ols") return EstimatorKind::Ols;
    if (lower == "orac-ols" || lower == "orac.ols") return EstimatorKind::OracleOls;
    if (lower == "orac-gpe" || lower == "orac.gpe") return EstimatorKind::OracleGpe;
    throw input_error("unknown estimator '" + name +
                      "'; valid names: gpe, plasso, ols, orac-ols, orac-gpe");
}

Eigen::VectorXd make_beta(const DgpSpec& spec) {
    const int p = spec.p;
    if (p < 2) throw input_error("make_beta: p must be at least 2");
    Eigen::VectorXd beta(p);
    auto tau_j = [&](int j) { return 0.9 * j / (p - 1.0) + 0.05; };  // j is 0-based
    switch (spec.name) {
        case DgpName::CnS: {
            const double slope = spec.cns_literal_slope ? 4.0 : 2.0;
            for (int j = 0; j < p; ++j) beta[j] = 2.0 + slope * j / (p - 1.0);
            break;
        }
        case DgpName::CaS1:
            for (int j = 0; j < p; ++j) beta[j] = norm_quantile(tau_j(j));
            break;
        case DgpName::CaS2:
            for (int j = 0; j < p; ++j) beta[j] = std::pow(0.7, j);
            break;
        case DgpName::DS1:
            for (int j = 0; j < p; ++j) beta[j] = j < 5 ? 1.0 : 0.0;
            break;
        case DgpName::MnS:
            for (int j = 0; j < p; ++j)
                beta[j] = (j < 5 ? std::abs(norm_quantile(tau_j(j))) : 0.0) + 0.1;
            break;
        case DgpName::MS:
            for (int j = 0; j < p; ++j) beta[j] = j < 5 ? norm_quantile(tau_j(j)) : 0.0;
            break;
        case DgpName::DnS:
            for (int j = 0; j < p; ++j) beta[j] = (j < 5 ? 1.0 : 0.0) + 0.1;
            break;
        case DgpName::DS2: {
            const int cut = (p + 1) / 2;
            for (int j = 0; j < p; ++j) beta[j] = j < cut ? 1.0 : 0.0;
            break;
        }
        case DgpName::DaS2: {
            const double scale = std::sqrt(2.0 * spec.n);
            for (int j = 0; j < p; ++j)
                beta[j] = (j < 5 ? 1.0 : 0.0) + chi1_quantile(tau_j(j)) / scale;
            break;
        }
    }
    return beta;
}

namespace {

// AR(1) recursion x_1 = z_1, x_j = 0.5 x_{j-1} + sqrt(0.75) z_j reproduces
// the Toeplitz correlation 0.5^|j-j'| with unit variances.
Eigen::MatrixXd sample_design(int n, int p, SplitMix64& rng) {
    Eigen::MatrixXd X(n, p);
    const double carry = 0.5;
    const double fresh = std::sqrt(0.75);
    for (int i = 0; i < n; ++i) {
        X(i, 0) = rng.normal();
        for (int j = 1; j < p; ++j) X(i, j) = carry * X(i, j - 1) + fresh * rng.normal();
    }
    return X;
}

Eigen::VectorXd sample_errors(const Eigen::MatrixXd& X, bool chi_square,
                              SplitMix64& rng) {
    const int n = static_cast<int>(X.rows());
    Eigen::VectorXd eps(n);
    for (int i = 0; i < n; ++i) {
        double u = rng.normal();
        if (chi_square) u = (u * u - 1.0) / std::sqrt(2.0);
        eps[i] = u * std::sqrt((1.0 + X(i, 0) * X(i, 0)) / 2.0);
    }
    return eps;
}

}  // namespace

Replication sample_replication(const DgpSpec& spec, std::uint64_t seed) {
    if (spec.n < 3) throw input_error("sample_replication: n must be at least 3");
    Replication rep;
    rep.seed = seed;
    rep.beta_true = make_beta(spec);
    rep.theta_true = rep.beta_true.sum() / std::sqrt(static_cast<double>(spec.p));

    SplitMix64 x_stream(derive_seed(seed, 1));
    SplitMix64 u_stream(derive_seed(seed, 2));
    rep.X = sample_design(spec.n, spec.p, x_stream);
    rep.y = rep.X * rep.beta_true +
            sample_errors(rep.X, spec.chi_square_errors(), u_stream);
    return rep;
}

ComparatorFit oracle_ols(const DgpSpec& spec, const Replication& rep) {
    const int n = spec.n;
    if (3 * n <= spec.p) throw input_error("oracle_ols: 3n must exceed p");
    SplitMix64 x_stream(derive_seed(rep.seed, 3));
    SplitMix64 u_stream(derive_seed(rep.seed, 4));
    const Eigen::MatrixXd extra_x = sample_design(2 * n, spec.p, x_stream);
    const Eigen::VectorXd extra_y =
        extra_x * rep.beta_true +
        sample_errors(extra_x, spec.chi_square_errors(), u_stream);

    Eigen::MatrixXd X(3 * n, spec.p);
    X.topRows(n) = rep.X;
    X.bottomRows(2 * n) = extra_x;
    Eigen::VectorXd y(3 * n);
    y.head(n) = rep.y;
    y.tail(2 * n) = extra_y;

    std::vector<std::string> names(spec.p);
    for (int j = 0; j < spec.p; ++j) names[j] = "x" + std::to_string(j + 1);
    const FitFrame frame = prepare(make_dataset(std::move(y), std::move(X), names),
                                   /*intercept=*/false);
    return ols_fit(frame);
}

namespace {

double median(std::vector<double> values) {
    if (values.empty()) return 0.0;
    std::sort(values.begin(), values.end());
    const std::size_t m = values.size() / 2;
    if (values.size() % 2 == 1) return values[m];
    return 0.5 * (values[m - 1] + values[m]);
}

struct RepOutcome {
    std::vector<ReplicationRecord> records;  // one per estimator
};

RepOutcome run_replication(const DgpSpec& spec, const McOptions& options,
                           std::uint64_t seed) {
    const Replication rep = sample_replication(spec, seed);
    std::vector<std::string> names(spec.p);
    for (int j = 0; j < spec.p; ++j) names[j] = "x" + std::to_string(j + 1);
    const FitFrame frame =
        prepare(make_dataset(rep.y, rep.X, names), /*intercept=*/false);
    const Eigen::VectorXd tau = theta_functional(spec.p);
    const double sqrt_p = std::sqrt(static_cast<double>(spec.p));

    RepOutcome outcome;
    outcome.records.resize(options.estimators.size());

    for (std::size_t e = 0; e < options.estimators.size(); ++e) {
        ReplicationRecord& rec = outcome.records[e];
        try {
            switch (options.estimators[e]) {
                case EstimatorKind::Gpe:
                case EstimatorKind::OracleGpe: {
                    SelectOptions sel;
                    sel.C = options.C;
                    if (options.estimators[e] == EstimatorKind::OracleGpe)
                        sel.fit.init = GpeInit::oracle(rep.beta_true);
                    const Selection result = select_k(frame, sel);
                    rec.beta_err = (result.fit.beta_hat - rep.beta_true).norm() / sqrt_p;
                    rec.theta_hat = tau.dot(result.fit.beta_hat);
                    rec.se_theta =
                        std::sqrt(robust_variance(frame, result.fit, tau));
                    rec.model_size = result.trace.chosen_k;
                    rec.clamped_phi = result.trace.clamped;
                    rec.selection_exhausted = result.trace.exhausted;
                    break;
                }
                case EstimatorKind::Plasso: {
                    const ComparatorFit fit = plasso_fit(frame);
                    rec.beta_err = (fit.beta_hat - rep.beta_true).norm() / sqrt_p;
                    rec.theta_hat = tau.dot(fit.beta_hat);
                    const Eigen::VectorXd tau_r =
                        comparator_se_convention(fit.selected, tau);
                    if (fit.model_size == 0) {
                        rec.se_theta = 0.0;
                    } else {
                        std::vector<int> active;
                        for (int j = 0; j < spec.p; ++j)
                            if (fit.selected[j]) active.push_back(j);
                        Eigen::MatrixXd sub(frame.n(), active.size());
                        Eigen::VectorXd tau_sub(active.size());
                        for (std::size_t i = 0; i < active.size(); ++i) {
                            sub.col(i) = frame.data.X.col(active[i]);
                            tau_sub[i] = tau_r[active[i]];
                        }
                        rec.se_theta =
                            std::sqrt(hc0_variance(sub, fit.residuals, tau_sub));
                    }
                    rec.model_size = fit.model_size;
                    break;
                }
                case EstimatorKind::Ols: {
                    const ComparatorFit fit = ols_fit(frame);
                    rec.beta_err = (fit.beta_hat - rep.beta_true).norm() / sqrt_p;
                    rec.theta_hat = tau.dot(fit.beta_hat);
                    rec.se_theta =
                        std::sqrt(hc0_variance(frame.data.X, fit.residuals, tau));
                    rec.model_size = spec.p;
                    break;
                }
                case EstimatorKind::OracleOls: {
                    const ComparatorFit fit = oracle_ols(spec, rep);
                    // Rebuild the 3n design for the sandwich (same sub-stream).
                    Eigen::MatrixXd X3(3 * spec.n, spec.p);
                    SplitMix64 x_stream(derive_seed(rep.seed, 3));
                    X3.topRows(spec.n) = rep.X;
                    X3.bottomRows(2 * spec.n) =
                        sample_design(2 * spec.n, spec.p, x_stream);
                    rec.beta_err = (fit.beta_hat - rep.beta_true).norm() / sqrt_p;
                    rec.theta_hat = tau.dot(fit.beta_hat);
                    rec.se_theta = std::sqrt(hc0_variance(X3, fit.residuals, tau));
                    rec.model_size = spec.p;
                    break;
                }
            }
            rec.ok = true;
        } catch (const std::exception&) {
            rec.ok = false;
        }
    }
    return outcome;
}

}  // namespace

SimulationReport run_mc(const DgpSpec& spec, const McOptions& options) {
    if (options.estimators.empty()) throw input_error("run_mc: no estimators");
    if (options.reps < 1) throw input_error("run_mc: reps must be positive");
    const bool wants_ols =
        std::count(options.estimators.begin(), options.estimators.end(),
                   EstimatorKind::Ols) > 0;
    if (wants_ols && spec.p >= spec.n)
        throw input_error("run_mc: OLS is infeasible when p >= n");

    std::vector<RepOutcome> outcomes(options.reps);
    const int jobs = std::max(1, options.jobs);
    std::atomic<int> next{0};
    auto worker = [&]() {
        for (;;) {
            const int r = next.fetch_add(1);
            if (r >= options.reps) break;
            outcomes[r] = run_replication(spec, options, derive_seed(options.base_seed, r));
        }
    };
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(jobs);
        for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    SimulationReport report;
    report.dgp = spec;
    report.reps = options.reps;
    report.base_seed = options.base_seed;
    report.C = options.C;
    report.keep_records = options.keep_records;
    {
        const Eigen::VectorXd beta = make_beta(spec);
        report.theta_true = beta.sum() / std::sqrt(static_cast<double>(spec.p));
    }

    for (std::size_t e = 0; e < options.estimators.size(); ++e) {
        EstimatorMetrics row;
        row.name = to_string(options.estimators[e]);
        std::vector<double> beta_errs, theta_devs, sizes;
        int rejections = 0, ok_count = 0;
        for (int r = 0; r < options.reps; ++r) {
            const ReplicationRecord& rec = outcomes[r].records[e];
            if (!rec.ok) {
                ++row.failures;
                continue;
            }
            ++ok_count;
            beta_errs.push_back(rec.beta_err);
            const double dev = rec.theta_hat - report.theta_true;
            theta_devs.push_back(dev);
            sizes.push_back(rec.model_size);
            const double t =
                rec.se_theta > 0.0 ? dev / rec.se_theta
                                   : (dev == 0.0 ? 0.0
                                                 : std::numeric_limits<double>::infinity());
            if (two_sided_p(t) < 0.05) ++rejections;
            report.clamped_phi += rec.clamped_phi;
            report.selection_exhausted += rec.selection_exhausted ? 1 : 0;
        }
        if (ok_count > 0) {
            double sum_err = 0.0, sum_sq = 0.0, sum_abs = 0.0;
            std::vector<double> abs_devs;
            abs_devs.reserve(theta_devs.size());
            for (double b : beta_errs) sum_err += b;
            for (double d : theta_devs) {
                sum_sq += d * d;
                abs_devs.push_back(std::abs(d));
                sum_abs += std::abs(d);
            }
            row.mnb = sum_err / ok_count;
            row.mad = median(abs_devs);
            row.rmse = std::sqrt(sum_sq / ok_count);
            row.rej = static_cast<double>(rejections) / ok_count;
            row.med_model_size = median(sizes);
        }
        report.rows.push_back(std::move(row));
        if (options.keep_records) {
            report.record_names.push_back(to_string(options.estimators[e]));
            std::vector<ReplicationRecord> recs(options.reps);
            for (int r = 0; r < options.reps; ++r) recs[r] = outcomes[r].records[e];
            report.records.push_back(std::move(recs));
        }
    }
    return report;
}

std::vector<PowerPoint> power_curve(const DgpSpec& spec,
                                    const std::vector<double>& h_grid,
                                    const McOptions& options) {
    if (h_grid.empty()) throw input_error("power_curve: empty grid");
    for (double h : h_grid)
        if (h < -1e-12 || h > 0.4 + 1e-12)
            throw input_error("power_curve: h grid must lie within [0, 0.4]");

    McOptions opts = options;
    opts.keep_records = true;
    const SimulationReport report = run_mc(spec, opts);
    const double sqrt_p = std::sqrt(static_cast<double>(spec.p));

    std::vector<PowerPoint> points;
    for (std::size_t e = 0; e < report.records.size(); ++e) {
        for (double h : h_grid) {
            const double theta_null = report.theta_true - h * sqrt_p;
            int rejections = 0, ok_count = 0;
            for (const ReplicationRecord& rec : report.records[e]) {
                if (!rec.ok) continue;
                ++ok_count;
                const double dev = rec.theta_hat - theta_null;
                const double t =
                    rec.se_theta > 0.0
                        ? dev / rec.se_theta
                        : (dev == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
                if (two_sided_p(t) < 0.05) ++rejections;
            }
            points.push_back({report.record_names[e], h,
                              ok_count > 0 ? static_cast<double>(rejections) / ok_count
                                           : 0.0});
        }
    }
    return points;
}

}  // namespace gpe
