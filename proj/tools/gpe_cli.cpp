// Command-line front end: fit a dataset, run simulation studies, emit power
// curves. Outputs are data files (CSV/JSON); plotting stays external.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gpe/dataset.hpp"
#include "gpe/errors.hpp"
#include "gpe/inference.hpp"
#include "gpe/report.hpp"
#include "gpe/selection.hpp"
#include "gpe/simulation.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitNumeric = 3;

std::string full(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::vector<double> parse_grid(const std::string& text) {
    double start = 0.0, stop = 0.0, step = 0.0;
    if (std::sscanf(text.c_str(), "%lf:%lf:%lf", &start, &stop, &step) != 3)
        throw gpe::input_error("malformed --h-grid, expected start:stop:step");
    if (step <= 0.0) throw gpe::input_error("--h-grid step must be positive");
    if (start < -1e-12 || stop > 0.4 + 1e-12)
        throw gpe::input_error("--h-grid must lie within [0, 0.4]");
    std::vector<double> grid;
    for (double h = start; h <= stop + 1e-12; h += step) grid.push_back(h);
    return grid;
}

std::vector<gpe::EstimatorKind> parse_estimators(const std::string& text) {
    std::vector<gpe::EstimatorKind> kinds;
    std::string token;
    std::stringstream ss(text);
    while (std::getline(ss, token, ',')) {
        if (!token.empty()) kinds.push_back(gpe::estimator_from_string(token));
    }
    if (kinds.empty()) throw gpe::input_error("no estimators given");
    return kinds;
}

struct FitArgs {
    std::string data_path;
    std::string response;
    std::vector<std::string> features;
    std::vector<std::string> no_group;
    bool intercept = true;
    int k = 0;  // 0: data-driven selection
    double C = 2.7;
    std::string tau_text;
    std::string out = "gpe_fit";
};

int run_fit(const FitArgs& args) {
    const gpe::Dataset data = gpe::load_csv(args.data_path, args.response, args.features);
    std::set<int> ungrouped;
    for (const auto& name : args.no_group) {
        const auto it =
            std::find(data.column_names.begin(), data.column_names.end(), name);
        if (it == data.column_names.end())
            throw gpe::input_error("--no-group column not found: " + name);
        ungrouped.insert(static_cast<int>(it - data.column_names.begin()));
    }
    const gpe::FitFrame frame = gpe::prepare(data, args.intercept, ungrouped);
    const int p = static_cast<int>(frame.p());

    gpe::GpeFit fit;
    gpe::SelectionTrace trace;
    if (args.k > 0) {
        gpe::GpeOptions opts;
        opts.k = args.k;
        fit = gpe::fit_gpe(frame, opts);
        trace.chosen_k = args.k;
        trace.C = args.C;
        trace.candidates = {args.k};
        trace.rss = {fit.residuals.squaredNorm() / static_cast<double>(frame.n())};
    } else {
        gpe::SelectOptions opts;
        opts.C = args.C;
        gpe::Selection sel = gpe::select_k(frame, opts);
        fit = std::move(sel.fit);
        trace = std::move(sel.trace);
    }

    const gpe::OriginalScaleFit scaled = gpe::fitted_beta_original_scale(fit, frame);

    Eigen::VectorXd tau;
    if (!args.tau_text.empty()) {
        std::vector<double> values;
        std::string token;
        std::stringstream ss(args.tau_text);
        while (std::getline(ss, token, ','))
            if (!token.empty()) values.push_back(std::stod(token));
        if (static_cast<int>(values.size()) != p)
            throw gpe::input_error("--tau needs exactly p = " + std::to_string(p) +
                                   " values");
        tau = Eigen::Map<Eigen::VectorXd>(values.data(), values.size());
        const double norm = tau.norm();
        if (norm == 0.0) throw gpe::input_error("--tau must be non-zero");
        tau /= norm;
    } else {
        tau = gpe::theta_functional(p);
    }
    const gpe::RobustSummary theta = gpe::t_test(frame, fit, tau, 0.0);

    // Per-coordinate summaries for the coefficient table.
    std::vector<gpe::RobustSummary> coords;
    coords.reserve(p);
    for (int j = 0; j < p; ++j) {
        Eigen::VectorXd e = Eigen::VectorXd::Zero(p);
        e[j] = 1.0;
        coords.push_back(gpe::t_test(frame, fit, e, 0.0));
    }

    nlohmann::json j;
    j["n"] = frame.n();
    j["p"] = p;
    j["intercept"] = frame.intercept;
    j["centered"] = frame.centered;
    j["columns"] = data.column_names;
    j["k"] = trace.chosen_k;
    j["fixed_k"] = args.k > 0;
    j["selection"] = {{"candidates", trace.candidates},
                      {"rss", trace.rss},
                      {"statistic", trace.statistic},
                      {"chosen_k", trace.chosen_k},
                      {"C", trace.C},
                      {"exhausted", trace.exhausted},
                      {"perfect_fit", trace.perfect_fit},
                      {"clamped", trace.clamped}};
    {
        std::vector<int> labels_1based;
        for (int l : fit.assignment.labels) labels_1based.push_back(l + 1);
        std::vector<int> fixed_columns;
        for (int jx = 0; jx < p; ++jx)
            if (fit.assignment.fixed[jx]) fixed_columns.push_back(jx + 1);
        j["groups"] = {{"labels", labels_1based},
                       {"sizes", fit.assignment.sizes},
                       {"fixed_columns", fixed_columns}};
    }
    j["delta"] = std::vector<double>(fit.delta_hat.data(),
                                     fit.delta_hat.data() + fit.delta_hat.size());
    j["beta"] = std::vector<double>(scaled.beta.data(),
                                    scaled.beta.data() + scaled.beta.size());
    j["intercept_hat"] = scaled.intercept;
    j["objective"] = fit.objective;
    j["iterations"] = fit.iterations;
    j["converged"] = fit.converged;
    j["theta"] = {{"theta_hat", theta.theta_hat}, {"se", theta.se_theta},
                  {"t", theta.t_stat},           {"p_value", theta.p_value},
                  {"reject_5pct", theta.reject}, {"degenerate", theta.degenerate}};

    std::ofstream json_out(args.out + ".json");
    if (!json_out) throw gpe::input_error("cannot open for writing: " + args.out + ".json");
    json_out << j.dump(2) << '\n';

    std::ofstream csv(args.out + "_coefficients.csv");
    if (!csv)
        throw gpe::input_error("cannot open for writing: " + args.out +
                               "_coefficients.csv");
    csv << "column,coef,group,se,t,p_value\n";
    for (int jx = 0; jx < p; ++jx) {
        csv << data.column_names[jx] << ',' << full(scaled.beta[jx]) << ','
            << fit.assignment.labels[jx] + 1 << ',' << full(coords[jx].se_theta) << ','
            << full(coords[jx].t_stat) << ',' << full(coords[jx].p_value) << '\n';
    }

    std::cout << "k = " << trace.chosen_k << (args.k > 0 ? " (fixed)" : " (selected)")
              << ", objective = " << fit.objective << '\n'
              << "theta_hat = " << theta.theta_hat << " (se " << theta.se_theta
              << ", p " << theta.p_value << ")\n"
              << "wrote " << args.out << ".json, " << args.out << "_coefficients.csv\n";
    return kExitOk;
}

struct SimArgs {
    std::string dgp = "ds1";
    int n = 100;
    int p = 75;
    int reps = 1000;
    std::uint64_t seed = 1;
    double C = 2.7;
    std::string estimators = "gpe";
    std::string out = "gpe_sim";
    int jobs = 1;
    bool records = false;
    bool cns_literal = false;
};

gpe::DgpSpec make_spec(const SimArgs& args) {
    gpe::DgpSpec spec;
    spec.name = gpe::dgp_from_string(args.dgp);
    spec.n = args.n;
    spec.p = args.p;
    spec.cns_literal_slope = args.cns_literal;
    return spec;
}

int run_simulate(const SimArgs& args) {
    const gpe::DgpSpec spec = make_spec(args);
    gpe::McOptions opts;
    opts.reps = args.reps;
    opts.base_seed = args.seed;
    opts.C = args.C;
    opts.jobs = args.jobs;
    opts.keep_records = args.records;
    opts.estimators = parse_estimators(args.estimators);

    const gpe::SimulationReport report = gpe::run_mc(spec, opts);
    gpe::write_report_csv(report, args.out + ".csv");
    gpe::write_report_json(report, args.out + ".json");
    std::cout << gpe::format_report_table(report);
    std::cout << "wrote " << args.out << ".csv, " << args.out << ".json\n";
    for (const auto& row : report.rows) {
        if (row.failures > 0) {
            std::cerr << "warning: " << row.name << " failed on " << row.failures
                      << " replications\n";
        }
    }
    return kExitOk;
}

struct PowerArgs {
    SimArgs sim;
    std::string h_grid = "0:0.4:0.1";
};

int run_power(const PowerArgs& args) {
    const gpe::DgpSpec spec = make_spec(args.sim);
    const std::vector<double> grid = parse_grid(args.h_grid);
    gpe::McOptions opts;
    opts.reps = args.sim.reps;
    opts.base_seed = args.sim.seed;
    opts.C = args.sim.C;
    opts.jobs = args.sim.jobs;
    opts.estimators = parse_estimators(args.sim.estimators);

    const auto points = gpe::power_curve(spec, grid, opts);
    gpe::write_power_csv(points, args.sim.out + ".csv");
    std::cout << gpe::format_power_table(points);
    std::cout << "wrote " << args.sim.out << ".csv\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Grouped parameter estimation for high-dimensional linear models"};
    app.require_subcommand(1);

    FitArgs fit_args;
    CLI::App* fit = app.add_subcommand("fit", "Fit a CSV dataset");
    fit->add_option("--data", fit_args.data_path, "CSV file")->required();
    fit->add_option("--response", fit_args.response, "response column name")->required();
    fit->add_option("--features", fit_args.features,
                    "feature columns (default: all numeric non-response)");
    fit->add_option("--no-group", fit_args.no_group,
                    "column kept as its own singleton group (repeatable)");
    fit->add_flag("--intercept,!--no-intercept", fit_args.intercept,
                  "include an intercept (default on)");
    fit->add_option("--k", fit_args.k, "fixed group count (default: data-driven)");
    fit->add_option("--c", fit_args.C, "selection constant C")->default_val(2.7);
    fit->add_option("--tau", fit_args.tau_text,
                    "comma-separated functional weights (normalized to unit length)");
    fit->add_option("--out", fit_args.out, "output prefix")->default_val("gpe_fit");

    SimArgs sim_args;
    CLI::App* sim = app.add_subcommand("simulate", "Run a Monte Carlo study");
    auto add_sim_flags = [](CLI::App* cmd, SimArgs& a) {
        cmd->add_option("--dgp", a.dgp, "DGP name")->default_val("ds1");
        cmd->add_option("--n", a.n, "sample size")->default_val(100);
        cmd->add_option("--p", a.p, "covariate count")->default_val(75);
        cmd->add_option("--reps", a.reps, "replications")->default_val(1000);
        cmd->add_option("--seed", a.seed, "base seed")->default_val(1);
        cmd->add_option("--c", a.C, "selection constant C")->default_val(2.7);
        cmd->add_option("--estimators", a.estimators,
                        "comma list: gpe,plasso,ols,orac-ols,orac-gpe")
            ->default_val("gpe");
        cmd->add_option("--out", a.out, "output prefix");
        cmd->add_option("--jobs", a.jobs, "worker threads")->default_val(1);
        cmd->add_flag("--cns-literal", a.cns_literal,
                      "use the literal CnS coefficient line (range [2,6])");
    };
    add_sim_flags(sim, sim_args);
    sim->get_option("--out")->default_val("gpe_sim");
    sim->add_flag("--records", sim_args.records, "keep replication-level records");

    PowerArgs power_args;
    CLI::App* power = app.add_subcommand("power", "Rejection rates on a drifting null");
    add_sim_flags(power, power_args.sim);
    power->get_option("--out")->default_val("gpe_power");
    power->add_option("--h-grid", power_args.h_grid, "start:stop:step within [0, 0.4]")
        ->default_val("0:0.4:0.1");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitInput;
    }

    try {
        if (fit->parsed()) return run_fit(fit_args);
        if (sim->parsed()) return run_simulate(sim_args);
        if (power->parsed()) return run_power(power_args);
    } catch (const gpe::input_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInput;
    } catch (const gpe::numeric_error& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return kExitNumeric;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitNumeric;
    }
    return kExitInput;
}
