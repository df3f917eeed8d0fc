#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "gpe/comparators.hpp"
#include "gpe/dataset.hpp"

namespace gpe {

enum class DgpName { CnS, CaS1, CaS2, DS1, MnS, MS, DnS, DS2, DaS2 };

std::string to_string(DgpName name);
DgpName dgp_from_string(const std::string& name);
std::vector<std::string> dgp_names();

struct DgpSpec {
    DgpName name = DgpName::DS1;
    int n = 100;
    int p = 75;
    // The CnS coefficient line as printed gives a [2,6] range while its
    // stated interval is [2,4]; the range-consistent slope is the default
    // and this switch restores the literal formula.
    bool cns_literal_slope = false;

    bool chi_square_errors() const {
        return name == DgpName::CnS || name == DgpName::CaS1 ||
               name == DgpName::MnS || name == DgpName::MS;
    }
    std::string error_family() const {
        return chi_square_errors() ? "chi_square_standardized" : "standard_normal";
    }
};

Eigen::VectorXd make_beta(const DgpSpec& spec);

struct Replication {
    Eigen::MatrixXd X;
    Eigen::VectorXd y;
    Eigen::VectorXd beta_true;
    double theta_true = 0.0;
    std::uint64_t seed = 0;
};

/// Draws one replication: AR(1) Gaussian covariates realizing the Toeplitz
/// 0.5^|j-j'| correlation, heteroskedastic errors U * sqrt((1+x_1^2)/2).
/// Deterministic given the seed.
Replication sample_replication(const DgpSpec& spec, std::uint64_t seed);

/// OLS on the replication's n rows stacked with 2n fresh rows drawn from a
/// dedicated sub-stream of the replication seed.
ComparatorFit oracle_ols(const DgpSpec& spec, const Replication& rep);

enum class EstimatorKind { Gpe, Plasso, Ols, OracleOls, OracleGpe };

std::string to_string(EstimatorKind kind);
EstimatorKind estimator_from_string(const std::string& name);

struct ReplicationRecord {
    double beta_err = 0.0;  // ||beta_hat - beta_o|| / sqrt(p)
    double theta_hat = 0.0;
    double se_theta = 0.0;
    double model_size = 0.0;
    bool ok = false;
    int clamped_phi = 0;
    bool selection_exhausted = false;
};

struct EstimatorMetrics {
    std::string name;
    double mnb = 0.0;
    double mad = 0.0;
    double rmse = 0.0;
    double rej = 0.0;
    double med_model_size = 0.0;
    int failures = 0;
};

struct SimulationReport {
    DgpSpec dgp;
    int reps = 0;
    std::uint64_t base_seed = 0;
    double C = 2.7;
    double theta_true = 0.0;
    std::string generator = "splitmix64";
    std::vector<EstimatorMetrics> rows;
    int clamped_phi = 0;
    int selection_exhausted = 0;
    bool keep_records = false;
    std::vector<std::string> record_names;
    std::vector<std::vector<ReplicationRecord>> records;  // [estimator][rep]
};

struct McOptions {
    int reps = 1000;
    std::uint64_t base_seed = 1;
    double C = 2.7;
    int jobs = 1;
    bool keep_records = false;
    std::vector<EstimatorKind> estimators{EstimatorKind::Gpe};
};

SimulationReport run_mc(const DgpSpec& spec, const McOptions& options);

struct PowerPoint {
    std::string estimator;
    double h = 0.0;
    double rejection = 0.0;
};

/// Rejection rate of the 5%-level test against the drifting null
/// theta_0 = theta_o - h sqrt(p), per estimator and grid point. The grid
/// must lie within [0, 0.4].
std::vector<PowerPoint> power_curve(const DgpSpec& spec,
                                    const std::vector<double>& h_grid,
                                    const McOptions& options);

}  // namespace gpe
