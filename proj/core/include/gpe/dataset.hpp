#pragma once

#include <Eigen/Dense>
#include <set>
#include <string>
#include <vector>

namespace gpe {

/// Response vector plus covariate matrix with named columns.
struct Dataset {
    Eigen::VectorXd y;
    Eigen::MatrixXd X;
    std::vector<std::string> column_names;

    Eigen::Index n() const { return X.rows(); }
    Eigen::Index p() const { return X.cols(); }
};

/// Validates the Dataset invariants: n >= 3, p >= 1, all entries finite,
/// column names unique and matching p.
Dataset make_dataset(Eigen::VectorXd y, Eigen::MatrixXd X,
                     std::vector<std::string> column_names);

/// Loads a CSV file (comma separator, '.' decimal, header row, no quoting).
/// When `features` is empty, every non-response numeric column is used in
/// header order; a column whose first data cell is non-numeric is skipped.
Dataset load_csv(const std::string& path, const std::string& response,
                 const std::vector<std::string>& features = {});

/// Writes y (under `response_name`) and X back to CSV at 17 significant
/// digits, so load_csv(write_csv(...)) round-trips exactly.
void write_csv(const Dataset& data, const std::string& path,
               const std::string& response_name = "y");

/// A dataset prepared for fitting: centered when an intercept is requested,
/// with fixed singleton (never-grouped) columns recorded.
struct FitFrame {
    Dataset data;                    // centered copy when centered == true
    bool centered = false;
    Eigen::VectorXd column_means;    // length p; zeros when not centered
    double y_mean = 0.0;             // sample mean of y; 0 when not centered
    bool intercept = false;
    std::set<int> ungrouped_columns; // 0-based indices of fixed singleton groups

    Eigen::Index n() const { return data.n(); }
    Eigen::Index p() const { return data.p(); }
    bool groupable(int j) const { return ungrouped_columns.count(j) == 0; }
    int n_groupable() const {
        return static_cast<int>(p()) - static_cast<int>(ungrouped_columns.size());
    }
};

/// Centers groupable (and, when centering, all) columns by their sample
/// means when an intercept is requested; leaves the data untouched
/// otherwise. The intercept is not materialized as a column of ones: it is
/// recovered post-fit as ybar - means . beta.
FitFrame prepare(const Dataset& data, bool intercept,
                 const std::set<int>& ungrouped = {});

}  // namespace gpe
