#pragma once

#include <Eigen/Dense>
#include <vector>

namespace gpe {

/// Assignment of p coefficients to k non-empty groups. Labels are 0-based;
/// fixed[j] marks coefficients that sit alone in their group and never move.
struct GroupAssignment {
    std::vector<int> labels;  // length p, values in [0, k)
    int k = 0;
    std::vector<int> sizes;   // length k, each >= 1
    std::vector<bool> fixed;  // length p

    int p() const { return static_cast<int>(labels.size()); }

    /// Recomputes `sizes` from `labels` and checks every group is non-empty,
    /// fixed members are singletons, and labels are in range.
    void validate() const;
    static GroupAssignment from_labels(std::vector<int> labels, int k,
                                       std::vector<bool> fixed = {});
};

struct Clustering1D {
    GroupAssignment assignment;
    Eigen::VectorXd centers;  // length k, ascending
    double wss = 0.0;         // sum of squared within-group deviations
};

/// Globally optimal 1-D k-means by dynamic programming over sorted values
/// (least-squares-optimal partitions are contiguous in sorted order).
/// Label 0 holds the smallest center. Requires 1 <= k <= values.size().
Clustering1D kmeans_1d_exact(const Eigen::VectorXd& values, int k);

/// Index of the center nearest to `value` in absolute distance; ties break
/// toward the smallest index.
int nearest_center(double value, const Eigen::VectorXd& centers);
int nearest_center(double value, const std::vector<double>& centers);

/// Worst-case approximation-bias bound 4 C_b^2 M^2 p / k^2, with M the
/// largest realized group size. Requires max|values| <= c_b.
double approx_bias_bound(const Eigen::VectorXd& values,
                         const Clustering1D& clustering, double c_b);

}  // namespace gpe
