#include "gpe/cluster1d.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gpe/errors.hpp"

namespace gpe {

void GroupAssignment::validate() const {
    if (k < 1) throw input_error("assignment: k must be positive");
    if (static_cast<int>(sizes.size()) != k)
        throw input_error("assignment: sizes length must equal k");
    if (fixed.size() != labels.size())
        throw input_error("assignment: fixed length must equal p");
    std::vector<int> counts(k, 0);
    for (int j = 0; j < p(); ++j) {
        const int l = labels[j];
        if (l < 0 || l >= k) throw input_error("assignment: label out of range");
        ++counts[l];
    }
    for (int l = 0; l < k; ++l) {
        if (counts[l] == 0) throw input_error("assignment: empty group " + std::to_string(l));
        if (counts[l] != sizes[l]) throw input_error("assignment: sizes inconsistent");
    }
    for (int j = 0; j < p(); ++j)
        if (fixed[j] && sizes[labels[j]] != 1)
            throw input_error("assignment: fixed coefficient not alone in its group");
}

GroupAssignment GroupAssignment::from_labels(std::vector<int> labels, int k,
                                             std::vector<bool> fixed) {
    GroupAssignment a;
    a.labels = std::move(labels);
    a.k = k;
    a.fixed = fixed.empty() ? std::vector<bool>(a.labels.size(), false) : std::move(fixed);
    a.sizes.assign(k, 0);
    for (int l : a.labels) {
        if (l < 0 || l >= k) throw input_error("assignment: label out of range");
        ++a.sizes[l];
    }
    a.validate();
    return a;
}

namespace {

// Prefix-sum cost of the sorted range [i, j]: sum of squared deviations
// from the range mean.
class SegmentCost {
public:
    explicit SegmentCost(const std::vector<double>& sorted) {
        const std::size_t n = sorted.size();
        sum_.assign(n + 1, 0.0);
        sumsq_.assign(n + 1, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            sum_[i + 1] = sum_[i] + sorted[i];
            sumsq_[i + 1] = sumsq_[i] + sorted[i] * sorted[i];
        }
    }

    double operator()(int i, int j) const {
        const double len = static_cast<double>(j - i + 1);
        const double s = sum_[j + 1] - sum_[i];
        const double ss = sumsq_[j + 1] - sumsq_[i];
        return std::max(0.0, ss - s * s / len);
    }

    double mean(int i, int j) const {
        return (sum_[j + 1] - sum_[i]) / static_cast<double>(j - i + 1);
    }

private:
    std::vector<double> sum_, sumsq_;
};

// Deterministic handling of fewer distinct values than groups: one group per
// distinct value, then repeatedly split the duplicate run with the most
// members until k groups exist. All splits leave wss at zero.
Clustering1D degenerate_split(const std::vector<double>& sorted,
                              const std::vector<int>& order, int k) {
    const int p = static_cast<int>(sorted.size());
    std::vector<std::pair<int, int>> runs;  // [begin, end) over sorted positions
    for (int i = 0; i < p;) {
        int j = i;
        while (j < p && sorted[j] == sorted[i]) ++j;
        runs.emplace_back(i, j);
        i = j;
    }
    while (static_cast<int>(runs.size()) < k) {
        int widest = 0;
        for (int r = 1; r < static_cast<int>(runs.size()); ++r) {
            if (runs[r].second - runs[r].first > runs[widest].second - runs[widest].first)
                widest = r;
        }
        auto [b, e] = runs[widest];
        const int mid = b + (e - b + 1) / 2;
        runs[widest] = {b, mid};
        runs.insert(runs.begin() + widest + 1, {mid, e});
    }

    Clustering1D out;
    out.centers.resize(k);
    std::vector<int> labels(p);
    for (int g = 0; g < k; ++g) {
        out.centers[g] = sorted[runs[g].first];
        for (int pos = runs[g].first; pos < runs[g].second; ++pos)
            labels[order[pos]] = g;
    }
    out.wss = 0.0;
    out.assignment = GroupAssignment::from_labels(std::move(labels), k);
    return out;
}

}  // namespace

Clustering1D kmeans_1d_exact(const Eigen::VectorXd& values, int k) {
    const int p = static_cast<int>(values.size());
    if (k < 1) throw input_error("kmeans_1d_exact: k must be >= 1");
    if (k > p) throw input_error("kmeans_1d_exact: k exceeds number of values");
    if (!values.allFinite()) throw input_error("kmeans_1d_exact: non-finite value");

    std::vector<int> order(p);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return values[a] < values[b]; });
    std::vector<double> sorted(p);
    for (int i = 0; i < p; ++i) sorted[i] = values[order[i]];

    int distinct = 1;
    for (int i = 1; i < p; ++i)
        if (sorted[i] != sorted[i - 1]) ++distinct;
    if (distinct < k) return degenerate_split(sorted, order, k);

    SegmentCost cost(sorted);

    // dp[l][i]: minimal wss of sorted[0..i] split into l+1 groups.
    constexpr double kInf = std::numeric_limits<double>::infinity();
    std::vector<std::vector<double>> dp(k, std::vector<double>(p, kInf));
    std::vector<std::vector<int>> split(k, std::vector<int>(p, 0));
    for (int i = 0; i < p; ++i) dp[0][i] = cost(0, i);
    for (int l = 1; l < k; ++l) {
        for (int i = l; i < p; ++i) {
            for (int s = l; s <= i; ++s) {  // group l covers [s, i]
                const double c = dp[l - 1][s - 1] + cost(s, i);
                if (c < dp[l][i]) {
                    dp[l][i] = c;
                    split[l][i] = s;
                }
            }
        }
    }

    std::vector<int> bounds(k + 1);  // group g covers [bounds[g], bounds[g+1])
    bounds[k] = p;
    int end = p - 1;
    for (int l = k - 1; l >= 1; --l) {
        bounds[l] = split[l][end];
        end = bounds[l] - 1;
    }
    bounds[0] = 0;

    Clustering1D out;
    out.wss = dp[k - 1][p - 1];
    out.centers.resize(k);
    std::vector<int> labels(p);
    for (int g = 0; g < k; ++g) {
        out.centers[g] = cost.mean(bounds[g], bounds[g + 1] - 1);
        for (int pos = bounds[g]; pos < bounds[g + 1]; ++pos) labels[order[pos]] = g;
    }
    out.assignment = GroupAssignment::from_labels(std::move(labels), k);
    return out;
}

int nearest_center(double value, const Eigen::VectorXd& centers) {
    if (centers.size() == 0) throw input_error("nearest_center: no centers");
    int best = 0;
    double best_dist = std::abs(value - centers[0]);
    for (int l = 1; l < static_cast<int>(centers.size()); ++l) {
        const double d = std::abs(value - centers[l]);
        if (d < best_dist) {
            best_dist = d;
            best = l;
        }
    }
    return best;
}

int nearest_center(double value, const std::vector<double>& centers) {
    return nearest_center(
        value, Eigen::Map<const Eigen::VectorXd>(centers.data(), centers.size()));
}

double approx_bias_bound(const Eigen::VectorXd& values,
                         const Clustering1D& clustering, double c_b) {
    if (values.size() == 0) throw input_error("approx_bias_bound: empty values");
    const double max_abs = values.cwiseAbs().maxCoeff();
    if (max_abs > c_b)
        throw input_error("approx_bias_bound: a value exceeds the support bound C_b");
    const double m =
        *std::max_element(clustering.assignment.sizes.begin(), clustering.assignment.sizes.end());
    const double k = static_cast<double>(clustering.assignment.k);
    const double p = static_cast<double>(values.size());
    return 4.0 * c_b * c_b * m * m * p / (k * k);
}

}  // namespace gpe
