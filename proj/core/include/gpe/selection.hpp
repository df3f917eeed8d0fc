#pragma once

#include <vector>

#include "gpe/dataset.hpp"
#include "gpe/estimator.hpp"

namespace gpe {

struct SelectionTrace {
    std::vector<int> candidates;    // k values fitted, ascending
    std::vector<double> rss;        // mean squared residual per candidate
    std::vector<double> statistic;  // n * phi_hat per consecutive pair, clamped at 0
    int chosen_k = 0;
    double C = 2.7;
    bool exhausted = false;  // no candidate qualified; largest returned
    bool perfect_fit = false;
    int clamped = 0;  // negative phi_hat occurrences (solver noise)
};

/// Relative residual drop (rss_k - rss_k1) / rss_k1. Requires rss_k1 > 0.
double phi_hat(double rss_k, double rss_k1);

struct SelectOptions {
    double C = 2.7;
    int k_min = 1;
    int k_max = 0;   // 0: min(groupable count, n - 2 - #fixed, 40)
    GpeOptions fit;  // template; k is overwritten per candidate
};

struct Selection {
    GpeFit fit;
    SelectionTrace trace;
};

/// Chooses the smallest k with n * phi_hat(k) <= C, fitting candidates
/// upward from k_min. Successive candidates are warm-started by splitting
/// the previous fit's widest group in addition to the fresh initializer
/// discretized at the candidate k; the better objective wins.
Selection select_k(const FitFrame& frame, const SelectOptions& options);

}  // namespace gpe
