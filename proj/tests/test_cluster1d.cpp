#include <doctest.h>

#include <set>

#include "gpe/cluster1d.hpp"
#include "gpe/errors.hpp"
#include "gpe/rng.hpp"
#include "oracles.hpp"

using namespace gpe;

TEST_CASE("kmeans_1d_exact on two atoms") {
    Eigen::VectorXd v(5);
    v << 0, 0, 1, 1, 1;
    const Clustering1D c = kmeans_1d_exact(v, 2);
    CHECK(c.wss == doctest::Approx(0.0));
    CHECK(c.centers[0] == doctest::Approx(0.0));
    CHECK(c.centers[1] == doctest::Approx(1.0));
    CHECK(c.assignment.labels == std::vector<int>{0, 0, 1, 1, 1});
    CHECK(c.assignment.sizes == std::vector<int>{2, 3});
}

TEST_CASE("kmeans_1d_exact single group is the mean") {
    Eigen::VectorXd v(5);
    v << 2, 2.5, 3, 3.5, 4;
    const Clustering1D c = kmeans_1d_exact(v, 1);
    CHECK(c.centers[0] == doctest::Approx(3.0));
    CHECK(c.wss == doctest::Approx(2.5));
}

TEST_CASE("kmeans_1d_exact matches brute force on small draws") {
    SplitMix64 rng(42);
    for (int trial = 0; trial < 25; ++trial) {
        const int p = 5 + static_cast<int>(rng.next() % 8);  // 5..12
        const int k = 1 + static_cast<int>(rng.next() % std::min(4, p));
        Eigen::VectorXd v(p);
        for (int j = 0; j < p; ++j) v[j] = 2.0 * rng.uniform() - 1.0;
        const Clustering1D c = kmeans_1d_exact(v, k);
        const double best = oracles::brute_force_min_wss(v, k);
        CHECK(c.wss == doctest::Approx(best).epsilon(1e-9));
    }
}

TEST_CASE("kmeans_1d_exact structural properties") {
    SplitMix64 rng(7);
    Eigen::VectorXd v(11);
    for (int j = 0; j < 11; ++j) v[j] = rng.normal();

    double prev = std::numeric_limits<double>::infinity();
    for (int k = 1; k <= 6; ++k) {
        const Clustering1D c = kmeans_1d_exact(v, k);
        SUBCASE("") {}  // keep doctest counting quiet
        // monotone in k
        CHECK(c.wss <= prev + 1e-12);
        prev = c.wss;
        // centers ascending; label 0 holds the smallest center
        for (int g = 1; g < k; ++g) CHECK(c.centers[g] >= c.centers[g - 1]);
        // centers equal group means; wss consistent
        for (int g = 0; g < k; ++g) {
            double sum = 0.0;
            int cnt = 0;
            for (int j = 0; j < 11; ++j)
                if (c.assignment.labels[j] == g) {
                    sum += v[j];
                    ++cnt;
                }
            CHECK(cnt == c.assignment.sizes[g]);
            CHECK(c.centers[g] == doctest::Approx(sum / cnt).epsilon(1e-10));
        }
        double wss = 0.0;
        for (int j = 0; j < 11; ++j) {
            const double d = v[j] - c.centers[c.assignment.labels[j]];
            wss += d * d;
        }
        CHECK(c.wss == doctest::Approx(wss).epsilon(1e-10));
        // contiguity in sorted order
        std::vector<double> lo(k, 1e300), hi(k, -1e300);
        for (int j = 0; j < 11; ++j) {
            const int g = c.assignment.labels[j];
            lo[g] = std::min(lo[g], v[j]);
            hi[g] = std::max(hi[g], v[j]);
        }
        for (int g = 1; g < k; ++g) CHECK(lo[g] >= hi[g - 1]);
    }
}

TEST_CASE("kmeans_1d_exact degenerate duplicates fill all groups") {
    Eigen::VectorXd v(5);
    v << 0, 0, 1, 1, 1;
    const Clustering1D c = kmeans_1d_exact(v, 4);
    CHECK(c.wss == doctest::Approx(0.0));
    std::set<int> seen(c.assignment.labels.begin(), c.assignment.labels.end());
    CHECK(static_cast<int>(seen.size()) == 4);
    // the widest duplicate run (the ones) was split first
    CHECK(c.assignment.sizes == std::vector<int>{1, 1, 2, 1});
}

TEST_CASE("kmeans_1d_exact argument errors") {
    Eigen::VectorXd v(3);
    v << 1, 2, 3;
    CHECK_THROWS_AS(kmeans_1d_exact(v, 0), input_error);
    CHECK_THROWS_AS(kmeans_1d_exact(v, 4), input_error);
}

TEST_CASE("nearest_center rules") {
    Eigen::VectorXd centers(2);
    centers << 0, 1;
    CHECK(nearest_center(0.4, centers) == 0);
    CHECK(nearest_center(0.5, centers) == 0);  // tie breaks to smallest index
    Eigen::VectorXd three(3);
    three << -2.9, 4, 0;
    CHECK(nearest_center(-3.0, three) == 0);
}

TEST_CASE("approx_bias_bound") {
    Eigen::VectorXd v(5);
    v << 0, 0, 1, 1, 1;
    const Clustering1D c = kmeans_1d_exact(v, 2);
    CHECK(approx_bias_bound(v, c, 1.0) == doctest::Approx(45.0));
    CHECK(c.wss <= 45.0);
    CHECK_THROWS_AS(approx_bias_bound(v, c, 0.5), input_error);

    SUBCASE("grid example satisfies the bound") {
        const int p = 20;
        Eigen::VectorXd grid(p);
        for (int j = 0; j < p; ++j) grid[j] = 2.0 + 2.0 * j / (p - 1.0);
        const Clustering1D g = kmeans_1d_exact(grid, 4);
        CHECK(g.wss <= approx_bias_bound(grid, g, 4.0));
    }
}

TEST_CASE("bound holds across random bounded vectors") {
    SplitMix64 rng(11);
    for (int trial = 0; trial < 100; ++trial) {
        const int p = 4 + static_cast<int>(rng.next() % 30);
        const int k = 1 + static_cast<int>(rng.next() % std::min(6, p));
        const double c_b = 1.0 + 3.0 * rng.uniform();
        Eigen::VectorXd v(p);
        for (int j = 0; j < p; ++j) v[j] = c_b * (2.0 * rng.uniform() - 1.0);
        const Clustering1D c = kmeans_1d_exact(v, k);
        CHECK(c.wss <= approx_bias_bound(v, c, c_b) + 1e-9);
    }
}
