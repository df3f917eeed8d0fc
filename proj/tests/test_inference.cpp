#include <doctest.h>

#include "gpe/errors.hpp"
#include "gpe/inference.hpp"
#include "gpe/normal.hpp"
#include "gpe/rng.hpp"
#include "oracles.hpp"

using namespace gpe;

namespace {

FitFrame gaussian_frame(int n, const Eigen::VectorXd& beta, double noise_sd,
                        std::uint64_t seed, bool hetero = false) {
    const int p = static_cast<int>(beta.size());
    SplitMix64 rng(seed);
    Eigen::MatrixXd X = oracles::random_matrix(n, p, rng);
    Eigen::VectorXd y = X * beta;
    for (int i = 0; i < n; ++i) {
        double scale = hetero ? std::sqrt((1.0 + X(i, 0) * X(i, 0)) / 2.0) : 1.0;
        y[i] += noise_sd * scale * rng.normal();
    }
    std::vector<std::string> names(p);
    for (int j = 0; j < p; ++j) names[j] = "x" + std::to_string(j + 1);
    return prepare(make_dataset(std::move(y), std::move(X), names), false);
}

}  // namespace

TEST_CASE("normal primitives") {
    CHECK(norm_cdf(0.0) == doctest::Approx(0.5));
    CHECK(norm_cdf(1.959963984540054) == doctest::Approx(0.975).epsilon(1e-12));
    // AS241 against reference quantiles
    CHECK(std::abs(norm_quantile(0.5)) <= 1e-15);
    CHECK(norm_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-12));
    CHECK(norm_quantile(0.95) == doctest::Approx(1.6448536269514722).epsilon(1e-12));
    CHECK(norm_quantile(0.9) == doctest::Approx(1.2815515655446004).epsilon(1e-12));
    CHECK(norm_quantile(0.05) == doctest::Approx(-1.6448536269514722).epsilon(1e-12));
    CHECK(norm_quantile(1e-10) == doctest::Approx(-6.361340902404056).epsilon(1e-9));
    // round trip across the range
    for (double p : {1e-8, 1e-4, 0.01, 0.3, 0.5, 0.77, 0.999, 1 - 1e-9})
        CHECK(norm_cdf(norm_quantile(p)) == doctest::Approx(p).epsilon(1e-9));
    CHECK_THROWS_AS(norm_quantile(0.0), input_error);
    CHECK_THROWS_AS(norm_quantile(1.0), input_error);
    // chi-squared(1): C = 2.7 is the rounded 90th percentile
    CHECK(chi1_quantile(0.9) == doctest::Approx(2.705543454095404).epsilon(1e-12));
    CHECK(chi1_quantile(0.95) == doctest::Approx(3.841458820694124).epsilon(1e-12));
    // two-sided p at the 5% critical value
    CHECK(two_sided_p(1.96) == doctest::Approx(0.05).epsilon(1e-3));
}

TEST_CASE("theta_functional") {
    const Eigen::VectorXd tau4 = theta_functional(4);
    CHECK(tau4.size() == 4);
    CHECK(tau4[0] == doctest::Approx(0.5));
    CHECK(theta_functional(1)[0] == doctest::Approx(1.0));
    for (int p : {1, 2, 7, 75}) CHECK(theta_functional(p).norm() == doctest::Approx(1.0));
}

TEST_CASE("robust_variance equals HC0 at k = p") {
    for (int seed = 0; seed < 20; ++seed) {
        SplitMix64 rng(9000 + seed);
        const int n = 60, p = 4;
        Eigen::VectorXd beta(p);
        for (int j = 0; j < p; ++j) beta[j] = rng.normal();
        const FitFrame frame = gaussian_frame(n, beta, 0.6, 9100 + seed, true);
        GpeOptions opts;
        opts.k = p;
        const GpeFit fit = fit_gpe(frame, opts);
        Eigen::VectorXd tau = theta_functional(p);
        const double ours = robust_variance(frame, fit, tau);
        const Eigen::VectorXd ols =
            frame.data.X.colPivHouseholderQr().solve(frame.data.y);
        const Eigen::VectorXd resid = frame.data.y - frame.data.X * ols;
        const double reference = oracles::hc0_reference(frame.data.X, resid, tau);
        CHECK(ours == doctest::Approx(reference).epsilon(1e-8));
    }
}

TEST_CASE("robust_variance tracks the homoskedastic truth") {
    // n large, orthonormal-ish design, tau on one group: variance ~ sigma^2/n
    SplitMix64 rng(77);
    const int n = 5000;
    Eigen::VectorXd beta(4);
    beta << 1, 1, 2, 2;
    const FitFrame frame = gaussian_frame(n, beta, 1.0, 7171);
    GpeOptions opts;
    opts.k = 2;
    const GpeFit fit = fit_gpe(frame, opts);
    Eigen::VectorXd tau = theta_functional(4);
    const double var = robust_variance(frame, fit, tau);
    // tau' beta targets the average; with unit-variance errors the grouped
    // variance is near sigma^2/n up to design constants
    CHECK(var * n / 1.0 > 0.2);
    CHECK(var * n / 1.0 < 2.0);
}

TEST_CASE("robust_variance sign invariance and residual zeros") {
    Eigen::VectorXd beta(3);
    beta << 1, 2, 3;
    const FitFrame frame = gaussian_frame(40, beta, 0.4, 4040);
    GpeOptions opts;
    opts.k = 3;
    GpeFit fit = fit_gpe(frame, opts);
    Eigen::VectorXd tau = theta_functional(3);
    const double v1 = robust_variance(frame, fit, tau);
    const double v2 = robust_variance(frame, fit, (-tau).eval());
    CHECK(v1 == doctest::Approx(v2).epsilon(1e-12));

    fit.residuals.setZero();
    CHECK(robust_variance(frame, fit, tau) == doctest::Approx(0.0));

    CHECK_THROWS_AS(robust_variance(frame, fit, (2.0 * tau).eval()), input_error);
}

TEST_CASE("t_test outputs") {
    Eigen::VectorXd beta(3);
    beta << 1, 1, 1;
    const FitFrame frame = gaussian_frame(60, beta, 0.5, 6060);
    GpeOptions opts;
    opts.k = 1;
    const GpeFit fit = fit_gpe(frame, opts);
    const Eigen::VectorXd tau = theta_functional(3);
    const double theta_hat = tau.dot(fit.beta_hat);

    SUBCASE("null at the estimate gives p = 1") {
        const RobustSummary s = t_test(frame, fit, tau, theta_hat);
        CHECK(s.t_stat == doctest::Approx(0.0));
        CHECK(s.p_value == doctest::Approx(1.0));
        CHECK_FALSE(s.reject);
    }
    SUBCASE("p-value and rejection agree") {
        const RobustSummary s = t_test(frame, fit, tau, theta_hat + 1.0);
        CHECK(s.p_value >= 0.0);
        CHECK(s.p_value <= 1.0);
        CHECK(s.reject == (s.p_value < 0.05));
        CHECK(s.t_stat == doctest::Approx((theta_hat - (theta_hat + 1.0)) / s.se_theta));
    }
    SUBCASE("degenerate zero-variance case is flagged") {
        GpeFit zero = fit;
        zero.residuals.setZero();
        const RobustSummary s = t_test(frame, zero, tau, theta_hat + 1.0);
        CHECK(s.p_value == doctest::Approx(0.0));
        CHECK(s.degenerate);
    }
}

TEST_CASE("comparator_se_convention restricts tau") {
    const Eigen::VectorXd tau = theta_functional(4);
    SUBCASE("all selected") {
        const Eigen::VectorXd r =
            comparator_se_convention({true, true, true, true}, tau);
        CHECK(r.isApprox(tau, 0.0));
    }
    SUBCASE("none selected") {
        const Eigen::VectorXd r =
            comparator_se_convention({false, false, false, false}, tau);
        CHECK(r.norm() == doctest::Approx(0.0));
    }
    SUBCASE("half selected") {
        const Eigen::VectorXd r =
            comparator_se_convention({true, false, true, false}, tau);
        CHECK(r.norm() == doctest::Approx(std::sqrt(0.5)));
        CHECK(r[1] == 0.0);
    }
}
