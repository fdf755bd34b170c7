#include <doctest.h>

#include <saptlem/errors.hpp>
#include <saptlem/proposals.hpp>
#include <saptlem/rng.hpp>

#include <cmath>

using namespace saptlem;

namespace {

PriorBounds unit_box(std::size_t dim, double lo = 0.0, double hi = 1.0) {
    PriorBounds b;
    b.lower.assign(dim, lo);
    b.upper.assign(dim, hi);
    return b;
}

} // namespace

TEST_CASE("reflection folds points back into the closed box") {
    CHECK(reflect_into(3.1, 0.0, 3.0) == doctest::Approx(2.9).epsilon(1e-14));
    CHECK(reflect_into(-0.2, 0.0, 3.0) == doctest::Approx(0.2).epsilon(1e-14));
    CHECK(reflect_into(1.7, 0.0, 3.0) == 1.7);
    CHECK(reflect_into(0.0, 0.0, 3.0) == 0.0);
    CHECK(reflect_into(3.0, 0.0, 3.0) == 3.0);
    // A full period away maps back onto itself.
    CHECK(reflect_into(1.0 + 6.0, 0.0, 3.0) == doctest::Approx(1.0).epsilon(1e-12));

    RngStream rng(8);
    for (int i = 0; i < 2000; ++i) {
        const double lo = rng.uniform(-5.0, 0.0);
        const double hi = lo + rng.uniform(0.1, 4.0);
        const double x = rng.uniform(-60.0, 60.0);
        const double folded = reflect_into(x, lo, hi);
        CHECK(folded >= lo);
        CHECK(folded <= hi);
    }
}

TEST_CASE("random-walk scale is phi times the prior range") {
    PriorBounds bounds = unit_box(1, 0.0, 3.0);
    RngStream rng(21);
    const std::vector<double> center{1.5};
    double sum = 0.0;
    double sumsq = 0.0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        const double step = propose_rw(center, bounds, 0.05, rng)[0] - center[0];
        sum += step;
        sumsq += step * step;
    }
    const double mean = sum / n;
    const double sd = std::sqrt(sumsq / n - mean * mean);
    // sigma = (3 - 0) * 0.05 = 0.15; reflection is negligible 10 sigmas from bounds.
    CHECK(std::fabs(mean) < 0.005);
    CHECK(sd == doctest::Approx(0.15).epsilon(0.05));
}

TEST_CASE("zero phi proposes the current point") {
    PriorBounds bounds = unit_box(3);
    RngStream rng(2);
    const std::vector<double> theta{0.2, 0.5, 0.9};
    CHECK(propose_rw(theta, bounds, 0.0, rng) == theta);
}

TEST_CASE("proposals always stay inside the prior box") {
    PriorBounds bounds = unit_box(2, -1.0, 2.0);
    RngStream rng(77);
    std::vector<double> theta{-0.99, 1.99};
    for (int i = 0; i < 5000; ++i) {
        theta = propose_rw(theta, bounds, 0.4, rng);
        for (std::size_t j = 0; j < 2; ++j) {
            CHECK(theta[j] >= bounds.lower[j]);
            CHECK(theta[j] <= bounds.upper[j]);
        }
    }
}

TEST_CASE("chain history covariance matches the two-point hand case") {
    ChainHistory history(2);
    history.append({0.0, 0.0});
    history.append({1.0, 1.0});
    const Matrix sigma = update_covariance(history, {0.01, 0.01});
    CHECK(sigma.at(0, 0) == doctest::Approx(0.5001).epsilon(1e-14));
    CHECK(sigma.at(1, 1) == doctest::Approx(0.5001).epsilon(1e-14));
    CHECK(sigma.at(0, 1) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(sigma.at(1, 0) == sigma.at(0, 1));
}

TEST_CASE("degenerate history still yields the diagonal floor") {
    ChainHistory history(2);
    history.append({0.3, 0.7});
    history.append({0.3, 0.7});
    history.append({0.3, 0.7});
    const Matrix sigma = update_covariance(history, {0.02, 0.05});
    CHECK(sigma.at(0, 0) == doctest::Approx(0.0004).epsilon(1e-12));
    CHECK(sigma.at(1, 1) == doctest::Approx(0.0025).epsilon(1e-12));
    CHECK(sigma.at(0, 1) == 0.0);
    CHECK_NOTHROW(cholesky(sigma));
}

TEST_CASE("history covariance agrees with a direct two-pass computation") {
    RngStream rng(4);
    ChainHistory history(3);
    std::vector<std::vector<double>> points;
    for (int i = 0; i < 200; ++i) {
        std::vector<double> p{rng.uniform(), 2.0 * rng.uniform(), rng.uniform() - 0.5};
        history.append(p);
        points.push_back(p);
    }
    std::vector<double> mean(3, 0.0);
    for (const auto& p : points) {
        for (int j = 0; j < 3; ++j) mean[j] += p[j];
    }
    for (int j = 0; j < 3; ++j) mean[j] /= points.size();
    Matrix direct(3, 3);
    for (const auto& p : points) {
        for (int a = 0; a < 3; ++a) {
            for (int b = 0; b < 3; ++b) {
                direct.at(a, b) += (p[a] - mean[a]) * (p[b] - mean[b]);
            }
        }
    }
    for (double& v : direct.data) v /= points.size() - 1;

    const Matrix online = history.covariance();
    for (int a = 0; a < 3; ++a) {
        for (int b = 0; b < 3; ++b) {
            CHECK(online.at(a, b) == doctest::Approx(direct.at(a, b)).epsilon(1e-10));
        }
    }

    ChainHistory thin(3);
    thin.append({1.0, 2.0, 3.0});
    CHECK_THROWS_AS(thin.covariance(), InsufficientHistory);
}

TEST_CASE("cholesky factors a known matrix and rejects rank-deficient ones") {
    Matrix sigma(2, 2);
    sigma.at(0, 0) = 4.0;
    sigma.at(0, 1) = 2.0;
    sigma.at(1, 0) = 2.0;
    sigma.at(1, 1) = 3.0;
    const CholeskyFactor factor = cholesky(sigma);
    CHECK(factor.lower[0] == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(factor.lower[2] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(factor.lower[3] == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
    CHECK(factor.lower[1] == 0.0);

    Matrix zero(2, 2);
    CHECK_THROWS_AS(cholesky(zero), FactorizationFailure);

    Matrix singular(2, 2);
    singular.at(0, 0) = 1.0;
    singular.at(0, 1) = 1.0;
    singular.at(1, 0) = 1.0;
    singular.at(1, 1) = 1.0;
    CHECK_THROWS_AS(cholesky(singular), FactorizationFailure);
}

TEST_CASE("adaptive proposals realize the requested covariance") {
    Matrix sigma(2, 2);
    sigma.at(0, 0) = 0.02;
    sigma.at(0, 1) = 0.01;
    sigma.at(1, 0) = 0.01;
    sigma.at(1, 1) = 0.03;
    PriorBounds bounds = unit_box(2, -1e6, 1e6); // reflection never triggers
    const std::vector<double> center{0.0, 0.0};
    RngStream rng(31);
    const int n = 100000;
    double s00 = 0.0;
    double s01 = 0.0;
    double s11 = 0.0;
    for (int i = 0; i < n; ++i) {
        const auto p = propose_arw(center, sigma, bounds, rng);
        s00 += p[0] * p[0];
        s01 += p[0] * p[1];
        s11 += p[1] * p[1];
    }
    CHECK(s00 / n == doctest::Approx(0.02).epsilon(0.1));
    CHECK(s01 / n == doctest::Approx(0.01).epsilon(0.1));
    CHECK(s11 / n == doctest::Approx(0.03).epsilon(0.1));
}

TEST_CASE("default minimum steps are one percent of each range") {
    PriorBounds bounds;
    bounds.lower = {0.0, 3e-6, 0.1};
    bounds.upper = {3.0, 7e-6, 1.7};
    const auto steps = default_min_steps(bounds);
    REQUIRE(steps.size() == 3);
    CHECK(steps[0] == doctest::Approx(0.03).epsilon(1e-15));
    CHECK(steps[1] == doctest::Approx(4e-8).epsilon(1e-12));
    CHECK(steps[2] == doctest::Approx(0.016).epsilon(1e-15));
}

TEST_CASE("log prior is flat inside the closed box and a sentinel outside") {
    PriorBounds bounds = unit_box(2, 0.0, 3.0);
    CHECK(log_prior({1.0, 2.0}, bounds) == 0.0);
    CHECK(log_prior({0.0, 3.0}, bounds) == 0.0); // closed bounds included
    CHECK(log_prior({3.0001, 1.0}, bounds) == -1e10);
    CHECK(log_prior({1.0, -0.0001}, bounds) == -1e10);
}
