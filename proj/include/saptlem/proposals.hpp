#pragma once

#include <saptlem/grid.hpp>
#include <saptlem/parameters.hpp>
#include <saptlem/rng.hpp>

#include <vector>

namespace saptlem {

/** Fixed-fraction random-walk kernel: sigma_j = (b_j - a_j) * phi. */
struct RwConfig {
    double phi = 0.05;
};

/** Adaptive random-walk schedule; min_steps are the diagonal floor lambda_j. */
struct ArwConfig {
    int adapt_interval = 25;       // refresh the covariance every K samples
    std::vector<double> min_steps; // per-parameter lambda_j
    int warmup = 100;              // RW samples before the first adaptation
};

/** Default floor: lambda_j = 0.01 * (b_j - a_j). */
std::vector<double> default_min_steps(const PriorBounds& bounds);

/**
 * Accepted chain iterates plus running co-moments, so the sample covariance
 * of the whole history is available in O(P^2) at any adaptation point.
 */
class ChainHistory {
public:
    explicit ChainHistory(std::size_t dim);

    void append(const std::vector<double>& theta);

    std::size_t size() const { return count_; }
    std::size_t dim() const { return dim_; }

    /** Sample covariance (n-1 denominator); throws InsufficientHistory when size < 2. */
    Matrix covariance() const;

private:
    std::size_t dim_;
    std::size_t count_ = 0;
    std::vector<double> mean_;
    std::vector<double> comoment_; // lower triangle, row-major packed per full row
    std::vector<double> delta_;
};

/** cov(history) + diag(lambda_j^2); symmetric positive definite by construction. */
Matrix update_covariance(const ChainHistory& history, const std::vector<double>& min_steps);

/** Lower-triangular Cholesky factor, row-major; throws FactorizationFailure. */
struct CholeskyFactor {
    int dim = 0;
    std::vector<double> lower;
};
CholeskyFactor cholesky(const Matrix& sigma);

/** Fold x into [lo, hi] by reflecting at the bounds until inside. */
double reflect_into(double x, double lo, double hi);

/**
 * RW proposal: independent normal steps with sigma_j = (b_j - a_j) * phi,
 * reflected into the prior box. Consumes exactly dim normal draws.
 */
std::vector<double> propose_rw(const std::vector<double>& theta, const PriorBounds& bounds,
                               double phi, RngStream& rng);

/**
 * ARW proposal: multivariate normal step via the Cholesky factor of sigma,
 * reflected into the prior box. Consumes exactly dim normal draws.
 */
std::vector<double> propose_arw(const std::vector<double>& theta, const Matrix& sigma,
                                const PriorBounds& bounds, RngStream& rng);

/** Same step from a pre-computed factor (the sampler's frozen-kernel path). */
std::vector<double> propose_arw_with_factor(const std::vector<double>& theta,
                                            const CholeskyFactor& factor,
                                            const PriorBounds& bounds, RngStream& rng);

/** 0 inside the closed prior box, -1e10 otherwise. */
double log_prior(const std::vector<double>& theta, const PriorBounds& bounds);

} // namespace saptlem
