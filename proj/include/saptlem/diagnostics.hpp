#pragma once

#include <saptlem/grid.hpp>

#include <vector>

namespace saptlem {

struct PsrfReport {
    std::vector<double> per_parameter; // R score per parameter
    double mean = 0.0;
};

/**
 * Gelman-Rubin potential scale reduction factor. `chains` holds C matrices
 * of identical shape L x P (samples by parameters). Throws ConfigError for
 * C < 2 or L < 4 and DegenerateChains when a within-chain variance is zero.
 */
PsrfReport psrf(const std::vector<Matrix>& chains);

/** Root-mean-square elevation misfit in meters. */
double rmse_elev(const GridTopography& pred, const GridTopography& truth);

/** Root-mean-square sediment misfit over the J x n_t record. */
double rmse_sed(const Matrix& pred, const Matrix& truth);

/** Root-mean-square gap between paired true and pseudo log-likelihoods. */
double rmse_sur(const std::vector<double>& true_logliks,
                const std::vector<double>& pseudo_logliks);

} // namespace saptlem
