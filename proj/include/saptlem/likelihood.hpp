#pragma once

#include <saptlem/grid.hpp>
#include <saptlem/lem.hpp>
#include <saptlem/problem.hpp>

namespace saptlem {

/** Log-likelihood assigned when the forward model fails; finite so swap and
 *  acceptance arithmetic stay well defined. */
inline constexpr double kSentinelLogLik = -1e10;

/** Ground-truth observations; noise scales are integrated out analytically
 *  and therefore have no stored field. */
struct Observations {
    GridTopography elevation_truth;
    Matrix sediment_truth;
};

/** Student-t degrees of freedom: one count per likelihood component. */
struct LikelihoodConfig {
    long long nu_elev = 1;
    long long nu_sed = 1;
};

/** nu_elev = grid cells, nu_sed = J * n_t (one per residual term). */
LikelihoodConfig default_likelihood_config(const Problem& problem);

struct LogLikelihood {
    double value = 0.0; // elev + sed
    double elev = 0.0;
    double sed = 0.0;
};

/** -((nu+1)/2) * sum log(1 + r^2/nu) over all grid cells. */
double log_lik_elev(const GridTopography& pred, const GridTopography& truth, double nu);

/** Same form over the J x n_t sediment matrix. */
double log_lik_sed(const Matrix& pred, const Matrix& truth, double nu);

LogLikelihood log_lik_combined(const SimulationOutput& output, const Observations& obs,
                               const LikelihoodConfig& cfg);

/** Result of one expensive evaluation; `failed` marks sentinel substitutions. */
struct TrueEvaluation {
    LogLikelihood loglik;
    SimulationOutput output; // empty when failed
    bool failed = false;
};

/**
 * Run the forward model and score it. NumericalOverflow maps to the
 * sentinel likelihood with `failed` set and no prediction.
 */
TrueEvaluation evaluate_true(const ParameterVector& params, const Problem& problem,
                             const LikelihoodConfig& cfg);

} // namespace saptlem
