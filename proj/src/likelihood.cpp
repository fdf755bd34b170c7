#include <saptlem/likelihood.hpp>

#include <saptlem/errors.hpp>

#include <cmath>

namespace saptlem {

namespace {

/** Shared Student-t sum: -((nu+1)/2) * sum log1p(r_i^2/nu). */
double student_t_sum(const double* pred, const double* truth, std::size_t n, double nu) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = pred[i] - truth[i];
        acc += std::log1p(r * r / nu);
    }
    return -0.5 * (nu + 1.0) * acc;
}

} // namespace

LikelihoodConfig default_likelihood_config(const Problem& problem) {
    LikelihoodConfig cfg;
    cfg.nu_elev = static_cast<long long>(problem.initial.cell_count());
    cfg.nu_sed = static_cast<long long>(problem.config.sediment_sites.size())
               * problem.config.n_checkpoints;
    return cfg;
}

double log_lik_elev(const GridTopography& pred, const GridTopography& truth, double nu) {
    if (pred.rows != truth.rows || pred.cols != truth.cols) {
        throw DimensionMismatch("elevation grids differ in shape");
    }
    if (nu < 1.0) throw ConfigError("nu must be at least 1");
    return student_t_sum(pred.elevation.data(), truth.elevation.data(), pred.cell_count(),
                         nu);
}

double log_lik_sed(const Matrix& pred, const Matrix& truth, double nu) {
    if (!pred.same_shape(truth)) throw DimensionMismatch("sediment matrices differ in shape");
    if (nu < 1.0) throw ConfigError("nu must be at least 1");
    return student_t_sum(pred.data.data(), truth.data.data(), pred.data.size(), nu);
}

LogLikelihood log_lik_combined(const SimulationOutput& output, const Observations& obs,
                               const LikelihoodConfig& cfg) {
    LogLikelihood ll;
    ll.elev = log_lik_elev(output.final_topography, obs.elevation_truth,
                           static_cast<double>(cfg.nu_elev));
    ll.sed = log_lik_sed(output.sediment, obs.sediment_truth,
                         static_cast<double>(cfg.nu_sed));
    ll.value = ll.elev + ll.sed;
    return ll;
}

TrueEvaluation evaluate_true(const ParameterVector& params, const Problem& problem,
                             const LikelihoodConfig& cfg) {
    TrueEvaluation result;
    try {
        result.output = simulate(problem.initial, params, problem.config);
    } catch (const NumericalOverflow&) {
        result.failed = true;
        result.loglik.value = kSentinelLogLik;
        result.loglik.elev = kSentinelLogLik;
        result.loglik.sed = kSentinelLogLik;
        return result;
    }
    result.loglik.elev = log_lik_elev(result.output.final_topography,
                                      problem.ground_truth.final_topography,
                                      static_cast<double>(cfg.nu_elev));
    result.loglik.sed = log_lik_sed(result.output.sediment, problem.ground_truth.sediment,
                                    static_cast<double>(cfg.nu_sed));
    result.loglik.value = result.loglik.elev + result.loglik.sed;
    return result;
}

} // namespace saptlem
