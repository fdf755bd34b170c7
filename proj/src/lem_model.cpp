#include <saptlem/lem_model.hpp>

#include <saptlem/diagnostics.hpp>

#include <chrono>
#include <memory>
#include <thread>

namespace saptlem {

ModelInterface make_lem_model(const Problem& problem, int slow_ms) {
    problem.validate();
    ModelInterface model;
    model.bounds = problem.bounds;
    model.names = problem.names();
    const ParameterVector layout = problem.true_parameters;
    const Problem* prob = &problem;
    model.evaluate = [prob, layout, slow_ms](const std::vector<double>& theta) {
        if (slow_ms > 0) {
            std::this_thread::sleep_for(std::chrono::milliseconds(slow_ms));
        }
        const ParameterVector params = from_vector(theta, layout);
        LikelihoodConfig cfg = default_likelihood_config(*prob);
        TrueEvaluation eval = evaluate_true(params, *prob, cfg);

        Evaluation out;
        out.loglik = eval.loglik.value;
        out.failed = eval.failed;
        if (!eval.failed) {
            out.rmse_elev = rmse_elev(eval.output.final_topography,
                                      prob->ground_truth.final_topography);
            out.rmse_sed = rmse_sed(eval.output.sediment, prob->ground_truth.sediment);
            out.prediction = std::make_shared<const std::vector<double>>(
                std::move(eval.output.final_topography.elevation));
        }
        return out;
    };
    return model;
}

} // namespace saptlem
