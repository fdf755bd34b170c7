#pragma once

#include <saptlem/grid.hpp>
#include <saptlem/lem.hpp>
#include <saptlem/parameters.hpp>

#include <filesystem>
#include <string>

namespace saptlem {

/**
 * A complete inversion problem: initial surface, synthetic noise-free ground
 * truth generated from true_parameters, the prior box, and the forward-model
 * configuration.
 */
struct Problem {
    std::string name;
    GridTopography initial;
    SimulationOutput ground_truth;
    ParameterVector true_parameters;
    PriorBounds bounds;
    LemConfig config;

    std::vector<std::string> names() const { return parameter_names(true_parameters); }

    /** Throws ConfigError when invariants fail (bounds, containment, shapes). */
    void validate() const;
};

/** Knobs for synthetic problem generation; defaults are the desk-scale setup. */
struct ProblemOptions {
    double cell_size = 1000.0; // m
    double sea_level = 0.0;    // m
    double duration = 1e6;     // a
    double time_step = 1000.0; // a
    int n_checkpoints = 4;
    int n_sites = 10;
};

/**
 * Build the mountain (flat start, 5 parameters with uplift) or margin
 * (sloped noisy coastal start, 6 parameters with diffusion coefficients)
 * problem. Ground truth is simulated from the true parameter values; the
 * same (kind, grid_size, seed, options) always yields an identical Problem.
 */
Problem make_synthetic_problem(const std::string& kind, int grid_size, std::uint64_t seed,
                               const ProblemOptions& options = {});

/** JSON bundle round-trip for Problem. */
std::string problem_to_json_string(const Problem& problem);
Problem problem_from_json_string(const std::string& text);
void write_problem(const std::filesystem::path& path, const Problem& problem);
Problem read_problem(const std::filesystem::path& path);

} // namespace saptlem
