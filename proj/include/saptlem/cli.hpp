#pragma once

#include <saptlem/diagnostics.hpp>
#include <saptlem/run_io.hpp>

#include <filesystem>
#include <vector>

namespace saptlem {

/**
 * Entry point behind main(). Subcommands: generate, run, diagnose,
 * surrogate-eval. Returns 0 on success, 2 on configuration errors
 * (including flag parse failures), 3 on I/O errors.
 */
int cli_main(int argc, const char* const* argv);

/** Load or generate the problem, sample, and write artifacts to out_dir. */
RunResult run_from_manifest(const RunManifest& manifest);

/** One grid cell of the surrogate-eval report. */
struct SurrogateEvalRow {
    Optimizer optimizer = Optimizer::adam;
    TrainMode mode = TrainMode::transfer_and_train;
    double batch_ratio = 0.0;
    double holdout_mse = 0.0;   // on the 10% holdout after the final interval
    double wall_seconds = 0.0;  // training time summed over the four intervals
};

/**
 * Train {sgd, adam} x {transfer_and_train, from_scratch} x batch ratios
 * {0.1, 0.2, 0.3, 0.4} over a four-interval schedule: the pool (rows with
 * index % 10 != 9; the rest form the holdout) is split into four chunks
 * arriving one per interval. Transfer continues weights on the newest chunk;
 * from-scratch reinitializes on everything so far. Throws IoError when the
 * dataset has fewer than 100 rows.
 */
std::vector<SurrogateEvalRow> evaluate_surrogate_dataset(const SurrogateDataset& dataset,
                                                         const TrainConfig& base,
                                                         std::uint64_t seed);

/**
 * Cross-run convergence report: each run directory contributes one chain
 * (post-burn-in rows pooled across its replicas). Writes psrf.json,
 * rmse_report.json, and cross_section.csv into out_dir and returns the
 * PSRF scores. Throws InsufficientRuns for fewer than two directories.
 */
PsrfReport diagnose_runs(const std::vector<std::filesystem::path>& run_dirs,
                         const std::filesystem::path& out_dir);

} // namespace saptlem
