#pragma once

#include <saptlem/problem.hpp>
#include <saptlem/pt_engine.hpp>
#include <saptlem/surrogate.hpp>

#include <filesystem>
#include <string>

namespace saptlem {

/** Everything needed to reproduce a run; round-trips through JSON. */
struct RunManifest {
    std::string problem_path; // when set, wins over the generator spec below
    std::string gen_kind = "mountain";
    int gen_grid = 32;
    std::uint64_t gen_seed = 7;
    ProblemOptions gen_options;

    EnsembleConfig ensemble;
    TrainConfig train;
    std::uint64_t seed = 1;
    std::string mode = "sapt";            // "pt" forces s_prob = 0
    std::string execution = "sequential"; // or "parallel"
    int slow_ms = 0;
    std::string out_dir;

    /** Throws ConfigError on invalid mode/execution or ensemble values. */
    void validate() const;

    /** Ensemble config with the pt-mode s_prob override applied. */
    EnsembleConfig effective_ensemble() const;
};

std::string manifest_to_json_string(const RunManifest& manifest);
RunManifest manifest_from_json_string(const std::string& text);
void write_manifest(const std::filesystem::path& path, const RunManifest& manifest);
RunManifest read_manifest(const std::filesystem::path& path);

/** Load the bundle when problem_path is set, else generate synthetically. */
Problem load_problem(const RunManifest& manifest);

/**
 * Write the full artifact set into `dir`: manifest echo, per-replica chain
 * CSVs, swap/timing/train-log CSVs, the dataset CSV, summary.json, the
 * surrogate checkpoint, shadow pairs, and (for grid problems) truth and
 * posterior-prediction grids.
 */
void write_run_artifacts(const std::filesystem::path& dir, const RunManifest& manifest,
                         const Problem* problem, const RunResult& result);

/** Chain CSV read-back for diagnostics. */
struct ChainFile {
    std::vector<std::string> names; // parameter columns
    std::vector<ChainRow> rows;
};
ChainFile read_chain_csv(const std::filesystem::path& path);

/** Surrogate checkpoint (weights, normalization, optimizer state). */
void write_surrogate_checkpoint(const std::filesystem::path& path,
                                const SurrogateNetwork& net, const NormalizationSpec& norm,
                                const AdamState& adam);
struct SurrogateCheckpoint {
    SurrogateNetwork net;
    NormalizationSpec norm;
    AdamState adam;
};
SurrogateCheckpoint read_surrogate_checkpoint(const std::filesystem::path& path);

/** Fused-dataset CSV read-back (cmd_surrogate_eval input). */
SurrogateDataset read_dataset_csv(const std::filesystem::path& path);

} // namespace saptlem
