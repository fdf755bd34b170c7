#include <saptlem/cli.hpp>

#include <saptlem/errors.hpp>
#include <saptlem/lem_model.hpp>
#include <saptlem/textio.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <iostream>

namespace saptlem {

using nlohmann::json;

namespace {

std::string pad(std::string text, std::size_t width) {
    if (text.size() < width) text.append(width - text.size(), ' ');
    return text;
}

std::string display(double value) {
    char buffer[32];
    std::snprintf(buffer, sizeof buffer, "%.6g", value);
    return buffer;
}

void cmd_generate(const std::string& kind, int grid, std::uint64_t seed,
                  const ProblemOptions& options, const std::string& out_path) {
    const Problem problem = make_synthetic_problem(kind, grid, seed, options);
    write_problem(out_path, problem);

    std::cout << "problem: " << problem.name << " (" << problem.initial.rows << "x"
              << problem.initial.cols << ", " << problem.bounds.size() << " parameters)\n";
    std::cout << "true parameters:\n";
    const auto names = problem.names();
    const auto truth = to_vector(problem.true_parameters);
    for (std::size_t j = 0; j < names.size(); ++j) {
        std::cout << "  " << pad(names[j], 12) << " = " << format_double(truth[j]) << "\n";
    }
    std::cout << "bundle: " << out_path << "\n";

    const auto t0 = std::chrono::steady_clock::now();
    simulate(problem.initial, problem.true_parameters, problem.config);
    const double per_eval = std::chrono::duration<double>(
        std::chrono::steady_clock::now() - t0).count();
    const EnsembleConfig ref;
    const double est = per_eval * static_cast<double>(ref.replicas)
                     * static_cast<double>(ref.samples + 1);
    std::cout << "one forward evaluation: " << display(per_eval)
              << " s; default ensemble (" << ref.replicas << " replicas x " << ref.samples
              << " samples) needs roughly " << display(est) << " s of model time\n";
}

void cmd_run(const RunManifest& manifest) {
    const RunResult result = run_from_manifest(manifest);

    double accept_sum = 0.0;
    for (double a : result.acceptance_rate) accept_sum += a;
    const double accept_mean = result.acceptance_rate.empty()
        ? 0.0 : accept_sum / static_cast<double>(result.acceptance_rate.size());

    std::cout << "run complete: " << manifest.out_dir << "\n";
    std::cout << "mode " << manifest.mode << ", " << result.chains.size() << " replicas, "
              << (result.chains.empty() ? 0 : result.chains.front().size() - 1)
              << " samples each\n";
    std::cout << "mean acceptance rate: " << display(accept_mean) << "\n";
    std::cout << "surrogate: " << (result.surrogate_trained ? "trained " : "idle (")
              << result.train_log.size() << (result.surrogate_trained ? " times, " : " trainings), ")
              << result.dataset.size() << " dataset rows\n";
    std::cout << "wall: total " << display(result.timing.total) << " s (true model "
              << display(result.timing.true_eval) << ", training "
              << display(result.timing.surrogate_train) << ", prediction "
              << display(result.timing.surrogate_predict) << ")\n";
}

struct RunDirData {
    RunManifest manifest;
    std::vector<std::string> names;
    Matrix chain; // pooled post-burn-in rows x parameters
    json summary;
};

RunDirData load_run_dir(const std::filesystem::path& dir) {
    RunDirData data;
    data.manifest = read_manifest(dir / "manifest.json");
    const EnsembleConfig cfg = data.manifest.effective_ensemble();
    const long long burn = cfg.burn_in_index();

    std::vector<ChainFile> files;
    files.reserve(static_cast<std::size_t>(cfg.replicas));
    for (int r = 0; r < cfg.replicas; ++r) {
        files.push_back(read_chain_csv(dir / "chains" / ("replica_" + std::to_string(r) + ".csv")));
    }
    data.names = files.front().names;

    std::size_t kept = 0;
    for (const ChainFile& f : files) {
        for (const ChainRow& row : f.rows) {
            if (row.sample >= burn) ++kept;
        }
    }
    Matrix chain(static_cast<int>(kept), static_cast<int>(data.names.size()));
    int i = 0;
    for (const ChainFile& f : files) {
        for (const ChainRow& row : f.rows) {
            if (row.sample < burn) continue;
            if (row.theta.size() != data.names.size()) {
                throw IoError("chain row width mismatch under " + dir.string());
            }
            for (std::size_t j = 0; j < row.theta.size(); ++j) {
                chain.at(i, static_cast<int>(j)) = row.theta[j];
            }
            ++i;
        }
    }
    data.chain = std::move(chain);

    try {
        data.summary = json::parse(read_text_file(dir / "summary.json"));
    } catch (const json::exception& e) {
        throw IoError("summary parse failure in " + dir.string() + ": " + e.what());
    }
    return data;
}

void write_cross_section(const std::vector<std::filesystem::path>& run_dirs,
                         const std::filesystem::path& out_dir) {
    for (const auto& dir : run_dirs) {
        if (!std::filesystem::exists(dir / "pred_mean.grid")) continue;
        const GridTopography truth = read_grid(dir / "truth.grid");
        const GridTopography mean = read_grid(dir / "pred_mean.grid");
        const GridTopography stddev = read_grid(dir / "pred_std.grid");
        const int row = truth.rows / 2;
        TextTable table("col,truth,pred_mean,pred_std");
        for (int c = 0; c < truth.cols; ++c) {
            table.add_row(std::to_string(c) + "," + format_double(truth.at(row, c)) + ","
                          + format_double(mean.at(row, c)) + ","
                          + format_double(stddev.at(row, c)));
        }
        table.write(out_dir / "cross_section.csv");
        return;
    }
}

void cmd_surrogate_eval(const std::string& dataset_path, const TrainConfig& base,
                        std::uint64_t seed, const std::string& out_dir) {
    const SurrogateDataset dataset = read_dataset_csv(dataset_path);
    const auto report = evaluate_surrogate_dataset(dataset, base, seed);

    std::cout << pad("optimizer", 10) << pad("mode", 20) << pad("batch_ratio", 13)
              << pad("holdout_mse", 13) << "wall_seconds\n";
    TextTable table("optimizer,mode,batch_ratio,holdout_mse,wall_seconds");
    for (const SurrogateEvalRow& row : report) {
        const std::string opt = row.optimizer == Optimizer::adam ? "adam" : "sgd";
        const std::string mode = row.mode == TrainMode::transfer_and_train
            ? "transfer_and_train" : "from_scratch";
        std::cout << pad(opt, 10) << pad(mode, 20) << pad(display(row.batch_ratio), 13)
                  << pad(display(row.holdout_mse), 13) << display(row.wall_seconds) << "\n";
        table.add_row(opt + "," + mode + "," + format_double(row.batch_ratio) + ","
                      + format_double(row.holdout_mse) + ","
                      + format_double(row.wall_seconds));
    }
    if (!out_dir.empty()) {
        table.write(std::filesystem::path(out_dir) / "surrogate_eval.csv");
        std::cout << "report: " << (std::filesystem::path(out_dir) / "surrogate_eval.csv").string()
                  << "\n";
    }
}

} // namespace

RunResult run_from_manifest(const RunManifest& manifest) {
    manifest.validate();
    const Problem problem = load_problem(manifest);
    const ModelInterface model = make_lem_model(problem, manifest.slow_ms);
    const ExecutionMode exec = manifest.execution == "parallel" ? ExecutionMode::parallel
                                                                : ExecutionMode::sequential;
    RunResult result = run(model, manifest.effective_ensemble(), manifest.train,
                           manifest.seed, exec);
    write_run_artifacts(manifest.out_dir, manifest, &problem, result);
    return result;
}

std::vector<SurrogateEvalRow> evaluate_surrogate_dataset(const SurrogateDataset& dataset,
                                                         const TrainConfig& base,
                                                         std::uint64_t seed) {
    if (dataset.rows.size() < 100) {
        throw IoError("surrogate-eval needs at least 100 dataset rows, got "
                      + std::to_string(dataset.rows.size()));
    }
    std::vector<const DatasetRow*> pool;
    std::vector<const DatasetRow*> holdout;
    for (std::size_t i = 0; i < dataset.rows.size(); ++i) {
        (i % 10 == 9 ? holdout : pool).push_back(&dataset.rows[i]);
    }
    const int input_dim = static_cast<int>(dataset.rows.front().x.size());

    constexpr double kRatios[] = {0.1, 0.2, 0.3, 0.4};
    constexpr Optimizer kOptimizers[] = {Optimizer::sgd, Optimizer::adam};
    constexpr TrainMode kModes[] = {TrainMode::transfer_and_train, TrainMode::from_scratch};

    std::vector<SurrogateEvalRow> report;
    std::uint64_t combo = 0;
    for (Optimizer optimizer : kOptimizers) {
        for (TrainMode mode : kModes) {
            for (double ratio : kRatios) {
                TrainConfig cfg = base;
                cfg.optimizer = optimizer;
                cfg.mode = mode;
                cfg.batch_ratio = ratio;

                RngStream rng(derive_stream_seed(seed, 3000000 + combo));
                SurrogateNetwork net = make_network(input_dim, cfg.hidden_dim);
                glorot_init(net, rng);
                AdamState state;
                state.reset(net);

                SurrogateEvalRow row;
                row.optimizer = optimizer;
                row.mode = mode;
                row.batch_ratio = ratio;

                SurrogateDataset working;
                const std::size_t n = pool.size();
                for (int interval = 0; interval < 4; ++interval) {
                    const std::size_t lo = n * static_cast<std::size_t>(interval) / 4;
                    const std::size_t hi = n * static_cast<std::size_t>(interval + 1) / 4;
                    for (std::size_t i = lo; i < hi; ++i) working.add(*pool[i]);
                    const TrainResult tr = train(net, state, working, cfg, rng);
                    row.wall_seconds += tr.wall_seconds;
                }

                const double span = working.lik_max - working.lik_min;
                double sum = 0.0;
                for (const DatasetRow* r : holdout) {
                    const double target = span > 0.0
                        ? (r->loglik_corr - working.lik_min) / span : 0.5;
                    const double diff = nn_forward(net, r->x) - target;
                    sum += diff * diff;
                }
                row.holdout_mse = holdout.empty()
                    ? 0.0 : sum / static_cast<double>(holdout.size());
                report.push_back(row);
                ++combo;
            }
        }
    }
    return report;
}

PsrfReport diagnose_runs(const std::vector<std::filesystem::path>& run_dirs,
                         const std::filesystem::path& out_dir) {
    if (run_dirs.size() < 2) {
        throw InsufficientRuns("diagnose needs at least 2 run directories, got "
                               + std::to_string(run_dirs.size()));
    }
    std::vector<RunDirData> runs;
    runs.reserve(run_dirs.size());
    for (const auto& dir : run_dirs) runs.push_back(load_run_dir(dir));

    std::vector<Matrix> chains;
    chains.reserve(runs.size());
    for (RunDirData& r : runs) chains.push_back(std::move(r.chain));
    const PsrfReport scores = psrf(chains);

    {
        json j;
        j["runs"] = run_dirs.size();
        j["chain_length"] = chains.front().rows;
        json params = json::array();
        for (std::size_t p = 0; p < runs.front().names.size(); ++p) {
            params.push_back(json{{"name", runs.front().names[p]},
                                  {"r_score", scores.per_parameter[p]}});
        }
        j["parameters"] = std::move(params);
        j["mean_r_score"] = scores.mean;
        write_text_file(out_dir / "psrf.json", j.dump(1));
    }

    {
        json entries = json::array();
        double elev_sum = 0.0;
        double sed_sum = 0.0;
        for (std::size_t i = 0; i < runs.size(); ++i) {
            const json& s = runs[i].summary;
            const double elev = s.at("rmse").at("mean_rmse_elev").get<double>();
            const double sed = s.at("rmse").at("mean_rmse_sed").get<double>();
            elev_sum += elev;
            sed_sum += sed;
            entries.push_back(json{{"dir", run_dirs[i].string()},
                                   {"mean_rmse_elev", elev},
                                   {"mean_rmse_sed", sed},
                                   {"rmse_sur", s.at("rmse_sur")},
                                   {"swap_accept_rate", s.at("swap_accept_rate")}});
        }
        json j;
        j["runs"] = std::move(entries);
        j["mean_rmse_elev"] = elev_sum / static_cast<double>(runs.size());
        j["mean_rmse_sed"] = sed_sum / static_cast<double>(runs.size());
        write_text_file(out_dir / "rmse_report.json", j.dump(1));
    }

    write_cross_section(run_dirs, out_dir);
    return scores;
}

int cli_main(int argc, const char* const* argv) {
    CLI::App app{"Surrogate-assisted parallel tempering for landscape evolution inversion"};
    app.require_subcommand(1);

    auto* gen = app.add_subcommand("generate", "Create a synthetic problem bundle");
    std::string gen_kind = "mountain";
    int gen_grid = 32;
    std::uint64_t gen_seed = 7;
    ProblemOptions gen_options;
    std::string gen_out;
    gen->add_option("--kind", gen_kind, "Problem kind: mountain or margin");
    gen->add_option("--grid", gen_grid, "Square grid size, at least 8");
    gen->add_option("--seed", gen_seed, "Generator seed");
    gen->add_option("--duration", gen_options.duration, "Simulated years");
    gen->add_option("--time-step", gen_options.time_step, "Years per step");
    gen->add_option("--checkpoints", gen_options.n_checkpoints, "Sediment checkpoints");
    gen->add_option("--sites", gen_options.n_sites, "Sediment sites");
    gen->add_option("--cell-size", gen_options.cell_size, "Cell edge in meters");
    gen->add_option("--sea-level", gen_options.sea_level, "Sea level in meters");
    gen->add_option("--out", gen_out, "Bundle output path")->required();
    gen->callback([&] { cmd_generate(gen_kind, gen_grid, gen_seed, gen_options, gen_out); });

    auto* runc = app.add_subcommand("run", "Run an inversion and write artifacts");
    std::string config_path;
    std::string problem_path;
    RunManifest flags;
    auto* o_problem = runc->add_option("--problem", problem_path, "Problem bundle path");
    runc->add_option("--config", config_path, "Manifest JSON path");
    auto* o_replicas = runc->add_option("--replicas", flags.ensemble.replicas, "Replica count");
    auto* o_samples = runc->add_option("--samples", flags.ensemble.samples, "Samples per replica");
    auto* o_swap = runc->add_option("--swap-interval", flags.ensemble.swap_interval,
                                    "Samples between swap attempts");
    auto* o_psi = runc->add_option("--surrogate-interval,--psi", flags.ensemble.psi,
                                   "Surrogate training interval as a fraction of samples");
    auto* o_sprob = runc->add_option("--s-prob", flags.ensemble.s_prob,
                                     "Surrogate probability after first training");
    auto* o_tmax = runc->add_option("--t-max", flags.ensemble.t_max, "Hottest temperature");
    std::string proposal;
    auto* o_proposal = runc->add_option("--proposal", proposal, "Proposal kind")
                           ->check(CLI::IsMember({"rw", "arw"}));
    auto* o_seed = runc->add_option("--seed", flags.seed, "Sampler seed");
    auto* o_mode = runc->add_option("--mode", flags.mode, "pt or sapt")
                       ->check(CLI::IsMember({"pt", "sapt"}));
    auto* o_exec = runc->add_option("--execution", flags.execution, "sequential or parallel")
                       ->check(CLI::IsMember({"sequential", "parallel"}));
    auto* o_slow = runc->add_option("--slow-ms", flags.slow_ms,
                                    "Artificial per-evaluation delay in ms");
    auto* o_out = runc->add_option("--out", flags.out_dir, "Artifact output directory");
    runc->callback([&] {
        RunManifest manifest;
        if (!config_path.empty()) manifest = read_manifest(config_path);
        if (o_problem->count()) manifest.problem_path = problem_path;
        if (o_replicas->count()) manifest.ensemble.replicas = flags.ensemble.replicas;
        if (o_samples->count()) manifest.ensemble.samples = flags.ensemble.samples;
        if (o_swap->count()) manifest.ensemble.swap_interval = flags.ensemble.swap_interval;
        if (o_psi->count()) manifest.ensemble.psi = flags.ensemble.psi;
        if (o_sprob->count()) manifest.ensemble.s_prob = flags.ensemble.s_prob;
        if (o_tmax->count()) manifest.ensemble.t_max = flags.ensemble.t_max;
        if (o_proposal->count()) {
            manifest.ensemble.proposal = proposal == "rw" ? ProposalKind::rw : ProposalKind::arw;
        }
        if (o_seed->count()) manifest.seed = flags.seed;
        if (o_mode->count()) manifest.mode = flags.mode;
        if (o_exec->count()) manifest.execution = flags.execution;
        if (o_slow->count()) manifest.slow_ms = flags.slow_ms;
        if (o_out->count()) manifest.out_dir = flags.out_dir;
        cmd_run(manifest);
    });

    auto* diag = app.add_subcommand("diagnose", "Aggregate PSRF and RMSE reports across runs");
    std::vector<std::string> diag_dirs;
    std::string diag_out = "diagnostics";
    diag->add_option("dirs", diag_dirs, "Run directories")->expected(-1);
    diag->add_option("--out", diag_out, "Report output directory");
    diag->callback([&] {
        std::vector<std::filesystem::path> paths(diag_dirs.begin(), diag_dirs.end());
        const PsrfReport scores = diagnose_runs(paths, diag_out);
        std::cout << "mean r-score over " << paths.size() << " runs: "
                  << display(scores.mean) << "\n";
        std::cout << "reports: " << diag_out << "\n";
    });

    auto* sev = app.add_subcommand("surrogate-eval",
                                   "Training-quality grid over optimizers, modes, batch ratios");
    std::string dataset_path;
    std::string sev_out;
    TrainConfig sev_base;
    std::uint64_t sev_seed = 1;
    sev->add_option("--dataset", dataset_path, "Fused dataset CSV")->required();
    sev->add_option("--epochs", sev_base.epochs, "Epochs per training call");
    sev->add_option("--batch-size", sev_base.batch_size, "Minibatch size");
    sev->add_option("--hidden", sev_base.hidden_dim, "Hidden layer width");
    sev->add_option("--learning-rate", sev_base.learning_rate,
                    "Step size; 0 picks the optimizer default");
    sev->add_option("--seed", sev_seed, "Evaluation seed");
    sev->add_option("--out", sev_out, "Report CSV directory");
    sev->callback([&] { cmd_surrogate_eval(dataset_path, sev_base, sev_seed, sev_out); });

    try {
        app.parse(argc, argv);
        return 0;
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return 3;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

} // namespace saptlem
