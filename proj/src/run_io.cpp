#include <saptlem/run_io.hpp>

#include <saptlem/diagnostics.hpp>
#include <saptlem/errors.hpp>
#include <saptlem/textio.hpp>

#include <json.hpp>

#include <cmath>

namespace saptlem {

using nlohmann::json;

namespace {

std::string proposal_name(ProposalKind kind) {
    return kind == ProposalKind::rw ? "rw" : "arw";
}

ProposalKind proposal_from_name(const std::string& name) {
    if (name == "rw") return ProposalKind::rw;
    if (name == "arw") return ProposalKind::arw;
    throw ConfigError("unknown proposal kind: '" + name + "'");
}

std::string optimizer_name(Optimizer opt) {
    return opt == Optimizer::adam ? "adam" : "sgd";
}

Optimizer optimizer_from_name(const std::string& name) {
    if (name == "adam") return Optimizer::adam;
    if (name == "sgd") return Optimizer::sgd;
    throw ConfigError("unknown optimizer: '" + name + "'");
}

std::string train_mode_name(TrainMode mode) {
    return mode == TrainMode::transfer_and_train ? "transfer_and_train" : "from_scratch";
}

TrainMode train_mode_from_name(const std::string& name) {
    if (name == "transfer_and_train") return TrainMode::transfer_and_train;
    if (name == "from_scratch") return TrainMode::from_scratch;
    throw ConfigError("unknown train mode: '" + name + "'");
}

} // namespace

void RunManifest::validate() const {
    if (mode != "pt" && mode != "sapt") throw ConfigError("mode must be pt or sapt");
    if (execution != "sequential" && execution != "parallel") {
        throw ConfigError("execution must be sequential or parallel");
    }
    if (slow_ms < 0) throw ConfigError("slow_ms must be non-negative");
    if (out_dir.empty()) throw ConfigError("out_dir is required");
    effective_ensemble().validate();
}

EnsembleConfig RunManifest::effective_ensemble() const {
    EnsembleConfig cfg = ensemble;
    if (mode == "pt") cfg.s_prob = 0.0;
    return cfg;
}

std::string manifest_to_json_string(const RunManifest& m) {
    json j;
    if (!m.problem_path.empty()) {
        j["problem"] = json{{"path", m.problem_path}};
    } else {
        j["problem"] = json{{"kind", m.gen_kind},
                            {"grid", m.gen_grid},
                            {"seed", m.gen_seed},
                            {"cell_size", m.gen_options.cell_size},
                            {"sea_level", m.gen_options.sea_level},
                            {"duration", m.gen_options.duration},
                            {"time_step", m.gen_options.time_step},
                            {"checkpoints", m.gen_options.n_checkpoints},
                            {"sites", m.gen_options.n_sites}};
    }
    j["ensemble"] = json{{"replicas", m.ensemble.replicas},
                         {"samples", m.ensemble.samples},
                         {"swap_interval", m.ensemble.swap_interval},
                         {"t_max", m.ensemble.t_max},
                         {"psi", m.ensemble.psi},
                         {"s_prob", m.ensemble.s_prob},
                         {"burn_in", m.ensemble.burn_in},
                         {"stage2_start", m.ensemble.stage2_start},
                         {"proposal", proposal_name(m.ensemble.proposal)},
                         {"rw_phi", m.ensemble.rw_phi},
                         {"arw_adapt_interval", m.ensemble.arw_adapt_interval},
                         {"arw_min_step_fraction", m.ensemble.arw_min_step_fraction},
                         {"arw_warmup", m.ensemble.arw_warmup},
                         {"shadow_every", m.ensemble.shadow_every}};
    j["train"] = json{{"optimizer", optimizer_name(m.train.optimizer)},
                      {"mode", train_mode_name(m.train.mode)},
                      {"epochs", m.train.epochs},
                      {"batch_size", m.train.batch_size},
                      {"learning_rate", m.train.learning_rate},
                      {"batch_ratio", m.train.batch_ratio},
                      {"hidden", m.train.hidden_dim}};
    j["seed"] = m.seed;
    j["mode"] = m.mode;
    j["execution"] = m.execution;
    j["slow_ms"] = m.slow_ms;
    j["out_dir"] = m.out_dir;
    return j.dump(1);
}

RunManifest manifest_from_json_string(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw IoError(std::string("manifest parse failure: ") + e.what());
    }
    try {
        RunManifest m;
        if (j.contains("problem")) {
            const json& p = j["problem"];
            if (p.contains("path")) {
                m.problem_path = p["path"].get<std::string>();
            } else {
                if (p.contains("kind")) m.gen_kind = p["kind"].get<std::string>();
                if (p.contains("grid")) m.gen_grid = p["grid"].get<int>();
                if (p.contains("seed")) m.gen_seed = p["seed"].get<std::uint64_t>();
                if (p.contains("cell_size")) m.gen_options.cell_size = p["cell_size"].get<double>();
                if (p.contains("sea_level")) m.gen_options.sea_level = p["sea_level"].get<double>();
                if (p.contains("duration")) m.gen_options.duration = p["duration"].get<double>();
                if (p.contains("time_step")) m.gen_options.time_step = p["time_step"].get<double>();
                if (p.contains("checkpoints")) m.gen_options.n_checkpoints = p["checkpoints"].get<int>();
                if (p.contains("sites")) m.gen_options.n_sites = p["sites"].get<int>();
            }
        }
        if (j.contains("ensemble")) {
            const json& e = j["ensemble"];
            if (e.contains("replicas")) m.ensemble.replicas = e["replicas"].get<int>();
            if (e.contains("samples")) m.ensemble.samples = e["samples"].get<long long>();
            if (e.contains("swap_interval")) m.ensemble.swap_interval = e["swap_interval"].get<int>();
            if (e.contains("t_max")) m.ensemble.t_max = e["t_max"].get<double>();
            if (e.contains("psi")) m.ensemble.psi = e["psi"].get<double>();
            if (e.contains("s_prob")) m.ensemble.s_prob = e["s_prob"].get<double>();
            if (e.contains("burn_in")) m.ensemble.burn_in = e["burn_in"].get<double>();
            if (e.contains("stage2_start")) m.ensemble.stage2_start = e["stage2_start"].get<double>();
            if (e.contains("proposal")) m.ensemble.proposal = proposal_from_name(e["proposal"].get<std::string>());
            if (e.contains("rw_phi")) m.ensemble.rw_phi = e["rw_phi"].get<double>();
            if (e.contains("arw_adapt_interval")) m.ensemble.arw_adapt_interval = e["arw_adapt_interval"].get<int>();
            if (e.contains("arw_min_step_fraction")) m.ensemble.arw_min_step_fraction = e["arw_min_step_fraction"].get<double>();
            if (e.contains("arw_warmup")) m.ensemble.arw_warmup = e["arw_warmup"].get<int>();
            if (e.contains("shadow_every")) m.ensemble.shadow_every = e["shadow_every"].get<int>();
        }
        if (j.contains("train")) {
            const json& t = j["train"];
            if (t.contains("optimizer")) m.train.optimizer = optimizer_from_name(t["optimizer"].get<std::string>());
            if (t.contains("mode")) m.train.mode = train_mode_from_name(t["mode"].get<std::string>());
            if (t.contains("epochs")) m.train.epochs = t["epochs"].get<int>();
            if (t.contains("batch_size")) m.train.batch_size = t["batch_size"].get<int>();
            if (t.contains("learning_rate")) m.train.learning_rate = t["learning_rate"].get<double>();
            if (t.contains("batch_ratio")) m.train.batch_ratio = t["batch_ratio"].get<double>();
            if (t.contains("hidden")) m.train.hidden_dim = t["hidden"].get<int>();
        }
        if (j.contains("seed")) m.seed = j["seed"].get<std::uint64_t>();
        if (j.contains("mode")) m.mode = j["mode"].get<std::string>();
        if (j.contains("execution")) m.execution = j["execution"].get<std::string>();
        if (j.contains("slow_ms")) m.slow_ms = j["slow_ms"].get<int>();
        if (j.contains("out_dir")) m.out_dir = j["out_dir"].get<std::string>();
        return m;
    } catch (const json::exception& e) {
        throw IoError(std::string("manifest field failure: ") + e.what());
    }
}

void write_manifest(const std::filesystem::path& path, const RunManifest& manifest) {
    write_text_file(path, manifest_to_json_string(manifest));
}

RunManifest read_manifest(const std::filesystem::path& path) {
    return manifest_from_json_string(read_text_file(path));
}

Problem load_problem(const RunManifest& manifest) {
    if (!manifest.problem_path.empty()) return read_problem(manifest.problem_path);
    return make_synthetic_problem(manifest.gen_kind, manifest.gen_grid, manifest.gen_seed,
                                  manifest.gen_options);
}

namespace {

std::string chain_header(const std::vector<std::string>& names) {
    std::string h = "sample";
    for (const auto& n : names) h += "," + n;
    h += ",loglik,provenance,accepted,temperature,rmse_elev,rmse_sed";
    return h;
}

void write_chain_csv(const std::filesystem::path& path, const std::vector<ChainRow>& rows,
                     const std::vector<std::string>& names) {
    TextTable table(chain_header(names));
    for (const ChainRow& row : rows) {
        std::string line = std::to_string(row.sample);
        for (double v : row.theta) line += "," + format_double(v);
        line += "," + format_double(row.loglik);
        line += row.pseudo ? ",pseudo" : ",true";
        line += row.accepted ? ",1" : ",0";
        line += "," + format_double(row.temperature);
        line += "," + format_double(row.rmse_elev);
        line += "," + format_double(row.rmse_sed);
        table.add_row(std::move(line));
    }
    table.write(path);
}

json summary_json(const RunManifest& manifest, const Problem* problem,
                  const RunResult& result) {
    const EnsembleConfig cfg = manifest.effective_ensemble();
    PosteriorSummary posterior = posterior_summary(result, cfg.burn_in);

    json post = json::array();
    for (std::size_t j = 0; j < posterior.names.size(); ++j) {
        post.push_back(json{{"name", posterior.names[j]},
                            {"mean", posterior.mean[j]},
                            {"std", posterior.std_dev[j]},
                            {"q05", posterior.q05[j]},
                            {"q95", posterior.q95[j]}});
    }

    long long true_rows = 0;
    long long pseudo_rows = 0;
    double rmse_elev_sum = 0.0;
    double rmse_sed_sum = 0.0;
    long long post_rows = 0;
    for (const auto& chain : result.chains) {
        for (const ChainRow& row : chain) {
            if (row.pseudo) {
                ++pseudo_rows;
            } else {
                ++true_rows;
            }
            if (row.sample >= result.burn_in_index) {
                ++post_rows;
                rmse_elev_sum += row.rmse_elev;
                rmse_sed_sum += row.rmse_sed;
            }
        }
    }

    long long swap_accepted = 0;
    for (const SwapEvent& s : result.swaps) swap_accepted += s.accepted ? 1 : 0;

    json j;
    j["problem"] = problem ? problem->name : "oracle";
    j["replicas"] = cfg.replicas;
    j["samples"] = cfg.samples;
    j["burn_in_index"] = result.burn_in_index;
    j["posterior"] = std::move(post);
    j["pooled_samples"] = posterior.pooled_samples;
    j["counts"] = json{{"true_rows", true_rows},
                       {"pseudo_rows", pseudo_rows},
                       {"dataset_rows", result.dataset.size()},
                       {"shadow_pairs", result.shadow_pairs.size()}};
    j["acceptance_rate"] = result.acceptance_rate;
    j["swap_attempts"] = result.swaps.size();
    j["swap_accept_rate"] = result.swaps.empty()
        ? 0.0
        : static_cast<double>(swap_accepted) / static_cast<double>(result.swaps.size());
    j["rmse"] = json{{"mean_rmse_elev", post_rows ? rmse_elev_sum / post_rows : 0.0},
                     {"mean_rmse_sed", post_rows ? rmse_sed_sum / post_rows : 0.0}};
    if (result.shadow_pairs.empty()) {
        j["rmse_sur"] = nullptr;
    } else {
        std::vector<double> truths;
        std::vector<double> preds;
        truths.reserve(result.shadow_pairs.size());
        preds.reserve(result.shadow_pairs.size());
        for (const ShadowPair& p : result.shadow_pairs) {
            truths.push_back(p.true_loglik);
            preds.push_back(p.surrogate_loglik);
        }
        j["rmse_sur"] = rmse_sur(truths, preds);
    }
    j["surrogate"] = json{{"trained", result.surrogate_trained},
                          {"trainings", result.train_log.size()},
                          {"lik_min", result.norm.lik_min},
                          {"lik_max", result.norm.lik_max}};
    return j;
}

} // namespace

void write_run_artifacts(const std::filesystem::path& dir, const RunManifest& manifest,
                         const Problem* problem, const RunResult& result) {
    std::error_code ec;
    std::filesystem::create_directories(dir / "chains", ec);
    if (ec) throw IoError("cannot create run directory: " + dir.string());

    write_manifest(dir / "manifest.json", manifest);

    for (std::size_t r = 0; r < result.chains.size(); ++r) {
        write_chain_csv(dir / "chains" / ("replica_" + std::to_string(r) + ".csv"),
                        result.chains[r], result.parameter_names);
    }

    {
        TextTable table("sync,replica_i,replica_j,accepted");
        for (const SwapEvent& s : result.swaps) {
            table.add_row(std::to_string(s.sync) + "," + std::to_string(s.replica_i) + ","
                          + std::to_string(s.replica_j) + "," + (s.accepted ? "1" : "0"));
        }
        table.write(dir / "swaps.csv");
    }

    {
        TextTable table("phase,seconds");
        table.add_row("total," + format_double(result.timing.total));
        table.add_row("true_eval," + format_double(result.timing.true_eval));
        table.add_row("surrogate_train," + format_double(result.timing.surrogate_train));
        table.add_row("surrogate_predict," + format_double(result.timing.surrogate_predict));
        table.write(dir / "timing.csv");
    }

    {
        std::string header = "replica,sample,temperature";
        for (const auto& n : result.parameter_names) header += ",x_" + n;
        header += ",loglik_corr,provenance";
        TextTable table(std::move(header));
        for (const DatasetRow& row : result.dataset.rows) {
            std::string line = std::to_string(row.replica) + "," + std::to_string(row.sample)
                             + "," + format_double(row.temperature);
            for (double v : row.x) line += "," + format_double(v);
            line += "," + format_double(row.loglik_corr) + ",true";
            table.add_row(std::move(line));
        }
        table.write(dir / "surrogate_dataset.csv");
    }

    {
        TextTable table("sync,dataset_size,rows_used,mode,mse,wall_seconds");
        for (const TrainLogEntry& e : result.train_log) {
            table.add_row(std::to_string(e.sync) + "," + std::to_string(e.dataset_size) + ","
                          + std::to_string(e.rows_used) + "," + train_mode_name(e.mode) + ","
                          + format_double(e.mse) + "," + format_double(e.wall_seconds));
        }
        table.write(dir / "surrogate_train_log.csv");
    }

    if (!result.shadow_pairs.empty()) {
        TextTable table("true_loglik,surrogate_loglik");
        for (const ShadowPair& p : result.shadow_pairs) {
            table.add_row(format_double(p.true_loglik) + ","
                          + format_double(p.surrogate_loglik));
        }
        table.write(dir / "shadow_pairs.csv");
    }

    if (result.surrogate_trained) {
        write_surrogate_checkpoint(dir / "surrogate.json", result.net, result.norm,
                                   result.adam);
    }

    write_text_file(dir / "summary.json", summary_json(manifest, problem, result).dump(1));

    if (problem && result.prediction.count > 0) {
        GridTopography mean_grid = problem->ground_truth.final_topography;
        mean_grid.elevation = result.prediction.mean;
        write_grid(dir / "pred_mean.grid", mean_grid);
        GridTopography std_grid = mean_grid;
        std_grid.elevation = result.prediction.std_dev();
        write_grid(dir / "pred_std.grid", std_grid);
        write_grid(dir / "truth.grid", problem->ground_truth.final_topography);
    }
}

ChainFile read_chain_csv(const std::filesystem::path& path) {
    const std::string text = read_text_file(path);
    auto lines = split(text, '\n');
    if (lines.empty()) throw IoError("empty chain file: " + path.string());
    auto header = split(lines[0], ',');
    if (header.size() < 8 || header[0] != "sample") {
        throw IoError("bad chain header: " + path.string());
    }
    ChainFile file;
    // Columns between `sample` and `loglik` are the parameters.
    std::size_t loglik_col = 0;
    for (std::size_t i = 1; i < header.size(); ++i) {
        if (header[i] == "loglik") {
            loglik_col = i;
            break;
        }
        file.names.push_back(header[i]);
    }
    if (loglik_col == 0) throw IoError("chain header missing loglik: " + path.string());

    for (std::size_t li = 1; li < lines.size(); ++li) {
        if (lines[li].empty()) continue;
        auto fields = split(lines[li], ',');
        if (fields.size() != loglik_col + 6) {
            throw IoError("bad chain row in " + path.string());
        }
        ChainRow row;
        row.sample = parse_int(fields[0]);
        for (std::size_t j = 1; j < loglik_col; ++j) {
            row.theta.push_back(parse_double(fields[j]));
        }
        row.loglik = parse_double(fields[loglik_col]);
        row.pseudo = fields[loglik_col + 1] == "pseudo";
        row.accepted = fields[loglik_col + 2] == "1";
        row.temperature = parse_double(fields[loglik_col + 3]);
        row.rmse_elev = parse_double(fields[loglik_col + 4]);
        row.rmse_sed = parse_double(fields[loglik_col + 5]);
        file.rows.push_back(std::move(row));
    }
    return file;
}

void write_surrogate_checkpoint(const std::filesystem::path& path,
                                const SurrogateNetwork& net, const NormalizationSpec& norm,
                                const AdamState& adam) {
    json j;
    j["input_dim"] = net.input_dim;
    j["hidden_dim"] = net.hidden_dim;
    j["w1"] = net.w1;
    j["b1"] = net.b1;
    j["w2"] = net.w2;
    j["b2"] = net.b2;
    j["normalization"] = json{{"lower", norm.bounds.lower},
                              {"upper", norm.bounds.upper},
                              {"lik_min", norm.lik_min},
                              {"lik_max", norm.lik_max}};
    j["adam"] = json{{"m", adam.m},        {"v", adam.v},
                     {"t", adam.t},        {"beta1", adam.beta1},
                     {"beta2", adam.beta2},{"alpha", adam.alpha},
                     {"epsilon", adam.epsilon}};
    write_text_file(path, j.dump(1));
}

SurrogateCheckpoint read_surrogate_checkpoint(const std::filesystem::path& path) {
    json j;
    try {
        j = json::parse(read_text_file(path));
    } catch (const json::exception& e) {
        throw IoError(std::string("checkpoint parse failure: ") + e.what());
    }
    try {
        SurrogateCheckpoint cp;
        cp.net.input_dim = j.at("input_dim").get<int>();
        cp.net.hidden_dim = j.at("hidden_dim").get<int>();
        cp.net.w1 = j.at("w1").get<std::vector<double>>();
        cp.net.b1 = j.at("b1").get<std::vector<double>>();
        cp.net.w2 = j.at("w2").get<std::vector<double>>();
        cp.net.b2 = j.at("b2").get<double>();
        const json& n = j.at("normalization");
        cp.norm.bounds.lower = n.at("lower").get<std::vector<double>>();
        cp.norm.bounds.upper = n.at("upper").get<std::vector<double>>();
        cp.norm.lik_min = n.at("lik_min").get<double>();
        cp.norm.lik_max = n.at("lik_max").get<double>();
        const json& a = j.at("adam");
        cp.adam.m = a.at("m").get<std::vector<double>>();
        cp.adam.v = a.at("v").get<std::vector<double>>();
        cp.adam.t = a.at("t").get<long long>();
        cp.adam.beta1 = a.at("beta1").get<double>();
        cp.adam.beta2 = a.at("beta2").get<double>();
        cp.adam.alpha = a.at("alpha").get<double>();
        cp.adam.epsilon = a.at("epsilon").get<double>();
        return cp;
    } catch (const json::exception& e) {
        throw IoError(std::string("checkpoint field failure: ") + e.what());
    }
}

SurrogateDataset read_dataset_csv(const std::filesystem::path& path) {
    const std::string text = read_text_file(path);
    auto lines = split(text, '\n');
    if (lines.empty() || lines[0].empty()) throw IoError("empty dataset: " + path.string());
    auto header = split(lines[0], ',');
    std::vector<std::size_t> x_cols;
    std::size_t lik_col = 0;
    bool have_lik = false;
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i].rfind("x_", 0) == 0) x_cols.push_back(i);
        if (header[i] == "loglik_corr") {
            lik_col = i;
            have_lik = true;
        }
    }
    if (x_cols.empty() || !have_lik) {
        throw IoError("dataset header needs x_* and loglik_corr columns: " + path.string());
    }

    SurrogateDataset dataset;
    for (std::size_t li = 1; li < lines.size(); ++li) {
        if (lines[li].empty()) continue;
        auto fields = split(lines[li], ',');
        if (fields.size() < header.size()) throw IoError("short dataset row: " + path.string());
        DatasetRow row;
        row.x.reserve(x_cols.size());
        for (std::size_t c : x_cols) row.x.push_back(parse_double(fields[c]));
        row.loglik_corr = parse_double(fields[lik_col]);
        dataset.add(std::move(row));
    }
    if (dataset.rows.empty()) throw IoError("dataset has no rows: " + path.string());
    return dataset;
}

} // namespace saptlem
