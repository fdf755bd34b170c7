#include <saptlem/pt_engine.hpp>

#include <saptlem/errors.hpp>

#include <algorithm>
#include <barrier>
#include <chrono>
#include <cmath>
#include <exception>
#include <set>
#include <thread>

namespace saptlem {

TemperatureLadder build_ladder(int replicas, double t_max) {
    if (replicas < 2) throw InvalidConfig("ladder needs at least 2 replicas");
    if (!(t_max >= 1.0)) throw InvalidConfig("t_max must be at least 1");
    TemperatureLadder ladder;
    ladder.t_max = t_max;
    ladder.temperatures.resize(replicas);
    for (int i = 0; i < replicas; ++i) {
        ladder.temperatures[i] =
            std::pow(t_max, static_cast<double>(i) / static_cast<double>(replicas - 1));
    }
    return ladder;
}

bool metropolis_accept(double l_new, double l_old, double temperature, RngStream& rng) {
    const double u = rng.uniform(); // always consumed to keep streams aligned
    const double ratio = (l_new - l_old) / temperature;
    if (ratio >= 0.0) return true;
    return std::log(u) < ratio;
}

SwapDecision swap_accept(double t_i, double t_j, double l_i, double l_j, RngStream& rng) {
    const double u = rng.uniform(); // always consumed
    const double exponent = (1.0 / t_i - 1.0 / t_j) * (l_j - l_i);
    SwapDecision decision;
    decision.probability = std::min(1.0, std::exp(exponent));
    decision.accepted = u < decision.probability;
    return decision;
}

EvalChoice choose_evaluation(RngStream& rng, double s_prob, bool surrogate_ready) {
    const double u = rng.uniform(); // always consumed
    if (!surrogate_ready) return EvalChoice::true_model;
    return u < s_prob ? EvalChoice::surrogate : EvalChoice::true_model;
}

void LikelihoodRing::push(double value) {
    values_[next_] = value;
    next_ = (next_ + 1) % 3;
    if (count_ < 3) ++count_;
}

double LikelihoodRing::mean() const {
    if (count_ == 0) throw ConfigError("likelihood ring is empty");
    double sum = 0.0;
    for (int i = 0; i < count_; ++i) sum += values_[i];
    // Fewer than 3 entries: pad by repeating the oldest (slot 0 before wrap).
    sum += static_cast<double>(3 - count_) * values_[0];
    return sum / 3.0;
}

double blend_pseudo(double l_surrogate, const LikelihoodRing& ring) {
    return 0.5 * l_surrogate + 0.5 * ring.mean();
}

void stage_transition(TemperatureLadder& ladder) {
    std::fill(ladder.temperatures.begin(), ladder.temperatures.end(), 1.0);
}

long long EnsembleConfig::burn_in_index() const {
    return std::llround(burn_in * static_cast<double>(samples));
}

long long EnsembleConfig::stage2_index() const {
    return std::llround(stage2_start * static_cast<double>(samples));
}

long long EnsembleConfig::surrogate_interval() const {
    return std::max<long long>(1, std::llround(psi * static_cast<double>(samples)));
}

void EnsembleConfig::validate() const {
    if (replicas < 2) throw ConfigError("need at least 2 replicas");
    if (samples < 1) throw ConfigError("need at least 1 sample");
    if (swap_interval < 1) throw ConfigError("swap_interval must be positive");
    if (!(t_max >= 1.0)) throw ConfigError("t_max must be at least 1");
    if (!(psi > 0.0 && psi < 1.0)) throw ConfigError("psi must be in (0, 1)");
    if (!(s_prob >= 0.0 && s_prob < 1.0)) throw ConfigError("s_prob must be in [0, 1)");
    if (!(burn_in >= 0.0 && burn_in < 1.0)) throw ConfigError("burn_in must be in [0, 1)");
    if (!(stage2_start >= 0.0 && stage2_start <= 1.0)) {
        throw ConfigError("stage2_start must be in [0, 1]");
    }
    if (!(rw_phi > 0.0 && rw_phi < 1.0)) throw ConfigError("rw_phi must be in (0, 1)");
    if (arw_adapt_interval < 1) throw ConfigError("arw_adapt_interval must be positive");
    if (arw_warmup < 0) throw ConfigError("arw_warmup must be non-negative");
    if (!(arw_min_step_fraction > 0.0)) throw ConfigError("arw_min_step_fraction must be positive");
    if (shadow_every < 1) throw ConfigError("shadow_every must be positive");
}

void PredictionAccumulator::add(const std::vector<double>& values) {
    if (mean.empty()) {
        mean.assign(values.size(), 0.0);
        m2.assign(values.size(), 0.0);
    }
    if (values.size() != mean.size()) throw DimensionMismatch("prediction size mismatch");
    ++count;
    const double inv = 1.0 / static_cast<double>(count);
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double delta = values[i] - mean[i];
        mean[i] += delta * inv;
        m2[i] += delta * (values[i] - mean[i]);
    }
}

std::vector<double> PredictionAccumulator::std_dev() const {
    std::vector<double> out(mean.size(), 0.0);
    if (count >= 2) {
        const double inv = 1.0 / static_cast<double>(count - 1);
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::sqrt(m2[i] * inv);
    }
    return out;
}

namespace {

/** Chan et al. pairwise merge, so per-replica accumulators combine in a
 *  fixed order regardless of execution mode. */
void merge_accumulators(PredictionAccumulator& into, const PredictionAccumulator& other) {
    if (other.count == 0) return;
    if (into.count == 0) {
        into = other;
        return;
    }
    if (into.mean.size() != other.mean.size()) {
        throw DimensionMismatch("prediction accumulator size mismatch");
    }
    const double na = static_cast<double>(into.count);
    const double nb = static_cast<double>(other.count);
    const double n = na + nb;
    for (std::size_t i = 0; i < into.mean.size(); ++i) {
        const double delta = other.mean[i] - into.mean[i];
        into.mean[i] += delta * (nb / n);
        into.m2[i] += other.m2[i] + delta * delta * (na * nb / n);
    }
    into.count += other.count;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

/** One tempered chain and everything it owns between synchronizations. */
struct ReplicaRunner {
    int index = 0;
    double temperature = 1.0;
    std::vector<double> theta;
    double loglik = 0.0;
    double rmse_e = 0.0;
    double rmse_s = 0.0;
    std::shared_ptr<const std::vector<double>> prediction;
    LikelihoodRing ring;
    ChainHistory history;
    RngStream rng;
    CholeskyFactor chol;
    bool use_chol = false;
    long long accepted = 0;
    long long pseudo_seen = 0;
    std::vector<DatasetRow> pending;
    std::vector<ShadowPair> shadow;
    std::vector<ChainRow> rows;
    PredictionAccumulator pred_accum;
    SurrogateNetwork net;
    NormalizationSpec norm;
    bool net_ready = false;
    double true_eval_seconds = 0.0;
    double predict_seconds = 0.0;

    ReplicaRunner(std::size_t dim, std::uint64_t stream_seed)
        : history(dim), rng(stream_seed) {}
};

struct Engine {
    const ModelInterface& model;
    const EnsembleConfig& cfg;
    const TrainConfig& tcfg;

    std::size_t dim;
    std::vector<double> min_steps;
    TemperatureLadder ladder;
    TemperatureLadder initial_ladder;
    std::vector<ReplicaRunner> replicas;
    std::vector<long long> sync_points;

    SurrogateDataset dataset;
    SurrogateNetwork net;
    AdamState adam;
    RngStream train_rng;
    RngStream swap_rng;
    bool stage2_applied = false;
    bool trained = false;
    long long swap_parity = 0;
    std::vector<SwapEvent> swaps;
    std::vector<TrainLogEntry> train_log;
    double train_seconds = 0.0;
    std::exception_ptr manager_error;

    long long burn_idx;
    long long stage2_idx;
    long long surr_interval;

    Engine(const ModelInterface& model_, const EnsembleConfig& cfg_, const TrainConfig& tcfg_,
           std::uint64_t seed)
        : model(model_), cfg(cfg_), tcfg(tcfg_), dim(model_.bounds.size()),
          train_rng(derive_stream_seed(seed, 1000000)),
          swap_rng(derive_stream_seed(seed, 1000001)) {
        cfg.validate();
        model.bounds.validate();
        if (!model.evaluate) throw ConfigError("model has no evaluate function");
        if (model.names.size() != dim) throw ConfigError("parameter name count mismatch");
        if (tcfg.hidden_dim < 1) throw ConfigError("hidden_dim must be positive");

        burn_idx = cfg.burn_in_index();
        stage2_idx = cfg.stage2_index();
        surr_interval = cfg.surrogate_interval();
        min_steps.resize(dim);
        for (std::size_t j = 0; j < dim; ++j) {
            min_steps[j] = cfg.arw_min_step_fraction
                         * (model.bounds.upper[j] - model.bounds.lower[j]);
        }

        ladder = build_ladder(cfg.replicas, cfg.t_max);
        initial_ladder = ladder;

        net = make_network(static_cast<int>(dim), tcfg.hidden_dim);
        glorot_init(net, train_rng);
        adam.reset(net);

        std::set<long long> syncs;
        for (long long s = cfg.swap_interval; s <= cfg.samples; s += cfg.swap_interval) {
            syncs.insert(s);
        }
        for (long long s = surr_interval; s <= cfg.samples; s += surr_interval) {
            syncs.insert(s);
        }
        syncs.insert(cfg.samples);
        sync_points.assign(syncs.begin(), syncs.end());

        replicas.reserve(cfg.replicas);
        for (int r = 0; r < cfg.replicas; ++r) {
            replicas.emplace_back(dim, derive_stream_seed(seed, static_cast<std::uint64_t>(r)));
            init_replica(replicas.back(), r);
        }
    }

    std::vector<double> normalized(const std::vector<double>& theta) const {
        std::vector<double> out(dim);
        for (std::size_t j = 0; j < dim; ++j) {
            out[j] = (theta[j] - model.bounds.lower[j])
                   / (model.bounds.upper[j] - model.bounds.lower[j]);
        }
        return out;
    }

    void init_replica(ReplicaRunner& rep, int index) {
        rep.index = index;
        rep.temperature = ladder.temperatures[index];
        rep.theta.resize(dim);
        for (std::size_t j = 0; j < dim; ++j) {
            rep.theta[j] = model.bounds.lower[j]
                         + rep.rng.uniform() * (model.bounds.upper[j] - model.bounds.lower[j]);
        }
        const auto t0 = std::chrono::steady_clock::now();
        Evaluation ev = model.evaluate(rep.theta);
        rep.true_eval_seconds += seconds_since(t0);
        rep.loglik = ev.loglik;
        rep.rmse_e = ev.rmse_elev;
        rep.rmse_s = ev.rmse_sed;
        rep.prediction = ev.failed ? nullptr : ev.prediction;
        rep.ring.push(rep.loglik);
        rep.history.append(rep.theta);
        if (!ev.failed) {
            rep.pending.push_back(DatasetRow{normalized(rep.theta),
                                             rep.loglik * rep.temperature, index, 0,
                                             rep.temperature});
        }
        ChainRow row;
        row.sample = 0;
        row.theta = rep.theta;
        row.loglik = rep.loglik;
        row.pseudo = false;
        row.accepted = true;
        row.temperature = rep.temperature;
        row.rmse_elev = rep.rmse_e;
        row.rmse_sed = rep.rmse_s;
        rep.rows.reserve(static_cast<std::size_t>(cfg.samples) + 1);
        rep.rows.push_back(std::move(row));
        if (0 >= burn_idx && rep.prediction) rep.pred_accum.add(*rep.prediction);
    }

    /** One proposal step for one replica; touches only that replica's state. */
    void advance(ReplicaRunner& rep, long long s) {
        bool arw_active = false;
        if (cfg.proposal == ProposalKind::arw && s > cfg.arw_warmup) {
            const long long since = s - cfg.arw_warmup - 1;
            if (since % cfg.arw_adapt_interval == 0 && rep.history.size() >= 2) {
                try {
                    const Matrix sigma = update_covariance(rep.history, min_steps);
                    rep.chol = cholesky(sigma);
                    rep.use_chol = true;
                } catch (const FactorizationFailure&) {
                    rep.use_chol = false; // fall back to RW until the next refresh
                }
            }
            arw_active = rep.use_chol;
        }
        const std::vector<double> proposal =
            arw_active ? propose_arw_with_factor(rep.theta, rep.chol, model.bounds, rep.rng)
                       : propose_rw(rep.theta, model.bounds, cfg.rw_phi, rep.rng);

        const EvalChoice choice = choose_evaluation(rep.rng, cfg.s_prob, rep.net_ready);
        double l_new = 0.0;
        bool is_pseudo = false;
        Evaluation ev;
        if (choice == EvalChoice::true_model) {
            const auto t0 = std::chrono::steady_clock::now();
            ev = model.evaluate(proposal);
            rep.true_eval_seconds += seconds_since(t0);
            l_new = ev.loglik;
            if (!ev.failed) {
                rep.pending.push_back(DatasetRow{normalized(proposal),
                                                 l_new * rep.temperature, rep.index, s,
                                                 rep.temperature});
            }
        } else {
            is_pseudo = true;
            const auto t0 = std::chrono::steady_clock::now();
            const double l_sur = predict_pseudo(rep.net, proposal, rep.norm, true);
            rep.predict_seconds += seconds_since(t0);
            l_new = blend_pseudo(l_sur, rep.ring);
            ++rep.pseudo_seen;
            if (rep.pseudo_seen % cfg.shadow_every == 0) {
                // Shadow evaluation: logged for surrogate-quality reporting,
                // never used by the chain or the training dataset.
                const auto t1 = std::chrono::steady_clock::now();
                const Evaluation truth = model.evaluate(proposal);
                rep.true_eval_seconds += seconds_since(t1);
                if (!truth.failed) rep.shadow.push_back(ShadowPair{truth.loglik, l_sur});
            }
        }

        const bool accept = metropolis_accept(l_new, rep.loglik, rep.temperature, rep.rng);
        if (accept) {
            rep.theta = proposal;
            rep.loglik = l_new;
            ++rep.accepted;
            if (is_pseudo) {
                rep.prediction = nullptr; // pseudo states carry no prediction grid
            } else {
                rep.rmse_e = ev.rmse_elev;
                rep.rmse_s = ev.rmse_sed;
                rep.prediction = ev.failed ? nullptr : ev.prediction;
            }
            rep.history.append(rep.theta);
        }
        rep.ring.push(rep.loglik);
        if (s >= burn_idx && rep.prediction) rep.pred_accum.add(*rep.prediction);

        ChainRow row;
        row.sample = s;
        row.theta = rep.theta;
        row.loglik = rep.loglik;
        row.pseudo = is_pseudo;
        row.accepted = accept;
        row.temperature = rep.temperature;
        row.rmse_elev = rep.rmse_e;
        row.rmse_sed = rep.rmse_s;
        rep.rows.push_back(std::move(row));
    }

    /** Runs with all replicas paused at sample s; sole writer of shared state. */
    void manager_sync(long long s) {
        const bool collect = (s % surr_interval == 0) || s == cfg.samples;
        if (collect) {
            for (ReplicaRunner& rep : replicas) {
                for (DatasetRow& row : rep.pending) dataset.add(std::move(row));
                rep.pending.clear();
            }
            if (s < cfg.samples && dataset.size() > dataset.last_trained) {
                TrainResult result = train(net, adam, dataset, tcfg, train_rng);
                train_seconds += result.wall_seconds;
                train_log.push_back(TrainLogEntry{s, dataset.size(), result.rows_used,
                                                  tcfg.mode, result.mse,
                                                  result.wall_seconds});
                trained = true;
                NormalizationSpec spec;
                spec.bounds = model.bounds;
                spec.lik_min = dataset.lik_min;
                spec.lik_max = dataset.lik_max;
                for (ReplicaRunner& rep : replicas) {
                    rep.net = net;
                    rep.norm = spec;
                    rep.net_ready = true;
                }
            }
        }

        if (!stage2_applied && s >= stage2_idx) {
            stage_transition(ladder);
            for (ReplicaRunner& rep : replicas) rep.temperature = 1.0;
            stage2_applied = true;
        }

        if (s % cfg.swap_interval == 0) {
            const int start = static_cast<int>(swap_parity % 2);
            for (int i = start; i + 1 < cfg.replicas; i += 2) {
                ReplicaRunner& a = replicas[i];
                ReplicaRunner& b = replicas[i + 1];
                const SwapDecision decision =
                    swap_accept(a.temperature, b.temperature, a.loglik, b.loglik, swap_rng);
                swaps.push_back(SwapEvent{s, i, i + 1, decision.accepted});
                if (decision.accepted) {
                    std::swap(a.theta, b.theta);
                    std::swap(a.loglik, b.loglik);
                    std::swap(a.ring, b.ring);
                    std::swap(a.rmse_e, b.rmse_e);
                    std::swap(a.rmse_s, b.rmse_s);
                    std::swap(a.prediction, b.prediction);
                    a.history.append(a.theta);
                    b.history.append(b.theta);
                }
            }
            ++swap_parity;
        }
    }

    void run_sequential() {
        long long prev = 0;
        for (long long sync : sync_points) {
            for (ReplicaRunner& rep : replicas) {
                for (long long s = prev + 1; s <= sync; ++s) advance(rep, s);
            }
            manager_sync(sync);
            prev = sync;
        }
    }

    void run_parallel() {
        // All replicas share the sync schedule, so every barrier phase
        // corresponds to one sync point; the completion step is the manager.
        std::size_t next_sync = 0;
        auto completion = [this, &next_sync]() noexcept {
            if (manager_error) {
                ++next_sync;
                return;
            }
            try {
                manager_sync(sync_points[next_sync]);
            } catch (...) {
                manager_error = std::current_exception();
            }
            ++next_sync;
        };
        std::barrier barrier(cfg.replicas, completion);

        auto worker = [this, &barrier](ReplicaRunner& rep) {
            long long prev = 0;
            for (long long sync : sync_points) {
                for (long long s = prev + 1; s <= sync; ++s) advance(rep, s);
                barrier.arrive_and_wait();
                prev = sync;
            }
        };
        std::vector<std::thread> threads;
        threads.reserve(replicas.size());
        for (ReplicaRunner& rep : replicas) threads.emplace_back(worker, std::ref(rep));
        for (std::thread& t : threads) t.join();
        if (manager_error) std::rethrow_exception(manager_error);
    }

    RunResult collect_result() {
        RunResult result;
        result.chains.reserve(replicas.size());
        result.acceptance_rate.reserve(replicas.size());
        for (ReplicaRunner& rep : replicas) {
            result.chains.push_back(std::move(rep.rows));
            result.acceptance_rate.push_back(static_cast<double>(rep.accepted)
                                             / static_cast<double>(cfg.samples));
            for (const ShadowPair& pair : rep.shadow) result.shadow_pairs.push_back(pair);
            merge_accumulators(result.prediction, rep.pred_accum);
            result.timing.true_eval += rep.true_eval_seconds;
            result.timing.surrogate_predict += rep.predict_seconds;
        }
        result.swaps = std::move(swaps);
        result.train_log = std::move(train_log);
        result.dataset = std::move(dataset);
        result.initial_ladder = initial_ladder;
        result.burn_in_index = burn_idx;
        result.net = std::move(net);
        result.adam = std::move(adam);
        result.norm.bounds = model.bounds;
        result.norm.lik_min = result.dataset.lik_min;
        result.norm.lik_max = result.dataset.lik_max;
        result.surrogate_trained = trained;
        result.timing.surrogate_train = train_seconds;
        result.parameter_names = model.names;
        return result;
    }
};

} // namespace

RunResult run(const ModelInterface& model, const EnsembleConfig& cfg,
              const TrainConfig& train_cfg, std::uint64_t seed, ExecutionMode mode) {
    const auto t0 = std::chrono::steady_clock::now();
    Engine engine(model, cfg, train_cfg, seed);
    if (mode == ExecutionMode::sequential) {
        engine.run_sequential();
    } else {
        engine.run_parallel();
    }
    RunResult result = engine.collect_result();
    result.timing.total = seconds_since(t0);
    return result;
}

PosteriorSummary posterior_summary(const RunResult& result, double burn_in) {
    if (result.chains.empty()) throw EmptyPosterior("no chains");
    const long long samples = static_cast<long long>(result.chains[0].size()) - 1;
    const long long burn_idx = std::llround(burn_in * static_cast<double>(samples));

    const std::size_t dim = result.parameter_names.size();
    std::vector<std::vector<double>> pooled(dim);
    for (const auto& chain : result.chains) {
        for (const ChainRow& row : chain) {
            if (row.sample < burn_idx) continue;
            for (std::size_t j = 0; j < dim; ++j) pooled[j].push_back(row.theta[j]);
        }
    }
    if (pooled.empty() || pooled[0].empty()) {
        throw EmptyPosterior("no post-burn-in samples");
    }

    PosteriorSummary summary;
    summary.names = result.parameter_names;
    summary.pooled_samples = pooled[0].size();
    const double n = static_cast<double>(summary.pooled_samples);
    for (std::size_t j = 0; j < dim; ++j) {
        std::vector<double>& values = pooled[j];
        double mean = 0.0;
        for (double v : values) mean += v;
        mean /= n;
        double var = 0.0;
        for (double v : values) {
            const double d = v - mean;
            var += d * d;
        }
        var = values.size() > 1 ? var / (n - 1.0) : 0.0;
        std::sort(values.begin(), values.end());
        auto quantile = [&values](double p) {
            const double pos = p * static_cast<double>(values.size() - 1);
            const std::size_t lo = static_cast<std::size_t>(pos);
            if (lo + 1 >= values.size()) return values.back();
            const double frac = pos - static_cast<double>(lo);
            return values[lo] * (1.0 - frac) + values[lo + 1] * frac;
        };
        summary.mean.push_back(mean);
        summary.std_dev.push_back(std::sqrt(var));
        summary.q05.push_back(quantile(0.05));
        summary.q95.push_back(quantile(0.95));
    }
    return summary;
}

} // namespace saptlem
