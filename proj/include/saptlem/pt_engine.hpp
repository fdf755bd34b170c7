#pragma once

#include <saptlem/parameters.hpp>
#include <saptlem/proposals.hpp>
#include <saptlem/rng.hpp>
#include <saptlem/surrogate.hpp>

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace saptlem {

/** Geometric ladder T_i = t_max^((i-1)/(M-1)); T_1 = 1, T_M = t_max. */
struct TemperatureLadder {
    std::vector<double> temperatures;
    double t_max = 1.0;
};

TemperatureLadder build_ladder(int replicas, double t_max);

/** Tempered Metropolis decision; always consumes exactly one uniform draw. */
bool metropolis_accept(double l_new, double l_old, double temperature, RngStream& rng);

struct SwapDecision {
    bool accepted = false;
    double probability = 0.0;
};

/**
 * Neighbor swap decision from untempered log-likelihoods:
 * p = min(1, exp((1/T_i - 1/T_j) (L_j - L_i))). One uniform draw always.
 */
SwapDecision swap_accept(double t_i, double t_j, double l_i, double l_j, RngStream& rng);

enum class EvalChoice { true_model, surrogate };

/**
 * Pick the evaluation path. Always TrueModel until the first surrogate
 * training completes; afterwards Surrogate with probability s_prob. One
 * uniform draw always, so chains with different s_prob share proposal
 * streams.
 */
EvalChoice choose_evaluation(RngStream& rng, double s_prob, bool surrogate_ready);

/** Last three chain log-likelihoods; pads by repeating the oldest entry. */
class LikelihoodRing {
public:
    void push(double value);
    bool empty() const { return count_ == 0; }
    double mean() const;

private:
    double values_[3] = {0.0, 0.0, 0.0};
    int count_ = 0;
    int next_ = 0;
};

/** Stage 1.6 blend: 0.5 * surrogate estimate + 0.5 * ring mean. */
double blend_pseudo(double l_surrogate, const LikelihoodRing& ring);

/** Stage 2: flatten every temperature to 1; swaps then always accept. */
void stage_transition(TemperatureLadder& ladder);

enum class ProposalKind { rw, arw };
enum class ExecutionMode { sequential, parallel };

struct EnsembleConfig {
    int replicas = 8;           // M
    long long samples = 5000;   // R_max proposals per replica
    int swap_interval = 3;      // R_swap
    double t_max = 2.0;
    double psi = 0.05;          // surrogate interval as a fraction of samples
    double s_prob = 0.6;        // surrogate probability after warmup
    double burn_in = 0.5;
    double stage2_start = 0.5;  // ladder flattens at this fraction of samples
    ProposalKind proposal = ProposalKind::arw;
    double rw_phi = 0.05;
    int arw_adapt_interval = 25;
    double arw_min_step_fraction = 0.01;
    int arw_warmup = 100;
    int shadow_every = 20;      // every Kth surrogate call also logs a true pair

    long long burn_in_index() const;
    long long stage2_index() const;
    long long surrogate_interval() const;

    /** Throws ConfigError on invariant violations. */
    void validate() const;
};

/** One expensive-model (or oracle) evaluation as seen by the sampler. */
struct Evaluation {
    double loglik = 0.0;
    double rmse_elev = 0.0;
    double rmse_sed = 0.0;
    bool failed = false;
    std::shared_ptr<const std::vector<double>> prediction; // flat grid; null if none
};

/** What the engine needs from a forward model; pure and thread-safe. */
struct ModelInterface {
    std::function<Evaluation(const std::vector<double>&)> evaluate;
    PriorBounds bounds;
    std::vector<std::string> names;
};

/** One chain record: the post-decision state after a proposal step. */
struct ChainRow {
    long long sample = 0;
    std::vector<double> theta;
    double loglik = 0.0;
    bool pseudo = false; // provenance of this sample's evaluation
    bool accepted = false;
    double temperature = 1.0;
    double rmse_elev = 0.0; // from the state's most recent true evaluation
    double rmse_sed = 0.0;
};

struct SwapEvent {
    long long sync = 0;
    int replica_i = 0;
    int replica_j = 0;
    bool accepted = false;
};

struct TrainLogEntry {
    long long sync = 0;
    std::size_t dataset_size = 0;
    std::size_t rows_used = 0;
    TrainMode mode = TrainMode::transfer_and_train;
    double mse = 0.0;
    double wall_seconds = 0.0;
};

struct ShadowPair {
    double true_loglik = 0.0;
    double surrogate_loglik = 0.0; // raw prediction, before blending
};

/** Per-cell running mean/variance of posterior predictive elevations. */
struct PredictionAccumulator {
    long long count = 0;
    std::vector<double> mean;
    std::vector<double> m2;

    void add(const std::vector<double>& values);
    std::vector<double> std_dev() const;
};

struct TimingReport {
    double total = 0.0;
    double true_eval = 0.0;
    double surrogate_train = 0.0;
    double surrogate_predict = 0.0;
};

/** Everything a run produces, in memory; serialization lives in run_io. */
struct RunResult {
    std::vector<std::vector<ChainRow>> chains; // per replica slot
    std::vector<SwapEvent> swaps;
    std::vector<TrainLogEntry> train_log;
    SurrogateDataset dataset;
    std::vector<ShadowPair> shadow_pairs;
    PredictionAccumulator prediction;
    TemperatureLadder initial_ladder;
    std::vector<double> acceptance_rate; // per replica
    long long burn_in_index = 0;
    SurrogateNetwork net;
    AdamState adam;
    NormalizationSpec norm;
    bool surrogate_trained = false;
    TimingReport timing;
    std::vector<std::string> parameter_names;
};

/**
 * Run the full sampler: per-replica tempered Metropolis chains with RW/ARW
 * proposals, neighbor swaps every swap_interval samples, surrogate training
 * on fused true-evaluation batches every surrogate interval, pseudo-
 * likelihood blending, and the stage-2 ladder flattening. Sequential mode
 * round-robins replicas and is the determinism reference; parallel mode
 * runs one thread per replica with a manager barrier and produces identical
 * artifacts.
 */
RunResult run(const ModelInterface& model, const EnsembleConfig& cfg,
              const TrainConfig& train_cfg, std::uint64_t seed, ExecutionMode mode);

struct PosteriorSummary {
    std::vector<std::string> names;
    std::vector<double> mean;
    std::vector<double> std_dev;
    std::vector<double> q05;
    std::vector<double> q95;
    std::size_t pooled_samples = 0;
};

/**
 * Pooled post-burn-in statistics across all replica slots. Quantiles use
 * sorted-order linear interpolation. Throws EmptyPosterior when no rows
 * survive the burn-in cut.
 */
PosteriorSummary posterior_summary(const RunResult& result, double burn_in);

} // namespace saptlem
