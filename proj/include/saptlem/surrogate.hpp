#pragma once

#include <saptlem/parameters.hpp>
#include <saptlem/rng.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace saptlem {

/**
 * One-hidden-layer feedforward regressor: rectified hidden layer, identity
 * output head. Weight layout: w1 is input x hidden row-major, w2 is the
 * hidden-to-output column.
 */
struct SurrogateNetwork {
    int input_dim = 0;
    int hidden_dim = 0;
    std::vector<double> w1;
    std::vector<double> b1;
    std::vector<double> w2;
    double b2 = 0.0;

    std::size_t weight_count() const { return w1.size() + b1.size() + w2.size() + 1; }
};

SurrogateNetwork make_network(int input_dim, int hidden_dim);

/** Uniform in +-sqrt(6 / (fan_in + fan_out)) per layer; biases zero. */
void glorot_init(SurrogateNetwork& net, RngStream& rng);

double nn_forward(const SurrogateNetwork& net, const double* x);
double nn_forward(const SurrogateNetwork& net, const std::vector<double>& x);

/** Gradients of mean squared error, same layout as the network. */
struct Gradients {
    std::vector<double> w1;
    std::vector<double> b1;
    std::vector<double> w2;
    double b2 = 0.0;
};

/**
 * Exact backpropagation of (1/B) sum (y_hat - target)^2 over the batch;
 * rows are consecutive input_dim-long slices of `inputs`.
 */
void nn_gradient(const SurrogateNetwork& net, const double* inputs, const double* targets,
                 std::size_t batch, Gradients& out);

/** Adam moment accumulators; one slot per weight in network layout order. */
struct AdamState {
    std::vector<double> m;
    std::vector<double> v;
    long long t = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double alpha = 1e-3;
    double epsilon = 1e-8;

    void reset(const SurrogateNetwork& net);
};

void adam_step(SurrogateNetwork& net, const Gradients& grads, AdamState& state);
void sgd_step(SurrogateNetwork& net, const Gradients& grads, double rate);

/** One fused training row: bound-normalized parameters and the raw
 *  temperature-corrected log-likelihood. */
struct DatasetRow {
    std::vector<double> x;      // parameters mapped into [0,1] by the prior box
    double loglik_corr = 0.0;   // log-likelihood times the replica temperature
    int replica = 0;
    long long sample = 0;
    double temperature = 1.0;
};

/** Append-only fused dataset plus the running likelihood range. */
struct SurrogateDataset {
    std::vector<DatasetRow> rows;
    std::size_t last_trained = 0; // transfer-mode boundary
    double lik_min = 0.0;
    double lik_max = 0.0;
    bool has_range = false;

    void add(DatasetRow row);
    std::size_t size() const { return rows.size(); }
};

/** Normalization contract between parameter/likelihood space and [0,1]. */
struct NormalizationSpec {
    PriorBounds bounds;
    double lik_min = 0.0;
    double lik_max = 0.0;

    std::vector<double> normalize_params(const std::vector<double>& theta) const;
    double normalize_loglik(double value) const;
    double denormalize_loglik(double unit) const;
};

enum class Optimizer { adam, sgd };
enum class TrainMode { transfer_and_train, from_scratch };

struct TrainConfig {
    Optimizer optimizer = Optimizer::adam;
    TrainMode mode = TrainMode::transfer_and_train;
    int epochs = 20;
    int batch_size = 32;
    double learning_rate = 0.0; // 0 selects the optimizer default (1e-3 Adam, 1e-2 SGD)
    double batch_ratio = 1.0;   // fraction of eligible rows used per call
    int hidden_dim = 32;

    double effective_rate() const;
};

struct TrainResult {
    double mse = 0.0;
    double wall_seconds = 0.0;
    std::size_t rows_used = 0;
};

/**
 * Train on the dataset according to cfg. transfer_and_train continues from
 * the current weights on rows added since the previous call; from_scratch
 * reinitializes (weights and Adam state) and uses all accumulated rows.
 * Targets are normalized to [0,1] with the dataset's running range. Throws
 * EmptyDataset when no rows are eligible. Advances dataset.last_trained.
 */
TrainResult train(SurrogateNetwork& net, AdamState& state, SurrogateDataset& dataset,
                  const TrainConfig& cfg, RngStream& rng);

/**
 * Pseudo-likelihood: normalize theta, run the network, clamp to [0,1],
 * denormalize through the likelihood range. Throws SurrogateNotReady when
 * `ready` is false.
 */
double predict_pseudo(const SurrogateNetwork& net, const std::vector<double>& theta,
                      const NormalizationSpec& spec, bool ready);

} // namespace saptlem
