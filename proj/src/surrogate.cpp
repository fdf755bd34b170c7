#include <saptlem/surrogate.hpp>

#include <saptlem/errors.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>

namespace saptlem {

SurrogateNetwork make_network(int input_dim, int hidden_dim) {
    if (input_dim < 1 || hidden_dim < 1) throw ConfigError("network dims must be positive");
    SurrogateNetwork net;
    net.input_dim = input_dim;
    net.hidden_dim = hidden_dim;
    net.w1.assign(static_cast<std::size_t>(input_dim) * hidden_dim, 0.0);
    net.b1.assign(hidden_dim, 0.0);
    net.w2.assign(hidden_dim, 0.0);
    net.b2 = 0.0;
    return net;
}

void glorot_init(SurrogateNetwork& net, RngStream& rng) {
    const double limit1 = std::sqrt(6.0 / (net.input_dim + net.hidden_dim));
    for (double& w : net.w1) w = rng.uniform(-limit1, limit1);
    std::fill(net.b1.begin(), net.b1.end(), 0.0);
    const double limit2 = std::sqrt(6.0 / (net.hidden_dim + 1));
    for (double& w : net.w2) w = rng.uniform(-limit2, limit2);
    net.b2 = 0.0;
}

double nn_forward(const SurrogateNetwork& net, const double* x) {
    const int I = net.input_dim;
    const int H = net.hidden_dim;
    double out = net.b2;
    for (int h = 0; h < H; ++h) {
        double a = net.b1[h];
        for (int d = 0; d < I; ++d) a += x[d] * net.w1[static_cast<std::size_t>(d) * H + h];
        if (a > 0.0) out += a * net.w2[h];
    }
    return out;
}

double nn_forward(const SurrogateNetwork& net, const std::vector<double>& x) {
    if (static_cast<int>(x.size()) != net.input_dim) {
        throw DimensionMismatch("input length mismatch");
    }
    return nn_forward(net, x.data());
}

void nn_gradient(const SurrogateNetwork& net, const double* inputs, const double* targets,
                 std::size_t batch, Gradients& out) {
    if (batch == 0) throw EmptyDataset("gradient over an empty batch");
    const int I = net.input_dim;
    const int H = net.hidden_dim;
    out.w1.assign(net.w1.size(), 0.0);
    out.b1.assign(net.b1.size(), 0.0);
    out.w2.assign(net.w2.size(), 0.0);
    out.b2 = 0.0;

    std::vector<double> hidden(H);
    const double inv_b = 1.0 / static_cast<double>(batch);
    for (std::size_t r = 0; r < batch; ++r) {
        const double* x = inputs + r * I;
        double yhat = net.b2;
        for (int h = 0; h < H; ++h) {
            double a = net.b1[h];
            for (int d = 0; d < I; ++d) a += x[d] * net.w1[static_cast<std::size_t>(d) * H + h];
            hidden[h] = a > 0.0 ? a : 0.0; // subgradient 0 at exactly 0
            yhat += hidden[h] * net.w2[h];
        }
        const double dy = 2.0 * (yhat - targets[r]) * inv_b;
        out.b2 += dy;
        for (int h = 0; h < H; ++h) {
            out.w2[h] += dy * hidden[h];
            if (hidden[h] > 0.0) {
                const double dh = dy * net.w2[h];
                out.b1[h] += dh;
                for (int d = 0; d < I; ++d) {
                    out.w1[static_cast<std::size_t>(d) * H + h] += dh * x[d];
                }
            }
        }
    }
}

void AdamState::reset(const SurrogateNetwork& net) {
    m.assign(net.weight_count(), 0.0);
    v.assign(net.weight_count(), 0.0);
    t = 0;
}

namespace {

/** Apply one optimizer update over the flattened (w1, b1, w2, b2) layout. */
template <typename Fn>
void for_each_weight(SurrogateNetwork& net, const Gradients& g, Fn&& fn) {
    std::size_t k = 0;
    for (std::size_t i = 0; i < net.w1.size(); ++i, ++k) fn(net.w1[i], g.w1[i], k);
    for (std::size_t i = 0; i < net.b1.size(); ++i, ++k) fn(net.b1[i], g.b1[i], k);
    for (std::size_t i = 0; i < net.w2.size(); ++i, ++k) fn(net.w2[i], g.w2[i], k);
    fn(net.b2, g.b2, k);
}

} // namespace

void adam_step(SurrogateNetwork& net, const Gradients& grads, AdamState& state) {
    if (state.m.size() != net.weight_count()) state.reset(net);
    ++state.t;
    const double b1t = 1.0 - std::pow(state.beta1, static_cast<double>(state.t));
    const double b2t = 1.0 - std::pow(state.beta2, static_cast<double>(state.t));
    for_each_weight(net, grads, [&](double& w, double g, std::size_t k) {
        state.m[k] = state.beta1 * state.m[k] + (1.0 - state.beta1) * g;
        state.v[k] = state.beta2 * state.v[k] + (1.0 - state.beta2) * g * g;
        const double m_hat = state.m[k] / b1t;
        const double v_hat = state.v[k] / b2t;
        w -= state.alpha * m_hat / (std::sqrt(v_hat) + state.epsilon);
    });
}

void sgd_step(SurrogateNetwork& net, const Gradients& grads, double rate) {
    for_each_weight(net, grads, [&](double& w, double g, std::size_t) { w -= rate * g; });
}

void SurrogateDataset::add(DatasetRow row) {
    if (!has_range) {
        lik_min = lik_max = row.loglik_corr;
        has_range = true;
    } else {
        lik_min = std::min(lik_min, row.loglik_corr);
        lik_max = std::max(lik_max, row.loglik_corr);
    }
    rows.push_back(std::move(row));
}

std::vector<double> NormalizationSpec::normalize_params(const std::vector<double>& theta) const {
    if (theta.size() != bounds.size()) throw DimensionMismatch("theta/bounds size mismatch");
    std::vector<double> out(theta.size());
    for (std::size_t j = 0; j < theta.size(); ++j) {
        out[j] = (theta[j] - bounds.lower[j]) / (bounds.upper[j] - bounds.lower[j]);
    }
    return out;
}

double NormalizationSpec::normalize_loglik(double value) const {
    if (!(lik_max > lik_min)) return 0.5; // degenerate range: single observed value
    return (value - lik_min) / (lik_max - lik_min);
}

double NormalizationSpec::denormalize_loglik(double unit) const {
    if (!(lik_max > lik_min)) return lik_min;
    return lik_min + unit * (lik_max - lik_min);
}

double TrainConfig::effective_rate() const {
    if (learning_rate > 0.0) return learning_rate;
    return optimizer == Optimizer::adam ? 1e-3 : 1e-2;
}

TrainResult train(SurrogateNetwork& net, AdamState& state, SurrogateDataset& dataset,
                  const TrainConfig& cfg, RngStream& rng) {
    if (cfg.epochs < 1 || cfg.batch_size < 1) throw ConfigError("bad training config");

    const std::size_t total = dataset.rows.size();
    const std::size_t from =
        cfg.mode == TrainMode::transfer_and_train ? dataset.last_trained : 0;
    if (from >= total) throw EmptyDataset("no rows to train on");

    const auto t0 = std::chrono::steady_clock::now();
    if (cfg.mode == TrainMode::from_scratch) {
        net = make_network(net.input_dim, net.hidden_dim);
        glorot_init(net, rng);
        state.reset(net);
    }

    std::vector<std::size_t> indices; // eligible row indices
    indices.reserve(total - from);
    for (std::size_t i = from; i < total; ++i) indices.push_back(i);
    if (cfg.batch_ratio < 1.0) {
        // Seeded subset: partial Fisher-Yates, keep the first `keep` entries.
        const std::size_t keep = std::max<std::size_t>(
            1, static_cast<std::size_t>(cfg.batch_ratio * static_cast<double>(indices.size())));
        for (std::size_t i = 0; i < keep; ++i) {
            const std::size_t j = i + rng.below(indices.size() - i);
            std::swap(indices[i], indices[j]);
        }
        indices.resize(keep);
    }

    const int I = net.input_dim;
    const std::size_t n = indices.size();
    std::vector<double> xs(n * I);
    std::vector<double> ys(n);
    NormalizationSpec spec;
    spec.lik_min = dataset.lik_min;
    spec.lik_max = dataset.lik_max;
    for (std::size_t i = 0; i < n; ++i) {
        const DatasetRow& row = dataset.rows[indices[i]];
        if (static_cast<int>(row.x.size()) != I) {
            throw DimensionMismatch("dataset row width mismatch");
        }
        std::copy(row.x.begin(), row.x.end(), xs.begin() + i * I);
        ys[i] = spec.normalize_loglik(row.loglik_corr);
    }

    const double rate = cfg.effective_rate();
    if (cfg.optimizer == Optimizer::adam) state.alpha = rate;
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::vector<double> bx(static_cast<std::size_t>(cfg.batch_size) * I);
    std::vector<double> by(cfg.batch_size);
    Gradients grads;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        for (std::size_t i = n; i > 1; --i) {
            const std::size_t j = rng.below(i);
            std::swap(order[i - 1], order[j]);
        }
        for (std::size_t start = 0; start < n; start += cfg.batch_size) {
            const std::size_t b = std::min<std::size_t>(cfg.batch_size, n - start);
            for (std::size_t i = 0; i < b; ++i) {
                const std::size_t src = order[start + i];
                std::copy(xs.begin() + src * I, xs.begin() + (src + 1) * I,
                          bx.begin() + i * I);
                by[i] = ys[src];
            }
            nn_gradient(net, bx.data(), by.data(), b, grads);
            if (cfg.optimizer == Optimizer::adam) {
                adam_step(net, grads, state);
            } else {
                sgd_step(net, grads, rate);
            }
        }
    }

    double mse = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = nn_forward(net, xs.data() + i * I) - ys[i];
        mse += r * r;
    }
    mse /= static_cast<double>(n);

    dataset.last_trained = total;
    TrainResult result;
    result.mse = mse;
    result.rows_used = n;
    result.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return result;
}

double predict_pseudo(const SurrogateNetwork& net, const std::vector<double>& theta,
                      const NormalizationSpec& spec, bool ready) {
    if (!ready) throw SurrogateNotReady("surrogate has not been trained yet");
    const std::vector<double> x = spec.normalize_params(theta);
    const double unit = std::clamp(nn_forward(net, x), 0.0, 1.0);
    return spec.denormalize_loglik(unit);
}

} // namespace saptlem
