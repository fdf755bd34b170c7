#include <doctest.h>

#include <saptlem/errors.hpp>
#include <saptlem/rng.hpp>
#include <saptlem/surrogate.hpp>

#include <cmath>

using namespace saptlem;

namespace {

/** Weight accessors in gradient layout order: w1, b1, w2, b2. */
double* weight_slot(SurrogateNetwork& net, std::size_t k) {
    if (k < net.w1.size()) return &net.w1[k];
    k -= net.w1.size();
    if (k < net.b1.size()) return &net.b1[k];
    k -= net.b1.size();
    if (k < net.w2.size()) return &net.w2[k];
    return &net.b2;
}

double gradient_slot(const Gradients& g, std::size_t k) {
    if (k < g.w1.size()) return g.w1[k];
    k -= g.w1.size();
    if (k < g.b1.size()) return g.b1[k];
    k -= g.b1.size();
    if (k < g.w2.size()) return g.w2[k];
    return g.b2;
}

double batch_mse(const SurrogateNetwork& net, const std::vector<double>& xs,
                 const std::vector<double>& ys) {
    double sum = 0.0;
    const std::size_t n = ys.size();
    for (std::size_t i = 0; i < n; ++i) {
        const double r = nn_forward(net, xs.data() + i * net.input_dim) - ys[i];
        sum += r * r;
    }
    return sum / static_cast<double>(n);
}

SurrogateDataset linear_dataset(std::size_t n, std::uint64_t seed) {
    RngStream rng(seed);
    SurrogateDataset data;
    for (std::size_t i = 0; i < n; ++i) {
        DatasetRow row;
        row.x = {rng.uniform(), rng.uniform()};
        row.loglik_corr = -(3.0 * row.x[0] + 2.0 * row.x[1]) - 1.0;
        data.add(std::move(row));
    }
    return data;
}

} // namespace

TEST_CASE("zero network outputs its bias") {
    SurrogateNetwork net = make_network(3, 4);
    CHECK(nn_forward(net, {0.1, 0.2, 0.3}) == 0.0);
    net.b2 = -2.5;
    CHECK(nn_forward(net, {0.9, 0.9, 0.9}) == -2.5);
}

TEST_CASE("single hidden unit forward pass matches the hand computation") {
    SurrogateNetwork net = make_network(2, 1);
    net.w1 = {0.5, 1.5}; // inputs 0 and 1 into the only hidden unit
    net.b1 = {0.25};
    net.w2 = {2.0};
    net.b2 = 0.5;
    // pre = 0.5*1 + 1.5*2 + 0.25 = 3.75; relu passes; out = 2*3.75 + 0.5.
    CHECK(nn_forward(net, {1.0, 2.0}) == doctest::Approx(8.0).epsilon(1e-15));

    // A negative preactivation is gated off, leaving only the output bias.
    CHECK(nn_forward(net, {-1.0, 0.0}) == 0.5);
}

TEST_CASE("gradient vanishes at a perfect fit") {
    SurrogateNetwork net = make_network(2, 2);
    net.w1 = {0.3, -0.2, 0.6, 0.4};
    net.b1 = {0.1, 0.2};
    net.w2 = {1.0, -1.0};
    net.b2 = 0.05;
    const std::vector<double> xs{0.2, 0.7, 0.9, 0.1};
    std::vector<double> ys(2);
    for (int i = 0; i < 2; ++i) ys[i] = nn_forward(net, xs.data() + 2 * i);
    Gradients g;
    nn_gradient(net, xs.data(), ys.data(), 2, g);
    for (std::size_t k = 0; k < net.weight_count(); ++k) CHECK(gradient_slot(g, k) == 0.0);
}

TEST_CASE("backprop matches central finite differences") {
    RngStream rng(42);
    for (int trial = 0; trial < 5; ++trial) {
        SurrogateNetwork net = make_network(3, 5);
        glorot_init(net, rng);
        const std::size_t batch = 7;
        std::vector<double> xs(batch * 3);
        std::vector<double> ys(batch);
        for (double& v : xs) v = rng.uniform();
        for (double& v : ys) v = rng.uniform();

        Gradients g;
        nn_gradient(net, xs.data(), ys.data(), batch, g);

        const double h = 1e-5;
        for (std::size_t k = 0; k < net.weight_count(); ++k) {
            double* slot = weight_slot(net, k);
            const double saved = *slot;
            *slot = saved + h;
            const double up = batch_mse(net, xs, ys);
            *slot = saved - h;
            const double down = batch_mse(net, xs, ys);
            *slot = saved;
            const double fd = (up - down) / (2.0 * h);
            const double bp = gradient_slot(g, k);
            const double rel = std::fabs(fd - bp) / std::max({std::fabs(fd), std::fabs(bp), 1e-3});
            CHECK(rel < 1e-4);
        }
    }
}

TEST_CASE("gradient is invariant under batch duplication") {
    RngStream rng(9);
    SurrogateNetwork net = make_network(2, 3);
    glorot_init(net, rng);
    const std::vector<double> xs{0.1, 0.9, 0.8, 0.3};
    const std::vector<double> ys{0.5, -0.2};
    std::vector<double> xs2 = xs;
    xs2.insert(xs2.end(), xs.begin(), xs.end());
    std::vector<double> ys2 = ys;
    ys2.insert(ys2.end(), ys.begin(), ys.end());

    Gradients g1;
    Gradients g2;
    nn_gradient(net, xs.data(), ys.data(), 2, g1);
    nn_gradient(net, xs2.data(), ys2.data(), 4, g2);
    for (std::size_t k = 0; k < net.weight_count(); ++k) {
        CHECK(gradient_slot(g1, k) == doctest::Approx(gradient_slot(g2, k)).epsilon(1e-14));
    }
}

TEST_CASE("first adam step moves every weight by alpha times the gradient sign") {
    SurrogateNetwork net = make_network(2, 2);
    net.w1 = {0.1, 0.2, 0.3, 0.4};
    net.b1 = {0.5, 0.6};
    net.w2 = {0.7, 0.8};
    net.b2 = 0.9;
    const SurrogateNetwork before = net;

    Gradients g;
    g.w1 = {1.0, -2.0, 0.5, -0.25};
    g.b1 = {3.0, -0.1};
    g.w2 = {0.0, 4.0};
    g.b2 = -5.0;

    AdamState state;
    state.reset(net);
    adam_step(net, g, state);
    CHECK(state.t == 1);

    auto moved = [&](double now, double was, double grad) {
        if (grad == 0.0) {
            CHECK(now == was);
        } else {
            // m-hat = g, v-hat = g^2, so the update is alpha * sign(g) up to epsilon.
            CHECK(now == doctest::Approx(was - 1e-3 * (grad > 0 ? 1.0 : -1.0)).epsilon(1e-6));
        }
    };
    for (int k = 0; k < 4; ++k) moved(net.w1[k], before.w1[k], g.w1[k]);
    for (int k = 0; k < 2; ++k) moved(net.b1[k], before.b1[k], g.b1[k]);
    for (int k = 0; k < 2; ++k) moved(net.w2[k], before.w2[k], g.w2[k]);
    moved(net.b2, before.b2, g.b2);
}

TEST_CASE("sgd applies the plain update rule") {
    SurrogateNetwork net = make_network(1, 1);
    net.w1 = {1.0};
    net.b1 = {2.0};
    net.w2 = {3.0};
    net.b2 = 4.0;
    Gradients g;
    g.w1 = {0.5};
    g.b1 = {-1.0};
    g.w2 = {0.0};
    g.b2 = 2.0;
    sgd_step(net, g, 0.1);
    CHECK(net.w1[0] == doctest::Approx(0.95).epsilon(1e-15));
    CHECK(net.b1[0] == doctest::Approx(2.1).epsilon(1e-15));
    CHECK(net.w2[0] == 3.0);
    CHECK(net.b2 == doctest::Approx(3.8).epsilon(1e-15));
}

TEST_CASE("glorot initialization respects the layer fan bounds") {
    SurrogateNetwork net = make_network(6, 32);
    RngStream rng(3);
    glorot_init(net, rng);
    const double limit1 = std::sqrt(6.0 / (6 + 32));
    const double limit2 = std::sqrt(6.0 / (32 + 1));
    for (double w : net.w1) {
        CHECK(w >= -limit1);
        CHECK(w <= limit1);
    }
    for (double w : net.w2) {
        CHECK(w >= -limit2);
        CHECK(w <= limit2);
    }
    for (double b : net.b1) CHECK(b == 0.0);
    CHECK(net.b2 == 0.0);
}

TEST_CASE("training is deterministic for a fixed seed") {
    auto run_once = [] {
        SurrogateDataset data = linear_dataset(120, 5);
        SurrogateNetwork net = make_network(2, 8);
        RngStream rng(17);
        glorot_init(net, rng);
        AdamState state;
        state.reset(net);
        TrainConfig cfg;
        cfg.epochs = 5;
        train(net, state, data, cfg, rng);
        return net;
    };
    const SurrogateNetwork a = run_once();
    const SurrogateNetwork b = run_once();
    CHECK(a.w1 == b.w1);
    CHECK(a.b1 == b.b1);
    CHECK(a.w2 == b.w2);
    CHECK(a.b2 == b.b2);
}

TEST_CASE("the network learns a linear likelihood surface") {
    SurrogateDataset data = linear_dataset(400, 11);
    SurrogateNetwork net = make_network(2, 8);
    RngStream rng(23);
    glorot_init(net, rng);
    AdamState state;
    state.reset(net);
    TrainConfig cfg;
    cfg.epochs = 200;
    const TrainResult result = train(net, state, data, cfg, rng);
    CHECK(result.rows_used == 400);
    CHECK(result.mse < 1e-3);
}

TEST_CASE("transfer continues on new rows while scratch restarts on all rows") {
    SurrogateDataset data = linear_dataset(40, 7);
    SurrogateNetwork net = make_network(2, 4);
    RngStream rng(2);
    glorot_init(net, rng);
    AdamState state;
    state.reset(net);
    TrainConfig cfg;
    cfg.epochs = 2;

    const TrainResult first = train(net, state, data, cfg, rng);
    CHECK(first.rows_used == 40);
    CHECK(data.last_trained == 40);

    // No new rows: transfer has nothing to learn from.
    CHECK_THROWS_AS(train(net, state, data, cfg, rng), EmptyDataset);

    SurrogateDataset more = linear_dataset(10, 8);
    for (const DatasetRow& row : more.rows) data.add(row);
    const TrainResult second = train(net, state, data, cfg, rng);
    CHECK(second.rows_used == 10);
    CHECK(data.last_trained == 50);

    TrainConfig scratch = cfg;
    scratch.mode = TrainMode::from_scratch;
    const TrainResult third = train(net, state, data, scratch, rng);
    CHECK(third.rows_used == 50);

    TrainConfig half = scratch;
    half.batch_ratio = 0.5;
    const TrainResult fourth = train(net, state, data, half, rng);
    CHECK(fourth.rows_used == 25);

    SurrogateDataset empty;
    CHECK_THROWS_AS(train(net, state, empty, scratch, rng), EmptyDataset);
}

TEST_CASE("small sgd steps do not increase the training loss") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        SurrogateDataset data = linear_dataset(60, seed);
        SurrogateNetwork net = make_network(2, 6);
        RngStream rng(seed + 100);
        glorot_init(net, rng);
        AdamState state;
        state.reset(net);

        NormalizationSpec spec;
        spec.lik_min = data.lik_min;
        spec.lik_max = data.lik_max;
        std::vector<double> xs;
        std::vector<double> ys;
        for (const DatasetRow& row : data.rows) {
            xs.insert(xs.end(), row.x.begin(), row.x.end());
            ys.push_back(spec.normalize_loglik(row.loglik_corr));
        }
        const double before = batch_mse(net, xs, ys);

        TrainConfig cfg;
        cfg.optimizer = Optimizer::sgd;
        cfg.learning_rate = 1e-4;
        cfg.epochs = 10;
        cfg.batch_size = 60; // full-batch: plain gradient descent
        const TrainResult result = train(net, state, data, cfg, rng);
        CHECK(result.mse <= before + 1e-12);
    }
}

TEST_CASE("dataset tracks its likelihood range as rows arrive") {
    SurrogateDataset data;
    CHECK_FALSE(data.has_range);
    DatasetRow row;
    row.x = {0.5};
    row.loglik_corr = -10.0;
    data.add(row);
    row.loglik_corr = -2.0;
    data.add(row);
    row.loglik_corr = -30.0;
    data.add(row);
    CHECK(data.has_range);
    CHECK(data.lik_min == -30.0);
    CHECK(data.lik_max == -2.0);
}

TEST_CASE("normalization maps the box and range onto the unit interval") {
    NormalizationSpec spec;
    spec.bounds.lower = {0.0, 10.0};
    spec.bounds.upper = {2.0, 20.0};
    spec.lik_min = -1000.0;
    spec.lik_max = 0.0;

    const auto unit = spec.normalize_params({1.0, 15.0});
    CHECK(unit[0] == 0.5);
    CHECK(unit[1] == 0.5);
    CHECK(spec.normalize_loglik(-250.0) == doctest::Approx(0.75).epsilon(1e-15));
    CHECK(spec.denormalize_loglik(spec.normalize_loglik(-123.456)) ==
          doctest::Approx(-123.456).epsilon(1e-12));

    NormalizationSpec degenerate;
    degenerate.lik_min = -5.0;
    degenerate.lik_max = -5.0;
    CHECK(degenerate.normalize_loglik(-5.0) == 0.5);
    CHECK(degenerate.denormalize_loglik(0.3) == -5.0);
}

TEST_CASE("pseudo-likelihood prediction denormalizes and clamps") {
    NormalizationSpec spec;
    spec.bounds.lower = {0.0, 0.0};
    spec.bounds.upper = {1.0, 1.0};
    spec.lik_min = -1000.0;
    spec.lik_max = 0.0;

    SurrogateNetwork net = make_network(2, 2); // zero weights: output is b2
    net.b2 = 0.5;
    CHECK(predict_pseudo(net, {0.3, 0.8}, spec, true) == doctest::Approx(-500.0).epsilon(1e-12));

    net.b2 = -2.0; // clamps to 0 -> lik_min
    CHECK(predict_pseudo(net, {0.3, 0.8}, spec, true) == -1000.0);

    net.b2 = 7.0; // clamps to 1 -> lik_max
    CHECK(predict_pseudo(net, {0.3, 0.8}, spec, true) == 0.0);

    CHECK_THROWS_AS(predict_pseudo(net, {0.3, 0.8}, spec, false), SurrogateNotReady);
}
