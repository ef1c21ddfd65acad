#include <doctest.h>

#include <cmath>
#include <vector>

#include "testutil.hpp"
#include "wsc/error.hpp"
#include "wsc/io.hpp"
#include "wsc/mlp.hpp"
#include "wsc/rng.hpp"
#include "wsc/synth.hpp"

using namespace wsc;

namespace {

Mlp identity_1x1(double w) {
    Mlp m;
    DenseLayer l;
    l.weights = Matrix(1, 1);
    l.weights.at(0, 0) = w;
    l.bias = {0.0};
    l.activation = Activation::identity;
    m.layers.push_back(l);
    return m;
}

std::vector<TrainSample> random_batch(const Mlp& m, std::size_t count, Rng& rng) {
    std::vector<TrainSample> batch(count);
    for (auto& s : batch) {
        s.input.resize(m.input_dim());
        for (double& x : s.input) x = rng.uniform(-1.0, 1.0);
        s.target = one_hot(static_cast<int>(rng.below(m.output_dim())), m.output_dim());
    }
    return batch;
}

}  // namespace

TEST_CASE("init_mlp is deterministic and shape-correct") {
    const Mlp a = init_mlp({4, 3, 2}, 7);
    const Mlp b = init_mlp({4, 3, 2}, 7);
    REQUIRE(a.layers.size() == 2);
    for (std::size_t li = 0; li < a.layers.size(); ++li) {
        CHECK(a.layers[li].weights.data == b.layers[li].weights.data);
        CHECK(a.layers[li].bias == b.layers[li].bias);
    }
    CHECK(a.layers[0].activation == Activation::tanh_act);
    CHECK(a.layers[1].activation == Activation::identity);

    const Mlp big = init_mlp({784, 64, 10}, 1);
    CHECK(big.layers[0].weights.rows == 64);
    CHECK(big.layers[0].weights.cols == 784);
    CHECK(big.layers[1].weights.rows == 10);
    CHECK(big.layers[1].weights.cols == 64);

    CHECK_THROWS_AS(init_mlp({4}, 1), InvalidArgument);
    CHECK_THROWS_AS(init_mlp({}, 1), InvalidArgument);
    CHECK_THROWS_AS(init_mlp({4, 0, 2}, 1), InvalidArgument);

    const double bound = 1.0 / std::sqrt(4.0);
    for (double w : a.layers[0].weights.data) CHECK(std::abs(w) <= bound);
}

TEST_CASE("forward: identity layer, zero tanh layer, hand-computed 2-layer net") {
    Mlp ident;
    DenseLayer l;
    l.weights = Matrix(3, 3);
    for (std::size_t i = 0; i < 3; ++i) l.weights.at(i, i) = 1.0;
    l.bias.assign(3, 0.0);
    l.activation = Activation::identity;
    ident.layers.push_back(l);
    const std::vector<double> x{0.3, -2.0, 5.5};
    CHECK(forward(ident, x) == x);

    Mlp zero_tanh;
    DenseLayer zl;
    zl.weights = Matrix(2, 3);
    zl.bias.assign(2, 0.0);
    zl.activation = Activation::tanh_act;
    zero_tanh.layers.push_back(zl);
    CHECK(forward(zero_tanh, x) == std::vector<double>{0.0, 0.0});

    // 2-layer net evaluated against explicit scalar arithmetic.
    Mlp m;
    DenseLayer h;
    h.weights = Matrix(2, 2);
    h.weights.at(0, 0) = 1.0;
    h.weights.at(0, 1) = 2.0;
    h.weights.at(1, 0) = 3.0;
    h.weights.at(1, 1) = 4.0;
    h.bias = {0.5, -0.5};
    h.activation = Activation::tanh_act;
    DenseLayer o;
    o.weights = Matrix(2, 2);
    o.weights.at(0, 0) = 1.0;
    o.weights.at(0, 1) = -1.0;
    o.weights.at(1, 0) = 2.0;
    o.weights.at(1, 1) = 0.5;
    o.bias = {0.0, 1.0};
    o.activation = Activation::identity;
    m.layers = {h, o};

    const auto y = forward(m, {1.0, 0.0});
    const double h1 = std::tanh(1.0 * 1.0 + 2.0 * 0.0 + 0.5);
    const double h2 = std::tanh(3.0 * 1.0 + 4.0 * 0.0 - 0.5);
    CHECK(y[0] == doctest::Approx(h1 - h2).epsilon(1e-15));
    CHECK(y[1] == doctest::Approx(2.0 * h1 + 0.5 * h2 + 1.0).epsilon(1e-15));

    CHECK_THROWS_AS(forward(m, {1.0}), DimensionMismatch);
}

TEST_CASE("rms_loss values") {
    CHECK(rms_loss({0.25, 0.5}, {0.25, 0.5}) == 0.0);
    CHECK(rms_loss({1.0, 0.0}, {0.0, 1.0}) == 1.0);
    CHECK(rms_loss({0.5, 0.5}, {1.0, 0.0}) == 0.5);
    CHECK_THROWS_AS(rms_loss({1.0}, {1.0, 0.0}), DimensionMismatch);
}

TEST_CASE("gradient: 1x1 linear net has d loss/dw = 1 at w=2") {
    const Mlp m = identity_1x1(2.0);
    const std::vector<TrainSample> batch{{{1.0}, {0.0}}};
    const GradResult g = gradient(m, batch);
    CHECK(g.mean_loss == 2.0);
    CHECK(g.grad.dweights[0].at(0, 0) == doctest::Approx(1.0).epsilon(1e-12));

    const double fd = wsctest::fd_param(
        m, batch, [](Mlp& n) -> double& { return n.layers[0].weights.at(0, 0); }, 1e-6);
    CHECK(g.grad.dweights[0].at(0, 0) == doctest::Approx(fd).epsilon(1e-6));
}

TEST_CASE("gradient of a batch is the mean of single-sample gradients") {
    Rng rng(21);
    const Mlp m = init_mlp({3, 4, 2}, 55);
    const auto batch = random_batch(m, 3, rng);
    const GradResult whole = gradient(m, batch);

    for (std::size_t li = 0; li < m.layers.size(); ++li) {
        Matrix acc(m.layers[li].fan_out(), m.layers[li].fan_in());
        std::vector<double> acc_b(m.layers[li].fan_out(), 0.0);
        for (const auto& s : batch) {
            const GradResult single = gradient(m, {s});
            for (std::size_t i = 0; i < acc.data.size(); ++i) {
                acc.data[i] += single.grad.dweights[li].data[i] / 3.0;
            }
            for (std::size_t i = 0; i < acc_b.size(); ++i) {
                acc_b[i] += single.grad.dbias[li][i] / 3.0;
            }
        }
        for (std::size_t i = 0; i < acc.data.size(); ++i) {
            CHECK(whole.grad.dweights[li].data[i] ==
                  doctest::Approx(acc.data[i]).epsilon(1e-12));
        }
        for (std::size_t i = 0; i < acc_b.size(); ++i) {
            CHECK(whole.grad.dbias[li][i] == doctest::Approx(acc_b[i]).epsilon(1e-12));
        }
    }
}

TEST_CASE("mirrored samples cancel to a zero batch gradient") {
    const Mlp m = identity_1x1(0.7);
    // pred = 0.7 for both; the residuals are -0.2 and +0.2.
    const std::vector<TrainSample> batch{{{1.0}, {0.9}}, {{1.0}, {0.5}}};
    const GradResult g = gradient(m, batch);
    CHECK(std::abs(g.grad.dweights[0].at(0, 0)) <= 1e-15);
    CHECK(std::abs(g.grad.dbias[0][0]) <= 1e-15);
}

TEST_CASE("gradient at rms==0 is the zero vector") {
    const Mlp m = identity_1x1(2.0);
    const std::vector<TrainSample> batch{{{1.0}, {2.0}}};  // pred == target
    const GradResult g = gradient(m, batch);
    CHECK(g.mean_loss == 0.0);
    CHECK(g.grad.dweights[0].at(0, 0) == 0.0);
    CHECK(g.grad.dbias[0][0] == 0.0);
}

TEST_CASE("backprop matches central finite differences on random small nets") {
    Rng rng(31);
    for (int trial = 0; trial < 6; ++trial) {
        std::vector<std::size_t> sizes;
        const std::size_t n_layers = 2 + rng.below(2);
        for (std::size_t i = 0; i <= n_layers; ++i) sizes.push_back(1 + rng.below(8));
        const Mlp m = init_mlp(sizes, rng.next_u64());
        const auto batch = random_batch(m, 1 + rng.below(3), rng);
        const GradResult g = gradient(m, batch);

        for (std::size_t li = 0; li < m.layers.size(); ++li) {
            for (std::size_t r = 0; r < m.layers[li].fan_out(); ++r) {
                for (std::size_t c = 0; c < m.layers[li].fan_in(); ++c) {
                    const double fd = wsctest::fd_param(
                        m, batch,
                        [li, r, c](Mlp& n) -> double& { return n.layers[li].weights.at(r, c); },
                        1e-5);
                    CHECK(wsctest::rel_err(g.grad.dweights[li].at(r, c), fd, 1e-3) < 1e-6);
                }
                const double fdb = wsctest::fd_param(
                    m, batch, [li, r](Mlp& n) -> double& { return n.layers[li].bias[r]; },
                    1e-5);
                CHECK(wsctest::rel_err(g.grad.dbias[li][r], fdb, 1e-3) < 1e-6);
            }
        }
    }
}

TEST_CASE("sgd_step: lr 0 is a no-op, a step on |w| descends, determinism") {
    Mlp m = identity_1x1(2.0);
    const std::vector<TrainSample> batch{{{1.0}, {0.0}}};
    Mlp frozen = m;
    const double loss0 = sgd_step(frozen, batch, 0.0);
    CHECK(loss0 == doctest::Approx(2.0));
    CHECK(frozen.layers[0].weights.at(0, 0) == 2.0);

    Mlp stepped = m;
    sgd_step(stepped, batch, 0.05);
    const double loss_after =
        rms_loss(forward(stepped, batch[0].input), batch[0].target);
    CHECK(loss_after < 2.0);

    Mlp m1 = init_mlp({3, 3, 2}, 9);
    Mlp m2 = init_mlp({3, 3, 2}, 9);
    Rng rng(77);
    const auto b2 = random_batch(m1, 4, rng);
    sgd_step(m1, b2, 0.1);
    sgd_step(m2, b2, 0.1);
    for (std::size_t li = 0; li < m1.layers.size(); ++li) {
        CHECK(m1.layers[li].weights.data == m2.layers[li].weights.data);
    }
}

TEST_CASE("train: zero epochs is a no-op with empty history; reruns are bitwise equal") {
    std::vector<GrayImage> data(8);
    Rng rng(15);
    for (std::size_t k = 0; k < data.size(); ++k) {
        data[k].label = static_cast<int>(k % 2);
        data[k].pixels.resize(6);
        for (double& p : data[k].pixels) p = rng.uniform();
    }

    Mlp m = init_mlp({6, 4, 2}, 3);
    const Mlp before = m;
    TrainConfig cfg;
    cfg.epochs = 0;
    const TrainHistory h0 = train(m, data, cfg);
    CHECK(h0.loss.empty());
    CHECK(h0.accuracy.empty());
    for (std::size_t li = 0; li < m.layers.size(); ++li) {
        CHECK(m.layers[li].weights.data == before.layers[li].weights.data);
    }

    cfg.epochs = 5;
    cfg.seed = 99;
    Mlp a = init_mlp({6, 4, 2}, 3);
    Mlp b = init_mlp({6, 4, 2}, 3);
    const TrainHistory ha = train(a, data, cfg);
    const TrainHistory hb = train(b, data, cfg);
    CHECK(ha.loss == hb.loss);
    CHECK(ha.accuracy == hb.accuracy);
    for (std::size_t li = 0; li < a.layers.size(); ++li) {
        CHECK(a.layers[li].weights.data == b.layers[li].weights.data);
        CHECK(a.layers[li].bias == b.layers[li].bias);
    }
}

TEST_CASE("train reaches 90% on a 2000-image desk-scale corpus") {
    SynthConfig sc;
    sc.count = 2000;
    sc.seed = 414;
    const auto data = synth_digits(sc);
    Mlp m = init_mlp({784, 64, 10}, 17);
    TrainConfig cfg;
    cfg.learning_rate = 0.05;
    cfg.epochs = 20;
    cfg.batch_size = 32;
    cfg.seed = 18;
    const TrainHistory h = train(m, data, cfg);
    CHECK(h.loss.size() == 20);
    CHECK(h.accuracy.back() >= 0.90);
}

TEST_CASE("loss is non-increasing over the first epochs on separable 2-D data") {
    Rng rng(23);
    std::vector<GrayImage> data;
    for (int k = 0; k < 60; ++k) {
        GrayImage g;
        g.label = k % 2;
        const double cx = g.label == 0 ? 0.25 : 0.75;
        g.pixels = {cx + 0.05 * rng.normal(), cx + 0.05 * rng.normal()};
        for (double& p : g.pixels) p = std::clamp(p, 0.0, 1.0);
        data.push_back(g);
    }
    Mlp m = init_mlp({2, 8, 2}, 5);
    TrainConfig cfg;
    cfg.learning_rate = 0.01;
    cfg.epochs = 5;
    cfg.batch_size = 8;
    cfg.seed = 6;
    const TrainHistory h = train(m, data, cfg);
    for (std::size_t e = 1; e < h.loss.size(); ++e) CHECK(h.loss[e] <= h.loss[e - 1]);
}

TEST_CASE("predict breaks ties toward the lowest index") {
    Mlp m;
    DenseLayer l;
    l.weights = Matrix(3, 1);
    l.bias = {0.5, 0.9, 0.5};
    l.activation = Activation::identity;
    m.layers.push_back(l);
    CHECK(predict(m, std::vector<double>{0.0}) == 1);

    m.layers[0].bias = {0.5, 0.5, 0.5};
    CHECK(predict(m, std::vector<double>{0.0}) == 0);

    m.layers[0].bias = {0.0, 0.0, 0.0};
    CHECK(predict(m, std::vector<double>{0.0}) == 0);
}

TEST_CASE("tanh outputs stay inside (-1,1)") {
    const Mlp m = init_mlp({5, 7, 3}, 40, Activation::tanh_act);
    Rng rng(41);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> x(5);
        for (double& v : x) v = rng.uniform(-10.0, 10.0);
        for (double y : forward(m, x)) {
            CHECK(y > -1.0);
            CHECK(y < 1.0);
        }
    }
}

TEST_CASE("model serialization round-trips bitwise") {
    const auto dir = wsctest::scratch_dir("mlp_io");
    const Mlp m = init_mlp({7, 5, 4, 3}, 1234);
    const std::string path = (dir / "m.bin").string();
    save_mlp(m, path);
    const Mlp back = load_mlp(path);
    CHECK(back.seed == m.seed);
    REQUIRE(back.layers.size() == m.layers.size());
    for (std::size_t li = 0; li < m.layers.size(); ++li) {
        CHECK(back.layers[li].weights.data == m.layers[li].weights.data);
        CHECK(back.layers[li].bias == m.layers[li].bias);
        CHECK(back.layers[li].activation == m.layers[li].activation);
    }

    write_file_bytes((dir / "junk.bin").string(), "not a model");
    CHECK_THROWS_AS(load_mlp((dir / "junk.bin").string()), FormatError);
}
