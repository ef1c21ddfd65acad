#include "wsc/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>
#include <string>

#include "wsc/error.hpp"
#include "wsc/io.hpp"
#include "wsc/kernels.hpp"
#include "wsc/rng.hpp"

namespace wsc {

namespace {

constexpr char kMlpMagic[8] = {'W', 'S', 'C', 'M', 'L', 'P', '0', '1'};

void apply_activation(Activation act, std::vector<double>& v) {
    if (act == Activation::tanh_act) {
        for (double& x : v) x = std::tanh(x);
    }
}

// Forward pass keeping per-layer activations; activations[0] is the input,
// activations[l+1] the output of layer l.
std::vector<std::vector<double>> forward_trace(const Mlp& m, const std::vector<double>& x) {
    std::vector<std::vector<double>> activations;
    activations.reserve(m.layers.size() + 1);
    activations.push_back(x);
    for (const auto& layer : m.layers) {
        const auto& in = activations.back();
        std::vector<double> out(layer.fan_out());
        kernels::matvec(layer.weights.data.data(), layer.fan_out(), layer.fan_in(),
                        in.data(), out.data());
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += layer.bias[i];
        apply_activation(layer.activation, out);
        activations.push_back(std::move(out));
    }
    return activations;
}

MlpGrad zero_grad(const Mlp& m) {
    MlpGrad g;
    g.dweights.reserve(m.layers.size());
    g.dbias.reserve(m.layers.size());
    for (const auto& layer : m.layers) {
        g.dweights.emplace_back(layer.fan_out(), layer.fan_in());
        g.dbias.emplace_back(layer.fan_out(), 0.0);
    }
    return g;
}

void check_sample_dims(const Mlp& m, const TrainSample& s) {
    if (s.input.size() != m.input_dim()) {
        throw DimensionMismatch("sample input size " + std::to_string(s.input.size()) +
                                " != network input " + std::to_string(m.input_dim()));
    }
    if (s.target.size() != m.output_dim()) {
        throw DimensionMismatch("sample target size " + std::to_string(s.target.size()) +
                                " != network output " + std::to_string(m.output_dim()));
    }
}

// Backpropagates one sample into grad (accumulating) and optionally fills
// the loss gradient with respect to the input. Returns the sample loss.
double backprop_sample(const Mlp& m, const TrainSample& s, MlpGrad* grad,
                       std::vector<double>* input_grad) {
    const auto acts = forward_trace(m, s.input);
    const auto& out = acts.back();
    const std::size_t k = out.size();

    std::vector<double> diff(k);
    for (std::size_t i = 0; i < k; ++i) diff[i] = out[i] - s.target[i];
    const double rms = std::sqrt(kernels::dot(diff.data(), diff.data(), k) /
                                 static_cast<double>(k));

    if (input_grad != nullptr) input_grad->assign(s.input.size(), 0.0);
    if (rms == 0.0) return 0.0;  // minimum attained; zero is a stationary subgradient

    // delta = dLoss/d(pre-activation) of the current layer, walking backwards.
    std::vector<double> delta(k);
    const double inv = 1.0 / (static_cast<double>(k) * rms);
    for (std::size_t i = 0; i < k; ++i) delta[i] = diff[i] * inv;

    for (std::size_t li = m.layers.size(); li-- > 0;) {
        const DenseLayer& layer = m.layers[li];
        const auto& layer_out = acts[li + 1];
        if (layer.activation == Activation::tanh_act) {
            for (std::size_t i = 0; i < delta.size(); ++i) {
                delta[i] *= 1.0 - layer_out[i] * layer_out[i];
            }
        }
        if (grad != nullptr) {
            kernels::rank1_update(grad->dweights[li].data.data(), layer.fan_out(),
                                  layer.fan_in(), 1.0, delta.data(), acts[li].data());
            for (std::size_t i = 0; i < delta.size(); ++i) grad->dbias[li][i] += delta[i];
        }
        if (li > 0 || input_grad != nullptr) {
            std::vector<double> prev(layer.fan_in(), 0.0);
            kernels::matvec_t_acc(layer.weights.data.data(), layer.fan_out(), layer.fan_in(),
                                  delta.data(), prev.data());
            if (li == 0) {
                *input_grad = std::move(prev);
            } else {
                delta = std::move(prev);
            }
        }
    }
    return rms;
}

}  // namespace

void Mlp::validate() const {
    if (layers.empty()) throw InvalidArgument("network has no layers");
    for (std::size_t i = 0; i < layers.size(); ++i) {
        const auto& l = layers[i];
        if (l.fan_in() == 0 || l.fan_out() == 0) throw InvalidArgument("zero-sized layer");
        if (l.bias.size() != l.fan_out()) throw DimensionMismatch("bias size mismatch");
        if (i > 0 && l.fan_in() != layers[i - 1].fan_out()) {
            throw DimensionMismatch("layer " + std::to_string(i) + " fan_in does not chain");
        }
    }
}

std::vector<double> one_hot(int label, std::size_t classes) {
    if (label < 0 || static_cast<std::size_t>(label) >= classes) {
        throw InvalidArgument("label " + std::to_string(label) + " out of range for " +
                              std::to_string(classes) + " classes");
    }
    std::vector<double> t(classes, 0.0);
    t[static_cast<std::size_t>(label)] = 1.0;
    return t;
}

Mlp init_mlp(const std::vector<std::size_t>& layer_sizes, std::uint64_t seed,
             Activation output_activation) {
    if (layer_sizes.size() < 2) {
        throw InvalidArgument("need at least input and output sizes");
    }
    for (std::size_t s : layer_sizes) {
        if (s == 0) throw InvalidArgument("layer sizes must be positive");
    }

    Mlp m;
    m.seed = seed;
    Rng rng(seed);
    for (std::size_t li = 0; li + 1 < layer_sizes.size(); ++li) {
        DenseLayer layer;
        const std::size_t fan_in = layer_sizes[li];
        const std::size_t fan_out = layer_sizes[li + 1];
        layer.weights = Matrix(fan_out, fan_in);
        const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
        for (double& w : layer.weights.data) w = rng.uniform(-bound, bound);
        layer.bias.assign(fan_out, 0.0);
        layer.activation =
            (li + 2 == layer_sizes.size()) ? output_activation : Activation::tanh_act;
        m.layers.push_back(std::move(layer));
    }
    return m;
}

std::vector<double> forward(const Mlp& m, const std::vector<double>& x) {
    if (x.size() != m.input_dim()) {
        throw DimensionMismatch("input size " + std::to_string(x.size()) +
                                " != network input " + std::to_string(m.input_dim()));
    }
    return forward_trace(m, x).back();
}

double rms_loss(const std::vector<double>& pred, const std::vector<double>& target) {
    if (pred.size() != target.size()) {
        throw DimensionMismatch("rms_loss: prediction and target sizes differ");
    }
    if (pred.empty()) throw InvalidArgument("rms_loss on empty vectors");
    double ss = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double d = pred[i] - target[i];
        ss += d * d;
    }
    return std::sqrt(ss / static_cast<double>(pred.size()));
}

GradResult gradient(const Mlp& m, const std::vector<TrainSample>& batch) {
    if (batch.empty()) throw InvalidArgument("gradient of an empty batch");
    for (const auto& s : batch) check_sample_dims(m, s);

    GradResult res;
    res.grad = zero_grad(m);
    for (const auto& s : batch) {
        res.mean_loss += backprop_sample(m, s, &res.grad, nullptr);
    }
    const double inv_n = 1.0 / static_cast<double>(batch.size());
    res.mean_loss *= inv_n;
    for (auto& dw : res.grad.dweights) {
        kernels::scale(inv_n, dw.data.data(), dw.data.size());
    }
    for (auto& db : res.grad.dbias) {
        kernels::scale(inv_n, db.data(), db.size());
    }
    return res;
}

std::vector<double> input_gradient(const Mlp& m, const std::vector<double>& x,
                                   const std::vector<double>& target) {
    TrainSample s{x, target};
    check_sample_dims(m, s);
    std::vector<double> g;
    backprop_sample(m, s, nullptr, &g);
    return g;
}

double sgd_step(Mlp& m, const std::vector<TrainSample>& batch, double lr) {
    GradResult res = gradient(m, batch);
    for (std::size_t li = 0; li < m.layers.size(); ++li) {
        auto& layer = m.layers[li];
        kernels::axpy(-lr, res.grad.dweights[li].data.data(), layer.weights.data.data(),
                      layer.weights.data.size());
        kernels::axpy(-lr, res.grad.dbias[li].data(), layer.bias.data(), layer.bias.size());
    }
    return res.mean_loss;
}

TrainHistory train(Mlp& m, const std::vector<TrainSample>& samples, const TrainConfig& cfg,
                   const EpochHook& hook) {
    m.validate();
    if (samples.empty()) throw InvalidArgument("training data is empty");
    if (cfg.learning_rate < 0.0) throw InvalidArgument("learning rate must be nonnegative");
    if (cfg.batch_size == 0) throw InvalidArgument("batch size must be positive");
    for (const auto& s : samples) check_sample_dims(m, s);

    auto sample_accuracy = [&]() {
        std::size_t hits = 0;
        for (const auto& s : samples) {
            std::size_t target = 0;
            for (std::size_t i = 1; i < s.target.size(); ++i) {
                if (s.target[i] > s.target[target]) target = i;
            }
            if (predict(m, s.input) == static_cast<int>(target)) ++hits;
        }
        return static_cast<double>(hits) / static_cast<double>(samples.size());
    };

    TrainHistory history;
    Rng rng(cfg.seed);
    std::vector<std::size_t> order(samples.size());
    std::iota(order.begin(), order.end(), std::size_t{0});

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        rng.shuffle(order);
        double loss_sum = 0.0;
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const std::size_t stop = std::min(order.size(), start + cfg.batch_size);
            std::vector<TrainSample> batch;
            batch.reserve(stop - start);
            for (std::size_t i = start; i < stop; ++i) batch.push_back(samples[order[i]]);
            const double batch_loss = sgd_step(m, batch, cfg.learning_rate);
            loss_sum += batch_loss * static_cast<double>(batch.size());
        }
        history.loss.push_back(loss_sum / static_cast<double>(samples.size()));
        history.accuracy.push_back(sample_accuracy());
        if (hook) hook(epoch, m);
    }
    return history;
}

TrainHistory train(Mlp& m, const std::vector<GrayImage>& data, const TrainConfig& cfg,
                   const EpochHook& hook) {
    m.validate();
    if (data.empty()) throw InvalidArgument("training data is empty");
    const std::size_t classes = m.output_dim();
    std::vector<TrainSample> samples;
    samples.reserve(data.size());
    for (const auto& img : data) {
        samples.push_back(TrainSample{img.pixels, one_hot(img.label, classes)});
    }
    return train(m, samples, cfg, hook);
}

int predict(const Mlp& m, const std::vector<double>& x) {
    const auto out = forward(m, x);
    std::size_t best = 0;
    for (std::size_t i = 1; i < out.size(); ++i) {
        if (out[i] > out[best]) best = i;  // ties keep the lowest index
    }
    return static_cast<int>(best);
}

int predict(const Mlp& m, const GrayImage& img) { return predict(m, img.pixels); }

double accuracy(const Mlp& m, const std::vector<GrayImage>& data) {
    if (data.empty()) throw InvalidArgument("accuracy on empty data");
    std::size_t hits = 0;
    for (const auto& img : data) {
        if (predict(m, img.pixels) == img.label) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(data.size());
}

void save_mlp(const Mlp& m, const std::string& path) {
    m.validate();
    std::ofstream os = open_out(path);
    os.write(kMlpMagic, 8);
    write_u32(os, static_cast<std::uint32_t>(m.layers.size()));
    write_u64(os, m.seed);
    for (const auto& layer : m.layers) {
        write_u32(os, static_cast<std::uint32_t>(layer.fan_out()));
        write_u32(os, static_cast<std::uint32_t>(layer.fan_in()));
        write_u8(os, static_cast<std::uint8_t>(layer.activation));
        for (double w : layer.weights.data) write_f64(os, w);
        for (double b : layer.bias) write_f64(os, b);
    }
    if (!os) throw IoError("write failed: " + path);
}

Mlp load_mlp(const std::string& path) {
    std::ifstream is = open_in(path);
    char magic[8];
    is.read(magic, 8);
    if (is.gcount() != 8 || std::memcmp(magic, kMlpMagic, 8) != 0) {
        throw FormatError("not a model file: " + path);
    }
    Mlp m;
    const std::uint32_t n_layers = read_u32(is);
    m.seed = read_u64(is);
    for (std::uint32_t li = 0; li < n_layers; ++li) {
        DenseLayer layer;
        const std::uint32_t fan_out = read_u32(is);
        const std::uint32_t fan_in = read_u32(is);
        const std::uint8_t act = read_u8(is);
        if (act > 1) throw FormatError("unknown activation tag in " + path);
        layer.activation = static_cast<Activation>(act);
        layer.weights = Matrix(fan_out, fan_in);
        for (double& w : layer.weights.data) w = read_f64(is);
        layer.bias.resize(fan_out);
        for (double& b : layer.bias) b = read_f64(is);
        m.layers.push_back(std::move(layer));
    }
    m.validate();
    return m;
}

}  // namespace wsc
