#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "wsc/matrix.hpp"
#include "wsc/patterns.hpp"

namespace wsc {

enum class Activation : std::uint8_t { tanh_act = 0, identity = 1 };

struct DenseLayer {
    Matrix weights;            // fan_out x fan_in
    std::vector<double> bias;  // fan_out
    Activation activation = Activation::tanh_act;

    std::size_t fan_in() const { return weights.cols; }
    std::size_t fan_out() const { return weights.rows; }
};

// Dense feed-forward network. Layers chain: fan_in of layer k+1 equals
// fan_out of layer k.
struct Mlp {
    std::vector<DenseLayer> layers;
    std::uint64_t seed = 0;

    std::size_t input_dim() const { return layers.front().fan_in(); }
    std::size_t output_dim() const { return layers.back().fan_out(); }

    void validate() const;
};

struct TrainConfig {
    double learning_rate = 0.05;
    std::size_t epochs = 20;
    std::size_t batch_size = 32;
    std::uint64_t seed = 1;
};

struct TrainHistory {
    std::vector<double> loss;      // mean per-sample rms loss, one entry per epoch
    std::vector<double> accuracy;  // training accuracy after each epoch
};

struct TrainSample {
    std::vector<double> input;
    std::vector<double> target;  // one-hot
};

// Gradient shaped like the network parameters.
struct MlpGrad {
    std::vector<Matrix> dweights;
    std::vector<std::vector<double>> dbias;
};

struct GradResult {
    MlpGrad grad;
    double mean_loss = 0.0;
};

std::vector<double> one_hot(int label, std::size_t classes);

// Hidden layers tanh, output layer `output_activation`. Weights uniform in
// [-1/sqrt(fan_in), +1/sqrt(fan_in)] from the seeded RNG, biases zero.
Mlp init_mlp(const std::vector<std::size_t>& layer_sizes, std::uint64_t seed,
             Activation output_activation = Activation::identity);

std::vector<double> forward(const Mlp& m, const std::vector<double>& x);

// sqrt(mean squared componentwise error).
double rms_loss(const std::vector<double>& pred, const std::vector<double>& target);

// Exact gradient of the mean per-sample rms loss over the batch.
// At a sample with rms == 0 the per-sample gradient is the zero vector
// (the minimum is attained there; zero is a valid stationary subgradient).
GradResult gradient(const Mlp& m, const std::vector<TrainSample>& batch);

// d(rms_loss(forward(m,x), target)) / dx. Same zero convention at rms == 0.
std::vector<double> input_gradient(const Mlp& m, const std::vector<double>& x,
                                   const std::vector<double>& target);

// In-place SGD update p <- p - lr * grad_p; returns the pre-step batch loss.
double sgd_step(Mlp& m, const std::vector<TrainSample>& batch, double lr);

// Called after every completed epoch.
using EpochHook = std::function<void(std::size_t epoch, const Mlp& m)>;

// Seeded-shuffle minibatch SGD over the labeled images. Target width is the
// network's output dimension; labels must lie in [0, output_dim).
TrainHistory train(Mlp& m, const std::vector<GrayImage>& data, const TrainConfig& cfg,
                   const EpochHook& hook = {});

// Same loop over raw samples (inputs need not be images).
TrainHistory train(Mlp& m, const std::vector<TrainSample>& samples, const TrainConfig& cfg,
                   const EpochHook& hook = {});

// Argmax of the forward output, ties to the lowest index.
int predict(const Mlp& m, const std::vector<double>& x);
int predict(const Mlp& m, const GrayImage& img);

double accuracy(const Mlp& m, const std::vector<GrayImage>& data);

// Versioned little-endian binary serialization; lossless round-trip.
void save_mlp(const Mlp& m, const std::string& path);
Mlp load_mlp(const std::string& path);

}  // namespace wsc
