#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "har/matrix.hpp"

namespace har {

struct MlpSpec {
    int epochs = 500;
    int hidden_layers = 1;  // only a single hidden layer is supported
    int hidden_nodes = 130;
    double dropout = 0.6;
    double learning_rate = 0.01;
    int batch_size = 32;
    double momentum = 0.0;
    double init_range = 0.05;  // weights ~ U(-r, r), biases 0
    std::uint64_t seed = 0;
};

// One ReLU hidden layer, softmax output. Parameters live in a single flat
// buffer: W1 (hidden x in, row-major), b1, W2 (out x hidden), b2.
class MlpNetwork {
public:
    MlpNetwork() = default;
    MlpNetwork(std::size_t n_in, std::size_t n_hidden, std::size_t n_out);

    std::size_t inputs() const { return n_in_; }
    std::size_t hidden() const { return n_hidden_; }
    std::size_t outputs() const { return n_out_; }

    std::span<double> parameters() { return params_; }
    std::span<const double> parameters() const { return params_; }

    // Inference: no dropout.
    std::vector<double> forward(std::span<const double> row) const;

    // Mean categorical cross-entropy over `rows` and its gradient (same
    // layout as parameters()). keep_mask, when non-empty, holds one byte per
    // (batch row, hidden unit); kept units are scaled by 1 / keep_prob.
    double loss_and_gradient(const Matrix& x, std::span<const int> y, std::span<const std::size_t> rows,
                             std::span<const std::uint8_t> keep_mask, double keep_prob,
                             std::span<double> grad) const;

private:
    std::size_t n_in_ = 0, n_hidden_ = 0, n_out_ = 0;
    std::vector<double> params_;

    std::size_t b1_off() const { return n_hidden_ * n_in_; }
    std::size_t w2_off() const { return b1_off() + n_hidden_; }
    std::size_t b2_off() const { return w2_off() + n_out_ * n_hidden_; }
};

struct MlpModel {
    std::vector<int> classes;
    MlpNetwork network;
    std::vector<double> epoch_loss;  // mean mini-batch loss (with dropout) per epoch

    std::vector<double> predict_proba(std::span<const double> row) const;
};

// Plain mini-batch SGD over seeded shuffles with inverted dropout on the hidden layer.
MlpModel train_mlp(const Matrix& x, std::span<const int> labels, const MlpSpec& spec);

}  // namespace har
