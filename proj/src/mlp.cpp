#include "har/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "har/error.hpp"
#include "har/gbt.hpp"
#include "har/parallel.hpp"
#include "har/preprocess.hpp"

namespace har {

MlpNetwork::MlpNetwork(std::size_t n_in, std::size_t n_hidden, std::size_t n_out)
    : n_in_(n_in), n_hidden_(n_hidden), n_out_(n_out),
      params_(n_hidden * n_in + n_hidden + n_out * n_hidden + n_out, 0.0) {}

std::vector<double> MlpNetwork::forward(std::span<const double> row) const {
    if (row.size() != n_in_) throw DataError("mlp: feature width mismatch");
    const double* w1 = params_.data();
    const double* b1 = w1 + b1_off();
    const double* w2 = params_.data() + w2_off();
    const double* b2 = params_.data() + b2_off();
    std::vector<double> act(n_hidden_);
    for (std::size_t j = 0; j < n_hidden_; ++j) {
        const double* wj = w1 + j * n_in_;
        double z = b1[j];
#pragma omp simd reduction(+ : z)
        for (std::size_t i = 0; i < n_in_; ++i) z += wj[i] * row[i];
        act[j] = z > 0.0 ? z : 0.0;
    }
    std::vector<double> out(n_out_);
    for (std::size_t k = 0; k < n_out_; ++k) {
        const double* wk = w2 + k * n_hidden_;
        double z = b2[k];
        for (std::size_t j = 0; j < n_hidden_; ++j) z += wk[j] * act[j];
        out[k] = z;
    }
    softmax_inplace(out);
    return out;
}

double MlpNetwork::loss_and_gradient(const Matrix& x, std::span<const int> y, std::span<const std::size_t> rows,
                                     std::span<const std::uint8_t> keep_mask, double keep_prob,
                                     std::span<double> grad) const {
    if (grad.size() != params_.size()) throw UsageError("mlp: gradient buffer size mismatch");
    if (!keep_mask.empty() && keep_mask.size() != rows.size() * n_hidden_) throw UsageError("mlp: mask size mismatch");
    std::fill(grad.begin(), grad.end(), 0.0);
    const double* w1 = params_.data();
    const double* b1 = w1 + b1_off();
    const double* w2 = params_.data() + w2_off();
    const double* b2 = params_.data() + b2_off();
    double* gw1 = grad.data();
    double* gb1 = gw1 + b1_off();
    double* gw2 = grad.data() + w2_off();
    double* gb2 = grad.data() + b2_off();
    const double scale = keep_mask.empty() ? 1.0 : 1.0 / keep_prob;

    std::vector<double> act(n_hidden_), out(n_out_), delta_out(n_out_);
    std::vector<std::size_t> live;
    live.reserve(n_hidden_);
    double loss = 0.0;
    for (std::size_t b = 0; b < rows.size(); ++b) {
        auto row = x.row(rows[b]);
        live.clear();
        for (std::size_t j = 0; j < n_hidden_; ++j) {
            act[j] = 0.0;
            if (!keep_mask.empty() && !keep_mask[b * n_hidden_ + j]) continue;
            const double* wj = w1 + j * n_in_;
            double z = b1[j];
#pragma omp simd reduction(+ : z)
            for (std::size_t i = 0; i < n_in_; ++i) z += wj[i] * row[i];
            if (z > 0.0) {
                act[j] = z * scale;
                live.push_back(j);
            }
        }
        for (std::size_t k = 0; k < n_out_; ++k) {
            const double* wk = w2 + k * n_hidden_;
            double z = b2[k];
            for (std::size_t j : live) z += wk[j] * act[j];
            out[k] = z;
        }
        // Cross-entropy through log-sum-exp.
        const double m = *std::max_element(out.begin(), out.end());
        double s = 0.0;
        for (double v : out) s += std::exp(v - m);
        const auto target = static_cast<std::size_t>(y[rows[b]]);
        loss += m + std::log(s) - out[target];
        for (std::size_t k = 0; k < n_out_; ++k) delta_out[k] = std::exp(out[k] - m) / s - (k == target ? 1.0 : 0.0);

        for (std::size_t k = 0; k < n_out_; ++k) {
            gb2[k] += delta_out[k];
            double* gk = gw2 + k * n_hidden_;
            for (std::size_t j : live) gk[j] += delta_out[k] * act[j];
        }
        for (std::size_t j : live) {
            double d = 0.0;
            for (std::size_t k = 0; k < n_out_; ++k) d += w2[k * n_hidden_ + j] * delta_out[k];
            d *= scale;
            gb1[j] += d;
            double* gj = gw1 + j * n_in_;
            for (std::size_t i = 0; i < n_in_; ++i) gj[i] += d * row[i];
        }
    }
    const double inv = 1.0 / static_cast<double>(rows.size());
    for (double& g : grad) g *= inv;
    return loss * inv;
}

std::vector<double> MlpModel::predict_proba(std::span<const double> row) const { return network.forward(row); }

MlpModel train_mlp(const Matrix& x, std::span<const int> labels, const MlpSpec& spec) {
    if (x.rows() != labels.size() || x.rows() == 0) throw DataError("mlp: row/label count mismatch");
    for (double v : x.data()) {
        if (!std::isfinite(v)) throw DataError("mlp: non-finite value in training matrix");
    }
    if (spec.hidden_layers != 1) throw UsageError("mlp: only one hidden layer is supported");
    if (spec.epochs < 0 || spec.hidden_nodes < 1 || spec.batch_size < 1 || !(spec.dropout >= 0.0 && spec.dropout < 1.0) ||
        !(spec.learning_rate > 0.0) || spec.momentum < 0.0) {
        throw UsageError("mlp: invalid spec");
    }
    auto enc = LabelEncoding::fit(labels);
    if (enc.classes.size() < 2) throw DataError("mlp needs at least two classes");

    const std::size_t n = x.rows(), h = static_cast<std::size_t>(spec.hidden_nodes);
    MlpModel model;
    model.classes = enc.classes;
    model.network = MlpNetwork(x.cols(), h, enc.classes.size());
    auto params = model.network.parameters();
    {
        std::mt19937_64 rng(derive_seed(spec.seed, 0x696eu));
        std::uniform_real_distribution<double> init(-spec.init_range, spec.init_range);
        const std::size_t w1 = h * x.cols();
        const std::size_t w2_start = w1 + h;
        const std::size_t w2_end = w2_start + enc.classes.size() * h;
        for (std::size_t i = 0; i < w1; ++i) params[i] = init(rng);
        for (std::size_t i = w2_start; i < w2_end; ++i) params[i] = init(rng);
    }

    const double keep_prob = 1.0 - spec.dropout;
    const auto batch = static_cast<std::size_t>(spec.batch_size);
    std::vector<double> grad(params.size()), velocity(params.size(), 0.0);
    std::vector<std::size_t> order(n);
    std::vector<std::uint8_t> mask;
    for (int epoch = 0; epoch < spec.epochs; ++epoch) {
        std::mt19937_64 rng(derive_seed(spec.seed, 0x6570u, static_cast<std::uint64_t>(epoch)));
        std::iota(order.begin(), order.end(), 0);
        std::shuffle(order.begin(), order.end(), rng);
        double epoch_loss = 0.0;
        for (std::size_t start = 0; start < n; start += batch) {
            const std::size_t len = std::min(batch, n - start);
            std::span<const std::size_t> rows(order.data() + start, len);
            if (spec.dropout > 0.0) {
                mask.resize(len * h);
                // 53-bit uniform draw per unit.
                for (auto& m : mask) m = static_cast<double>(rng() >> 11) * 0x1.0p-53 < keep_prob;
            } else {
                mask.clear();
            }
            epoch_loss += model.network.loss_and_gradient(x, enc.encoded, rows, mask, keep_prob, grad) *
                          static_cast<double>(len);
            for (std::size_t i = 0; i < params.size(); ++i) {
                velocity[i] = spec.momentum * velocity[i] - spec.learning_rate * grad[i];
                params[i] += velocity[i];
            }
        }
        model.epoch_loss.push_back(epoch_loss / static_cast<double>(n));
    }
    return model;
}

}  // namespace har
