#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "har/matrix.hpp"
#include "har/parallel.hpp"

namespace har {

struct GbtSpec {
    int n_estimators = 500;
    int max_depth = 3;
    int min_samples_leaf = 4;
    double max_features = 0.2;  // fraction of features tried per split
    double learning_rate = 0.1;
    std::uint64_t seed = 0;
};

struct RegressionNode {
    int feature = -1;  // leaf when < 0
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;  // leaf output, learning rate already applied
};

struct RegressionTree {
    std::vector<RegressionNode> nodes;
    double predict(std::span<const double> row) const;
};

// Multiclass gradient boosting on the softmax cross-entropy. Each round fits
// one regression tree per class to the negative gradient (y - p); leaves
// output the mean residual scaled by the learning rate.
struct GbtModel {
    std::vector<int> classes;          // activity codes, ascending
    std::size_t n_features = 0;
    std::vector<double> init_scores;   // log class priors
    std::vector<std::vector<RegressionTree>> rounds;  // [round][class]
    std::vector<double> training_loss;  // mean cross-entropy after init and after each round

    std::vector<double> predict_proba(std::span<const double> row) const;
};

// labels are activity codes. Throws DataError on a single class or non-finite input.
GbtModel train_gbt(const Matrix& x, std::span<const int> labels, const GbtSpec& spec,
                   Execution exec = Execution::Parallel);

// Numerically stable softmax in place.
void softmax_inplace(std::span<double> z);

}  // namespace har
