#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "har/matrix.hpp"
#include "har/parallel.hpp"

namespace har {

struct ForestSpec {
    int n_trees = 200;
    int max_depth = 0;          // 0 = grow until pure
    int min_samples_leaf = 1;
    double max_features = 0.0;  // fraction of features per split; 0 = floor(sqrt(p))
    bool bootstrap = true;
    std::uint64_t seed = 0;
};

// CART classification tree node; leaf when feature < 0.
struct ClassTreeNode {
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    std::vector<double> distribution;  // class frequencies at leaves
};

struct ClassTree {
    std::vector<ClassTreeNode> nodes;
};

// Gini random forest with mean-decrease-impurity importances.
class RandomForest {
public:
    // labels are dense codes in [0, n_classes).
    static RandomForest fit(const Matrix& x, std::span<const int> labels, int n_classes,
                            const ForestSpec& spec, Execution exec = Execution::Parallel);

    // Per-feature importance, each tree normalized to 1, averaged, renormalized.
    const std::vector<double>& importances() const { return importances_; }
    const std::vector<ClassTree>& trees() const { return trees_; }

    std::vector<double> predict_proba(std::span<const double> row) const;

private:
    int n_classes_ = 0;
    std::vector<ClassTree> trees_;
    std::vector<double> importances_;
};

}  // namespace har
