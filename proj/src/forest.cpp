#include "har/forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace har {

namespace {

struct SplitChoice {
    int feature = -1;
    double threshold = 0.0;
    double score = 0.0;  // sum_k L_k^2/nL + sum_k R_k^2/nR
};

class TreeBuilder {
public:
    TreeBuilder(const Matrix& x, std::span<const int> y, int n_classes, const ForestSpec& spec,
                std::uint64_t seed)
        : x_(x), y_(y), k_(n_classes), spec_(spec), rng_(seed), importance_(x.cols(), 0.0) {
        const std::size_t p = x.cols();
        mtry_ = spec.max_features > 0.0
                    ? std::max<std::size_t>(1, static_cast<std::size_t>(spec.max_features * static_cast<double>(p)))
                    : std::max<std::size_t>(1, static_cast<std::size_t>(std::sqrt(static_cast<double>(p))));
        features_.resize(p);
        std::iota(features_.begin(), features_.end(), 0);
    }

    ClassTree build() {
        const std::size_t n = x_.rows();
        std::vector<std::size_t> idx(n);
        if (spec_.bootstrap) {
            std::uniform_int_distribution<std::size_t> pick(0, n - 1);
            for (auto& i : idx) i = pick(rng_);
            std::sort(idx.begin(), idx.end());
        } else {
            std::iota(idx.begin(), idx.end(), 0);
        }
        idx_ = std::move(idx);
        ClassTree tree;
        grow(tree, 0, idx_.size(), 0);
        return tree;
    }

    std::vector<double> take_importance() { return std::move(importance_); }

private:
    int grow(ClassTree& tree, std::size_t begin, std::size_t end, int depth) {
        const int node_id = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();
        const std::size_t m = end - begin;

        std::vector<double> counts(static_cast<std::size_t>(k_), 0.0);
        for (std::size_t i = begin; i < end; ++i) counts[static_cast<std::size_t>(y_[idx_[i]])] += 1.0;
        const bool pure = std::count_if(counts.begin(), counts.end(), [](double c) { return c > 0.0; }) <= 1;
        const auto min_leaf = static_cast<std::size_t>(std::max(1, spec_.min_samples_leaf));

        SplitChoice best;
        if (!pure && m >= 2 * min_leaf && (spec_.max_depth <= 0 || depth < spec_.max_depth)) {
            best = find_split(begin, end, counts, min_leaf);
        }
        if (best.feature < 0) {
            for (double& c : counts) c /= static_cast<double>(m);
            tree.nodes[static_cast<std::size_t>(node_id)].distribution = std::move(counts);
            return node_id;
        }

        double sumsq = 0.0;
        for (double c : counts) sumsq += c * c;
        importance_[static_cast<std::size_t>(best.feature)] += best.score - sumsq / static_cast<double>(m);

        const auto f = static_cast<std::size_t>(best.feature);
        auto mid_it = std::stable_partition(idx_.begin() + static_cast<std::ptrdiff_t>(begin),
                                            idx_.begin() + static_cast<std::ptrdiff_t>(end),
                                            [&](std::size_t r) { return x_(r, f) <= best.threshold; });
        const auto mid = static_cast<std::size_t>(mid_it - idx_.begin());
        const int left = grow(tree, begin, mid, depth + 1);
        const int right = grow(tree, mid, end, depth + 1);
        auto& node = tree.nodes[static_cast<std::size_t>(node_id)];
        node.feature = best.feature;
        node.threshold = best.threshold;
        node.left = left;
        node.right = right;
        return node_id;
    }

    SplitChoice find_split(std::size_t begin, std::size_t end, const std::vector<double>& counts,
                           std::size_t min_leaf) {
        const std::size_t m = end - begin;
        const std::size_t p = features_.size();
        SplitChoice best;
        best.score = -1.0;
        std::size_t visited = 0;
        std::vector<double> left(counts.size());
        std::vector<double> right(counts.size());
        buf_.resize(m);

        // Partial Fisher-Yates: keep drawing until mtry non-constant features were tried.
        for (std::size_t drawn = 0; drawn < p && visited < mtry_; ++drawn) {
            std::uniform_int_distribution<std::size_t> pick(drawn, p - 1);
            std::swap(features_[drawn], features_[pick(rng_)]);
            const std::size_t f = features_[drawn];

            for (std::size_t i = 0; i < m; ++i) {
                const std::size_t r = idx_[begin + i];
                buf_[i] = {x_(r, f), y_[r]};
            }
            std::sort(buf_.begin(), buf_.end());
            if (buf_.front().first == buf_.back().first) continue;
            ++visited;

            std::fill(left.begin(), left.end(), 0.0);
            right = counts;
            double sq_left = 0.0;
            double sq_right = 0.0;
            for (double c : counts) sq_right += c * c;
            for (std::size_t i = 0; i + 1 < m; ++i) {
                const auto c = static_cast<std::size_t>(buf_[i].second);
                sq_left += 2.0 * left[c] + 1.0;
                sq_right -= 2.0 * right[c] - 1.0;
                left[c] += 1.0;
                right[c] -= 1.0;
                const std::size_t n_left = i + 1;
                if (buf_[i].first == buf_[i + 1].first) continue;
                if (n_left < min_leaf || m - n_left < min_leaf) continue;
                const double score = sq_left / static_cast<double>(n_left) +
                                     sq_right / static_cast<double>(m - n_left);
                if (score > best.score) {
                    best.score = score;
                    best.feature = static_cast<int>(f);
                    best.threshold = buf_[i].first + (buf_[i + 1].first - buf_[i].first) / 2.0;
                    // Midpoint can round up to the right value; keep it strictly below.
                    if (best.threshold >= buf_[i + 1].first) best.threshold = buf_[i].first;
                }
            }
        }
        return best;
    }

    const Matrix& x_;
    std::span<const int> y_;
    int k_;
    const ForestSpec& spec_;
    std::mt19937_64 rng_;
    std::size_t mtry_ = 1;
    std::vector<std::size_t> features_;
    std::vector<std::size_t> idx_;
    std::vector<std::pair<double, int>> buf_;
    std::vector<double> importance_;
};

}  // namespace

RandomForest RandomForest::fit(const Matrix& x, std::span<const int> labels, int n_classes,
                               const ForestSpec& spec, Execution exec) {
    if (x.rows() != labels.size() || x.rows() == 0) throw DataError("forest: row/label count mismatch");
    if (spec.n_trees < 1) throw UsageError("forest: n_trees must be >= 1");
    for (int c : labels) {
        if (c < 0 || c >= n_classes) throw DataError("forest: label out of range");
    }

    RandomForest rf;
    rf.n_classes_ = n_classes;
    const auto n_trees = static_cast<std::size_t>(spec.n_trees);
    rf.trees_.resize(n_trees);
    std::vector<std::vector<double>> per_tree(n_trees);

    auto build_one = [&](std::size_t t) {
        TreeBuilder builder(x, labels, n_classes, spec, derive_seed(spec.seed, 0x7265u, t));
        rf.trees_[t] = builder.build();
        per_tree[t] = builder.take_importance();
    };
    if (exec == Execution::Parallel) {
#pragma omp parallel for schedule(dynamic, 1)
        for (std::ptrdiff_t t = 0; t < static_cast<std::ptrdiff_t>(n_trees); ++t) build_one(static_cast<std::size_t>(t));
    } else {
        for (std::size_t t = 0; t < n_trees; ++t) build_one(t);
    }

    // Aggregation in tree order keeps the sum independent of scheduling.
    rf.importances_.assign(x.cols(), 0.0);
    for (auto& imp : per_tree) {
        double total = std::accumulate(imp.begin(), imp.end(), 0.0);
        if (!(total > 0.0)) continue;
        for (std::size_t f = 0; f < imp.size(); ++f) rf.importances_[f] += imp[f] / total;
    }
    double total = std::accumulate(rf.importances_.begin(), rf.importances_.end(), 0.0);
    if (total > 0.0) {
        for (double& v : rf.importances_) v /= total;
    } else {
        std::fill(rf.importances_.begin(), rf.importances_.end(), 1.0 / static_cast<double>(x.cols()));
    }
    return rf;
}

std::vector<double> RandomForest::predict_proba(std::span<const double> row) const {
    std::vector<double> out(static_cast<std::size_t>(n_classes_), 0.0);
    for (const auto& tree : trees_) {
        std::size_t n = 0;
        while (tree.nodes[n].feature >= 0) {
            const auto& node = tree.nodes[n];
            n = static_cast<std::size_t>(row[static_cast<std::size_t>(node.feature)] <= node.threshold ? node.left
                                                                                                   : node.right);
        }
        const auto& d = tree.nodes[n].distribution;
        for (std::size_t c = 0; c < out.size(); ++c) out[c] += d[c];
    }
    for (double& v : out) v /= static_cast<double>(trees_.size());
    return out;
}

}  // namespace har
