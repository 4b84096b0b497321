#include "har/gbt.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "har/error.hpp"
#include "har/preprocess.hpp"

namespace har {

void softmax_inplace(std::span<double> z) {
    const double m = *std::max_element(z.begin(), z.end());
    double s = 0.0;
    for (double& v : z) {
        v = std::exp(v - m);
        s += v;
    }
    for (double& v : z) v /= s;
}

double RegressionTree::predict(std::span<const double> row) const {
    std::size_t n = 0;
    while (nodes[n].feature >= 0) {
        const auto& node = nodes[n];
        n = static_cast<std::size_t>(row[static_cast<std::size_t>(node.feature)] <= node.threshold ? node.left
                                                                                               : node.right);
    }
    return nodes[n].value;
}

std::vector<double> GbtModel::predict_proba(std::span<const double> row) const {
    if (row.size() != n_features) throw DataError("gbt: feature width mismatch");
    std::vector<double> f = init_scores;
    for (const auto& round : rounds) {
        for (std::size_t k = 0; k < round.size(); ++k) f[k] += round[k].predict(row);
    }
    softmax_inplace(f);
    return f;
}

namespace {

// Level-wise exact split search over rows presorted once per feature.
class LevelTreeBuilder {
public:
    LevelTreeBuilder(const Matrix& x, const std::vector<std::vector<std::uint32_t>>& sorted, const GbtSpec& spec)
        : x_(x), sorted_(sorted), spec_(spec) {
        const std::size_t p = x.cols();
        n_try_ = std::max<std::size_t>(1, static_cast<std::size_t>(spec.max_features * static_cast<double>(p)));
    }

    RegressionTree build(std::span<const double> residual, std::uint64_t seed) const {
        const std::size_t n = x_.rows(), p = x_.cols();
        std::mt19937_64 rng(seed);
        std::vector<int> node_of(n, 0);
        RegressionTree tree;
        tree.nodes.emplace_back();
        std::vector<int> active = {0};
        std::vector<double> node_sum(1, 0.0);
        std::vector<double> node_cnt(1, 0.0);
        for (std::size_t i = 0; i < n; ++i) node_sum[0] += residual[i];
        node_cnt[0] = static_cast<double>(n);

        const auto min_leaf = static_cast<double>(std::max(1, spec_.min_samples_leaf));
        std::vector<std::size_t> feats(p);

        for (int depth = 0; depth < spec_.max_depth && !active.empty(); ++depth) {
            // Candidate features per active node; wants[f] lists slots of nodes trying f.
            const std::size_t a = active.size();
            std::vector<int> slot_of(tree.nodes.size(), -1);
            std::vector<std::vector<std::uint32_t>> wants(p);
            for (std::size_t s = 0; s < a; ++s) {
                slot_of[static_cast<std::size_t>(active[s])] = static_cast<int>(s);
                std::iota(feats.begin(), feats.end(), 0);
                for (std::size_t d = 0; d < n_try_; ++d) {
                    std::uniform_int_distribution<std::size_t> pick(d, p - 1);
                    std::swap(feats[d], feats[pick(rng)]);
                    wants[feats[d]].push_back(static_cast<std::uint32_t>(s));
                }
            }

            std::vector<double> best_gain(a, 0.0);
            std::vector<int> best_feat(a, -1);
            std::vector<double> best_thr(a, 0.0);
            std::vector<double> run_sum(a), run_cnt(a), last_val(a);
            std::vector<char> tries(a, 0);

            for (std::size_t f = 0; f < p; ++f) {
                if (wants[f].empty()) continue;
                for (auto s : wants[f]) {
                    tries[s] = 1;
                    run_sum[s] = 0.0;
                    run_cnt[s] = 0.0;
                }
                for (std::uint32_t row : sorted_[f]) {
                    const int nd = node_of[row];
                    if (nd < 0) continue;
                    const int s = slot_of[static_cast<std::size_t>(nd)];
                    if (s < 0 || !tries[static_cast<std::size_t>(s)]) continue;
                    const auto su = static_cast<std::size_t>(s);
                    const double v = x_(row, f);
                    const double cnt_l = run_cnt[su];
                    if (cnt_l >= min_leaf && v > last_val[su]) {
                        const double cnt_r = node_cnt[su] - cnt_l;
                        if (cnt_r >= min_leaf) {
                            const double sum_l = run_sum[su];
                            const double sum_r = node_sum[su] - sum_l;
                            const double gain = sum_l * sum_l / cnt_l + sum_r * sum_r / cnt_r -
                                                node_sum[su] * node_sum[su] / node_cnt[su];
                            if (gain > best_gain[su]) {
                                best_gain[su] = gain;
                                best_feat[su] = static_cast<int>(f);
                                double thr = last_val[su] + (v - last_val[su]) / 2.0;
                                if (thr >= v) thr = last_val[su];
                                best_thr[su] = thr;
                            }
                        }
                    }
                    run_sum[su] += residual[row];
                    run_cnt[su] += 1.0;
                    last_val[su] = v;
                }
                for (auto s : wants[f]) tries[s] = 0;
            }

            // Create children; nodes without a split become leaves (marked by -1 rows).
            std::vector<int> next_active;
            std::vector<double> next_sum, next_cnt;
            std::vector<int> left_of(a, -1);
            for (std::size_t s = 0; s < a; ++s) {
                if (best_feat[s] < 0) continue;
                auto& node = tree.nodes[static_cast<std::size_t>(active[s])];
                node.feature = best_feat[s];
                node.threshold = best_thr[s];
                node.left = static_cast<int>(tree.nodes.size());
                node.right = node.left + 1;
                left_of[s] = node.left;
                tree.nodes.emplace_back();
                tree.nodes.emplace_back();
                next_active.push_back(node.left);
                next_active.push_back(node.right);
            }
            next_sum.assign(tree.nodes.size(), 0.0);
            next_cnt.assign(tree.nodes.size(), 0.0);
            std::vector<double> leaf_sum(tree.nodes.size(), 0.0), leaf_cnt(tree.nodes.size(), 0.0);
            for (std::size_t i = 0; i < n; ++i) {
                const int nd = node_of[i];
                if (nd < 0) continue;
                const auto s = static_cast<std::size_t>(slot_of[static_cast<std::size_t>(nd)]);
                if (left_of[s] < 0) {
                    leaf_sum[static_cast<std::size_t>(nd)] += residual[i];
                    leaf_cnt[static_cast<std::size_t>(nd)] += 1.0;
                    node_of[i] = -1;
                    continue;
                }
                const auto& node = tree.nodes[static_cast<std::size_t>(nd)];
                const int child = x_(i, static_cast<std::size_t>(node.feature)) <= node.threshold ? node.left : node.right;
                node_of[i] = child;
                next_sum[static_cast<std::size_t>(child)] += residual[i];
                next_cnt[static_cast<std::size_t>(child)] += 1.0;
            }
            for (std::size_t s = 0; s < a; ++s) {
                if (left_of[s] >= 0) continue;
                const auto nd = static_cast<std::size_t>(active[s]);
                tree.nodes[nd].value = spec_.learning_rate * leaf_sum[nd] / leaf_cnt[nd];
            }
            active = std::move(next_active);
            node_sum.resize(active.size());
            node_cnt.resize(active.size());
            for (std::size_t s = 0; s < active.size(); ++s) {
                node_sum[s] = next_sum[static_cast<std::size_t>(active[s])];
                node_cnt[s] = next_cnt[static_cast<std::size_t>(active[s])];
            }
        }

        // Remaining active nodes are depth-limited leaves.
        for (std::size_t s = 0; s < active.size(); ++s) {
            tree.nodes[static_cast<std::size_t>(active[s])].value = spec_.learning_rate * node_sum[s] / node_cnt[s];
        }
        return tree;
    }

private:
    const Matrix& x_;
    const std::vector<std::vector<std::uint32_t>>& sorted_;
    const GbtSpec& spec_;
    std::size_t n_try_ = 1;
};

double mean_cross_entropy(const Matrix& scores, std::span<const int> y) {
    double loss = 0.0;
    std::vector<double> z(scores.cols());
    for (std::size_t i = 0; i < scores.rows(); ++i) {
        auto row = scores.row(i);
        const double m = *std::max_element(row.begin(), row.end());
        double s = 0.0;
        for (double v : row) s += std::exp(v - m);
        loss += m + std::log(s) - row[static_cast<std::size_t>(y[i])];
    }
    return loss / static_cast<double>(scores.rows());
}

}  // namespace

GbtModel train_gbt(const Matrix& x, std::span<const int> labels, const GbtSpec& spec, Execution exec) {
    if (x.rows() != labels.size() || x.rows() == 0) throw DataError("gbt: row/label count mismatch");
    for (double v : x.data()) {
        if (!std::isfinite(v)) throw DataError("gbt: non-finite value in training matrix");
    }
    if (spec.n_estimators < 0 || spec.max_depth < 1 || spec.min_samples_leaf < 1 || !(spec.max_features > 0.0) ||
        spec.max_features > 1.0 || !(spec.learning_rate > 0.0)) {
        throw UsageError("gbt: invalid spec");
    }
    auto enc = LabelEncoding::fit(labels);
    if (enc.classes.size() < 2) throw DataError("gbt needs at least two classes");
    const std::size_t n = x.rows(), k = enc.classes.size();

    GbtModel model;
    model.classes = enc.classes;
    model.n_features = x.cols();
    model.init_scores.assign(k, 0.0);
    for (int c : enc.encoded) model.init_scores[static_cast<std::size_t>(c)] += 1.0;
    for (double& s : model.init_scores) s = std::log(s / static_cast<double>(n));

    std::vector<std::vector<std::uint32_t>> sorted(x.cols());
    for (std::size_t f = 0; f < x.cols(); ++f) {
        auto& order = sorted[f];
        order.resize(n);
        std::iota(order.begin(), order.end(), 0u);
        std::stable_sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) { return x(a, f) < x(b, f); });
    }
    LevelTreeBuilder builder(x, sorted, spec);

    Matrix scores(n, k);
    for (std::size_t i = 0; i < n; ++i) std::copy(model.init_scores.begin(), model.init_scores.end(), scores.row(i).begin());
    model.training_loss.push_back(mean_cross_entropy(scores, enc.encoded));

    std::vector<std::vector<double>> residual(k, std::vector<double>(n));
    std::vector<double> prob(k);
    for (int round = 0; round < spec.n_estimators; ++round) {
        for (std::size_t i = 0; i < n; ++i) {
            auto row = scores.row(i);
            std::copy(row.begin(), row.end(), prob.begin());
            softmax_inplace(prob);
            for (std::size_t c = 0; c < k; ++c) {
                residual[c][i] = (enc.encoded[i] == static_cast<int>(c) ? 1.0 : 0.0) - prob[c];
            }
        }
        std::vector<RegressionTree> trees(k);
        auto fit_class = [&](std::size_t c) {
            trees[c] = builder.build(residual[c], derive_seed(spec.seed, 0x6762u, static_cast<std::uint64_t>(round), c));
        };
        if (exec == Execution::Parallel) {
#pragma omp parallel for schedule(static, 1)
            for (std::ptrdiff_t c = 0; c < static_cast<std::ptrdiff_t>(k); ++c) fit_class(static_cast<std::size_t>(c));
        } else {
            for (std::size_t c = 0; c < k; ++c) fit_class(c);
        }
        for (std::size_t i = 0; i < n; ++i) {
            auto row = x.row(i);
            for (std::size_t c = 0; c < k; ++c) scores(i, c) += trees[c].predict(row);
        }
        model.rounds.push_back(std::move(trees));
        model.training_loss.push_back(mean_cross_entropy(scores, enc.encoded));
    }
    return model;
}

}  // namespace har
