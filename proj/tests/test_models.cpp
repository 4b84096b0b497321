#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "har/error.hpp"
#include "har/gbt.hpp"
#include "har/mlp.hpp"
#include "har/model.hpp"
#include "har/svm.hpp"
#include "test_support.hpp"

using namespace har;

namespace {

double train_accuracy(const TrainedModel& m, const Matrix& x, std::span<const int> y) {
    const auto pred = m.predict(x);
    std::size_t ok = 0;
    for (std::size_t i = 0; i < y.size(); ++i) ok += pred[i] == y[i];
    return static_cast<double>(ok) / static_cast<double>(y.size());
}

void check_distributions(const Matrix& p) {
    for (std::size_t r = 0; r < p.rows(); ++r) {
        double s = 0;
        for (double v : p.row(r)) {
            CHECK(v >= 0.0);
            s += v;
        }
        CHECK(std::abs(s - 1.0) <= 1e-9);
    }
}

Matrix xor4(std::vector<int>& y) {
    Matrix x(4, 2);
    const double pts[4][2] = {{0, 0}, {1, 1}, {0, 1}, {1, 0}};
    for (int i = 0; i < 4; ++i) {
        x(i, 0) = pts[i][0];
        x(i, 1) = pts[i][1];
    }
    y = {0, 0, 1, 1};
    return x;
}

ModelSpecs quick_specs() {
    ModelSpecs s;
    s.gbt.n_estimators = 60;
    s.mlp.epochs = 60;
    return s;
}

}  // namespace

TEST_CASE("GBT separates well-spaced blobs") {
    std::mt19937_64 rng(1);
    std::vector<int> y;
    const Matrix x = test::blobs(rng, 100, 2, 4, 10.0, y);
    GbtSpec spec;
    spec.seed = 7;
    const auto m = TrainedModel(train_gbt(x, y, spec));
    CHECK(train_accuracy(m, x, y) == 1.0);
    check_distributions(m.predict_proba(x));
}

TEST_CASE("GBT training loss never increases") {
    std::mt19937_64 rng(2);
    std::vector<int> y;
    const Matrix x = test::blobs(rng, 60, 4, 10, 0.7, y);
    GbtSpec spec;
    spec.seed = 3;
    const auto m = train_gbt(x, y, spec);
    REQUIRE(m.training_loss.size() == 501);
    for (std::size_t i = 1; i < m.training_loss.size(); ++i) CHECK(m.training_loss[i] <= m.training_loss[i - 1] + 1e-12);
}

TEST_CASE("GBT with no rounds predicts class frequencies") {
    Matrix x(4, 1);
    for (std::size_t i = 0; i < 4; ++i) x(i, 0) = static_cast<double>(i);
    const std::vector<int> y = {1, 1, 1, 4};
    GbtSpec spec;
    spec.n_estimators = 0;
    const auto m = train_gbt(x, y, spec);
    const auto p = m.predict_proba(x.row(0));
    CHECK(p[0] == doctest::Approx(0.75));
    CHECK(p[1] == doctest::Approx(0.25));
}

TEST_CASE("GBT parallel and serial training agree exactly") {
    std::mt19937_64 rng(4);
    std::vector<int> y;
    const Matrix x = test::blobs(rng, 40, 3, 6, 1.0, y);
    GbtSpec spec;
    spec.n_estimators = 40;
    spec.seed = 11;
    const auto a = train_gbt(x, y, spec, Execution::Parallel);
    const auto b = train_gbt(x, y, spec, Execution::Serial);
    CHECK(a.training_loss == b.training_loss);
    CHECK(a.predict_proba(x.row(5)) == b.predict_proba(x.row(5)));
}

TEST_CASE("GBT rejects bad input") {
    Matrix x(3, 1, 1.0);
    CHECK_THROWS_AS(train_gbt(x, std::vector<int>{0, 0, 0}, GbtSpec{}), DataError);
    x(1, 0) = std::nan("");
    CHECK_THROWS_AS(train_gbt(x, std::vector<int>{0, 1, 0}, GbtSpec{}), DataError);
}

TEST_CASE("GBT trees respect depth and leaf size") {
    std::mt19937_64 rng(6);
    std::vector<int> y;
    const Matrix x = test::blobs(rng, 50, 3, 5, 1.0, y);
    GbtSpec spec;
    spec.n_estimators = 20;
    const auto m = train_gbt(x, y, spec);
    for (const auto& round : m.rounds) {
        for (const auto& tree : round) {
            // Walk each tree, recording depth and the number of training rows reaching each leaf.
            std::vector<std::size_t> counts(tree.nodes.size(), 0);
            std::size_t max_depth = 0;
            for (std::size_t r = 0; r < x.rows(); ++r) {
                int node = 0;
                std::size_t depth = 0;
                while (tree.nodes[node].feature >= 0) {
                    const auto& n = tree.nodes[node];
                    node = x(r, n.feature) <= n.threshold ? n.left : n.right;
                    ++depth;
                }
                ++counts[node];
                max_depth = std::max(max_depth, depth);
            }
            CHECK(max_depth <= 3);
            for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
                if (tree.nodes[i].feature < 0 && counts[i] > 0) CHECK(counts[i] >= 4);
            }
        }
    }
}

TEST_CASE("SVM solves XOR and satisfies the dual constraints") {
    std::vector<int> y;
    const Matrix x = xor4(y);
    SvmSpec spec;
    spec.gamma = 1.0;
    const auto svm = train_svm(x, y, spec);
    const auto m = TrainedModel(svm);
    CHECK(train_accuracy(m, x, y) == 1.0);
    for (const auto& p : svm.pairs) {
        CHECK(p.alpha_min >= 0.0);
        CHECK(p.alpha_max <= 1.6);
        CHECK(std::abs(p.alpha_y_sum) <= 1e-6);
    }
}

TEST_CASE("binary SMO dual feasibility on random problems") {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 5; ++trial) {
        std::vector<int> labels;
        const Matrix x = test::blobs(rng, 40, 2, 3, 0.8, labels);
        std::vector<int> ypm(labels.size());
        for (std::size_t i = 0; i < labels.size(); ++i) ypm[i] = labels[i] ? 1 : -1;
        const auto sol = solve_binary_svm(x, ypm, 1.6, 0.3);
        double sum = 0;
        for (std::size_t i = 0; i < sol.alpha.size(); ++i) {
            CHECK(sol.alpha[i] >= 0.0);
            CHECK(sol.alpha[i] <= 1.6);
            sum += sol.alpha[i] * ypm[i];
        }
        CHECK(std::abs(sum) <= 1e-6);
        // Decision values from the gradient match a direct kernel expansion.
        for (std::size_t t = 0; t < x.rows(); t += 7) {
            double f = -sol.rho;
            for (std::size_t i = 0; i < x.rows(); ++i) f += sol.alpha[i] * ypm[i] * rbf_kernel(x.row(i), x.row(t), 0.3);
            CHECK(sol.train_decision[t] == doctest::Approx(f).epsilon(1e-9));
        }
    }
}

TEST_CASE("SVM argmax is invariant under input scaling with matched gamma") {
    std::mt19937_64 rng(9);
    std::vector<int> y;
    Matrix x = test::blobs(rng, 20, 3, 4, 1.0, y);
    SvmSpec spec;
    spec.gamma = 0.2;
    const auto a = TrainedModel(train_svm(x, y, spec));
    const double s = 4.0;
    for (double& v : x.data()) v *= s;
    spec.gamma = 0.2 / (s * s);
    const auto b = TrainedModel(train_svm(x, y, spec));
    Matrix xs = x;
    for (double& v : xs.data()) v /= s;
    CHECK(a.predict(xs) == b.predict(x));
}

TEST_CASE("SVM probabilities") {
    std::mt19937_64 rng(10);
    std::vector<int> y;
    const Matrix x = test::blobs(rng, 30, 4, 3, 3.0, y);
    for (auto mode : {SvmProbability::Platt, SvmProbability::Votes}) {
        SvmSpec spec;
        spec.probability = mode;
        const auto m = TrainedModel(train_svm(x, y, spec));
        check_distributions(m.predict_proba(x));
        CHECK(train_accuracy(m, x, y) > 0.9);
    }
    const auto coupled = couple_pairwise({{0, 0.9, 0.8}, {0.1, 0, 0.6}, {0.2, 0.4, 0}});
    CHECK(std::accumulate(coupled.begin(), coupled.end(), 0.0) == doctest::Approx(1.0));
    // Exact minimizer of sum_i sum_j (r_ji p_i - r_ij p_j)^2 subject to sum p = 1.
    const double exact[3] = {0.74225799, 0.10924165, 0.14850037};
    for (int i = 0; i < 3; ++i) CHECK(coupled[i] == doctest::Approx(exact[i]).epsilon(0.02));
}

TEST_CASE("SVM parallel and serial training agree exactly") {
    std::mt19937_64 rng(15);
    std::vector<int> y;
    const Matrix x = test::blobs(rng, 25, 3, 4, 1.0, y);
    const auto a = train_svm(x, y, SvmSpec{}, Execution::Parallel);
    const auto b = train_svm(x, y, SvmSpec{}, Execution::Serial);
    CHECK(a.predict_proba(x.row(3)) == b.predict_proba(x.row(3)));
    CHECK(a.gamma == doctest::Approx(scale_gamma(x)));
}

TEST_CASE("MLP analytic gradient matches central differences") {
    std::mt19937_64 rng(16);
    std::vector<int> y;
    const Matrix x = test::blobs(rng, 5, 2, 6, 1.0, y);  // 10 rows
    MlpNetwork net(6, 9, 3);
    std::uniform_real_distribution<double> u(-0.5, 0.5);
    for (double& w : net.parameters()) w = u(rng);
    std::vector<int> y3 = y;
    y3[3] = 2;
    std::vector<std::size_t> rows(10);
    std::iota(rows.begin(), rows.end(), 0);
    std::vector<double> grad(net.parameters().size());
    net.loss_and_gradient(x, y3, rows, {}, 1.0, grad);

    std::vector<double> scratch(grad.size());
    const double eps = 1e-5;
    double worst = 0;
    for (std::size_t i = 0; i < grad.size(); ++i) {
        const double w = net.parameters()[i];
        net.parameters()[i] = w + eps;
        const double up = net.loss_and_gradient(x, y3, rows, {}, 1.0, scratch);
        net.parameters()[i] = w - eps;
        const double down = net.loss_and_gradient(x, y3, rows, {}, 1.0, scratch);
        net.parameters()[i] = w;
        const double numeric = (up - down) / (2 * eps);
        const double denom = std::max(std::abs(numeric), std::abs(grad[i]));
        if (denom > 1e-10) worst = std::max(worst, std::abs(numeric - grad[i]) / denom);
    }
    CHECK(worst < 1e-4);
}

TEST_CASE("MLP learns blobs; loss falls over the first epochs") {
    std::mt19937_64 rng(17);
    std::vector<int> y;
    const Matrix x = test::blobs(rng, 100, 2, 5, 3.0, y);
    MlpSpec spec;
    spec.seed = 5;
    const auto mlp = train_mlp(x, y, spec);
    const auto m = TrainedModel(mlp);
    CHECK(train_accuracy(m, x, y) >= 0.99);
    REQUIRE(mlp.epoch_loss.size() == 500);
    CHECK(mlp.epoch_loss[9] < mlp.epoch_loss[0]);

    spec.dropout = 0.0;
    spec.epochs = 10;
    const auto plain = train_mlp(x, y, spec);
    for (std::size_t e = 1; e < 10; ++e) CHECK(plain.epoch_loss[e] < plain.epoch_loss[e - 1]);
}

TEST_CASE("MLP inference is deterministic and dropout-free") {
    std::mt19937_64 rng(18);
    std::vector<int> y;
    const Matrix x = test::blobs(rng, 20, 3, 4, 2.0, y);
    MlpSpec spec;
    spec.epochs = 20;
    spec.seed = 1;
    const auto a = train_mlp(x, y, spec);
    const auto b = train_mlp(x, y, spec);
    CHECK(a.network.parameters().size() == b.network.parameters().size());
    CHECK(std::equal(a.network.parameters().begin(), a.network.parameters().end(), b.network.parameters().begin()));
    CHECK(a.predict_proba(x.row(0)) == a.predict_proba(x.row(0)));
    check_distributions(TrainedModel(a).predict_proba(x));
}

TEST_CASE("trained model wrapper") {
    std::mt19937_64 rng(19);
    std::vector<int> y;
    Matrix x = test::blobs(rng, 20, 3, 4, 3.0, y);
    for (int& v : y) v = v == 2 ? 5 : v;  // sparse activity codes
    for (ModelKind kind : {ModelKind::Gbt, ModelKind::Svm, ModelKind::Mlp}) {
        INFO(model_kind_name(kind));
        const auto m = train_model(kind, x, y, quick_specs());
        CHECK(m.kind() == kind);
        CHECK(m.classes() == std::vector<int>{0, 1, 5});
        CHECK(m.n_features() == 4);
        check_distributions(m.predict_proba(x));
        CHECK(m.predict_proba(Matrix(0, 4)).rows() == 0);
        CHECK_THROWS_AS(m.predict_proba(Matrix(2, 3)), DataError);

        const auto back = TrainedModel::from_json(m.to_json());
        CHECK(back.predict_proba(x) == m.predict_proba(x));
    }
    CHECK_THROWS_AS(TrainedModel::from_json("{\"format\":\"other\"}"), DataError);
    CHECK(parse_model_kind("xgb") == ModelKind::Gbt);
    CHECK(parse_model_kind("nn") == ModelKind::Mlp);
}

TEST_CASE("GBT predicts its own one-hot-informative training rows") {
    Matrix x(60, 3, 0.0);
    std::vector<int> y(60);
    for (std::size_t i = 0; i < 60; ++i) {
        y[i] = static_cast<int>(i % 3);
        x(i, y[i]) = 1.0;
    }
    GbtSpec spec;
    spec.n_estimators = 50;
    spec.max_features = 1.0;
    const auto m = TrainedModel(train_gbt(x, y, spec));
    CHECK(m.predict(x) == y);
}

TEST_CASE("soft vote") {
    const std::vector<int> order = {0, 1};
    auto one_row = [](double a, double b) {
        Matrix m(1, 2);
        m(0, 0) = a;
        m(0, 1) = b;
        return m;
    };
    std::vector<Matrix> probs = {one_row(0.6, 0.4), one_row(0.2, 0.8), one_row(0.55, 0.45)};
    std::vector<std::vector<int>> orders(3, order);
    CHECK(soft_vote(probs, orders) == std::vector<int>{1});
    std::reverse(probs.begin(), probs.end());
    CHECK(soft_vote(probs, orders) == std::vector<int>{1});

    std::vector<Matrix> tie = {one_row(0.5, 0.5), one_row(0.5, 0.5)};
    CHECK(soft_vote(tie, std::vector<std::vector<int>>(2, order)) == std::vector<int>{0});

    std::vector<Matrix> same = {one_row(0.3, 0.7), one_row(0.3, 0.7)};
    CHECK(soft_vote(same, std::vector<std::vector<int>>(2, order)) == std::vector<int>{1});

    std::vector<std::vector<int>> mismatched = {{0, 1}, {1, 0}};
    CHECK_THROWS_AS(soft_vote(tie, mismatched), DataError);
}

TEST_CASE("hard vote") {
    using V = std::vector<std::vector<int>>;
    const std::vector<double> acc = {0.9, 0.8, 0.7};
    CHECK(hard_vote(V{{0}, {0}, {1}}, acc) == std::vector<int>{0});
    CHECK(hard_vote(V{{1}, {0}, {2}}, acc) == std::vector<int>{1});
    CHECK(hard_vote(V{{0}, {2}, {1}}, std::vector<double>{0.5, 0.5, 0.9}) == std::vector<int>{1});
    CHECK(hard_vote(V{{2}, {1}}, std::vector<double>{0.5, 0.5}) == std::vector<int>{1});
    CHECK(hard_vote(V{{3, 4, 5}}, std::vector<double>{0.1}) == std::vector<int>{3, 4, 5});
}
