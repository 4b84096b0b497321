#include "har/model.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "har/error.hpp"

namespace har {

using nlohmann::json;

namespace {

constexpr int kModelFormatVersion = 1;

json matrix_json(const Matrix& m) {
    return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::vector<double>(m.data().begin(), m.data().end())}};
}

Matrix matrix_from(const json& j) {
    Matrix m(j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>());
    auto data = j.at("data").get<std::vector<double>>();
    if (data.size() != m.rows() * m.cols()) throw DataError("model file: matrix size mismatch");
    std::copy(data.begin(), data.end(), m.data().begin());
    return m;
}

json tree_json(const RegressionTree& t) {
    json nodes = json::array();
    for (const auto& n : t.nodes) nodes.push_back({n.feature, n.threshold, n.left, n.right, n.value});
    return nodes;
}

RegressionTree tree_from(const json& j) {
    RegressionTree t;
    for (const auto& n : j) {
        t.nodes.push_back({n.at(0).get<int>(), n.at(1).get<double>(), n.at(2).get<int>(), n.at(3).get<int>(),
                           n.at(4).get<double>()});
    }
    return t;
}

json to_json_impl(const GbtModel& m) {
    json rounds = json::array();
    for (const auto& r : m.rounds) {
        json trees = json::array();
        for (const auto& t : r) trees.push_back(tree_json(t));
        rounds.push_back(std::move(trees));
    }
    return {{"kind", "gbt"},           {"classes", m.classes},           {"n_features", m.n_features},
            {"init_scores", m.init_scores}, {"training_loss", m.training_loss}, {"rounds", std::move(rounds)}};
}

json to_json_impl(const SvmModel& m) {
    json pairs = json::array();
    for (const auto& p : m.pairs) {
        pairs.push_back({{"pos", p.pos},
                         {"neg", p.neg},
                         {"sv", p.sv},
                         {"coef", p.coef},
                         {"rho", p.rho},
                         {"platt", {p.platt.a, p.platt.b}},
                         {"alpha_min", p.alpha_min},
                         {"alpha_max", p.alpha_max},
                         {"alpha_y_sum", p.alpha_y_sum}});
    }
    return {{"kind", "svm"},
            {"classes", m.classes},
            {"gamma", m.gamma},
            {"c", m.c},
            {"probability", m.probability == SvmProbability::Platt ? "platt" : "votes"},
            {"support_vectors", matrix_json(m.support_vectors)},
            {"pairs", std::move(pairs)}};
}

json to_json_impl(const MlpModel& m) {
    auto p = m.network.parameters();
    return {{"kind", "mlp"},
            {"classes", m.classes},
            {"inputs", m.network.inputs()},
            {"hidden", m.network.hidden()},
            {"outputs", m.network.outputs()},
            {"parameters", std::vector<double>(p.begin(), p.end())},
            {"epoch_loss", m.epoch_loss}};
}

}  // namespace

std::string_view model_kind_name(ModelKind k) {
    switch (k) {
        case ModelKind::Gbt: return "gbt";
        case ModelKind::Svm: return "svm";
        case ModelKind::Mlp: return "mlp";
    }
    return "?";
}

std::optional<ModelKind> parse_model_kind(std::string_view s) {
    if (s == "gbt" || s == "xgb") return ModelKind::Gbt;
    if (s == "svm") return ModelKind::Svm;
    if (s == "mlp" || s == "nn") return ModelKind::Mlp;
    return std::nullopt;
}

ModelKind TrainedModel::kind() const { return static_cast<ModelKind>(impl_.index()); }

const std::vector<int>& TrainedModel::classes() const {
    return std::visit([](const auto& m) -> const std::vector<int>& { return m.classes; }, impl_);
}

std::size_t TrainedModel::n_features() const {
    switch (kind()) {
        case ModelKind::Gbt: return std::get<GbtModel>(impl_).n_features;
        case ModelKind::Svm: return std::get<SvmModel>(impl_).support_vectors.cols();
        case ModelKind::Mlp: return std::get<MlpModel>(impl_).network.inputs();
    }
    return 0;
}

Matrix TrainedModel::predict_proba(const Matrix& x) const {
    if (x.rows() == 0) return Matrix(0, classes().size());
    if (x.cols() != n_features()) throw DataError("predict_proba: feature width does not match the trained model");
    Matrix out(x.rows(), classes().size());
    std::visit(
        [&](const auto& m) {
            for (std::size_t r = 0; r < x.rows(); ++r) {
                auto p = m.predict_proba(x.row(r));
                std::copy(p.begin(), p.end(), out.row(r).begin());
            }
        },
        impl_);
    return out;
}

std::vector<int> TrainedModel::predict(const Matrix& x) const {
    Matrix p = predict_proba(x);
    std::vector<int> out(p.rows());
    for (std::size_t r = 0; r < p.rows(); ++r) out[r] = classes()[argmax(p.row(r))];
    return out;
}

std::string TrainedModel::to_json() const {
    json j = std::visit([](const auto& m) { return to_json_impl(m); }, impl_);
    j["format"] = "har-model";
    j["version"] = kModelFormatVersion;
    return j.dump();
}

TrainedModel TrainedModel::from_json(std::string_view text) {
    json j;
    try {
        j = json::parse(text);
        if (j.at("format") != "har-model") throw DataError("not a model file");
        if (j.at("version").get<int>() != kModelFormatVersion) throw DataError("unsupported model file version");
        const auto kind = j.at("kind").get<std::string>();
        if (kind == "gbt") {
            GbtModel m;
            m.classes = j.at("classes").get<std::vector<int>>();
            m.n_features = j.at("n_features").get<std::size_t>();
            m.init_scores = j.at("init_scores").get<std::vector<double>>();
            m.training_loss = j.at("training_loss").get<std::vector<double>>();
            for (const auto& r : j.at("rounds")) {
                std::vector<RegressionTree> trees;
                for (const auto& t : r) trees.push_back(tree_from(t));
                m.rounds.push_back(std::move(trees));
            }
            return TrainedModel(std::move(m));
        }
        if (kind == "svm") {
            SvmModel m;
            m.classes = j.at("classes").get<std::vector<int>>();
            m.gamma = j.at("gamma").get<double>();
            m.c = j.at("c").get<double>();
            m.probability = j.at("probability") == "votes" ? SvmProbability::Votes : SvmProbability::Platt;
            m.support_vectors = matrix_from(j.at("support_vectors"));
            for (const auto& p : j.at("pairs")) {
                SvmModel::Pair pair;
                pair.pos = p.at("pos").get<std::size_t>();
                pair.neg = p.at("neg").get<std::size_t>();
                pair.sv = p.at("sv").get<std::vector<std::size_t>>();
                pair.coef = p.at("coef").get<std::vector<double>>();
                pair.rho = p.at("rho").get<double>();
                pair.platt = {p.at("platt").at(0).get<double>(), p.at("platt").at(1).get<double>()};
                pair.alpha_min = p.at("alpha_min").get<double>();
                pair.alpha_max = p.at("alpha_max").get<double>();
                pair.alpha_y_sum = p.at("alpha_y_sum").get<double>();
                m.pairs.push_back(std::move(pair));
            }
            return TrainedModel(std::move(m));
        }
        if (kind == "mlp") {
            MlpModel m;
            m.classes = j.at("classes").get<std::vector<int>>();
            m.network = MlpNetwork(j.at("inputs").get<std::size_t>(), j.at("hidden").get<std::size_t>(),
                                   j.at("outputs").get<std::size_t>());
            auto params = j.at("parameters").get<std::vector<double>>();
            if (params.size() != m.network.parameters().size()) throw DataError("model file: parameter count mismatch");
            std::copy(params.begin(), params.end(), m.network.parameters().begin());
            m.epoch_loss = j.at("epoch_loss").get<std::vector<double>>();
            return TrainedModel(std::move(m));
        }
        throw DataError("unknown model kind: " + kind);
    } catch (const json::exception& e) {
        throw DataError(std::string("malformed model file: ") + e.what());
    }
}

void TrainedModel::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    out << to_json() << '\n';
}

TrainedModel TrainedModel::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open model file: " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return from_json(ss.str());
}

TrainedModel train_model(ModelKind kind, const Matrix& x, std::span<const int> labels, const ModelSpecs& specs) {
    switch (kind) {
        case ModelKind::Gbt: return TrainedModel(train_gbt(x, labels, specs.gbt));
        case ModelKind::Svm: return TrainedModel(train_svm(x, labels, specs.svm));
        case ModelKind::Mlp: return TrainedModel(train_mlp(x, labels, specs.mlp));
    }
    throw UsageError("unknown model kind");
}

std::size_t argmax(std::span<const double> v) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < v.size(); ++i) {
        if (v[i] > v[best]) best = i;
    }
    return best;
}

std::vector<int> soft_vote(std::span<const Matrix> probabilities, std::span<const std::vector<int>> class_orders) {
    if (probabilities.empty() || probabilities.size() != class_orders.size()) {
        throw DataError("soft_vote: need one class order per model");
    }
    const auto& classes = class_orders[0];
    const std::size_t rows = probabilities[0].rows();
    for (std::size_t m = 0; m < probabilities.size(); ++m) {
        if (class_orders[m] != classes) throw DataError("soft_vote: models disagree on class order");
        if (probabilities[m].rows() != rows || probabilities[m].cols() != classes.size()) {
            throw DataError("soft_vote: probability matrix shape mismatch");
        }
    }
    std::vector<int> out(rows);
    std::vector<double> mean(classes.size());
    for (std::size_t r = 0; r < rows; ++r) {
        std::fill(mean.begin(), mean.end(), 0.0);
        for (const auto& p : probabilities) {
            auto row = p.row(r);
            for (std::size_t c = 0; c < mean.size(); ++c) mean[c] += row[c];
        }
        for (double& v : mean) v /= static_cast<double>(probabilities.size());
        out[r] = classes[argmax(mean)];
    }
    return out;
}

std::vector<int> hard_vote(std::span<const std::vector<int>> predictions, std::span<const double> train_accuracy) {
    if (predictions.empty()) throw DataError("hard_vote: need at least one model");
    if (!train_accuracy.empty() && train_accuracy.size() != predictions.size()) {
        throw DataError("hard_vote: one training accuracy per model expected");
    }
    const std::size_t rows = predictions[0].size();
    for (const auto& p : predictions) {
        if (p.size() != rows) throw DataError("hard_vote: prediction length mismatch");
    }
    // Model indices grouped by descending training accuracy.
    std::vector<std::size_t> by_acc(predictions.size());
    for (std::size_t i = 0; i < by_acc.size(); ++i) by_acc[i] = i;
    auto acc = [&](std::size_t m) { return train_accuracy.empty() ? 0.0 : train_accuracy[m]; };
    std::stable_sort(by_acc.begin(), by_acc.end(), [&](std::size_t a, std::size_t b) { return acc(a) > acc(b); });

    std::vector<int> out(rows);
    for (std::size_t r = 0; r < rows; ++r) {
        std::map<int, int> votes;
        for (const auto& p : predictions) ++votes[p[r]];
        int top = 0;
        for (const auto& [label, n] : votes) top = std::max(top, n);
        auto tied = [&](int label) { return votes.count(label) && votes[label] == top; };

        std::optional<int> chosen;
        for (std::size_t g = 0; g < by_acc.size() && !chosen;) {
            std::size_t end = g;
            while (end < by_acc.size() && acc(by_acc[end]) == acc(by_acc[g])) ++end;
            for (std::size_t i = g; i < end; ++i) {
                const int label = predictions[by_acc[i]][r];
                if (tied(label) && (!chosen || label < *chosen)) chosen = label;
            }
            g = end;
        }
        out[r] = *chosen;
    }
    return out;
}

}  // namespace har
