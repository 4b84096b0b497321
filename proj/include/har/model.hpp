#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "har/gbt.hpp"
#include "har/matrix.hpp"
#include "har/mlp.hpp"
#include "har/svm.hpp"

namespace har {

enum class ModelKind { Gbt, Svm, Mlp };

std::string_view model_kind_name(ModelKind k);
std::optional<ModelKind> parse_model_kind(std::string_view s);

struct ModelSpecs {
    GbtSpec gbt;
    SvmSpec svm;
    MlpSpec mlp;
};

// A fitted classifier. Probability columns follow classes() (ascending activity codes).
class TrainedModel {
public:
    using Impl = std::variant<GbtModel, SvmModel, MlpModel>;

    explicit TrainedModel(Impl impl) : impl_(std::move(impl)) {}

    ModelKind kind() const;
    const std::vector<int>& classes() const;
    std::size_t n_features() const;
    const Impl& impl() const { return impl_; }

    // rows x classes; empty input gives an empty matrix. Throws DataError on width mismatch.
    Matrix predict_proba(const Matrix& x) const;
    // Argmax of predict_proba, lowest class code on ties.
    std::vector<int> predict(const Matrix& x) const;

    // Versioned JSON document.
    void save(const std::filesystem::path& path) const;
    static TrainedModel load(const std::filesystem::path& path);
    std::string to_json() const;
    static TrainedModel from_json(std::string_view text);

private:
    Impl impl_;
};

TrainedModel train_model(ModelKind kind, const Matrix& x, std::span<const int> labels, const ModelSpecs& specs);

// Argmax with the lowest index winning ties.
std::size_t argmax(std::span<const double> v);

// Unweighted mean of each model's probability rows, then argmax (lowest class
// code on ties). All models must share one class order; throws DataError otherwise.
std::vector<int> soft_vote(std::span<const Matrix> probabilities, std::span<const std::vector<int>> class_orders);

// Majority label per row. Ties go to the label of the tied-vote candidate
// backed by the model with the highest training accuracy, then the lowest code.
std::vector<int> hard_vote(std::span<const std::vector<int>> predictions, std::span<const double> train_accuracy);

}  // namespace har
