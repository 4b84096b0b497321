#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "har/activity.hpp"
#include "har/features.hpp"
#include "har/metrics.hpp"
#include "har/model.hpp"
#include "har/preprocess.hpp"

namespace har {

struct ScenarioSpec {
    std::string name;
    std::string description;
    std::array<Activity, kActivityCount> merge_map = kAllActivities;

    // Merge targets must map to themselves.
    bool valid() const;
    int image(int label_code) const;
};

// "none" (all six activities), "bag_normal" (WithBag merged into Normal),
// "fast_bag_normal" (Fast and WithBag merged into Normal).
std::vector<ScenarioSpec> builtin_scenarios();
std::optional<ScenarioSpec> find_scenario(std::string_view name);

std::vector<int> apply_scenario(std::span<const int> labels, const ScenarioSpec& scenario);

struct FoldPlan {
    std::size_t k = 0;
    std::vector<std::pair<std::size_t, std::size_t>> ranges;  // [begin, end) per fold
};

// Fold i covers rows [floor(i*n/k), floor((i+1)*n/k)).
FoldPlan make_folds(std::size_t n_rows, std::size_t k = 5);

// Same split applied to users instead of rows; folds hold whole users.
FoldPlan make_user_folds(std::span<const RowMeta> rows, std::size_t k = 5);

// Sort by (user, day, activity, window start).
void canonicalize(FeatureMatrix& fm);
bool is_canonical(std::span<const RowMeta> rows);

// Fitted classifier as seen by the CV driver; lets tests substitute stubs.
class Classifier {
public:
    virtual ~Classifier() = default;
    virtual const std::vector<int>& classes() const = 0;
    virtual Matrix predict_proba(const Matrix& x) const = 0;
};

class ModelClassifier : public Classifier {
public:
    explicit ModelClassifier(TrainedModel model) : model_(std::move(model)) {}
    const std::vector<int>& classes() const override { return model_.classes(); }
    Matrix predict_proba(const Matrix& x) const override { return model_.predict_proba(x); }
    const TrainedModel& model() const { return model_; }

private:
    TrainedModel model_;
};

using ModelTrainer = std::function<std::unique_ptr<Classifier>(ModelKind, const Matrix&, std::span<const int>,
                                                               const ModelSpecs&)>;

// Records every row set handed to a fitting stage.
struct FitAudit {
    struct Entry {
        std::string stage;  // "scaler", "rank", or a model name
        std::size_t fold = 0;
        std::vector<std::size_t> rows;
    };
    std::mutex mutex;
    std::vector<Entry> entries;

    void record(std::string stage, std::size_t fold, std::span<const std::size_t> rows);
};

struct CvOptions {
    std::size_t k_folds = 5;
    // Feature-set sizes to evaluate; 0 means the full manifest.
    std::vector<std::size_t> feature_sizes = {195, 0};
    ScalerMode scaler = ScalerMode::Standardize;
    ForestSpec ranking;
    ModelSpecs specs;
    std::vector<ModelKind> models = {ModelKind::Gbt, ModelKind::Svm, ModelKind::Mlp};
    bool group_by_user = false;
    std::uint64_t seed = 42;
    ModelTrainer trainer;          // default: train_model
    FitAudit* audit = nullptr;
    std::function<void(std::size_t fold, std::size_t n_features, ModelKind, const Classifier&)> on_model;
};

struct ModelResult {
    std::string name;  // gbt, svm, mlp, soft, hard
    std::vector<int> predictions;  // pooled over folds, dataset order
    std::vector<double> fold_accuracy;
    double mean_fold_accuracy = 0.0;
    double pooled_accuracy = 0.0;
    ClassificationReport report;
    ConfusionMatrix confusion;
};

struct VariantResult {
    std::size_t n_features = 0;
    std::vector<ModelResult> models;

    const ModelResult* find(std::string_view name) const;
};

struct ScenarioResult {
    ScenarioSpec scenario;
    std::vector<int> y_true;   // merged labels, dataset order
    FoldPlan folds;
    ImportanceRanking ranking; // fold rankings averaged
    std::vector<VariantResult> variants;
};

// Fold accuracies, pooled metrics and confusion matrix for pooled predictions.
ModelResult summarize_predictions(std::string name, std::vector<int> predictions, std::span<const int> y_true,
                                  const FoldPlan& folds);

// Consecutive k-fold CV. Per fold: scaler and ranking are fitted on training
// rows only, the top-k features are selected, every model is trained and the
// fold predicted; soft and hard votes are added when more than one model runs.
ScenarioResult run_cv(const FeatureMatrix& data, const ScenarioSpec& scenario, const CvOptions& options);

}  // namespace har
