#include "har/eval.hpp"

#include <algorithm>
#include <exception>
#include <numeric>
#include <stdexcept>
#include <tuple>

#include "har/error.hpp"
#include "har/parallel.hpp"

namespace har {

bool ScenarioSpec::valid() const {
    for (Activity a : merge_map) {
        if (merge_map[static_cast<std::size_t>(code(a))] != a) return false;
    }
    return true;
}

int ScenarioSpec::image(int label_code) const {
    if (label_code < 0 || label_code >= kActivityCount) throw DataError("scenario: label code out of range");
    return code(merge_map[static_cast<std::size_t>(label_code)]);
}

std::vector<ScenarioSpec> builtin_scenarios() {
    ScenarioSpec bag{"bag_normal", "W/bag merged with Normal", kAllActivities};
    bag.merge_map[code(Activity::WithBag)] = Activity::Normal;
    ScenarioSpec walk{"fast_bag_normal", "Fast and W/bag merged with Normal", kAllActivities};
    walk.merge_map[code(Activity::WithBag)] = Activity::Normal;
    walk.merge_map[code(Activity::Fast)] = Activity::Normal;
    ScenarioSpec none{"none", "All activities, no merge", kAllActivities};
    return {bag, walk, none};
}

std::optional<ScenarioSpec> find_scenario(std::string_view name) {
    for (auto& s : builtin_scenarios()) {
        if (s.name == name) return s;
    }
    return std::nullopt;
}

std::vector<int> apply_scenario(std::span<const int> labels, const ScenarioSpec& scenario) {
    if (!scenario.valid()) throw UsageError("scenario '" + scenario.name + "' merge map is not idempotent");
    std::vector<int> out(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) out[i] = scenario.image(labels[i]);
    return out;
}

FoldPlan make_folds(std::size_t n, std::size_t k) {
    if (k < 1) throw UsageError("make_folds: k must be >= 1");
    if (n < k) throw DataError("make_folds: fewer rows than folds");
    FoldPlan plan;
    plan.k = k;
    for (std::size_t i = 0; i < k; ++i) plan.ranges.emplace_back(i * n / k, (i + 1) * n / k);
    return plan;
}

FoldPlan make_user_folds(std::span<const RowMeta> rows, std::size_t k) {
    std::vector<std::size_t> user_start;
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (r == 0 || rows[r].user_id != rows[r - 1].user_id) user_start.push_back(r);
    }
    const std::size_t users = user_start.size();
    if (users < k) throw DataError("make_user_folds: fewer users than folds");
    user_start.push_back(rows.size());
    FoldPlan plan;
    plan.k = k;
    for (std::size_t i = 0; i < k; ++i) plan.ranges.emplace_back(user_start[i * users / k], user_start[(i + 1) * users / k]);
    return plan;
}

namespace {

auto row_key(const RowMeta& m) { return std::tie(m.user_id, m.day, m.label, m.start_index); }

}  // namespace

bool is_canonical(std::span<const RowMeta> rows) {
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (row_key(rows[i]) < row_key(rows[i - 1])) return false;
    }
    return true;
}

void canonicalize(FeatureMatrix& fm) {
    std::vector<std::size_t> order(fm.rows.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return row_key(fm.rows[a]) < row_key(fm.rows[b]); });
    std::vector<RowMeta> rows;
    rows.reserve(order.size());
    for (std::size_t i : order) rows.push_back(fm.rows[i]);
    fm.values = fm.values.select_rows(order);
    fm.rows = std::move(rows);
}

void FitAudit::record(std::string stage, std::size_t fold, std::span<const std::size_t> rows) {
    std::lock_guard lock(mutex);
    entries.push_back({std::move(stage), fold, {rows.begin(), rows.end()}});
}

const ModelResult* VariantResult::find(std::string_view name) const {
    for (const auto& m : models) {
        if (m.name == name) return &m;
    }
    return nullptr;
}

namespace {

struct FoldData {
    std::vector<std::size_t> train_rows, test_rows;
    Matrix x_train, x_test;
    std::vector<int> y_train;
    ImportanceRanking ranking;
};

struct Job {
    std::size_t fold = 0, variant = 0;
    ModelKind kind = ModelKind::Gbt;
    std::unique_ptr<Classifier> model;
    Matrix test_proba;
    double train_accuracy = 0.0;
};

std::vector<int> argmax_labels(const Matrix& proba, const std::vector<int>& classes) {
    std::vector<int> out(proba.rows());
    for (std::size_t r = 0; r < proba.rows(); ++r) out[r] = classes[argmax(proba.row(r))];
    return out;
}

void guard_disjoint(std::span<const std::size_t> train, std::span<const std::size_t> test, std::size_t n) {
    std::vector<char> in_test(n, 0);
    for (std::size_t r : test) in_test[r] = 1;
    for (std::size_t r : train) {
        if (in_test[r]) throw std::logic_error("leakage guard violation: test row in training set");
    }
}

}  // namespace

ModelResult summarize_predictions(std::string name, std::vector<int> pred, std::span<const int> y_true,
                                  const FoldPlan& plan) {
    ModelResult res;
    res.name = std::move(name);
    res.predictions = std::move(pred);
    for (const auto& [b, e] : plan.ranges) {
        auto t = y_true.subspan(b, e - b);
        std::span<const int> p(res.predictions.data() + b, e - b);
        res.fold_accuracy.push_back(accuracy(t, p));
    }
    res.mean_fold_accuracy = std::accumulate(res.fold_accuracy.begin(), res.fold_accuracy.end(), 0.0) /
                             static_cast<double>(res.fold_accuracy.size());
    res.pooled_accuracy = accuracy(y_true, res.predictions);
    res.report = classification_report(y_true, res.predictions);
    res.confusion = confusion_matrix(y_true, res.predictions);
    return res;
}

ScenarioResult run_cv(const FeatureMatrix& data, const ScenarioSpec& scenario, const CvOptions& options) {
    if (!is_canonical(data.rows)) throw DataError("run_cv: dataset rows are not in canonical order");
    if (data.values.cols() != data.feature_ids.size()) throw DataError("run_cv: feature id count mismatch");
    if (options.models.empty()) throw UsageError("run_cv: no models selected");
    const std::size_t n = data.rows.size(), p = data.values.cols();

    ScenarioResult result;
    result.scenario = scenario;
    result.y_true = apply_scenario(data.label_codes(), scenario);
    if (LabelEncoding::fit(result.y_true).classes.size() < 2) throw DataError("run_cv: fewer than two classes");
    result.folds = options.group_by_user ? make_user_folds(data.rows, options.k_folds) : make_folds(n, options.k_folds);
    const std::size_t k = result.folds.k;

    // Fold preparation: every fit sees training rows only.
    std::vector<FoldData> folds(k);
    for (std::size_t f = 0; f < k; ++f) {
        auto& fd = folds[f];
        const auto [b, e] = result.folds.ranges[f];
        for (std::size_t r = 0; r < n; ++r) (r >= b && r < e ? fd.test_rows : fd.train_rows).push_back(r);
        guard_disjoint(fd.train_rows, fd.test_rows, n);
        for (std::size_t r : fd.train_rows) fd.y_train.push_back(result.y_true[r]);
        if (LabelEncoding::fit(fd.y_train).classes.size() < 2) {
            throw DataError("run_cv: fold " + std::to_string(f) + " training set has a single class");
        }

        const Matrix raw_train = data.values.select_rows(fd.train_rows);
        if (options.audit) options.audit->record("scaler", f, fd.train_rows);
        const ScalerParams scaler = fit_scaler(raw_train, options.scaler);
        fd.x_train = apply_scaler(raw_train, scaler);
        fd.x_test = apply_scaler(data.values.select_rows(fd.test_rows), scaler);

        if (options.audit) options.audit->record("rank", f, fd.train_rows);
        ForestSpec rank_spec = options.ranking;
        rank_spec.seed = derive_seed(options.seed, 0x72616e6bu, f);
        fd.ranking = rank_features(fd.x_train, fd.y_train, data.feature_ids, rank_spec);
    }

    std::vector<std::size_t> sizes;
    for (std::size_t s : options.feature_sizes) sizes.push_back(s == 0 ? p : std::min(s, p));

    // Longest-running kinds first for better load balance.
    std::vector<ModelKind> kinds_by_cost;
    for (ModelKind kind : {ModelKind::Mlp, ModelKind::Svm, ModelKind::Gbt}) {
        if (std::find(options.models.begin(), options.models.end(), kind) != options.models.end()) kinds_by_cost.push_back(kind);
    }
    std::vector<Job> jobs;
    for (ModelKind kind : kinds_by_cost) {
        for (std::size_t f = 0; f < k; ++f) {
            for (std::size_t v = 0; v < sizes.size(); ++v) {
                Job job;
                job.fold = f;
                job.variant = v;
                job.kind = kind;
                jobs.push_back(std::move(job));
            }
        }
    }

    ModelTrainer trainer = options.trainer ? options.trainer
                                           : ModelTrainer([](ModelKind kind, const Matrix& x, std::span<const int> y,
                                                             const ModelSpecs& specs) -> std::unique_ptr<Classifier> {
                                                 return std::make_unique<ModelClassifier>(train_model(kind, x, y, specs));
                                             });

    auto run_job = [&](Job& job) {
        const FoldData& fd = folds[job.fold];
        const std::size_t size = sizes[job.variant];
        Matrix x_train, x_test;
        if (size < p) {
            const auto mask = select_top_k(fd.ranking, size);
            x_train = fd.x_train.select_cols(mask.indices);
            x_test = fd.x_test.select_cols(mask.indices);
        } else {
            x_train = fd.x_train;
            x_test = fd.x_test;
        }
        ModelSpecs specs = options.specs;
        specs.gbt.seed = derive_seed(options.seed, 0x676274u, job.fold);
        specs.mlp.seed = derive_seed(options.seed, 0x6d6c70u, job.fold);
        if (options.audit) options.audit->record(std::string(model_kind_name(job.kind)), job.fold, fd.train_rows);
        job.model = trainer(job.kind, x_train, fd.y_train, specs);
        job.test_proba = job.model->predict_proba(x_test);
        job.train_accuracy = accuracy(fd.y_train, argmax_labels(job.model->predict_proba(x_train), job.model->classes()));
    };

    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t j = 0; j < static_cast<std::ptrdiff_t>(jobs.size()); ++j) {
        try {
            run_job(jobs[static_cast<std::size_t>(j)]);
        } catch (...) {
#pragma omp critical(har_cv_failure)
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);

    auto find_job = [&](std::size_t f, std::size_t v, ModelKind kind) -> Job& {
        for (auto& j : jobs) {
            if (j.fold == f && j.variant == v && j.kind == kind) return j;
        }
        throw std::logic_error("run_cv: missing job");
    };

    for (std::size_t v = 0; v < sizes.size(); ++v) {
        VariantResult variant;
        variant.n_features = sizes[v];
        std::vector<std::vector<int>> pooled(options.models.size(), std::vector<int>(n));
        std::vector<int> soft(n), hard(n);
        for (std::size_t f = 0; f < k; ++f) {
            const auto& test_rows = folds[f].test_rows;
            std::vector<Matrix> probas;
            std::vector<std::vector<int>> orders, preds;
            std::vector<double> train_acc;
            for (std::size_t m = 0; m < options.models.size(); ++m) {
                Job& job = find_job(f, v, options.models[m]);
                if (options.on_model) options.on_model(f, sizes[v], job.kind, *job.model);
                auto pred = argmax_labels(job.test_proba, job.model->classes());
                for (std::size_t i = 0; i < test_rows.size(); ++i) pooled[m][test_rows[i]] = pred[i];
                probas.push_back(job.test_proba);
                orders.push_back(job.model->classes());
                preds.push_back(std::move(pred));
                train_acc.push_back(job.train_accuracy);
            }
            if (options.models.size() > 1) {
                auto s = soft_vote(probas, orders);
                auto h = hard_vote(preds, train_acc);
                for (std::size_t i = 0; i < test_rows.size(); ++i) {
                    soft[test_rows[i]] = s[i];
                    hard[test_rows[i]] = h[i];
                }
            }
        }
        for (std::size_t m = 0; m < options.models.size(); ++m) {
            variant.models.push_back(
                summarize_predictions(std::string(model_kind_name(options.models[m])), std::move(pooled[m]), result.y_true, result.folds));
        }
        if (options.models.size() > 1) {
            variant.models.push_back(summarize_predictions("soft", std::move(soft), result.y_true, result.folds));
            variant.models.push_back(summarize_predictions("hard", std::move(hard), result.y_true, result.folds));
        }
        result.variants.push_back(std::move(variant));
    }

    result.ranking.ids = data.feature_ids;
    result.ranking.seed = options.seed;
    result.ranking.importance.assign(p, 0.0);
    for (const auto& fd : folds) {
        for (std::size_t i = 0; i < p; ++i) result.ranking.importance[i] += fd.ranking.importance[i] / static_cast<double>(k);
    }
    result.ranking.order = rank_order(result.ranking.importance);
    return result;
}

}  // namespace har
