#include "har/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <ostream>

#include "har/error.hpp"
#include "har/numfmt.hpp"

namespace har {

std::string_view scaler_mode_name(ScalerMode m) { return m == ScalerMode::Standardize ? "standardize" : "unit_norm"; }

std::optional<ScalerMode> parse_scaler_mode(std::string_view s) {
    if (s == "standardize" || s == "standardise") return ScalerMode::Standardize;
    if (s == "unit_norm" || s == "normalize" || s == "normalise") return ScalerMode::UnitNorm;
    return std::nullopt;
}

ScalerParams fit_scaler(const Matrix& train, ScalerMode mode) {
    if (train.rows() < 2) throw DataError("fit_scaler needs at least two training rows");
    ScalerParams p;
    p.mode = mode;
    p.width = train.cols();
    if (mode == ScalerMode::UnitNorm) return p;

    const std::size_t n = train.rows(), d = train.cols();
    p.mean.assign(d, 0.0);
    p.std.assign(d, 0.0);
    for (std::size_t r = 0; r < n; ++r) {
        auto row = train.row(r);
        for (std::size_t c = 0; c < d; ++c) p.mean[c] += row[c];
    }
    for (double& m : p.mean) m /= static_cast<double>(n);
    for (std::size_t r = 0; r < n; ++r) {
        auto row = train.row(r);
        for (std::size_t c = 0; c < d; ++c) {
            const double dv = row[c] - p.mean[c];
            p.std[c] += dv * dv;
        }
    }
    for (std::size_t c = 0; c < d; ++c) {
        // Exactly constant columns must report std 0 despite rounding in the mean.
        const double first = train(0, c);
        bool constant = true;
        for (std::size_t r = 1; r < n && constant; ++r) constant = train(r, c) == first;
        p.std[c] = constant ? 0.0 : std::sqrt(p.std[c] / static_cast<double>(n));
        if (constant) p.mean[c] = first;
    }
    return p;
}

Matrix apply_scaler(const Matrix& x, const ScalerParams& params) {
    if (x.cols() != params.width) throw DataError("apply_scaler: column count does not match fitted scaler");
    Matrix out = x;
    for (std::size_t r = 0; r < out.rows(); ++r) {
        auto row = out.row(r);
        if (params.mode == ScalerMode::Standardize) {
            for (std::size_t c = 0; c < row.size(); ++c) {
                row[c] = params.std[c] > 0.0 ? (row[c] - params.mean[c]) / params.std[c] : 0.0;
            }
        } else {
            double norm = 0.0;
            for (double v : row) norm += v * v;
            norm = std::sqrt(norm);
            if (norm > 0.0) {
                for (double& v : row) v /= norm;
            }
        }
    }
    return out;
}

std::vector<std::string> ImportanceRanking::ranked_ids() const {
    std::vector<std::string> out;
    out.reserve(order.size());
    for (std::size_t i : order) out.push_back(ids[i]);
    return out;
}

std::vector<std::size_t> rank_order(std::span<const double> importance) {
    std::vector<std::size_t> order(importance.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return importance[a] > importance[b]; });
    return order;
}

LabelEncoding LabelEncoding::fit(std::span<const int> labels) {
    LabelEncoding enc;
    enc.classes.assign(labels.begin(), labels.end());
    std::sort(enc.classes.begin(), enc.classes.end());
    enc.classes.erase(std::unique(enc.classes.begin(), enc.classes.end()), enc.classes.end());
    enc.encoded.reserve(labels.size());
    for (int l : labels) {
        enc.encoded.push_back(static_cast<int>(std::lower_bound(enc.classes.begin(), enc.classes.end(), l) -
                                               enc.classes.begin()));
    }
    return enc;
}

ImportanceRanking rank_features(const Matrix& train, std::span<const int> labels,
                                std::span<const std::string> ids, const ForestSpec& spec, Execution exec) {
    if (ids.size() != train.cols()) throw DataError("rank_features: id count does not match matrix width");
    auto enc = LabelEncoding::fit(labels);
    if (enc.classes.size() < 2) throw DataError("rank_features needs at least two classes");
    auto forest = RandomForest::fit(train, enc.encoded, static_cast<int>(enc.classes.size()), spec, exec);

    ImportanceRanking r;
    r.ids.assign(ids.begin(), ids.end());
    r.importance = forest.importances();
    r.order = rank_order(r.importance);
    r.seed = spec.seed;
    return r;
}

SelectionMask select_top_k(const ImportanceRanking& ranking, std::size_t k) {
    if (k < 1) throw UsageError("select_top_k: k must be >= 1");
    SelectionMask mask;
    mask.k = std::min(k, ranking.order.size());
    mask.indices.assign(ranking.order.begin(), ranking.order.begin() + static_cast<std::ptrdiff_t>(mask.k));
    for (std::size_t i : mask.indices) mask.ids.push_back(ranking.ids[i]);
    return mask;
}

void write_ranking_csv(const ImportanceRanking& ranking, std::ostream& out, std::size_t limit) {
    std::string buf = "rank,feature_id,importance\n";
    const std::size_t n = limit ? std::min(limit, ranking.order.size()) : ranking.order.size();
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t f = ranking.order[i];
        buf += std::to_string(i + 1);
        buf += ',';
        buf += ranking.ids[f];
        buf += ',';
        append_double(buf, ranking.importance[f]);
        buf += '\n';
    }
    out << buf;
}

void write_ranking_csv(const ImportanceRanking& ranking, const std::filesystem::path& path, std::size_t limit) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    write_ranking_csv(ranking, out, limit);
}

}  // namespace har
