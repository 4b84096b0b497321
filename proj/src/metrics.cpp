#include "har/metrics.hpp"

#include <algorithm>

#include "har/error.hpp"

namespace har {

namespace {

std::vector<int> class_union(std::span<const int> a, std::span<const int> b, std::span<const int> given) {
    std::vector<int> out;
    if (!given.empty()) {
        out.assign(given.begin(), given.end());
    } else {
        out.assign(a.begin(), a.end());
        out.insert(out.end(), b.begin(), b.end());
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::size_t index_of(const std::vector<int>& classes, int label) {
    auto it = std::lower_bound(classes.begin(), classes.end(), label);
    if (it == classes.end() || *it != label) throw DataError("label not among the report classes");
    return static_cast<std::size_t>(it - classes.begin());
}

}  // namespace

double accuracy(std::span<const int> y_true, std::span<const int> y_pred) {
    if (y_true.size() != y_pred.size()) throw DataError("accuracy: length mismatch");
    if (y_true.empty()) return 0.0;
    std::size_t hit = 0;
    for (std::size_t i = 0; i < y_true.size(); ++i) hit += y_true[i] == y_pred[i];
    return static_cast<double>(hit) / static_cast<double>(y_true.size());
}

ConfusionMatrix confusion_matrix(std::span<const int> y_true, std::span<const int> y_pred,
                                 std::span<const int> classes) {
    if (y_true.size() != y_pred.size()) throw DataError("confusion_matrix: length mismatch");
    ConfusionMatrix cm;
    cm.classes = class_union(y_true, y_pred, classes);
    const std::size_t k = cm.classes.size();
    cm.counts = Matrix(k, k);
    cm.percent = Matrix(k, k);
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        cm.counts(index_of(cm.classes, y_true[i]), index_of(cm.classes, y_pred[i])) += 1.0;
    }
    cm.zero_support.assign(k, false);
    for (std::size_t r = 0; r < k; ++r) {
        double total = 0.0;
        for (std::size_t c = 0; c < k; ++c) total += cm.counts(r, c);
        if (total == 0.0) {
            cm.zero_support[r] = true;
            continue;
        }
        for (std::size_t c = 0; c < k; ++c) cm.percent(r, c) = 100.0 * cm.counts(r, c) / total;
    }
    return cm;
}

double ConfusionMatrix::accuracy() const {
    double trace = 0.0, total = 0.0;
    for (std::size_t r = 0; r < counts.rows(); ++r) {
        for (std::size_t c = 0; c < counts.cols(); ++c) {
            total += counts(r, c);
            if (r == c) trace += counts(r, c);
        }
    }
    return total > 0.0 ? trace / total : 0.0;
}

ClassificationReport classification_report(std::span<const int> y_true, std::span<const int> y_pred,
                                           std::span<const int> classes) {
    if (y_true.size() != y_pred.size()) throw DataError("classification_report: length mismatch");
    if (y_true.empty()) throw DataError("classification_report: empty input");
    auto cm = confusion_matrix(y_true, y_pred, classes);
    ClassificationReport rep;
    rep.total = y_true.size();
    rep.accuracy = cm.accuracy();
    const std::size_t k = cm.classes.size();
    for (std::size_t c = 0; c < k; ++c) {
        double tp = cm.counts(c, c), pred = 0.0, actual = 0.0;
        for (std::size_t o = 0; o < k; ++o) {
            pred += cm.counts(o, c);
            actual += cm.counts(c, o);
        }
        ClassMetrics m;
        m.label = cm.classes[c];
        m.precision = pred > 0.0 ? tp / pred : 0.0;
        m.recall = actual > 0.0 ? tp / actual : 0.0;
        m.f1 = m.precision + m.recall > 0.0 ? 2.0 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
        m.support = static_cast<std::size_t>(actual);
        rep.weighted_precision += m.precision * actual;
        rep.weighted_recall += m.recall * actual;
        rep.weighted_f1 += m.f1 * actual;
        rep.per_class.push_back(m);
    }
    const double n = static_cast<double>(rep.total);
    rep.weighted_precision /= n;
    rep.weighted_recall /= n;
    rep.weighted_f1 /= n;
    return rep;
}

}  // namespace har
