#pragma once

#include <span>
#include <vector>

#include "har/matrix.hpp"

namespace har {

struct ClassMetrics {
    int label = 0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::size_t support = 0;
};

struct ClassificationReport {
    std::vector<ClassMetrics> per_class;  // ascending label
    double accuracy = 0.0;
    double weighted_precision = 0.0;
    double weighted_recall = 0.0;
    double weighted_f1 = 0.0;
    std::size_t total = 0;
};

// One-vs-rest precision/recall/F1 per class; zero denominators give 0.
// Classes default to the union of labels in y_true and y_pred.
ClassificationReport classification_report(std::span<const int> y_true, std::span<const int> y_pred,
                                           std::span<const int> classes = {});

struct ConfusionMatrix {
    std::vector<int> classes;
    Matrix counts;                     // [true][pred]
    Matrix percent;                    // rows sum to 100, zero-support rows all zero
    std::vector<bool> zero_support;

    double accuracy() const;           // trace / total
};

ConfusionMatrix confusion_matrix(std::span<const int> y_true, std::span<const int> y_pred,
                                 std::span<const int> classes = {});

double accuracy(std::span<const int> y_true, std::span<const int> y_pred);

}  // namespace har
