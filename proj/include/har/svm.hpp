#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "har/matrix.hpp"
#include "har/parallel.hpp"

namespace har {

// Platt: per-pair sigmoid + pairwise coupling. Votes: normalized one-vs-one vote counts.
enum class SvmProbability { Platt, Votes };

struct SvmSpec {
    double c = 1.6;
    double gamma = 0.0;       // 0 = 1 / (p * Var(X_train))
    double tolerance = 1e-3;  // KKT violation bound for SMO termination
    double cache_mb = 128.0;  // kernel column cache per binary problem
    SvmProbability probability = SvmProbability::Platt;
};

// Dual solution of one binary C-SVC problem, y in {+1, -1}.
struct BinarySvmSolution {
    std::vector<double> alpha;
    double rho = 0.0;  // decision f(x) = sum_i alpha_i y_i K(x_i, x) - rho
    long iterations = 0;
    std::vector<double> train_decision;  // f(x_i) on the training rows
};

// SMO with second-order working-set selection.
BinarySvmSolution solve_binary_svm(const Matrix& x, std::span<const int> y_pm, double c, double gamma,
                                   double tolerance = 1e-3, double cache_mb = 128.0);

double rbf_kernel(std::span<const double> a, std::span<const double> b, double gamma);

// Platt sigmoid P(y=+1 | f) = 1 / (1 + exp(A f + B)).
struct PlattSigmoid {
    double a = 0.0;
    double b = 0.0;
    double operator()(double decision) const;
    static PlattSigmoid fit(std::span<const double> decision, std::span<const int> y_pm);
};

// Pairwise coupling of r[i][j] = P(i | i or j) into class probabilities.
std::vector<double> couple_pairwise(const std::vector<std::vector<double>>& r);

struct SvmModel {
    struct Pair {
        std::size_t pos = 0, neg = 0;          // dense class indices
        std::vector<std::size_t> sv;           // indices into support_vectors
        std::vector<double> coef;              // alpha_i * y_i
        double rho = 0.0;
        PlattSigmoid platt;
        // Dual feasibility at convergence, kept for auditing.
        double alpha_min = 0.0, alpha_max = 0.0, alpha_y_sum = 0.0;
    };

    std::vector<int> classes;
    double gamma = 0.0;
    double c = 0.0;
    SvmProbability probability = SvmProbability::Platt;
    Matrix support_vectors;
    std::vector<Pair> pairs;  // (0,1), (0,2), ..., (k-2,k-1)

    // Decision value per pair.
    std::vector<double> decision_values(std::span<const double> row) const;
    std::vector<double> predict_proba(std::span<const double> row) const;
};

// One-vs-one RBF C-SVC; probabilities from Platt scaling on training decision
// values combined by pairwise coupling.
SvmModel train_svm(const Matrix& x, std::span<const int> labels, const SvmSpec& spec,
                   Execution exec = Execution::Parallel);

double scale_gamma(const Matrix& x);

}  // namespace har
