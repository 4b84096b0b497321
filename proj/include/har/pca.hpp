#pragma once

#include <vector>

#include "har/matrix.hpp"

namespace har {

struct PcaSummary {
    std::vector<double> mean;                 // column means removed before projection
    Matrix components;                        // n_components x d, unit rows
    std::vector<double> explained_variance;   // eigenvalues, descending
    std::vector<double> explained_variance_ratio;
    Matrix projection;                        // rows x n_components
};

// Covariance eigen-decomposition of the column-centred matrix. Each
// component's largest-magnitude loading is made positive.
PcaSummary pca_summary(const Matrix& x, std::size_t n_components = 3);

}  // namespace har
