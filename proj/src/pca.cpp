#include "har/pca.hpp"

// Eigen would otherwise split products across OpenMP threads.
#define EIGEN_DONT_PARALLELIZE
#include <Eigen/Dense>

#include "har/error.hpp"

namespace har {

PcaSummary pca_summary(const Matrix& x, std::size_t n_components) {
    const auto n = static_cast<Eigen::Index>(x.rows());
    const auto d = static_cast<Eigen::Index>(x.cols());
    if (n_components == 0 || x.rows() < n_components || x.cols() < n_components || n < 2) {
        throw DataError("pca: need at least as many rows and columns as components");
    }
    Eigen::MatrixXd m(n, d);
    for (Eigen::Index r = 0; r < n; ++r) {
        for (Eigen::Index c = 0; c < d; ++c) m(r, c) = x(static_cast<std::size_t>(r), static_cast<std::size_t>(c));
    }
    const Eigen::RowVectorXd mean = m.colwise().mean();
    m.rowwise() -= mean;
    const Eigen::MatrixXd cov = (m.transpose() * m) / static_cast<double>(n - 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    if (eig.info() != Eigen::Success) throw DataError("pca: eigen-decomposition failed");

    // Eigen returns ascending eigenvalues.
    const Eigen::VectorXd values = eig.eigenvalues().reverse().cwiseMax(0.0);
    Eigen::MatrixXd vectors = eig.eigenvectors().rowwise().reverse();
    const double total = values.sum();

    PcaSummary out;
    out.mean.assign(mean.data(), mean.data() + d);
    const auto k = static_cast<Eigen::Index>(n_components);
    out.components = Matrix(n_components, x.cols());
    for (Eigen::Index c = 0; c < k; ++c) {
        Eigen::Index arg = 0;
        vectors.col(c).cwiseAbs().maxCoeff(&arg);
        if (vectors(arg, c) < 0.0) vectors.col(c) *= -1.0;
        for (Eigen::Index j = 0; j < d; ++j) out.components(static_cast<std::size_t>(c), static_cast<std::size_t>(j)) = vectors(j, c);
        out.explained_variance.push_back(values(c));
        out.explained_variance_ratio.push_back(total > 0.0 ? values(c) / total : 0.0);
    }
    const Eigen::MatrixXd proj = m * vectors.leftCols(k);
    out.projection = Matrix(x.rows(), n_components);
    for (Eigen::Index r = 0; r < n; ++r) {
        for (Eigen::Index c = 0; c < k; ++c) out.projection(static_cast<std::size_t>(r), static_cast<std::size_t>(c)) = proj(r, c);
    }
    return out;
}

}  // namespace har
