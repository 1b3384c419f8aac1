#pragma once

#include <Eigen/Dense>

namespace lle {

struct EigenDecomposition {
  Eigen::VectorXcd values;
  Eigen::MatrixXcd vectors;  // right eigenvectors as columns, unit 2-norm; empty when not requested
};

// General complex eigenproblem through LAPACK zgeev.
EigenDecomposition eigen_decompose(const Eigen::MatrixXcd& a, bool compute_vectors);

}  // namespace lle
