#include "lle/dense_eigen.hpp"

#include <complex>
#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

#include "lle/error.hpp"

namespace lle {

EigenDecomposition eigen_decompose(const Eigen::MatrixXcd& a, bool compute_vectors) {
  require(a.rows() == a.cols(), "eigen_decompose: matrix must be square");
  const auto n = static_cast<lapack_int>(a.rows());
  Eigen::MatrixXcd work = a;
  EigenDecomposition out;
  out.values.resize(n);
  if (compute_vectors) out.vectors.resize(n, n);
  std::complex<double> dummy;
  const lapack_int info = LAPACKE_zgeev(
      LAPACK_COL_MAJOR, 'N', compute_vectors ? 'V' : 'N', n, work.data(), n, out.values.data(),
      &dummy, 1, compute_vectors ? out.vectors.data() : &dummy, compute_vectors ? n : 1);
  if (info != 0)
    fail(ErrorCode::EigenSolverFailure, "zgeev failed with info = " + std::to_string(info));
  return out;
}

}  // namespace lle
