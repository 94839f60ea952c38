#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>

namespace fgge {

using cplx = std::complex<double>;
using RMat = Eigen::MatrixXd;
using CMat = Eigen::MatrixXcd;
using RVec = Eigen::VectorXd;
using CVec = Eigen::VectorXcd;

namespace numerics {

struct HermitianEigen {
  RVec values;   // ascending
  CMat vectors;  // columns, orthonormal
};

struct SymmetricEigen {
  RVec values;
  RMat vectors;
};

template <class M>
double max_abs(const Eigen::MatrixBase<M>& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

template <class M>
double hermiticity_error(const Eigen::MatrixBase<M>& h) {
  return max_abs(h - h.adjoint());
}

inline HermitianEigen hermitian_eigendecomposition(const CMat& h, double tol = 1e-10) {
  if (h.rows() != h.cols()) throw std::invalid_argument("hermitian_eigendecomposition: matrix not square");
  const double scale = std::max(max_abs(h), 1e-300);
  if (hermiticity_error(h) > tol * scale)
    throw std::invalid_argument("hermitian_eigendecomposition: matrix is not Hermitian");
  Eigen::SelfAdjointEigenSolver<CMat> solver(h);
  if (solver.info() != Eigen::Success) throw std::runtime_error("hermitian_eigendecomposition: solver failed");
  return {solver.eigenvalues(), solver.eigenvectors()};
}

inline SymmetricEigen symmetric_eigendecomposition(const RMat& h, double tol = 1e-10) {
  if (h.rows() != h.cols()) throw std::invalid_argument("symmetric_eigendecomposition: matrix not square");
  const double scale = std::max(max_abs(h), 1e-300);
  if (hermiticity_error(h) > tol * scale)
    throw std::invalid_argument("symmetric_eigendecomposition: matrix is not symmetric");
  Eigen::SelfAdjointEigenSolver<RMat> solver(h);
  if (solver.info() != Eigen::Success) throw std::runtime_error("symmetric_eigendecomposition: solver failed");
  return {solver.eigenvalues(), solver.eigenvectors()};
}

// A * X with real A and complex X, done as two real products.
inline CMat real_times_complex(const RMat& a, const CMat& x) {
  const RMat re = a * x.real();
  const RMat im = a * x.imag();
  CMat out(re.rows(), re.cols());
  out.real() = re;
  out.imag() = im;
  return out;
}

inline CVec real_times_complex(const RMat& a, const CVec& x) {
  const RVec re = a * x.real();
  const RVec im = a * x.imag();
  CVec out(re.size());
  out.real() = re;
  out.imag() = im;
  return out;
}

inline double unitarity_error(const CMat& u) {
  return max_abs(u.adjoint() * u - CMat::Identity(u.cols(), u.cols()));
}

// exp(-i H t) for Hermitian H.
inline CMat expm_hermitian(const CMat& h, double t) {
  const auto eig = hermitian_eigendecomposition(h, 1e-9);
  CVec phases(eig.values.size());
  for (Eigen::Index k = 0; k < phases.size(); ++k) phases[k] = std::exp(cplx(0.0, -eig.values[k] * t));
  return eig.vectors * phases.asDiagonal() * eig.vectors.adjoint();
}

}  // namespace numerics
}  // namespace fgge
