#pragma once

#include <algorithm>
#include <complex>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "moi/system.hpp"

namespace moi {

inline constexpr double kDefaultStabilityTol = 1e-9;

/// Right eigenpair with unit 2-norm vector. `residual` is ||A v - lambda v||_2
/// for the matrix it was computed from.
struct EigenPair {
  std::complex<double> value;
  Eigen::VectorXcd vector;
  double residual = 0.0;
};

struct StabilityVerdict {
  double abscissa = 0.0;
  bool unstable = false;
  int unstable_count = 0;
};

/// Residual bound every EigenPair must meet: 1e-9 * max(1, ||A||_F).
inline double eigen_residual_bound(const Matrix& a) { return 1e-9 * std::max(1.0, a.norm()); }

namespace detail {

inline void check_square_finite(const Matrix& a, const char* what) {
  if (a.rows() != a.cols()) {
    throw DimensionMismatch(std::string(what) + ": matrix is not square");
  }
  if (!all_finite(a)) {
    throw NonFiniteOutput(std::string(what) + ": matrix has NaN/Inf entries");
  }
}

inline Eigen::VectorXcd eigenvalues_of(const Matrix& a) {
  check_square_finite(a, "eigenvalues");
  if (a.rows() == 0) return {};
  Eigen::EigenSolver<Matrix> solver(a, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success) {
    throw ConvergenceFailure("real Schur iteration did not converge");
  }
  return solver.eigenvalues();
}

}  // namespace detail

/// All n eigenvalues (with multiplicity) and unit right eigenvectors.
inline std::vector<EigenPair> eigendecompose(const Matrix& a) {
  detail::check_square_finite(a, "eigendecompose");
  std::vector<EigenPair> pairs;
  if (a.rows() == 0) return pairs;
  Eigen::EigenSolver<Matrix> solver(a, /*computeEigenvectors=*/true);
  if (solver.info() != Eigen::Success) {
    throw ConvergenceFailure("real Schur iteration did not converge");
  }
  const Eigen::MatrixXcd ac = a.cast<std::complex<double>>();
  const Eigen::VectorXcd values = solver.eigenvalues();
  const Eigen::MatrixXcd vectors = solver.eigenvectors();
  pairs.reserve(static_cast<std::size_t>(a.rows()));
  for (Index i = 0; i < a.rows(); ++i) {
    EigenPair pair;
    pair.value = values[i];
    pair.vector = vectors.col(i).normalized();
    pair.residual = (ac * pair.vector - pair.value * pair.vector).norm();
    pairs.push_back(std::move(pair));
  }
  return pairs;
}

inline double spectral_abscissa(const Matrix& a) {
  const Eigen::VectorXcd values = detail::eigenvalues_of(a);
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& v : values) best = std::max(best, v.real());
  return best;
}

inline StabilityVerdict stability_verdict(const Matrix& a,
                                          double stability_tol = kDefaultStabilityTol) {
  if (stability_tol < 0.0) throw InvalidConfig("stability_tol must be non-negative");
  const Eigen::VectorXcd values = detail::eigenvalues_of(a);
  StabilityVerdict verdict;
  verdict.abscissa = -std::numeric_limits<double>::infinity();
  for (const auto& v : values) {
    verdict.abscissa = std::max(verdict.abscissa, v.real());
    if (v.real() > stability_tol) ++verdict.unstable_count;
  }
  verdict.unstable = verdict.abscissa > stability_tol;
  return verdict;
}

/// Abscissa in (0, tol] counts as stable.
inline bool is_unstable(const Matrix& a, double stability_tol = kDefaultStabilityTol) {
  if (stability_tol < 0.0) throw InvalidConfig("stability_tol must be non-negative");
  return spectral_abscissa(a) > stability_tol;
}

/// Flips v so that its largest-magnitude component (first one on ties) is
/// positive.
inline void canonicalize_sign(Vector& v) {
  if (v.size() == 0) return;
  Index arg = 0;
  v.cwiseAbs().maxCoeff(&arg);
  if (v[arg] < 0.0) v = -v;
}

/// The unique unstable eigenpair of A, returned real with canonical sign.
/// Fails when there is no unstable eigenvalue, more than one, or when the
/// unstable eigenvalue is complex.
inline EigenPair unstable_eigenpair(const Matrix& a, double stability_tol = kDefaultStabilityTol) {
  std::vector<EigenPair> pairs = eigendecompose(a);
  std::vector<std::size_t> unstable;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (pairs[i].value.real() > stability_tol) unstable.push_back(i);
  }
  if (unstable.empty()) {
    throw NoUnstableEigenvalue("spectral abscissa does not exceed " +
                               std::to_string(stability_tol));
  }
  for (std::size_t i : unstable) {
    const auto lambda = pairs[i].value;
    if (std::abs(lambda.imag()) > 1e-9 * std::max(1.0, std::abs(lambda))) {
      throw ComplexUnstableEigenvalue("unstable eigenvalue " + std::to_string(lambda.real()) +
                                      (lambda.imag() < 0 ? " - " : " + ") +
                                      std::to_string(std::abs(lambda.imag())) + "i");
    }
  }
  if (unstable.size() > 1) {
    throw MultipleUnstableEigenvalues(std::to_string(unstable.size()) +
                                      " eigenvalues have real part above " +
                                      std::to_string(stability_tol));
  }

  const EigenPair& raw = pairs[unstable.front()];
  // Rotate the phase so the largest component is real before dropping the
  // imaginary part; the solver returns real vectors for real eigenvalues, but
  // the rotation keeps this independent of that detail.
  Index arg = 0;
  raw.vector.cwiseAbs().maxCoeff(&arg);
  const std::complex<double> phase = std::abs(raw.vector[arg]) > 0.0
                                         ? std::conj(raw.vector[arg]) / std::abs(raw.vector[arg])
                                         : std::complex<double>(1.0);
  Vector v = (raw.vector * phase).real();
  v.normalize();
  canonicalize_sign(v);

  EigenPair out;
  out.value = {raw.value.real(), 0.0};
  out.vector = v.cast<std::complex<double>>();
  out.residual = (a * v - raw.value.real() * v).norm();
  return out;
}

}  // namespace moi
