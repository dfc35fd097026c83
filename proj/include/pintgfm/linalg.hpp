#pragma once

#include <complex>
#include <string>

#include <Eigen/Dense>

#include "pintgfm/errors.hpp"

namespace pintgfm {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

/// Induced L-infinity matrix norm: maximum row sum of entry moduli.
inline double inf_norm(const ComplexMatrix& m) {
  if (m.size() == 0) return 0.0;
  return m.cwiseAbs().rowwise().sum().maxCoeff();
}

/// L-infinity vector norm: maximum entry modulus.
inline double inf_norm(const ComplexVector& v) {
  if (v.size() == 0) return 0.0;
  return v.cwiseAbs().maxCoeff();
}

inline void ensure_finite(const ComplexMatrix& m, const std::string& what) {
  if (!m.allFinite()) throw NumericalError(what + ": non-finite entries");
}

/// LU factorization with partial pivoting plus a pivot guard: construction
/// fails loudly if any pivot falls below 1e-13 * |A|_inf instead of
/// returning garbage from a (nearly) singular solve.
class GuardedLU {
public:
  GuardedLU() = default;

  GuardedLU(const ComplexMatrix& a, const std::string& label) : lu_(a) {
    const double scale = inf_norm(a);
    const double floor = 1e-13 * (scale > 0.0 ? scale : 1.0);
    const auto pivots = lu_.matrixLU().diagonal();
    for (Eigen::Index i = 0; i < pivots.size(); ++i) {
      if (std::abs(pivots[i]) < floor)
        throw NumericalError(label + ": singular or ill-conditioned operator (pivot " +
                             std::to_string(std::abs(pivots[i])) + " below " +
                             std::to_string(floor) + ")");
    }
  }

  ComplexMatrix solve(const ComplexMatrix& rhs) const { return lu_.solve(rhs); }
  ComplexVector solve(const ComplexVector& rhs) const { return lu_.solve(rhs); }

private:
  Eigen::PartialPivLU<ComplexMatrix> lu_;
};

/// One-shot guarded solve A^{-1} * rhs.
inline ComplexMatrix solve_lu(const ComplexMatrix& a, const ComplexMatrix& rhs,
                              const std::string& label) {
  return GuardedLU(a, label).solve(rhs);
}

} // namespace pintgfm
