#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pintgfm/discretization.hpp"
#include "pintgfm/linalg.hpp"

namespace pintgfm {

/// Runge-Kutta method described by its rational stability function
/// R(z) = num(z) / den(z), coefficients in ascending degree, R(0) = 1.
struct RKMethod {
  enum class Tag { BackwardEuler, HeunRK2, ClassicRK4 };

  Tag tag = Tag::BackwardEuler;
  std::vector<double> num{1.0};
  std::vector<double> den{1.0};

  static RKMethod backward_euler();
  static RKMethod heun_rk2();
  static RKMethod classic_rk4();
  static RKMethod from_name(const std::string& name);
  std::string name() const;
};

/// Evaluates the stability function R(z); throws on a pole of R.
Complex stability_value(const RKMethod& method, Complex z);

/// The (phi, chi) pair of one block: time integration operator phi
/// (invertible, factored eagerly) and transmission operator chi, so that
/// blocks satisfy phi u_{n+1} = chi u_n.  The block propagator is
/// psi = phi^{-1} chi.
class BlockOperatorPair {
public:
  BlockOperatorPair(ComplexMatrix phi, ComplexMatrix chi, Complex lam_dt,
                    BlockDiscretization disc, const std::string& label = "block operator");

  const ComplexMatrix& phi() const { return phi_; }
  const ComplexMatrix& chi() const { return chi_; }
  Complex lam_dt() const { return lam_dt_; }
  const BlockDiscretization& disc() const { return disc_; }
  int size() const { return static_cast<int>(phi_.rows()); }

  ComplexMatrix solve_phi(const ComplexMatrix& rhs) const { return lu_.solve(rhs); }
  ComplexVector solve_phi(const ComplexVector& rhs) const { return lu_.solve(rhs); }

  /// psi = phi^{-1} chi.
  const ComplexMatrix& propagator() const { return psi_; }

private:
  ComplexMatrix phi_, chi_;
  Complex lam_dt_;
  BlockDiscretization disc_;
  GuardedLU lu_;
  ComplexMatrix psi_;
};

/// Collocation block operators on right-inclusive nodes:
/// phi = I - lam_dt * Q with the integrated-Lagrange matrix Q, and chi the
/// transfer matrix copying the last value of the previous block into every
/// node equation.
BlockOperatorPair collocation_pair(const BlockDiscretization& disc, Complex lam_dt);

/// Lower-triangular approximation of the quadrature matrix built from one
/// backward Euler step between nodes (tau_0 := 0):
/// entry (m, j) = lam_dt * (tau_j - tau_{j-1}) for j <= m.
ComplexMatrix qdelta_backward_euler(const BlockDiscretization& disc, Complex lam_dt);

enum class RKFormulation { Volume, Interface };

/// Runge-Kutta block operators with `steps` equidistant sub-steps.
/// Interface form: M = 1, phi = R(lam_dt/steps)^{-steps}, chi = 1.
/// Volume form: M = steps, phi bidiagonal with r = R(lam_dt/steps)^{-1} on
/// the diagonal and -1 below, chi with a single 1 at (1, M).
BlockOperatorPair rk_pair(const RKMethod& method, int steps, Complex lam_dt,
                          RKFormulation formulation);

/// Volume-form Runge-Kutta stepping across an arbitrary node set
/// (tau_0 := 0): one step of width tau_m - tau_{m-1} per node, a plain copy
/// where the width is zero (a block starting at tau = 0).  Reduces to the
/// bidiagonal rk_pair volume form on m/M nodes.
BlockOperatorPair rk_pair_on_nodes(const RKMethod& method, const BlockDiscretization& disc,
                                   Complex lam_dt);

/// What integrates a block: a collocation method on the block's nodes, or a
/// Runge-Kutta method stepping across them.
struct IntegratorSpec {
  enum class Kind { Collocation, RungeKutta };
  Kind kind = Kind::Collocation;
  RKMethod rk;                                        // RungeKutta only
  RKFormulation formulation = RKFormulation::Volume;  // RungeKutta only
  int steps = 1;  // RungeKutta interface form only; volume uses the node count
};

/// How the cheap approximation phi~ of a level's phi is built.
struct ApproxSpec {
  enum class Kind { None, QDeltaBackwardEuler, RungeKutta };
  Kind kind = Kind::QDeltaBackwardEuler;
  RKMethod rk;    // RungeKutta only
  int steps = 1;  // RungeKutta interface form only; volume uses the node count
};

/// Two-level structure: fine and coarse operator pairs, their approximate
/// integrators, and the polynomial transfer matrices.  Construction verifies
/// restrict * prolong = I (1e-12) and, for Lobatto/Radau-right families, that
/// the transmission operators commute with restriction.
struct TwoLevelSetup {
  BlockOperatorPair fine;
  ComplexMatrix fine_approx;    // phi~ (M x M)
  BlockOperatorPair coarse;
  ComplexMatrix coarse_approx;  // phi~_C (M_C x M_C)
  RealMatrix restrict_op;       // T_F^C (M_C x M)
  RealMatrix prolong_op;        // T_C^F (M x M_C)
};

TwoLevelSetup build_two_level(const BlockDiscretization& fine_disc,
                              const BlockDiscretization& coarse_disc, Complex lam_dt,
                              const IntegratorSpec& integrator, const ApproxSpec& approx);

/// Builds one level's operator pair from the spec.
BlockOperatorPair build_pair(const BlockDiscretization& disc, Complex lam_dt,
                             const IntegratorSpec& integrator);

/// Builds one level's approximate integrator phi~ on the given nodes;
/// std::nullopt for ApproxSpec::Kind::None.
std::optional<ComplexMatrix> build_approx(const BlockDiscretization& disc, Complex lam_dt,
                                          const ApproxSpec& approx);

} // namespace pintgfm
