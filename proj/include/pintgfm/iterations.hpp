#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pintgfm/operators.hpp"

namespace pintgfm {

/// One primary block iteration
///   u_{n+1}^{k+1} = B10 u_{n+1}^k + B01 u_n^{k+1} + B00 u_n^k
/// together with the block propagator psi of the underlying fine problem.
/// A consistent iteration satisfies (B10 - I) psi + B01 + B00 = 0, which
/// fixes the sequential solution as its fixed point.
struct PrimaryBlockIteration {
  ComplexMatrix b_same_block_prev_iter;  // B10, multiplies u_{n+1}^k
  ComplexMatrix b_prev_block_curr_iter;  // B01, multiplies u_n^{k+1}
  ComplexMatrix b_prev_block_prev_iter;  // B00, multiplies u_n^k
  ComplexMatrix psi;
  std::string label;
  BlockDiscretization disc;  // nodes of the underlying fine problem

  int size() const { return static_cast<int>(psi.rows()); }
};

/// Residual |(B10 - I) psi + B01 + B00|_inf of the fixed-point condition.
double check_consistency(const PrimaryBlockIteration& it);

/// Which coarse propagator G a Parareal iteration uses.
enum class PararealCoarse {
  ApproxOperator,    // G = phi~^{-1} chi
  CoarseLevel,       // G = T_C^F phi_C^{-1} T_F^C chi
  CoarseLevelApprox  // G = T_C^F phi~_C^{-1} T_F^C chi
};

struct MethodSpec {
  enum class Name {
    DampedBlockJacobi,
    ApproxBlockJacobi,
    ApproxBlockGaussSeidel,
    Parareal,
    TwoLevelMultigrid,       // damped Jacobi smoother + exact coarse solve
    TwoLevelMultigridF,      // approximate smoother + exact coarse solve
    Pfasst                   // approximate smoother + approximate coarse solve
  };

  Name name = Name::Parareal;
  double omega = 1.0;  // DampedBlockJacobi and TwoLevelMultigrid
  PararealCoarse coarse = PararealCoarse::ApproxOperator;
  std::string label;   // CSV label; defaults to the canonical method name

  static MethodSpec parse(const std::string& name, double omega = 1.0,
                          const std::string& variant = "classic");
  std::string canonical_name() const;
  std::string display_label() const { return label.empty() ? canonical_name() : label; }
  bool needs_coarse_level() const;
};

/// Builds the block iteration of a method from a two-level structure.
/// Single-level methods use only the fine pair and fine_approx.
PrimaryBlockIteration build_iteration(const MethodSpec& method, const TwoLevelSetup& setup);

/// Single-level overload: damped Block Jacobi, approximate Block
/// Jacobi/Gauss-Seidel, and classic Parareal.
PrimaryBlockIteration build_iteration(const MethodSpec& method, const BlockOperatorPair& fine,
                                      const std::optional<ComplexMatrix>& phi_approx = {});

/// How the k = 0 iterate is filled on blocks n >= 1.
struct InitialGuess {
  enum class Kind { Random, Zero, CoarsePredicted };
  Kind kind = Kind::Random;
  std::uint64_t seed = 0;
};

/// All iterates of one run plus the sequential fixed point and the
/// per-(n, k) error tables in the max-modulus norm.
struct IterationRun {
  std::vector<std::vector<ComplexVector>> iterates;  // [k][n], k = 0..K, n = 0..N
  std::vector<ComplexVector> fixed_point;            // u_n, n = 0..N
  RealMatrix volume_errors;                          // (N+1) x (K+1)
  RealMatrix interface_errors;                       // (N+1) x (K+1)

  int num_blocks() const { return static_cast<int>(fixed_point.size()) - 1; }
  int num_iterations() const { return static_cast<int>(iterates.size()) - 1; }
};

IterationRun run_iteration(const PrimaryBlockIteration& it, Complex u0, int num_blocks,
                           int num_iterations, const InitialGuess& init);

/// Two-block-memory iteration u_{n+1}^{k+1} = (F - G) F u_{n-1}^k + G u_n^{k+1}
/// (Parareal with overlap).  The first block is updated as u_1^{k+1} = F u_0,
/// which is exact.  Not a primary block iteration; run-only, no bounds.
IterationRun run_overlap_parareal(const ComplexMatrix& fine_prop, const ComplexMatrix& coarse_prop,
                                  Complex u0, int num_blocks, int num_iterations,
                                  const InitialGuess& init);

/// Error propagation matrix R = (I - L)^{-1} U of the global iteration over
/// N blocks, with L carrying B01 below the diagonal and U carrying B10 on
/// the diagonal and B00 below.
ComplexMatrix global_iteration_matrix(const PrimaryBlockIteration& it, int num_blocks);

struct MatrixDiagnostics {
  double inf_norm = 0.0;
  double spectral_radius_estimate = 0.0;
};

/// Max row sum of moduli plus a power-iteration estimate of the spectral
/// radius (seeded start vector; returns 0 when the iterate collapses, as it
/// does for nilpotent matrices).
MatrixDiagnostics matrix_diagnostics(const ComplexMatrix& m);

} // namespace pintgfm
