#pragma once

#include <string>

#include "pintgfm/iterations.hpp"

namespace pintgfm {

/// Scalar coefficients of the error recurrence
///   e_{n+1}^{k+1} <= gamma e_{n+1}^k + beta e_n^{k+1} + alpha e_n^k,
/// alpha = |B00|, beta = |B01|, gamma = |B10| (induced max-norm), and
/// delta = max_n e_n^0, the worst initial-guess error.
struct BoundCoefficients {
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
  double delta = 0.0;
};

/// Interface analogues: moduli of the bottom-right entries of B00, B01, B10
/// and the worst initial interface error.  For M = 1 blocks these equal the
/// volume coefficients.
struct InterfaceCoefficients {
  double alpha_bar = 0.0;
  double beta_bar = 0.0;
  double gamma_bar = 0.0;
  double delta_bar = 0.0;
};

BoundCoefficients extract_coefficients(const PrimaryBlockIteration& it, const IterationRun& run);

InterfaceCoefficients extract_interface_coefficients(const PrimaryBlockIteration& it,
                                                     const IterationRun& run);

/// The bounding function theta_{n+1}^k of the generating-function analysis:
/// e_{n+1}^k <= theta(n, k) * delta for k >= 1.  Closed form chosen by which
/// of alpha, beta, gamma vanish (values below 1e-14 count as zero); all
/// binomials accumulate multiplicatively, overflow-safe up to n, k ~ 64.
double theta(int block_index, int iteration, const BoundCoefficients& c);

/// Classic Parareal bound e_{n+1}^k <= delta * (alpha^k / k!) *
/// max(1, beta)^{n-k} * prod_{l=1}^{k} (n+1-l).  Coincides with the
/// gamma = 0 theta at beta = 1 and is weaker for beta < 1.
double gander_hairer_theta(int block_index, int iteration, double alpha, double beta);

/// Solves the scalar error recurrence as an equality:
///   E(n, 0) = delta for n >= 1, E(0, k) = 0,
///   E(n+1, k+1) = gamma E(n+1, k) + beta E(n, k+1) + alpha E(n, k).
/// Returns the (N+1) x (K+1) table; entry (n+1, k) must equal
/// delta * theta(n, k) for every closed-form case.
RealMatrix recurrence_oracle(const BoundCoefficients& c, int num_blocks, int num_iterations);

enum class BoundMode { Volume, Interface, GanderHairer, Linear };

/// Per-(n, k) bound (or estimate) table for a run.  Row n = 0 is zero and
/// column k = 0 carries the initial-error level delta.  The interface mode
/// is an estimate, not a bound, whenever M > 1.
struct BoundTable {
  RealMatrix values;        // (N+1) x (K+1)
  bool is_estimate = false;
  std::string mode_label;   // "bound" or "estimate"
};

BoundTable bound_table(const PrimaryBlockIteration& it, const IterationRun& run, int num_blocks,
                       int num_iterations, BoundMode mode);

} // namespace pintgfm
