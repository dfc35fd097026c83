#include "pintgfm/bounds.hpp"

#include <cmath>
#include <vector>

namespace pintgfm {

namespace {

constexpr double kZeroTol = 1e-14;

void require_right_inclusive(const PrimaryBlockIteration& it, const std::string& where) {
  // Hand-built iterations without node information are let through.
  if (it.disc.nodes.size() == 0) return;
  if (std::abs(it.disc.nodes[it.disc.nodes.size() - 1] - 1.0) > 1e-14)
    throw ParameterError(where + ": unsupported for blocks whose last node is not tau = 1");
}

// sum_{i=0}^{limit} C(i+k-1, i) beta^i, terms by multiplicative recurrence.
double binomial_beta_sum(int limit, int iteration, double beta) {
  if (limit < 0) return 0.0;
  double term = 1.0;
  double acc = 1.0;
  for (int i = 1; i <= limit; ++i) {
    term *= beta * static_cast<double>(i + iteration - 1) / static_cast<double>(i);
    acc += term;
  }
  return acc;
}

// Only gamma = 0: theta = alpha^k sum_{i=0}^{n-k} C(i+k-1, i) beta^i
// (empty sum for n < k: the iteration is exact on the first k blocks).
double theta_no_same_block(int n, int k, double alpha, double beta) {
  if (n < k) return 0.0;
  return std::pow(alpha, k) * binomial_beta_sum(n - k, k, beta);
}

// Only beta = 0: theta = (gamma + alpha)^k for k <= n, else
// gamma^k sum_{i=0}^{n} C(k, i) (alpha/gamma)^i.
double theta_no_prev_curr(int n, int k, double alpha, double gamma) {
  if (k <= n) return std::pow(gamma + alpha, k);
  const double ratio = alpha / gamma;
  double term = 1.0;
  double acc = 1.0;
  for (int i = 1; i <= n && i <= k; ++i) {
    term *= ratio * static_cast<double>(k - i + 1) / static_cast<double>(i);
    acc += term;
  }
  return std::pow(gamma, k) * acc;
}

// Only alpha = 0: theta = gamma^k sum_{i=0}^{n} C(i+k-1, i) beta^i.
double theta_no_prev_prev(int n, int k, double beta, double gamma) {
  return std::pow(gamma, k) * binomial_beta_sum(n, k, beta);
}

// All nonzero: theta = gamma^k sum_{i=0}^{min(n,k)} sum_{l=0}^{n-i}
//   C(k, i) C(l+k-1, l) (alpha/gamma)^i beta^l.
double theta_full(int n, int k, double alpha, double beta, double gamma) {
  // partial[j] = sum_{l=0}^{j} C(l+k-1, l) beta^l
  std::vector<double> partial(static_cast<std::size_t>(n) + 1);
  double term = 1.0;
  partial[0] = 1.0;
  for (int l = 1; l <= n; ++l) {
    term *= beta * static_cast<double>(l + k - 1) / static_cast<double>(l);
    partial[static_cast<std::size_t>(l)] = partial[static_cast<std::size_t>(l - 1)] + term;
  }
  const double ratio = alpha / gamma;
  const int imax = std::min(n, k);
  double outer = 1.0;
  double acc = 0.0;
  for (int i = 0; i <= imax; ++i) {
    if (i > 0) outer *= ratio * static_cast<double>(k - i + 1) / static_cast<double>(i);
    acc += outer * partial[static_cast<std::size_t>(n - i)];
  }
  return std::pow(gamma, k) * acc;
}

} // namespace

BoundCoefficients extract_coefficients(const PrimaryBlockIteration& it, const IterationRun& run) {
  BoundCoefficients c;
  c.alpha = inf_norm(it.b_prev_block_prev_iter);
  c.beta = inf_norm(it.b_prev_block_curr_iter);
  c.gamma = inf_norm(it.b_same_block_prev_iter);
  c.delta = run.volume_errors.col(0).maxCoeff();
  return c;
}

InterfaceCoefficients extract_interface_coefficients(const PrimaryBlockIteration& it,
                                                     const IterationRun& run) {
  require_right_inclusive(it, "extract_interface_coefficients");
  const Eigen::Index last = it.psi.rows() - 1;
  InterfaceCoefficients c;
  c.alpha_bar = std::abs(it.b_prev_block_prev_iter(last, last));
  c.beta_bar = std::abs(it.b_prev_block_curr_iter(last, last));
  c.gamma_bar = std::abs(it.b_same_block_prev_iter(last, last));
  c.delta_bar = run.interface_errors.col(0).maxCoeff();
  return c;
}

double theta(int block_index, int iteration, const BoundCoefficients& c) {
  if (iteration < 1)
    throw ParameterError("theta: bounding functions are defined for k >= 1");
  if (block_index < 0) throw ParameterError("theta: block index must be >= 0");
  if (!(c.alpha >= 0.0 && c.beta >= 0.0 && c.gamma >= 0.0))
    throw ParameterError("theta: coefficients must be nonnegative");

  const bool alpha_zero = c.alpha < kZeroTol;
  const bool beta_zero = c.beta < kZeroTol;
  const bool gamma_zero = c.gamma < kZeroTol;

  if (gamma_zero) {
    if (alpha_zero) return 0.0;
    return theta_no_same_block(block_index, iteration, c.alpha, beta_zero ? 0.0 : c.beta);
  }
  if (beta_zero)
    return theta_no_prev_curr(block_index, iteration, alpha_zero ? 0.0 : c.alpha, c.gamma);
  if (alpha_zero) return theta_no_prev_prev(block_index, iteration, c.beta, c.gamma);
  return theta_full(block_index, iteration, c.alpha, c.beta, c.gamma);
}

double gander_hairer_theta(int block_index, int iteration, double alpha, double beta) {
  if (iteration < 1) throw ParameterError("gander_hairer_theta: defined for k >= 1");
  if (block_index < 0) throw ParameterError("gander_hairer_theta: block index must be >= 0");
  const int n = block_index;
  const int k = iteration;
  if (k > n) return 0.0;  // the falling product n(n-1)...(n+1-k) vanishes
  const double beta_bar = std::max(1.0, beta);
  // alpha^k / k! * prod_{l=1}^{k} (n+1-l) = alpha^k * C(n, k)
  double binom = 1.0;
  for (int l = 1; l <= k; ++l)
    binom *= static_cast<double>(n + 1 - l) / static_cast<double>(l);
  return std::pow(alpha, k) * binom * std::pow(beta_bar, n - k);
}

RealMatrix recurrence_oracle(const BoundCoefficients& c, int num_blocks, int num_iterations) {
  RealMatrix table = RealMatrix::Zero(num_blocks + 1, num_iterations + 1);
  for (int n = 1; n <= num_blocks; ++n) table(n, 0) = c.delta;
  for (int k = 0; k < num_iterations; ++k)
    for (int n = 0; n < num_blocks; ++n)
      table(n + 1, k + 1) =
          c.gamma * table(n + 1, k) + c.beta * table(n, k + 1) + c.alpha * table(n, k);
  return table;
}

BoundTable bound_table(const PrimaryBlockIteration& it, const IterationRun& run, int num_blocks,
                       int num_iterations, BoundMode mode) {
  BoundTable result;
  result.values = RealMatrix::Zero(num_blocks + 1, num_iterations + 1);
  result.mode_label = "bound";

  BoundCoefficients c = extract_coefficients(it, run);
  if (mode == BoundMode::Interface) {
    require_right_inclusive(it, "bound_table interface mode");
    const InterfaceCoefficients ic = extract_interface_coefficients(it, run);
    c = BoundCoefficients{ic.alpha_bar, ic.beta_bar, ic.gamma_bar, ic.delta_bar};
    result.is_estimate = it.size() > 1;
    result.mode_label = result.is_estimate ? "estimate" : "bound";
  }

  if (mode == BoundMode::Linear) {
    const double norm_r = inf_norm(global_iteration_matrix(it, num_blocks));
    for (int n = 1; n <= num_blocks; ++n) {
      result.values(n, 0) = c.delta;
      for (int k = 1; k <= num_iterations; ++k)
        result.values(n, k) = std::pow(norm_r, k) * c.delta;
    }
    return result;
  }

  for (int n = 1; n <= num_blocks; ++n) {
    result.values(n, 0) = c.delta;
    for (int k = 1; k <= num_iterations; ++k) {
      if (mode == BoundMode::GanderHairer)
        result.values(n, k) = c.delta * gander_hairer_theta(n - 1, k, c.alpha, c.beta);
      else
        result.values(n, k) = c.delta * theta(n - 1, k, c);
    }
  }
  return result;
}

} // namespace pintgfm
