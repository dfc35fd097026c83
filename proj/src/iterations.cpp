#include "pintgfm/iterations.hpp"

#include <cmath>
#include <random>

namespace pintgfm {

namespace {

constexpr double kConsistencyTol = 1e-12;

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

ComplexVector random_block(std::mt19937_64& rng, int m) {
  ComplexVector v(m);
  for (int i = 0; i < m; ++i) {
    const double re = uniform01(rng);
    const double im = uniform01(rng);
    v[i] = Complex(re, im);
  }
  return v;
}

PrimaryBlockIteration finalize(ComplexMatrix b10, ComplexMatrix b01, ComplexMatrix b00,
                               ComplexMatrix psi, std::string label, BlockDiscretization disc) {
  PrimaryBlockIteration it{std::move(b10), std::move(b01), std::move(b00), std::move(psi),
                           std::move(label), std::move(disc)};
  ensure_finite(it.b_same_block_prev_iter, it.label + " B10");
  ensure_finite(it.b_prev_block_curr_iter, it.label + " B01");
  ensure_finite(it.b_prev_block_prev_iter, it.label + " B00");
  const double residual = check_consistency(it);
  if (residual > kConsistencyTol)
    throw NumericalError(it.label + ": consistency residual " + std::to_string(residual) +
                         " exceeds 1e-12");
  return it;
}

// T_C^F level_inv T_F^C rhs, where level_inv applies the (approximate or
// exact) coarse integrator inverse.
ComplexMatrix coarse_correction(const TwoLevelSetup& s, const ComplexMatrix& coarse_phi,
                                const ComplexMatrix& rhs, const std::string& label) {
  const ComplexMatrix restricted = s.restrict_op.cast<Complex>() * rhs;
  const ComplexMatrix solved = solve_lu(coarse_phi, restricted, label);
  return s.prolong_op.cast<Complex>() * solved;
}

void fill_errors(IterationRun& run) {
  const int n_blocks = run.num_blocks();
  const int n_iters = run.num_iterations();
  run.volume_errors = RealMatrix::Zero(n_blocks + 1, n_iters + 1);
  run.interface_errors = RealMatrix::Zero(n_blocks + 1, n_iters + 1);
  for (int k = 0; k <= n_iters; ++k) {
    for (int n = 0; n <= n_blocks; ++n) {
      const ComplexVector diff = run.iterates[k][n] - run.fixed_point[n];
      run.volume_errors(n, k) = inf_norm(diff);
      run.interface_errors(n, k) = std::abs(diff[diff.size() - 1]);
    }
  }
}

std::vector<ComplexVector> sequential_solution(const ComplexMatrix& psi, Complex u0,
                                               int num_blocks) {
  const int m = static_cast<int>(psi.rows());
  std::vector<ComplexVector> fixed(num_blocks + 1);
  fixed[0] = ComplexVector::Constant(m, u0);
  for (int n = 0; n < num_blocks; ++n) fixed[n + 1] = psi * fixed[n];
  return fixed;
}

std::vector<ComplexVector> initial_iterate(const InitialGuess& init, const ComplexMatrix& predictor,
                                           Complex u0, int num_blocks, int m) {
  std::vector<ComplexVector> u0_row(num_blocks + 1);
  u0_row[0] = ComplexVector::Constant(m, u0);
  switch (init.kind) {
    case InitialGuess::Kind::Random: {
      std::mt19937_64 rng(init.seed);
      for (int n = 1; n <= num_blocks; ++n) u0_row[n] = random_block(rng, m);
      break;
    }
    case InitialGuess::Kind::Zero: {
      for (int n = 1; n <= num_blocks; ++n) u0_row[n] = ComplexVector::Zero(m);
      break;
    }
    case InitialGuess::Kind::CoarsePredicted: {
      if (inf_norm(predictor) == 0.0)
        throw ParameterError("run_iteration: coarse-predicted initial guess requires a "
                             "nonzero B01 operator");
      for (int n = 1; n <= num_blocks; ++n) u0_row[n] = predictor * u0_row[n - 1];
      break;
    }
  }
  return u0_row;
}

} // namespace

double check_consistency(const PrimaryBlockIteration& it) {
  const int m = it.size();
  const ComplexMatrix residual =
      (it.b_same_block_prev_iter - ComplexMatrix::Identity(m, m)) * it.psi +
      it.b_prev_block_curr_iter + it.b_prev_block_prev_iter;
  return inf_norm(residual);
}

MethodSpec MethodSpec::parse(const std::string& name, double omega, const std::string& variant) {
  MethodSpec spec;
  spec.omega = omega;
  if (name == "damped_block_jacobi" || name == "block_jacobi") {
    spec.name = Name::DampedBlockJacobi;
  } else if (name == "abj" || name == "bj_sdc") {
    spec.name = Name::ApproxBlockJacobi;
  } else if (name == "abgs" || name == "bgs_sdc") {
    spec.name = Name::ApproxBlockGaussSeidel;
  } else if (name == "parareal") {
    spec.name = Name::Parareal;
    if (variant == "classic" || variant.empty())
      spec.coarse = PararealCoarse::ApproxOperator;
    else if (variant == "tmg")
      spec.coarse = PararealCoarse::CoarseLevel;
    else if (variant == "tmg_c")
      spec.coarse = PararealCoarse::CoarseLevelApprox;
    else
      throw ParameterError("unknown parareal variant: " + variant);
  } else if (name == "tmg") {
    spec.name = Name::TwoLevelMultigrid;
  } else if (name == "tmg_f") {
    spec.name = Name::TwoLevelMultigridF;
  } else if (name == "pfasst") {
    spec.name = Name::Pfasst;
  } else {
    throw ParameterError("unknown method: " + name);
  }
  if (name == "bj_sdc" || name == "bgs_sdc") spec.label = name;
  return spec;
}

std::string MethodSpec::canonical_name() const {
  switch (name) {
    case Name::DampedBlockJacobi: return "damped_block_jacobi";
    case Name::ApproxBlockJacobi: return "abj";
    case Name::ApproxBlockGaussSeidel: return "abgs";
    case Name::Parareal:
      switch (coarse) {
        case PararealCoarse::ApproxOperator: return "parareal";
        case PararealCoarse::CoarseLevel: return "parareal_tmg";
        case PararealCoarse::CoarseLevelApprox: return "parareal_tmg_c";
      }
      return "parareal";
    case Name::TwoLevelMultigrid: return "tmg";
    case Name::TwoLevelMultigridF: return "tmg_f";
    case Name::Pfasst: return "pfasst";
  }
  return "unknown";
}

bool MethodSpec::needs_coarse_level() const {
  switch (name) {
    case Name::TwoLevelMultigrid:
    case Name::TwoLevelMultigridF:
    case Name::Pfasst:
      return true;
    case Name::Parareal:
      return coarse != PararealCoarse::ApproxOperator;
    default:
      return false;
  }
}

PrimaryBlockIteration build_iteration(const MethodSpec& method, const BlockOperatorPair& fine,
                                      const std::optional<ComplexMatrix>& phi_approx) {
  const int m = fine.size();
  const ComplexMatrix eye = ComplexMatrix::Identity(m, m);
  const ComplexMatrix& psi = fine.propagator();
  const std::string label = method.display_label();

  auto approx_solve = [&](const ComplexMatrix& rhs) {
    if (!phi_approx)
      throw ParameterError(label + ": method requires an approximate integrator phi~");
    return solve_lu(*phi_approx, rhs, label + " phi~");
  };

  switch (method.name) {
    case MethodSpec::Name::DampedBlockJacobi: {
      if (!(method.omega > 0.0 && method.omega <= 2.0))
        throw ParameterError(label + ": omega must be in (0, 2]");
      return finalize((1.0 - method.omega) * eye, ComplexMatrix::Zero(m, m), method.omega * psi,
                      psi, label, fine.disc());
    }
    case MethodSpec::Name::ApproxBlockJacobi: {
      const ComplexMatrix b10 = eye - approx_solve(fine.phi());
      return finalize(b10, ComplexMatrix::Zero(m, m), approx_solve(fine.chi()), psi, label,
                      fine.disc());
    }
    case MethodSpec::Name::ApproxBlockGaussSeidel: {
      const ComplexMatrix b10 = eye - approx_solve(fine.phi());
      return finalize(b10, approx_solve(fine.chi()), ComplexMatrix::Zero(m, m), psi, label,
                      fine.disc());
    }
    case MethodSpec::Name::Parareal: {
      if (method.coarse != PararealCoarse::ApproxOperator)
        throw ParameterError(label + ": this parareal variant needs a two-level setup");
      const ComplexMatrix g = approx_solve(fine.chi());
      return finalize(ComplexMatrix::Zero(m, m), g, psi - g, psi, label, fine.disc());
    }
    default:
      throw ParameterError(label + ": method needs a two-level setup");
  }
}

PrimaryBlockIteration build_iteration(const MethodSpec& method, const TwoLevelSetup& setup) {
  if (!method.needs_coarse_level())
    return build_iteration(method, setup.fine, setup.fine_approx);

  const int m = setup.fine.size();
  const ComplexMatrix eye = ComplexMatrix::Identity(m, m);
  const ComplexMatrix& psi = setup.fine.propagator();
  const std::string label = method.display_label();

  // C rhs = T_C^F phi_C^{-1} T_F^C rhs, and the same with phi~_C.
  auto cgc_exact = [&](const ComplexMatrix& rhs) {
    return coarse_correction(setup, setup.coarse.phi(), rhs, label + " phi_C");
  };
  auto cgc_approx = [&](const ComplexMatrix& rhs) {
    return coarse_correction(setup, setup.coarse_approx, rhs, label + " phi~_C");
  };
  auto fine_approx_solve = [&](const ComplexMatrix& rhs) {
    return solve_lu(setup.fine_approx, rhs, label + " phi~");
  };

  switch (method.name) {
    case MethodSpec::Name::Parareal: {
      const ComplexMatrix g = method.coarse == PararealCoarse::CoarseLevel
                                  ? cgc_exact(setup.fine.chi())
                                  : cgc_approx(setup.fine.chi());
      return finalize(ComplexMatrix::Zero(m, m), g, psi - g, psi, label, setup.fine.disc());
    }
    case MethodSpec::Name::TwoLevelMultigrid: {
      if (!(method.omega > 0.0 && method.omega <= 2.0))
        throw ParameterError(label + ": omega must be in (0, 2]");
      const ComplexMatrix correction = eye - cgc_exact(setup.fine.phi());
      const ComplexMatrix b10 = (1.0 - method.omega) * correction;
      const ComplexMatrix b00 = method.omega * (psi - cgc_exact(setup.fine.chi()));
      const ComplexMatrix b01 = cgc_exact(setup.fine.chi());
      return finalize(b10, b01, b00, psi, label, setup.fine.disc());
    }
    case MethodSpec::Name::TwoLevelMultigridF: {
      const ComplexMatrix correction = eye - cgc_exact(setup.fine.phi());
      const ComplexMatrix smoother = eye - fine_approx_solve(setup.fine.phi());
      const ComplexMatrix b10 = correction * smoother;
      const ComplexMatrix b00 = correction * fine_approx_solve(setup.fine.chi());
      const ComplexMatrix b01 = cgc_exact(setup.fine.chi());
      return finalize(b10, b01, b00, psi, label, setup.fine.disc());
    }
    case MethodSpec::Name::Pfasst: {
      const ComplexMatrix correction = eye - cgc_approx(setup.fine.phi());
      const ComplexMatrix smoother = eye - fine_approx_solve(setup.fine.phi());
      const ComplexMatrix b10 = correction * smoother;
      const ComplexMatrix b00 = correction * fine_approx_solve(setup.fine.chi());
      const ComplexMatrix b01 = cgc_approx(setup.fine.chi());
      return finalize(b10, b01, b00, psi, label, setup.fine.disc());
    }
    default:
      return build_iteration(method, setup.fine, setup.fine_approx);
  }
}

IterationRun run_iteration(const PrimaryBlockIteration& it, Complex u0, int num_blocks,
                           int num_iterations, const InitialGuess& init) {
  if (num_blocks < 1) throw ParameterError("run_iteration: N must be >= 1");
  if (num_iterations < 0) throw ParameterError("run_iteration: K must be >= 0");
  const int m = it.size();

  IterationRun run;
  run.iterates.resize(num_iterations + 1);
  run.iterates[0] = initial_iterate(init, it.b_prev_block_curr_iter, u0, num_blocks, m);

  for (int k = 0; k < num_iterations; ++k) {
    auto& next = run.iterates[k + 1];
    const auto& prev = run.iterates[k];
    next.resize(num_blocks + 1);
    next[0] = ComplexVector::Constant(m, u0);
    for (int n = 0; n < num_blocks; ++n) {
      next[n + 1] = it.b_same_block_prev_iter * prev[n + 1] +
                    it.b_prev_block_curr_iter * next[n] +
                    it.b_prev_block_prev_iter * prev[n];
    }
  }

  run.fixed_point = sequential_solution(it.psi, u0, num_blocks);
  fill_errors(run);
  return run;
}

IterationRun run_overlap_parareal(const ComplexMatrix& fine_prop, const ComplexMatrix& coarse_prop,
                                  Complex u0, int num_blocks, int num_iterations,
                                  const InitialGuess& init) {
  if (num_blocks < 1) throw ParameterError("run_overlap_parareal: N must be >= 1");
  if (num_iterations < 0) throw ParameterError("run_overlap_parareal: K must be >= 0");
  if (fine_prop.rows() != fine_prop.cols() || coarse_prop.rows() != coarse_prop.cols() ||
      fine_prop.rows() != coarse_prop.rows())
    throw ParameterError("run_overlap_parareal: F and G must be square and of equal size");
  const int m = static_cast<int>(fine_prop.rows());
  const ComplexMatrix two_step = (fine_prop - coarse_prop) * fine_prop;

  IterationRun run;
  run.iterates.resize(num_iterations + 1);
  run.iterates[0] = initial_iterate(init, coarse_prop, u0, num_blocks, m);

  for (int k = 0; k < num_iterations; ++k) {
    auto& next = run.iterates[k + 1];
    const auto& prev = run.iterates[k];
    next.resize(num_blocks + 1);
    next[0] = ComplexVector::Constant(m, u0);
    next[1] = fine_prop * next[0];
    for (int n = 1; n < num_blocks; ++n)
      next[n + 1] = two_step * prev[n - 1] + coarse_prop * next[n];
  }

  run.fixed_point = sequential_solution(fine_prop, u0, num_blocks);
  fill_errors(run);
  return run;
}

ComplexMatrix global_iteration_matrix(const PrimaryBlockIteration& it, int num_blocks) {
  if (num_blocks < 1) throw ParameterError("global_iteration_matrix: N must be >= 1");
  const int m = it.size();
  const Eigen::Index dim = static_cast<Eigen::Index>(num_blocks) * m;
  if (dim > 4096)
    throw ParameterError("global_iteration_matrix: dimension " + std::to_string(dim) +
                         " exceeds the 4096 guard");

  ComplexMatrix lower = ComplexMatrix::Zero(dim, dim);
  ComplexMatrix upper = ComplexMatrix::Zero(dim, dim);
  for (int n = 0; n < num_blocks; ++n) {
    upper.block(n * m, n * m, m, m) = it.b_same_block_prev_iter;
    if (n > 0) {
      lower.block(n * m, (n - 1) * m, m, m) = it.b_prev_block_curr_iter;
      upper.block(n * m, (n - 1) * m, m, m) = it.b_prev_block_prev_iter;
    }
  }
  const ComplexMatrix eye = ComplexMatrix::Identity(dim, dim);
  return solve_lu(eye - lower, upper, "global_iteration_matrix");
}

MatrixDiagnostics matrix_diagnostics(const ComplexMatrix& m) {
  if (m.rows() != m.cols()) throw ParameterError("matrix_diagnostics: matrix must be square");
  MatrixDiagnostics diag;
  diag.inf_norm = inf_norm(m);

  std::mt19937_64 rng(0x2545F4914F6CDD1DULL);
  ComplexVector v(m.rows());
  for (Eigen::Index i = 0; i < v.size(); ++i)
    v[i] = Complex(uniform01(rng) - 0.5, uniform01(rng) - 0.5);
  double norm = v.norm();
  if (norm == 0.0) return diag;
  v /= norm;

  double estimate = 0.0;
  for (int iter = 0; iter < 500; ++iter) {
    const ComplexVector w = m * v;
    norm = w.norm();
    if (norm < 1e-30) {
      diag.spectral_radius_estimate = 0.0;
      return diag;
    }
    const double change = std::abs(norm - estimate);
    estimate = norm;
    v = w / norm;
    if (change < 1e-10 * std::max(estimate, 1e-300)) break;
  }
  diag.spectral_radius_estimate = estimate;
  return diag;
}

} // namespace pintgfm
