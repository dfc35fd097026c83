#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "pintgfm/bounds.hpp"

using namespace pintgfm;

namespace {

bool rel_close(double a, double b, double rel) {
  if (a == b) return true;
  const double scale = std::max(std::abs(a), std::abs(b));
  return std::abs(a - b) <= rel * scale;
}

// Exact integer binomial for the multiplicative-accumulation cross-check.
unsigned long long exact_binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  unsigned long long result = 1;
  for (int i = 1; i <= k; ++i) result = result * static_cast<unsigned long long>(n - k + i) / i;
  return result;
}

void check_oracle_equivalence(const BoundCoefficients& c, int num_blocks, int num_iterations) {
  const RealMatrix table = recurrence_oracle(c, num_blocks, num_iterations);
  for (int n = 0; n < num_blocks; ++n)
    for (int k = 1; k <= num_iterations; ++k) {
      const double closed_form = c.delta * theta(n, k, c);
      const double recurrence = table(n + 1, k);
      const bool ok = rel_close(closed_form, recurrence, 1e-10);
      if (!ok)
        MESSAGE("mismatch at n=", n, " k=", k, " alpha=", c.alpha, " beta=", c.beta,
                " gamma=", c.gamma, ": ", closed_form, " vs ", recurrence);
      CHECK(ok);
    }
}

TwoLevelSetup lobatto_setup(Complex lam_dt) {
  IntegratorSpec spec;
  spec.kind = IntegratorSpec::Kind::Collocation;
  return build_two_level(generate_nodes(NodeFamily::LobattoLegendre, 5),
                         generate_nodes(NodeFamily::LobattoLegendre, 3), lam_dt, spec,
                         ApproxSpec{});
}

} // namespace

TEST_CASE("theta trivial cases") {
  // beta = 0, k <= n: (gamma + alpha)^k.
  CHECK(theta(5, 3, {0.3, 0.0, 0.2, 0.0}) == doctest::Approx(std::pow(0.5, 3)).epsilon(1e-13));
  // alpha = beta = 0: pure same-block contraction.
  CHECK(theta(4, 6, {0.0, 0.0, 0.7, 0.0}) == doctest::Approx(std::pow(0.7, 6)).epsilon(1e-13));
  // alpha = gamma = 0: nothing reaches iteration k >= 1.
  CHECK(theta(4, 2, {0.0, 0.9, 0.0, 0.0}) == 0.0);
  // gamma = 0, k > n: finite termination.
  CHECK(theta(2, 3, {0.5, 0.8, 0.0, 0.0}) == 0.0);
  // beta = gamma = 0: alpha^k while k <= n.
  CHECK(theta(5, 3, {0.4, 0.0, 0.0, 0.0}) == doctest::Approx(std::pow(0.4, 3)).epsilon(1e-13));
  CHECK(theta(2, 3, {0.4, 0.0, 0.0, 0.0}) == 0.0);
}

TEST_CASE("theta rejects k = 0 and negative inputs") {
  CHECK_THROWS_AS(theta(3, 0, {0.5, 0.5, 0.5, 1.0}), ParameterError);
  CHECK_THROWS_AS(theta(-1, 1, {0.5, 0.5, 0.5, 1.0}), ParameterError);
  CHECK_THROWS_AS(gander_hairer_theta(3, 0, 0.5, 0.5), ParameterError);
}

TEST_CASE("closed forms equal the recurrence oracle on a frozen example") {
  const BoundCoefficients c{0.3, 0.7, 0.2, 1.0};
  const RealMatrix table = recurrence_oracle(c, 8, 6);
  CHECK(rel_close(theta(5, 3, c), table(6, 3), 1e-10));
}

TEST_CASE("oracle equivalence across random and axis-aligned coefficients") {
  std::mt19937_64 rng(2024);
  auto uniform = [&] { return (rng() >> 11) * 0x1.0p-53; };
  const int num_blocks = 12, num_iterations = 12;

  for (int trial = 0; trial < 60; ++trial) {
    const BoundCoefficients c{2.0 * uniform(), 2.0 * uniform(), 2.0 * uniform(), 1.0};
    check_oracle_equivalence(c, num_blocks, num_iterations);
  }
  // Axis-aligned zero cases.
  for (int trial = 0; trial < 6; ++trial) {
    const double a = 2.0 * uniform(), b = 2.0 * uniform(), g = 2.0 * uniform();
    check_oracle_equivalence({0.0, b, g, 1.0}, num_blocks, num_iterations);
    check_oracle_equivalence({a, 0.0, g, 1.0}, num_blocks, num_iterations);
    check_oracle_equivalence({a, b, 0.0, 1.0}, num_blocks, num_iterations);
    check_oracle_equivalence({a, 0.0, 0.0, 1.0}, num_blocks, num_iterations);
    check_oracle_equivalence({0.0, b, 0.0, 1.0}, num_blocks, num_iterations);
    check_oracle_equivalence({0.0, 0.0, g, 1.0}, num_blocks, num_iterations);
  }
  check_oracle_equivalence({0.0, 0.0, 0.0, 1.0}, num_blocks, num_iterations);
}

TEST_CASE("binomial accumulation matches exact integers up to n, k = 20") {
  // With alpha = beta = 1, gamma = 0 the closed form collapses to C(n, k);
  // with beta = gamma = 1, alpha = 0 it collapses to C(n + k, n).
  for (int n = 0; n <= 20; ++n)
    for (int k = 1; k <= 20; ++k) {
      const double no_gamma = theta(n, k, {1.0, 1.0, 0.0, 0.0});
      CHECK(rel_close(no_gamma, static_cast<double>(exact_binomial(n, k)), 1e-12));
      const double no_alpha = theta(n, k, {0.0, 1.0, 1.0, 0.0});
      CHECK(rel_close(no_alpha, static_cast<double>(exact_binomial(n + k, n)), 1e-12));
    }
}

TEST_CASE("theta stays finite at n = k = 64 with coefficients up to 2") {
  CHECK(std::isfinite(theta(64, 64, {2.0, 2.0, 2.0, 0.0})));
  CHECK(std::isfinite(theta(64, 64, {2.0, 2.0, 0.0, 0.0})));
  CHECK(std::isfinite(gander_hairer_theta(64, 32, 2.0, 2.0)));
}

TEST_CASE("Gander-Hairer bound: frozen forms and sharpness") {
  // k = 1 collapses to alpha * max(1, beta)^{n-1} * n.
  for (int n = 1; n <= 12; ++n)
    CHECK(rel_close(gander_hairer_theta(n, 1, 0.3, 1.7), 0.3 * std::pow(1.7, n - 1) * n, 1e-13));

  // Equality with the gamma = 0 closed form at beta = 1.
  for (int n = 0; n <= 20; ++n)
    for (int k = 1; k <= 20; ++k) {
      const double gfm = theta(n, k, {0.6, 1.0, 0.0, 0.0});
      const double gh = gander_hairer_theta(n, k, 0.6, 1.0);
      CHECK(rel_close(gfm, gh, 1e-12));
    }

  // Strictly weaker for beta < 1.
  CHECK(gander_hairer_theta(8, 3, 0.6, 0.5) > theta(8, 3, {0.6, 0.5, 0.0, 0.0}));
}

TEST_CASE("recurrence oracle edge behaviour") {
  // Causality: with gamma = 0 nothing is left above the diagonal.
  const RealMatrix causal = recurrence_oracle({0.5, 0.8, 0.0, 1.0}, 6, 8);
  for (int n = 0; n <= 6; ++n)
    for (int k = n; k <= 8; ++k) CHECK(causal(n, k) == 0.0);

  // delta = 0 gives an all-zero table.
  const RealMatrix zero = recurrence_oracle({0.5, 0.8, 0.3, 0.0}, 6, 8);
  CHECK(zero.cwiseAbs().maxCoeff() == 0.0);

  // Linearity in delta: doubling delta doubles every entry.
  const RealMatrix one = recurrence_oracle({0.5, 0.5, 0.5, 1.0}, 10, 10);
  const RealMatrix two = recurrence_oracle({0.5, 0.5, 0.5, 2.0}, 10, 10);
  for (int n = 1; n <= 10; ++n)
    for (int k = 0; k <= 10; ++k) CHECK(rel_close(two(n, k), 2.0 * one(n, k), 1e-12));
}

TEST_CASE("coefficient extraction: structural zeros") {
  const auto setup = lobatto_setup(Complex(0, 0.6));

  const auto bgs = build_iteration(MethodSpec::parse("abgs"), setup.fine, setup.fine.phi());
  const auto bgs_run = run_iteration(bgs, Complex(1, 0), 6, 2, {InitialGuess::Kind::Random, 4});
  const auto bgs_c = extract_coefficients(bgs, bgs_run);
  CHECK(bgs_c.alpha == 0.0);
  CHECK(bgs_c.gamma <= 1e-13);
  CHECK(bgs_c.delta == bgs_run.volume_errors.col(0).maxCoeff());

  const auto parareal = build_iteration(MethodSpec::parse("parareal"), setup);
  const auto par_run =
      run_iteration(parareal, Complex(1, 0), 6, 2, {InitialGuess::Kind::Random, 4});
  const auto par_c = extract_coefficients(parareal, par_run);
  CHECK(par_c.gamma == 0.0);
  const auto par_i = extract_interface_coefficients(parareal, par_run);
  CHECK(par_i.gamma_bar == 0.0);
}

TEST_CASE("interface coefficients equal volume coefficients for M = 1 blocks") {
  const auto fine =
      rk_pair(RKMethod::classic_rk4(), 10, Complex(0, 0.63), RKFormulation::Interface);
  const auto coarse =
      rk_pair(RKMethod::backward_euler(), 2, Complex(0, 0.63), RKFormulation::Interface);
  const auto it = build_iteration(MethodSpec::parse("parareal"), fine, coarse.phi());
  const auto run = run_iteration(it, Complex(1, 0), 10, 3, {InitialGuess::Kind::Random, 10});
  const auto c = extract_coefficients(it, run);
  const auto ic = extract_interface_coefficients(it, run);
  CHECK(c.alpha == ic.alpha_bar);
  CHECK(c.beta == ic.beta_bar);
  CHECK(c.gamma == ic.gamma_bar);
  CHECK(c.delta == ic.delta_bar);
}

TEST_CASE("bound tables: dominance, estimate flag and the k = 0 column") {
  const auto setup = lobatto_setup(Complex(0, 0.6));
  const auto it = build_iteration(MethodSpec::parse("pfasst"), setup);
  const auto run = run_iteration(it, Complex(1, 0), 8, 10, {InitialGuess::Kind::Random, 8});

  const auto volume = bound_table(it, run, 8, 10, BoundMode::Volume);
  CHECK(!volume.is_estimate);
  for (int n = 1; n <= 8; ++n) {
    CHECK(volume.values(n, 0) == run.volume_errors.col(0).maxCoeff());
    for (int k = 0; k <= 10; ++k)
      CHECK(volume.values(n, k) >= run.volume_errors(n, k) - 1e-10);
  }

  const auto iface = bound_table(it, run, 8, 10, BoundMode::Interface);
  CHECK(iface.is_estimate);
  CHECK(iface.mode_label == "estimate");
}

TEST_CASE("linear bound coincides with the volume bound at k = 1 for M = 1 parareal") {
  const Complex lam_dt(0, 2.0 * M_PI / 10.0);
  const auto fine = rk_pair(RKMethod::classic_rk4(), 10, lam_dt, RKFormulation::Interface);
  const auto coarse_phi =
      rk_pair(RKMethod::backward_euler(), 2, lam_dt, RKFormulation::Interface).phi();
  const auto it = build_iteration(MethodSpec::parse("parareal"), fine, coarse_phi);
  const int num_blocks = 10;
  const auto run =
      run_iteration(it, Complex(1, 0), num_blocks, 3, {InitialGuess::Kind::Random, 12});

  const auto volume = bound_table(it, run, num_blocks, 3, BoundMode::Volume);
  const auto linear = bound_table(it, run, num_blocks, 3, BoundMode::Linear);
  CHECK(rel_close(volume.values(num_blocks, 1), linear.values(num_blocks, 1), 1e-10));
}

TEST_CASE("linear bound dominates the volume bound at k = 1 for M > 1") {
  const auto setup = lobatto_setup(Complex(0, 0.6));
  const auto it = build_iteration(MethodSpec::parse("parareal"), setup);
  const int num_blocks = 8;
  const auto run =
      run_iteration(it, Complex(1, 0), num_blocks, 2, {InitialGuess::Kind::Random, 14});
  const auto volume = bound_table(it, run, num_blocks, 2, BoundMode::Volume);
  const auto linear = bound_table(it, run, num_blocks, 2, BoundMode::Linear);
  CHECK(linear.values(num_blocks, 1) <= volume.values(num_blocks, 1) + 1e-12);
}

TEST_CASE("interface machinery rejects blocks whose last node is not 1") {
  BlockDiscretization open_disc;
  open_disc.family = NodeFamily::Equidistant;
  open_disc.nodes = RealVector(2);
  open_disc.nodes << 0.25, 0.75;
  PrimaryBlockIteration it{ComplexMatrix::Zero(2, 2), ComplexMatrix::Identity(2, 2),
                           ComplexMatrix::Zero(2, 2), ComplexMatrix::Identity(2, 2),
                           "hand-built", open_disc};
  IterationRun run;
  run.iterates = {{ComplexVector::Ones(2), ComplexVector::Zero(2)}};
  run.fixed_point = {ComplexVector::Ones(2), ComplexVector::Ones(2)};
  run.volume_errors = RealMatrix::Zero(2, 1);
  run.interface_errors = RealMatrix::Zero(2, 1);
  CHECK_THROWS_AS(extract_interface_coefficients(it, run), ParameterError);
  CHECK_THROWS_AS(bound_table(it, run, 1, 0, BoundMode::Interface), ParameterError);
}
