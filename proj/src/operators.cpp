#include "pintgfm/operators.hpp"

#include <cmath>
#include <utility>

namespace pintgfm {

namespace {

Complex eval_poly(const std::vector<double>& coef, Complex z) {
  Complex acc = 0.0;
  for (auto it = coef.rbegin(); it != coef.rend(); ++it) acc = acc * z + *it;
  return acc;
}

ComplexMatrix collocation_chi(int m) {
  ComplexMatrix chi = ComplexMatrix::Zero(m, m);
  chi.col(m - 1).setOnes();
  return chi;
}

bool right_inclusive(const BlockDiscretization& disc) {
  return disc.size() >= 1 && std::abs(disc.nodes[disc.size() - 1] - 1.0) < 1e-14;
}

} // namespace

RKMethod RKMethod::backward_euler() {
  RKMethod m;
  m.tag = Tag::BackwardEuler;
  m.num = {1.0};
  m.den = {1.0, -1.0};
  return m;
}

RKMethod RKMethod::heun_rk2() {
  RKMethod m;
  m.tag = Tag::HeunRK2;
  m.num = {1.0, 1.0, 0.5};
  m.den = {1.0};
  return m;
}

RKMethod RKMethod::classic_rk4() {
  RKMethod m;
  m.tag = Tag::ClassicRK4;
  m.num = {1.0, 1.0, 0.5, 1.0 / 6.0, 1.0 / 24.0};
  m.den = {1.0};
  return m;
}

RKMethod RKMethod::from_name(const std::string& name) {
  if (name == "backward_euler" || name == "be") return backward_euler();
  if (name == "heun_rk2" || name == "heun") return heun_rk2();
  if (name == "classic_rk4" || name == "rk4") return classic_rk4();
  throw ParameterError("unknown Runge-Kutta method: " + name);
}

std::string RKMethod::name() const {
  switch (tag) {
    case Tag::BackwardEuler: return "backward_euler";
    case Tag::HeunRK2: return "heun_rk2";
    case Tag::ClassicRK4: return "classic_rk4";
  }
  return "unknown";
}

Complex stability_value(const RKMethod& method, Complex z) {
  const Complex den = eval_poly(method.den, z);
  if (std::abs(den) < 1e-300)
    throw NumericalError("stability_value: pole of R(z) at z = " + std::to_string(z.real()) +
                         (z.imag() < 0 ? "" : "+") + std::to_string(z.imag()) + "i");
  return eval_poly(method.num, z) / den;
}

BlockOperatorPair::BlockOperatorPair(ComplexMatrix phi, ComplexMatrix chi, Complex lam_dt,
                                     BlockDiscretization disc, const std::string& label)
    : phi_(std::move(phi)), chi_(std::move(chi)), lam_dt_(lam_dt), disc_(std::move(disc)) {
  if (phi_.rows() != phi_.cols() || chi_.rows() != chi_.cols() || phi_.rows() != chi_.rows())
    throw ParameterError(label + ": phi and chi must be square matrices of equal size");
  if (phi_.rows() != disc_.nodes.size())
    throw ParameterError(label + ": operator size does not match discretization");
  ensure_finite(phi_, label + " phi");
  ensure_finite(chi_, label + " chi");
  lu_ = GuardedLU(phi_, label + " phi");
  psi_ = lu_.solve(chi_);
}

BlockOperatorPair collocation_pair(const BlockDiscretization& disc, Complex lam_dt) {
  if (!right_inclusive(disc))
    throw ParameterError("collocation_pair: discretization must include tau = 1");
  const int m = disc.size();
  const RealMatrix q = lagrange_integration_coefficients(disc);
  ComplexMatrix phi = ComplexMatrix::Identity(m, m) - lam_dt * q.cast<Complex>();
  return BlockOperatorPair(std::move(phi), collocation_chi(m), lam_dt, disc, "collocation");
}

ComplexMatrix qdelta_backward_euler(const BlockDiscretization& disc, Complex lam_dt) {
  const int m = disc.size();
  if (m < 1) throw ParameterError("qdelta_backward_euler: empty discretization");
  ComplexMatrix qd = ComplexMatrix::Zero(m, m);
  for (int row = 0; row < m; ++row) {
    for (int j = 0; j <= row; ++j) {
      const double prev = (j == 0) ? 0.0 : disc.nodes[j - 1];
      qd(row, j) = lam_dt * (disc.nodes[j] - prev);
    }
  }
  return qd;
}

BlockOperatorPair rk_pair(const RKMethod& method, int steps, Complex lam_dt,
                          RKFormulation formulation) {
  if (steps < 1) throw ParameterError("rk_pair: steps must be >= 1");
  const Complex r = stability_value(method, lam_dt / static_cast<double>(steps));
  if (std::abs(r) < 1e-300)
    throw NumericalError("rk_pair: R(lam_dt/steps) = 0, phi is not invertible");

  if (formulation == RKFormulation::Interface) {
    BlockDiscretization disc;
    disc.family = NodeFamily::Equidistant;
    disc.nodes = RealVector::Ones(1);
    ComplexMatrix phi(1, 1), chi(1, 1);
    phi(0, 0) = std::pow(r, Complex(-static_cast<double>(steps)));
    chi(0, 0) = 1.0;
    return BlockOperatorPair(std::move(phi), std::move(chi), lam_dt, disc,
                             method.name() + " interface");
  }

  return rk_pair_on_nodes(method, generate_nodes(NodeFamily::Equidistant, steps), lam_dt);
}

BlockOperatorPair rk_pair_on_nodes(const RKMethod& method, const BlockDiscretization& disc,
                                   Complex lam_dt) {
  const int m = disc.size();
  if (m < 1) throw ParameterError("rk_pair_on_nodes: empty discretization");
  ComplexMatrix phi = ComplexMatrix::Zero(m, m);
  for (int i = 0; i < m; ++i) {
    const double prev = i == 0 ? 0.0 : disc.nodes[i - 1];
    const double width = disc.nodes[i] - prev;
    if (width == 0.0) {
      phi(i, i) = 1.0;  // zero-width step: the node copies its predecessor
    } else {
      const Complex r = stability_value(method, lam_dt * width);
      if (std::abs(r) < 1e-300)
        throw NumericalError("rk_pair_on_nodes: R(lam_dt * h) = 0, phi is not invertible");
      phi(i, i) = 1.0 / r;
    }
    if (i > 0) phi(i, i - 1) = -1.0;
  }
  ComplexMatrix chi = ComplexMatrix::Zero(m, m);
  chi(0, m - 1) = 1.0;
  return BlockOperatorPair(std::move(phi), std::move(chi), lam_dt, disc,
                           method.name() + " volume");
}

BlockOperatorPair build_pair(const BlockDiscretization& disc, Complex lam_dt,
                             const IntegratorSpec& integrator) {
  if (integrator.kind == IntegratorSpec::Kind::Collocation)
    return collocation_pair(disc, lam_dt);
  if (integrator.formulation == RKFormulation::Interface) {
    if (disc.size() != 1)
      throw ParameterError("build_pair: interface formulation requires M = 1");
    return rk_pair(integrator.rk, integrator.steps, lam_dt, RKFormulation::Interface);
  }
  if (disc.family != NodeFamily::Equidistant &&
      disc.family != NodeFamily::EquidistantLeftInclusive)
    throw ParameterError("build_pair: Runge-Kutta volume blocks use equidistant nodes");
  return rk_pair_on_nodes(integrator.rk, disc, lam_dt);
}

std::optional<ComplexMatrix> build_approx(const BlockDiscretization& disc, Complex lam_dt,
                                          const ApproxSpec& approx) {
  switch (approx.kind) {
    case ApproxSpec::Kind::None:
      return std::nullopt;
    case ApproxSpec::Kind::QDeltaBackwardEuler: {
      const int m = disc.size();
      return ComplexMatrix(ComplexMatrix::Identity(m, m) - qdelta_backward_euler(disc, lam_dt));
    }
    case ApproxSpec::Kind::RungeKutta: {
      if (disc.size() == 1) {
        const auto pair = rk_pair(approx.rk, approx.steps, lam_dt, RKFormulation::Interface);
        return pair.phi();
      }
      const auto pair = rk_pair_on_nodes(approx.rk, disc, lam_dt);
      return pair.phi();
    }
  }
  return std::nullopt;
}

TwoLevelSetup build_two_level(const BlockDiscretization& fine_disc,
                              const BlockDiscretization& coarse_disc, Complex lam_dt,
                              const IntegratorSpec& integrator, const ApproxSpec& approx) {
  if (coarse_disc.size() > fine_disc.size())
    throw ParameterError("build_two_level: coarse level must not have more nodes than fine");
  if (!right_inclusive(fine_disc) || !right_inclusive(coarse_disc))
    throw ParameterError("build_two_level: both levels must include tau = 1");

  BlockOperatorPair fine = build_pair(fine_disc, lam_dt, integrator);
  BlockOperatorPair coarse = build_pair(coarse_disc, lam_dt, integrator);

  auto fine_approx = build_approx(fine_disc, lam_dt, approx);
  auto coarse_approx = build_approx(coarse_disc, lam_dt, approx);
  if (!fine_approx) fine_approx = fine.phi();
  if (!coarse_approx) coarse_approx = coarse.phi();

  RealMatrix restrict_op = interpolation_matrix(fine_disc.nodes, coarse_disc.nodes);
  RealMatrix prolong_op = interpolation_matrix(coarse_disc.nodes, fine_disc.nodes);

  const int mc = coarse_disc.size();
  const double transfer_residual =
      (restrict_op * prolong_op - RealMatrix::Identity(mc, mc)).cwiseAbs().maxCoeff();
  if (transfer_residual > 1e-12)
    throw NumericalError("build_two_level: restriction of prolongation is not the identity "
                         "(residual " + std::to_string(transfer_residual) + ")");

  // The commutation condition is guaranteed (and enforced) for the
  // right-inclusive quadrature families only.
  auto quadrature_family = [](NodeFamily f) {
    return f == NodeFamily::LobattoLegendre || f == NodeFamily::RadauRight;
  };
  const bool check_chi =
      quadrature_family(fine_disc.family) && quadrature_family(coarse_disc.family);
  if (check_chi) {
    const ComplexMatrix delta_chi = restrict_op.cast<Complex>() * fine.chi() -
                                    coarse.chi() * restrict_op.cast<Complex>();
    const double chi_residual = delta_chi.cwiseAbs().maxCoeff();
    if (chi_residual > 1e-12)
      throw NumericalError("build_two_level: transmission operators do not commute with "
                           "restriction (residual " + std::to_string(chi_residual) + ")");
  }

  return TwoLevelSetup{std::move(fine), std::move(*fine_approx), std::move(coarse),
                       std::move(*coarse_approx), std::move(restrict_op),
                       std::move(prolong_op)};
}

} // namespace pintgfm
