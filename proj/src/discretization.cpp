#include "pintgfm/discretization.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace pintgfm {

namespace {

constexpr double kNewtonTol = 1e-14;
constexpr int kNewtonMaxIter = 200;

// Legendre polynomial P_n and its first derivative at x, |x| <= 1,
// via the three-term recurrence.
struct LegendreEval {
  double value;
  double derivative;
};

LegendreEval legendre(int n, double x) {
  if (n == 0) return {1.0, 0.0};
  double pm1 = 1.0, p = x;
  for (int k = 1; k < n; ++k) {
    const double pp1 = ((2 * k + 1) * x * p - k * pm1) / (k + 1);
    pm1 = p;
    p = pp1;
  }
  double dp;
  const double denom = x * x - 1.0;
  if (std::abs(denom) > 1e-10) {
    dp = n * (x * p - pm1) / denom;
  } else {
    // At the endpoints P'_n(+-1) = (+-1)^{n-1} n(n+1)/2.
    const double sign = (x > 0.0 || n % 2 == 1) ? 1.0 : -1.0;
    dp = sign * 0.5 * n * (n + 1);
  }
  return {p, dp};
}

// Interior Lobatto nodes on [-1,1]: roots of P'_{M-1}.  Newton with
// Chebyshev-Lobatto starting guesses; second derivative from the
// Legendre differential equation.
std::vector<double> lobatto_interior(int num_nodes) {
  const int n = num_nodes - 1; // polynomial degree index: roots of P'_n
  std::vector<double> roots;
  for (int j = 1; j < n; ++j) {
    double x = -std::cos(M_PI * j / n);
    for (int it = 0; it < kNewtonMaxIter; ++it) {
      const auto [p, dp] = legendre(n, x);
      const double d2p = (2.0 * x * dp - n * (n + 1) * p) / (1.0 - x * x);
      const double step = dp / d2p;
      x -= step;
      if (std::abs(step) < kNewtonTol) break;
    }
    if (!(x > -1.0 && x < 1.0))
      throw NumericalError("generate_nodes: Lobatto Newton iteration left (-1,1)");
    roots.push_back(x);
  }
  // Roots of P'_n are symmetric about 0; enforce the symmetry exactly.
  const std::size_t cnt = roots.size();
  for (std::size_t j = 0; j < cnt / 2; ++j) {
    const double v = 0.5 * (roots[j] - roots[cnt - 1 - j]);
    roots[j] = v;
    roots[cnt - 1 - j] = -v;
  }
  if (cnt % 2 == 1) roots[cnt / 2] = 0.0;
  return roots;
}

// Interior right-Radau nodes on [-1,1): roots of
// q(x) = (P_{M-1}(x) - P_M(x)) / (1 - x).
std::vector<double> radau_right_interior(int num_nodes) {
  const int m = num_nodes;
  std::vector<double> roots;
  for (int j = 1; j < m; ++j) {
    double x = std::cos(2.0 * M_PI * j / (2 * m - 1));
    for (int it = 0; it < kNewtonMaxIter; ++it) {
      const auto [pm1, dpm1] = legendre(m - 1, x);
      const auto [pm, dpm] = legendre(m, x);
      const double g = pm1 - pm;
      const double dg = dpm1 - dpm;
      const double omx = 1.0 - x;
      const double q = g / omx;
      const double dq = (dg * omx + g) / (omx * omx);
      const double step = q / dq;
      x -= step;
      if (std::abs(step) < kNewtonTol) break;
    }
    if (!(x > -1.0 && x < 1.0))
      throw NumericalError("generate_nodes: Radau Newton iteration left (-1,1)");
    roots.push_back(x);
  }
  std::sort(roots.begin(), roots.end());
  return roots;
}

void check_spacing(const RealVector& nodes, const std::string& where) {
  for (Eigen::Index i = 0; i + 1 < nodes.size(); ++i) {
    if (nodes[i + 1] - nodes[i] < 1e-12)
      throw NumericalError(where + ": nearly coincident nodes (spacing < 1e-12)");
  }
}

std::vector<double> barycentric_weights(const RealVector& nodes) {
  const Eigen::Index m = nodes.size();
  std::vector<double> w(static_cast<std::size_t>(m), 1.0);
  for (Eigen::Index j = 0; j < m; ++j) {
    for (Eigen::Index i = 0; i < m; ++i) {
      if (i != j) w[static_cast<std::size_t>(j)] /= (nodes[j] - nodes[i]);
    }
  }
  return w;
}

} // namespace

std::string to_string(NodeFamily family) {
  switch (family) {
    case NodeFamily::Equidistant: return "equidistant";
    case NodeFamily::EquidistantLeftInclusive: return "equidistant_left_inclusive";
    case NodeFamily::LobattoLegendre: return "lobatto_legendre";
    case NodeFamily::RadauRight: return "radau_right";
  }
  return "unknown";
}

NodeFamily node_family_from_string(const std::string& name) {
  if (name == "equidistant") return NodeFamily::Equidistant;
  if (name == "equidistant_left_inclusive" || name == "equidistant_left")
    return NodeFamily::EquidistantLeftInclusive;
  if (name == "lobatto_legendre" || name == "lobatto") return NodeFamily::LobattoLegendre;
  if (name == "radau_right") return NodeFamily::RadauRight;
  throw ParameterError("unknown node family: " + name);
}

BlockDiscretization generate_nodes(NodeFamily family, int num_nodes) {
  if (num_nodes < 1) throw ParameterError("generate_nodes: M must be >= 1");

  BlockDiscretization disc;
  disc.family = family;
  disc.nodes.resize(num_nodes);

  switch (family) {
    case NodeFamily::Equidistant: {
      for (int m = 0; m < num_nodes; ++m)
        disc.nodes[m] = static_cast<double>(m + 1) / num_nodes;
      break;
    }
    case NodeFamily::EquidistantLeftInclusive: {
      if (num_nodes < 2)
        throw ParameterError("generate_nodes: left-inclusive uniform nodes require M >= 2");
      for (int m = 0; m < num_nodes; ++m)
        disc.nodes[m] = static_cast<double>(m) / (num_nodes - 1);
      break;
    }
    case NodeFamily::LobattoLegendre: {
      if (num_nodes < 2)
        throw ParameterError("generate_nodes: Lobatto-Legendre requires M >= 2");
      const auto interior = lobatto_interior(num_nodes);
      disc.nodes[0] = 0.0;
      for (std::size_t j = 0; j < interior.size(); ++j)
        disc.nodes[static_cast<Eigen::Index>(j) + 1] = 0.5 * (interior[j] + 1.0);
      disc.nodes[num_nodes - 1] = 1.0;
      break;
    }
    case NodeFamily::RadauRight: {
      const auto interior = radau_right_interior(num_nodes);
      for (std::size_t j = 0; j < interior.size(); ++j)
        disc.nodes[static_cast<Eigen::Index>(j)] = 0.5 * (interior[j] + 1.0);
      disc.nodes[num_nodes - 1] = 1.0;
      break;
    }
  }
  return disc;
}

RealMatrix lagrange_integration_coefficients(const BlockDiscretization& disc) {
  const int m = disc.size();
  if (m < 1) throw ParameterError("lagrange_integration_coefficients: empty discretization");
  check_spacing(disc.nodes, "lagrange_integration_coefficients");

  RealMatrix q(m, m);
  for (int j = 0; j < m; ++j) {
    // Monomial coefficients of prod_{i != j} (s - tau_i), ascending degree.
    std::vector<double> coef{1.0};
    double denom = 1.0;
    for (int i = 0; i < m; ++i) {
      if (i == j) continue;
      denom *= disc.nodes[j] - disc.nodes[i];
      std::vector<double> next(coef.size() + 1, 0.0);
      for (std::size_t p = 0; p < coef.size(); ++p) {
        next[p + 1] += coef[p];
        next[p] -= coef[p] * disc.nodes[i];
      }
      coef = std::move(next);
    }
    // Integrate each monomial exactly from 0 to tau_row.
    for (int row = 0; row < m; ++row) {
      const double t = disc.nodes[row];
      double acc = 0.0;
      double tp = t; // t^{p+1}
      for (std::size_t p = 0; p < coef.size(); ++p) {
        acc += coef[p] * tp / static_cast<double>(p + 1);
        tp *= t;
      }
      q(row, j) = acc / denom;
    }
  }
  return q;
}

RealMatrix interpolation_matrix(const RealVector& src, const RealVector& dst) {
  const Eigen::Index m = src.size();
  if (m < 1) throw ParameterError("interpolation_matrix: empty source node set");
  for (Eigen::Index a = 0; a < m; ++a)
    for (Eigen::Index b = a + 1; b < m; ++b)
      if (std::abs(src[a] - src[b]) < 1e-12)
        throw NumericalError("interpolation_matrix: duplicate source nodes");

  const auto w = barycentric_weights(src);
  RealMatrix t(dst.size(), m);
  for (Eigen::Index i = 0; i < dst.size(); ++i) {
    const double x = dst[i];
    Eigen::Index hit = -1;
    for (Eigen::Index j = 0; j < m; ++j) {
      if (std::abs(x - src[j]) < 1e-13) {
        hit = j;
        break;
      }
    }
    if (hit >= 0) {
      t.row(i).setZero();
      t(i, hit) = 1.0;
      continue;
    }
    double denom = 0.0;
    for (Eigen::Index j = 0; j < m; ++j)
      denom += w[static_cast<std::size_t>(j)] / (x - src[j]);
    for (Eigen::Index j = 0; j < m; ++j)
      t(i, j) = (w[static_cast<std::size_t>(j)] / (x - src[j])) / denom;
  }
  return t;
}

} // namespace pintgfm
