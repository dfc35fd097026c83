#pragma once

#include <string>

#include "pintgfm/linalg.hpp"

namespace pintgfm {

/// Families of normalized block nodes on (0, 1].  Equidistant nodes are
/// m/M (left-exclusive); EquidistantLeftInclusive spans {0, ..., 1} with
/// uniform spacing; Lobatto-Legendre also includes tau = 0.  All families
/// place the last node at tau = 1.
enum class NodeFamily { Equidistant, EquidistantLeftInclusive, LobattoLegendre, RadauRight };

std::string to_string(NodeFamily family);
NodeFamily node_family_from_string(const std::string& name);

/// Normalized node set of one time block: M strictly increasing nodes with
/// tau_M = 1.
struct BlockDiscretization {
  NodeFamily family = NodeFamily::Equidistant;
  RealVector nodes;

  int size() const { return static_cast<int>(nodes.size()); }
};

/// Builds the node set for a family.  Lobatto-Legendre requires M >= 2;
/// its interior nodes are the roots of P'_{M-1} mapped from [-1,1] to [0,1].
/// Radau-right nodes are the right-Radau quadrature points on (0, 1].
BlockDiscretization generate_nodes(NodeFamily family, int num_nodes);

/// Matrix of integrated Lagrange basis polynomials: entry (m, j) is the
/// exact integral of l_j from 0 to tau_m, computed from the monomial
/// expansion of the basis.
RealMatrix lagrange_integration_coefficients(const BlockDiscretization& disc);

/// Lagrange interpolation matrix from src nodes to dst points, entry
/// (i, j) = l_j(dst_i), evaluated with the barycentric formula.  Reproduces
/// polynomials up to degree |src|-1 exactly.
RealMatrix interpolation_matrix(const RealVector& src, const RealVector& dst);

inline RealMatrix interpolation_matrix(const BlockDiscretization& src,
                                       const BlockDiscretization& dst) {
  return interpolation_matrix(src.nodes, dst.nodes);
}

} // namespace pintgfm
