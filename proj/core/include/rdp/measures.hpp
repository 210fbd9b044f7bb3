#pragma once

#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "rdp/elliptic.hpp"
#include "rdp/grid.hpp"
#include "rdp/sparse.hpp"

namespace rdp {

struct ZeroMeasure {};

/// Nonnegative density f dx, optionally restricted to a node set.
struct DensityMeasure {
  Field density;
  std::optional<NodeSet> support;
};

/// The measure that is +infinity on every set meeting `set`: encodes u = 0 on `set`.
struct ObstacleMeasure {
  NodeSet set;
};

using Measure = std::variant<ZeroMeasure, DensityMeasure, ObstacleMeasure>;

/// Signed density g dx used as right-hand side data.
struct SignedDensity {
  Field density;
};

/// Validates f >= 0 and wraps it. Throws MeasureError on a negative or non-finite sample.
Measure make_density(Field f);

bool is_zero(const Measure& mu);
bool is_obstacle(const Measure& mu);
std::string describe(const Measure& mu);

/// mu restricted to E: densities get their support intersected with E, obstacles
/// their set.
Measure restrict(const Measure& mu, const NodeSet& e);

enum class MassScheme {
  // Diagonal: node i receives f_c h^N / 2^N from every cell c around it, f_c the
  // mean of the corner samples. Only nodes in the support count.
  lumped,
  // Full Q1 mass on cells having at least one corner in the support.
  consistent,
};

/// Matrix of integral u v dmu over the space nodes. Zero for the zero measure;
/// throws MeasureError for an obstacle measure, which is a constraint.
CsrMatrix mass_matrix(const FemSpace& space, const Measure& mu,
                      MassScheme scheme = MassScheme::lumped);

/// Load vector b_i = integral of g phi_i with the lumped cell rule, over space nodes.
std::vector<double> load_vector(const FemSpace& space, const SignedDensity& nu);

/// Lumped node masses m_i of a density measure over every grid node (zero outside
/// the support). Zero and obstacle measures give all zeros.
std::vector<double> lumped_node_mass(const Grid& grid, const Measure& mu);

enum class KatoKernel { riesz, logarithmic };

struct KatoNorm {
  double value = 0.0;
  Ball ball;
  KatoKernel kernel = KatoKernel::riesz;
  double rescale = 0.0;  // L0 of the logarithmic kernel; 0 for the Riesz kernel
  std::size_t argmax = 0;
};

/// sup over nodes x in the ball of sum over cells c (center in the ball) of
/// |g(y_c)| k(|y_c - x|) h^N, with k = 1/r (N = 3) or log(L0/r) (N = 2). The cells
/// around x are replaced by the volume-equivalent ball centred at x and integrated
/// exactly. `rescale` is L0 and must be at least the ball diameter when N = 2.
KatoNorm kato_norm(const SignedDensity& nu, const Ball& ball, double rescale = 0.0);

/// Kato norms over concentric balls of decreasing radius. For N = 2 the same L0
/// (default 4 * largest radius) is used for every ball so the values are comparable.
std::vector<KatoNorm> kato_vanishing_profile(const SignedDensity& nu, const Point& center,
                                             std::span<const double> radii, double rescale = 0.0);

}  // namespace rdp
