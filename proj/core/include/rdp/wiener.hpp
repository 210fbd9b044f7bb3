#pragma once

#include <string>
#include <vector>

#include "rdp/elliptic.hpp"
#include "rdp/grid.hpp"
#include "rdp/measures.hpp"

namespace rdp {

struct WienerOptions {
  double q_w = 0.5;        // ratio between consecutive radii
  double rel_tol = 1e-8;
  double min_rho_cells = 4.0;  // radii below min_rho_cells * h are dropped with a warning
  /// Use the Laplacian for the denominator capacity instead of the operator itself.
  bool laplacian_denominator = false;
  MassScheme mass = MassScheme::lumped;
};

/// delta(rho_k) = Cap_mu(B_rho, B_2rho) / Cap(B_rho, B_2rho) on radii rho_k = R q_w^k,
/// and the partial integrals I(rho_k, R) = integral_{rho_k}^R delta drho / rho
/// (trapezoid in log rho) with omega = exp(-I).
struct WienerProfile {
  Point x0{};
  double R = 0.0;
  double q_w = 0.5;
  double h = 0.0;
  double rel_tol = 1e-8;
  std::vector<double> rho;  // decreasing, rho[0] = R
  std::vector<double> cap_mu;
  std::vector<double> cap;
  std::vector<double> delta_raw;
  std::vector<double> delta;  // clamped to [0, 1]
  std::vector<double> integral;
  std::vector<double> omega;
  std::size_t clamp_events = 0;
  /// True when a raw delta left [-5 rel_tol, 1 + 5 rel_tol]: a discretization defect.
  bool clamp_violation = false;
  std::vector<std::string> warnings;
};

/// Builds a profile from delta samples on the radii R q_w^k (k = 0..n-1).
WienerProfile profile_from_delta(const Point& x0, double R, double q_w,
                                 std::vector<double> delta);

/// Requires B_2R(x0) inside the grid box.
WienerProfile delta_profile(const Grid& grid, const Point& x0, double R, int levels,
                            const Measure& mu, const EllipticCoefficients& coeffs,
                            WienerOptions opts = {});

/// I(r, R) with delta linear in log rho between samples. Throws GeometryError
/// when r or R leaves the sampled range or r > R.
double wiener_integral(const WienerProfile& p, double r, double R);
double wiener_modulus(const WienerProfile& p, double r, double R);

enum class Verdict { wiener_point, not_wiener_point, inconclusive };
const char* to_string(Verdict v);

struct ClassifierOptions {
  double min_slope = 0.05;       // increment of I over the finest dyadic level
  double max_rel_drift = 0.05;   // |delta_h - delta_h/2| / delta_h
  double max_abs_drift = 0.1;
  int tail_levels = 3;           // levels compared for drift
};

struct Classification {
  Verdict verdict = Verdict::inconclusive;
  double slope_coarse = 0.0;
  double slope_fine = 0.0;
  double rel_drift = 0.0;  // signed mean of (delta_h - delta_h/2) / delta_h on the tail
  double abs_drift = 0.0;  // max |delta_h - delta_h/2| on the tail
  std::string reason;
};

/// Finite-resolution heuristic for the Wiener condition from profiles at h and h/2.
Classification classify_point(const WienerProfile& coarse, const WienerProfile& fine,
                              ClassifierOptions opts = {});

struct BoundaryWienerProfile {
  WienerProfile classical;  // numerator Cap(B_rho minus interior(Omega), B_2rho)
  WienerProfile relaxed;    // numerator Cap_mu with mu the complement obstacle
  std::vector<double> gap;  // relative difference of the two numerators per level
  bool identity_holds = true;
};

/// Wiener profile of the Dirichlet problem on `inner` at a boundary point, computed
/// both classically and through the relaxed problem on `outer` with the obstacle
/// outer minus interior(inner); the two numerators must agree within 5 rel_tol.
BoundaryWienerProfile boundary_wiener_modulus(const NodeSet& inner, const NodeSet& outer,
                                              const Point& x0, double R, int levels,
                                              const EllipticCoefficients& coeffs,
                                              WienerOptions opts = {});

}  // namespace rdp
