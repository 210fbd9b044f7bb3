#pragma once

#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "rdp/elliptic.hpp"
#include "rdp/green.hpp"
#include "rdp/grid.hpp"
#include "rdp/measures.hpp"
#include "rdp/wiener.hpp"

namespace rdp {

struct GreenWeightOptions {
  double rel_tol = 1e-8;
  /// Largest Green ball radius, in coarse cells, solved on one grid. 0 picks 256
  /// (N = 2) or 40 (N = 3).
  double radius_budget = 0.0;
};

/// Green functions G^{x0} on the balls B_{2r/q}(x0), sampled on a fine grid.
///
/// Balls wider than the budget are solved on a coarser grid with spacing h 2^j;
/// the result then supplies Dirichlet data on a common ball B_s(x0), s = 2 r_max,
/// for a fine solve with the averaged load of radius 2h. Smaller balls are solved
/// directly on the fine grid. One coarse grid serves every radius, so the weights
/// keep the domain monotonicity of the exact Green functions.
class GreenWeights {
 public:
  GreenWeights(const Grid& fine, const Point& x0, double q, double r_max,
               const EllipticCoefficients& coeffs, GreenWeightOptions opts = {});

  /// Fine-grid Green function for B_{2r/q}(x0); zero outside the solved ball.
  const Field& at(double r);

  double q() const { return q_; }
  double coarse_spacing() const { return coarse_h_; }
  double common_radius() const { return s_; }
  double residual() const { return residual_; }

 private:
  Grid fine_;
  Point x0_;
  double q_;
  double r_max_;
  double s_;
  double coarse_h_;
  EllipticCoefficients coeffs_;
  GreenWeightOptions opts_;
  std::unique_ptr<Grid> coarse_;
  std::unique_ptr<GreenSolver> common_;
  std::map<double, Field> cache_;
  double residual_ = 0.0;
};

struct LocalEnergy {
  double value = 0.0;     // V(r)
  double sup_u2 = 0.0;
  double grad_term = 0.0;
  double mu_term = 0.0;
  double excluded = 0.0;  // unweighted Dirichlet energy of the cells skipped near x0
};

/// V(r) = sup_{B_r} u^2 + integral_{B_r} |Du|^2 G + integral_{B_r} u^2 G dmu with
/// G = G^{x0} on B_{2r/q}(x0). Cells (and nodes) within 2h of x0 are left out of
/// the weighted sums; their plain energy is reported as `excluded`.
LocalEnergy local_energy_V(const Field& u, const Point& x0, double r, const Measure& mu,
                           GreenWeights& weights);
/// Convenience form building its own weights (q = 1/8 unless given).
LocalEnergy local_energy_V(const Field& u, const Point& x0, double r, const Measure& mu,
                           const EllipticCoefficients& coeffs, double q = 0.125,
                           double rel_tol = 1e-8);

/// E_mu(r) = integral_{B_r} |Du|^2 + integral_{B_r} u^2 dmu (cells with center in
/// B_r; lumped node masses for densities; obstacle terms are 0 when u vanishes on
/// the obstacle and infinite otherwise).
double mu_energy(const Field& u, const Point& x0, double r, const Measure& mu);

struct EnergyProfile {
  Point x0{};
  double q = 0.125;
  std::vector<double> radii;  // decreasing
  std::vector<double> V;
  std::vector<double> E_mu;
  std::vector<double> sup_u2;
  std::vector<double> excluded;
  std::vector<double> kato;  // ||nu||_{K_N(B_r)} per radius
  double coarse_green_h = 0.0;
  bool monotone = true;  // V nondecreasing in r within 5 rel_tol
};

/// Evaluates V, E_mu and Kato norms on every radius with shared Green weights.
EnergyProfile energy_profile(const Field& u, const Point& x0, std::span<const double> radii,
                             const Measure& mu, const SignedDensity& nu,
                             const EllipticCoefficients& coeffs, double q = 0.125,
                             double rel_tol = 1e-8, GreenWeightOptions gopts = {});

struct FitRow {
  double r = 0.0;
  double R = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;  // bound with the chosen (k, beta)
  bool training = false;
  bool pass = true;
};

struct EstimateFit {
  double k = 0.0;           // smallest k passing every pair at the chosen beta
  double beta = 0.0;
  bool found = false;       // some beta has k <= k_cap
  double max_ratio = 0.0;   // max lhs / rhs over all pairs at the chosen (k, beta)
  double beta_max = 0.0;    // largest beta with k <= k_cap
  double k_train = 0.0;     // k fitted on the training pairs alone, chosen beta
  /// max over validation pairs of lhs / (k_train bound); above 1 means the
  /// training fit does not carry over to the held-out radii.
  double generalization = 0.0;
  std::vector<FitRow> rows;
  std::vector<double> k_by_beta;  // passing k for beta = 0.1, 0.2, ..., 2.0
};

/// One (r, R) pair of an estimate lhs <= k (omega^beta a + b); i and j index the
/// radii of r and R.
struct PairTerms {
  std::size_t i = 0;
  std::size_t j = 0;
  double lhs = 0.0;
  double a = 0.0;
  double b = 0.0;
  double omega = 1.0;
};

/// Grid search over beta in {0.1, ..., 2.0}. For each beta the passing k is the
/// max over all pairs of lhs / (omega^beta a + b), 0/0 read as 0; the smallest one
/// wins. Radii alternate between training and validation (a pair belongs to the
/// set of its outer radius R); the training-only fit is reported with its error
/// on the validation pairs.
EstimateFit fit_estimate(std::span<const double> radii, std::span<const PairTerms> pairs,
                         double k_cap = 1e6);

/// Theorem-style estimate V(r) <= k omega(r, R)^beta V(R) + k ||nu||^2_{K_N(B_R)}
/// over all pairs r < R of the profile radii. `wiener` must sample the same radii.
EstimateFit verify_theorem_3_1(const EnergyProfile& e, const WienerProfile& wiener,
                               double k_cap = 1e6);

struct DecayReport {
  bool refused = false;  // the point was not classified as a Wiener point
  std::string reason;
  std::vector<double> rho;
  std::vector<double> osc;
  std::vector<double> mean_abs;
  bool osc_decreasing = true;
  bool v_strictly_decreasing = true;
  double osc_ratio = 0.0;   // finest / coarsest
  double mean_ratio = 0.0;  // finest / coarsest mean |u|
  EstimateFit energy_fit;   // fit of the mu-energy display
};

struct MuEnergyInputs {
  std::vector<double> E_2R;      // E_mu(2R) for each radius R of the profile
  std::vector<double> cap_2R4R;  // Cap_mu(B_2R, B_4R)
  std::vector<double> kato_2R;   // ||nu||_{K_N(B_2R)}
};

/// Continuity and mu-energy decay at a Wiener point: oscillation and mean |u|
/// over B_rho(x0) for the profile radii, V decrease, and the fit of
/// E_mu(r) <= k omega^beta r^{N-2} / Cap_mu(B_2R, B_4R) E_mu(2R) + k r^{N-2} ||nu||.
DecayReport verify_theorem_3_2(const Field& u, const EnergyProfile& e,
                               const WienerProfile& wiener, Verdict verdict,
                               const MuEnergyInputs& inputs, double k_cap = 1e6);

/// Collects E_mu(2R), Cap_mu(B_2R, B_4R) and the Kato norms on B_2R for the radii.
/// Radii whose B_4R(x0) leaves the grid box get NaN entries and are skipped by
/// verify_theorem_3_2.
MuEnergyInputs mu_energy_inputs(const Field& u, const Point& x0, std::span<const double> radii,
                                const Measure& mu, const SignedDensity& nu,
                                const EllipticCoefficients& coeffs, double rel_tol = 1e-8);

struct IntegrationBound {
  double beta = 0.0;
  double k0 = 0.0;
  std::vector<double> rho;        // R q^j
  std::vector<double> bound;      // closed form at rho_j
  std::vector<double> recursion;  // V(R) prod_{i<j} 1 / (1 + k delta_i)
  bool dominated = true;          // V_j <= bound_j and recursion_j <= bound_j
};

/// Closed form k0 exp(-beta |log q|^{-1} integral_r^R delta drho/rho) V(R) with
/// beta = k / (1 + k), k0 = e^beta, for the value of the integral.
double integration_lemma_bound(double k, double q, double integral, double v_R);

/// Checks V(q rho_j) <= V(rho_j) / (1 + k delta_j) on samples V_j = V(R q^j) (throws
/// Error "hypothesis violated" otherwise) and evaluates the bound at every level,
/// with delta constant on each interval (rho_{j+1}, rho_j].
IntegrationBound integration_lemma(std::span<const double> v, std::span<const double> delta,
                                   double q, double k, double R = 1.0);

struct LemmaReport {
  double sup_u = 0.0;         // sup_{B_qR} |u|
  double annulus_mean = 0.0;  // R^{-N} integral_{B_R - B_qR} u^2
  double kato = 0.0;          // ||nu||_{K_N(B_R)}
  double v_qR = 0.0;
  double k_sup = 0.0;         // smallest k for the sup bound
  double k_energy = 0.0;      // smallest k for the V(qR) bound
  bool degenerate = false;    // both sides vanish
};

/// Sup and energy bounds on B_qR by the annulus mean of u^2 and the Kato norm.
LemmaReport verify_lemmas_3_1_3_2(const Field& u, const Point& x0, double R, double q_lemma,
                                  const Measure& mu, const SignedDensity& nu,
                                  GreenWeights& weights);

}  // namespace rdp
