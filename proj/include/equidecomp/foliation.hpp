#pragma once

#include "equidecomp/expansion.hpp"
#include "equidecomp/group.hpp"
#include "equidecomp/rational.hpp"
#include "equidecomp/space.hpp"

#include <json.hpp>

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace eqd {

// Radial foliation of the solid annulus 1 <= ||y|| <= rho, rho = 1 + sqrt2/2:
// Z = [1, rho] carries the length measure nu, the leaf of y is z(y) = ||y||,
// each leaf sphere carries surface measure normalized to mu_z(Y_z) = 4 pi z^2,
// and solid Lebesgue mass disintegrates as mu(U) = int_Z mu_z(U) dz.
// Leaves are discretized into uniform shell bins.
struct Foliation {
  double z_lo = 1.0;
  double z_hi = 1.0;
  int bins = 32;
  double m_bound = 0;  // M with M >= mu_z(Y) >= 1/M and M >= nu(Z) >= 1/M

  double length() const { return z_hi - z_lo; }
  double bin_width() const { return length() / bins; }
  double bin_lo(int b) const { return z_lo + b * bin_width(); }
  double bin_mid(int b) const { return z_lo + (b + 0.5) * bin_width(); }
  // -1 when z falls outside [z_lo, z_hi]; the right endpoint joins the last bin.
  int bin_of(double z) const;

  static Foliation annulus(int bins = 32);
};

double annulus_rho();
double leaf_of(const Vec3& y);  // ||y||
double leaf_area(double z);     // mu_z(Y_z) = 4 pi z^2

// Disintegration audit: per shell bin, the Monte Carlo leaf mass estimate
// (bin solid mass / bin width) against the analytic 4 pi z^2, and the bins'
// nu-weighted sum against the model's total mass.
struct FoliationBin {
  double z_lo = 0, z_hi = 0;
  std::size_t samples = 0;
  double mu_z_estimate = 0;
  double mu_z_analytic = 0;
  double confidence = 0;  // 99% half-width on the estimate
  bool pass = false;
};

struct FoliationReport {
  std::vector<FoliationBin> bins;
  double total_estimate = 0;  // sum of bin width * mu_z_estimate
  double total_analytic = 0;
  double model_total = 0;
  bool pass = false;

  nlohmann::json to_json() const;
};

FoliationReport foliation_consistency(const SpaceModel& annulus,
                                      const Foliation& fol);

// The unit-cube diffuser of the annulus: lower face A at height h = sqrt2/2
// with its corners on Y_1, upper face B tangent to Y_rho, and the quarter
// turn f in the (x, z) plane about the cube center, which carries face A to
// the +x side wall.  The four side walls are equivalent by symmetry.
struct CubeDiffuser {
  std::array<Vec3, 8> vertices;  // first 4 = face A, last 4 = face B
  std::array<Vec3, 4> face_a;
  std::array<Vec3, 4> face_b;
  GroupElement f;
  double d_constant = 0.5;  // Lemma 4.10 diffusion constant

  double height() const;  // h, the height of face A
  bool contains(const Vec3& p) const;
};

CubeDiffuser construct_cube();

// Deterministic geometry audit, all identities checked to 1e-12:
// h = sqrt2/2, h + 1 = rho, |corner of A| = 1, face B tangent at (0,0,rho),
// angle(tangent plane of Y_z, plane of A) at the corners of A exactly pi/4
// and <= pi/4 at every sampled cube point, f isometric with f(A) on the
// +x wall and f(K) = K.
struct CubeGeometryReport {
  double h = 0;
  double rho_closure_residual = 0;      // |h + 1 - rho|
  double corner_norm_residual = 0;      // max | |corner| - 1 |
  double tangency_residual = 0;         // | |(0,0,rho)| - rho | under face B
  double corner_angle_residual = 0;     // max |angle(corner) - pi/4|
  double max_interior_angle = 0;        // over sampled K cap Y points
  double f_orthogonality_residual = 0;
  double f_wall_residual = 0;           // max |x'(f(a)) - 1/2| over face A
  double f_cube_residual = 0;           // max distance of f(vertex) to a vertex
  bool pass = false;

  nlohmann::json to_json() const;
};

CubeGeometryReport check_cube_geometry(const CubeDiffuser& k,
                                       int angle_samples = 20000,
                                       std::uint64_t seed = 0);

// Union of closed subintervals of [1, rho].
using ZSubset = std::vector<std::pair<double, double>>;
bool z_subset_contains(const ZSubset& r, double z);

// Monte Carlo check of mu_z(f(K_R)) >= 1/2 mu(K_R) per shell bin
// (the diffuser inequality).  The model supplies Lebesgue samples of the
// cube (cube_cloud) or of the annulus (annulus_cloud); only samples in
// K intersect Y are used.
struct DiffuserBin {
  double z_lo = 0, z_hi = 0;
  std::size_t samples = 0;         // model samples resolving this bin
  double mu_z_f_kr = 0;            // estimated mu_z(f(K_R)) at the bin
  double confidence = 0;
  double margin = 0;               // mu_z_f_kr - required
  bool pass = false;
};

struct DiffuserReport {
  double mu_kr = 0;                // estimated mu(K_R)
  double mu_kr_confidence = 0;
  double required = 0;             // d_constant * mu_kr
  double max_mu_z_k = 0;           // max over bins of estimated mu_z(K)
  double worst_margin = 0;
  std::size_t usable_samples = 0;  // samples in K intersect Y
  std::vector<DiffuserBin> bins;
  bool pass = false;

  nlohmann::json to_json() const;
};

// errors: throws when a bin resolves fewer samples than min_bin_samples
// (bin too thin for statistical resolution at this model size).
DiffuserReport diffuser_check(const CubeDiffuser& k, const SpaceModel& model,
                              const ZSubset& r, const Foliation& fol,
                              std::size_t min_bin_samples = 50);

// Largest delta in (0, D) with delta |T| M / (D - delta) <= epsilon; the
// closed-form maximum is eps D / (|T| M + eps).  With D = 1/2 and |T| = 1 the
// returned delta is eps/(4M), the form the piece-bound chain quotes.
struct DeltaSolution {
  double delta = 0;      // value used downstream
  double delta_max = 0;  // exact feasibility boundary
  double lhs = 0;        // delta |T| M / (D - delta) at the returned delta
  bool paper_form = false;

  nlohmann::json to_json() const;
};

DeltaSolution solve_delta(double d_const, double m, std::size_t t_size,
                          double eps);

// eps := eta/(3 M^2), delta := solve_delta(1/2, M, 1, eps), and the two beta
// conventions in circulation: the piece-bound chain uses beta = delta * eps
// = eta^2/(36 M^5) while the composition proposition literally sets
// beta := delta eps / (2M) = eta^2/(72 M^6).  `beta` carries the former;
// both are reported.
struct ComposedParams {
  double eta = 0, m = 0;
  double epsilon = 0;
  double delta = 0;
  double beta = 0;          // eta^2 / (36 M^5)
  double beta_literal = 0;  // eta^2 / (72 M^6)

  nlohmann::json to_json() const;
};

ComposedParams composed_expander_params(double eta, double m);

// coefficient * 5^exponent with the exponent carried exactly (big integer)
// when available, else as a 100-digit float.  Comparisons normalize the
// coefficient into [1, 5) so they are exact at the exponent level.
struct BigBound {
  double coefficient = 1;
  bool exact_exponent = false;
  BigInt exponent_int = 0;
  BigFloat exponent = 0;  // always valid

  static BigBound from_int_exp(double coeff, const BigInt& e);
  static BigBound from_float_exp(double coeff, const BigFloat& e);

  BigFloat log10_value() const;
  nlohmann::json to_json() const;
};

// -1, 0, +1.
int compare(const BigBound& a, const BigBound& b);
inline bool operator<(const BigBound& a, const BigBound& b) { return compare(a, b) < 0; }

// The eta-expanding-set size chain for the annulus, fully evaluated in
// 100-digit floats under natural log:
//   three_term = 36*5^{e_b + e_d} + 6*5^{e_b} + 6*5^{e_d},
//     with e_x = |ln x| / ln(1 + x/24) at x = beta, delta,
//   paper_bound = 38*5^{2 e_b}               (uses beta < delta),
//   middle_form = 38*5^{48*2^32 |4 ln eta - 64| / eta^2},
//   stated_final = 38*5^{3*2^37 |ln eta - 16| / eta^2}   (as printed),
//   recomputed_final = 38*5^{3*2^38 |ln eta - 16| / eta^2}.
// The arithmetic of the chain gives 3*2^38; the printed exponent halves it.
// Both are reported, with per-step comparison flags.
struct SizeBoundLedger {
  double eta = 0;
  ComposedParams params;
  BigFloat e_beta = 0, e_delta = 0;
  BigBound term_pair, term_beta, term_delta;
  BigFloat three_term_log10 = 0;
  BigBound paper_bound;
  BigBound middle_form;
  BigBound stated_final;
  BigBound recomputed_final;
  BigFloat stated_final_exponent_log2 = 0;  // same formula under log base 2
  bool three_term_below_paper_bound = false;
  bool paper_bound_below_middle = false;
  bool middle_equals_recomputed = false;
  bool stated_matches_chain = false;  // expected false: factor 2 in exponent

  nlohmann::json to_json() const;
};

SizeBoundLedger expander_size_bound(double eta);

// Constant ledger for the cube-vs-ball piece count: every constant of the
// final assembly, its recomputation, and the exact confirmation that
// log_5(38) + 90*2^60 < 2^72.
struct TarskiLedger {
  double rho = 0;
  double cube_side = 0;             // sqrt(6)/6
  double cube_side_residual = 0;    // vs (rho - 1)/sqrt(3)
  double covering_value = 0;        // (2 rho / cube_side)^3
  double covering_bound = 800;
  bool covering_ok = false;
  std::size_t t_prime_bound = 800;
  std::size_t t_bound = 6400;       // 8 ball copies per cube
  double eta = 0;                   // 1/12800
  bool eta_below_2_pow_14 = false;  // printed claim; arithmetic says no
  BigBound s_bound_stated;          // stated formula at eta = 1/12800
  BigBound s_bound_recomputed;      // factor-corrected chain at the same eta
  BigBound final_stated;            // 38*5^{90*2^60}
  BigBound final_cap;               // 5^{2^72}
  bool final_inequality_ok = false; // log_5 38 + 90*2^60 < 2^72, exact
  BigFloat stated_vs_chain_ratio = 0;  // 90*2^60 vs the chain's exponent
  // Sphere variant: 1/6-expanding set and piece count.
  BigBound sphere_gap_set;          // 6*5^277 as printed
  BigBound sphere_pieces;           // 24*5^277
  BigInt sphere_min_l = 0;          // minimal exponent from the recipe (255)
  BigBound sphere_recomputed;       // 6*5^{min_l - 1}
  bool sphere_stated_covers_recomputed = false;

  nlohmann::json to_json() const;
  std::string to_markdown() const;
};

TarskiLedger tarski_piece_bound();

// Symbolic S_beta T S_delta u S_beta T u S_delta recipe for the annulus:
// leaf-wise word-product specifications at levels beta and delta over the
// quaternion rotation set, diffuser T = {f}.
struct AnnulusExpanderRecipe {
  double eta = 0, m = 0;
  ComposedParams params;
  ExpanderRecipe s_beta;
  ExpanderRecipe s_delta;
  std::size_t t_size = 1;
  BigBound term_pair, term_beta, term_delta;  // |S_b||T||S_d|, |S_b||T|, |S_d|
  BigFloat total_log10 = 0;                   // log10 of the three-term sum
  bool enumerable = false;

  nlohmann::json to_json() const;
};

AnnulusExpanderRecipe annulus_expander(double eta,
                                       std::size_t max_enumeration = (1u << 18));

}  // namespace eqd
