#pragma once

#include "equidecomp/group.hpp"
#include "equidecomp/rational.hpp"
#include "equidecomp/space.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace eqd {

// Markov averaging operator of a finite symmetric generator multiset Q acting
// on a rational torus grid: (T_Q f)(x) = (1/|Q|) sum_{g in Q} f(g.x).
//
// Invariant: Q symmetric (closed under inverses, with multiplicity), so T_Q is
// self-adjoint for the uniform inner product and its spectrum is real.
struct AveragingOperator {
  const SpaceModel* model = nullptr;
  GeneratorSet generators;
  // One grid permutation per generator; perms[k][i] is the index of g_k . x_i.
  std::vector<std::vector<std::uint32_t>> perms;
  // Orbit partition of the grid under the group generated by Q.
  // orbit_of[i] in [0, orbit_count); orbit_size[orbit_of[i]] is its cardinality.
  std::vector<std::uint32_t> orbit_of;
  std::vector<std::uint32_t> orbit_size;

  std::size_t size() const { return model ? model->size() : 0; }
  std::size_t orbit_count() const { return orbit_size.size(); }

  // out[i] = (1/|Q|) sum_k in[perms[k][i]].  Deterministic sharded parallelism.
  void apply(const std::vector<double>& in, std::vector<double>& out) const;

  // Subtracts the per-orbit mean from v, i.e. projects onto the orthogonal
  // complement of the subspace of T_Q-fixed functions.
  void project_mean_zero(std::vector<double>& v) const;
};

AveragingOperator make_averaging_operator(const SpaceModel& model,
                                          const GeneratorSet& generators);

// Spectral gap c of T_Q on the orthogonal complement of its fixed functions
// (functions constant on every orbit): c = 1 - ||T_Q restricted there||.
//
// Convention: when the complement is trivial (every orbit is a singleton, so
// T_Q is the identity) the operator mixes nothing and the gap is reported as 0.
struct GapEstimate {
  double c = 0.0;
  double norm = 1.0;        // operator norm on the mean-zero complement
  double residual = 0.0;    // worst final successive Rayleigh difference
  int iterations = 0;       // most iterations used by any restart
  int restarts = 0;
  bool converged = false;   // every restart met the tolerance

  nlohmann::json to_json() const;
};

// Power iteration on T_Q^2 (squaring makes the target eigenvalue nonnegative
// so negative edge eigenvalues are still detected).  Restarts are seeded
// deterministically from `seed`; each runs until the Rayleigh quotient moves
// by less than `tolerance` between iterations or `max_iterations` is hit.
GapEstimate estimate_gap(const AveragingOperator& op, int restarts = 10,
                         int max_iterations = 500, double tolerance = 1e-9,
                         std::uint64_t seed = 0);

// Exact finite-model gap: dense symmetric eigensolve of the n x n matrix of
// T_Q with every orbit indicator deflated to eigenvalue 0.  O(n^3); intended
// for grids up to roughly n = 11000.
GapEstimate dense_gap(const AveragingOperator& op);

// Closed-form mean-zero norm of the +/-1 axis translation operator on the
// q x q torus grid: characters diagonalize it with eigenvalues
// (cos(2 pi a / q) + cos(2 pi b / q)) / 2, so the norm is cos(pi/q) for odd q
// and 1 for even q (the grid is bipartite under single-step translations).
double translation_grid_norm(std::int64_t q);

// eta-expansion witness set R = Q^l: the minimal l with
// (1 + c * eta / |Q|)^l > 1/eta makes every exactly-l product set of an
// eta/(something) family expanding; see boundary_growth below for the chaining.
struct ExpanderRecipe {
  BigInt l = 0;             // minimal exponent
  double growth_factor = 0; // 1 + c * eta / |Q|
  bool enumerated = false;  // true when the word set fit under the cap
  GeneratorSet words;       // exactly-l products, only when enumerated
  // Size accounting, valid in both modes: the exactly-l reduced-word count in
  // a free product is |Q| * (|Q|-1)^(l-1); log10 of that bound.
  BigFloat word_bound_log10 = 0;

  nlohmann::json to_json() const;
};

// pre: c in (0,1], eta in (0,1).  Enumerates Q^l through word_products when
// the reduced-word bound stays at or below max_enumeration, otherwise returns
// the symbolic recipe.
ExpanderRecipe build_expander(const GeneratorSet& q, double c, double eta,
                              std::size_t max_enumeration = (1u << 18));

// Direct check of the expansion inequality
//   mu(R.U intersect C) >= min((1 - eta) mu(C), mu(U) / eta)
// for every supplied test set U (each is intersected with C first).
struct ExpansionTest {
  std::string description;
  double mu_u = 0;
  double mu_saturation = 0; // mu(R.U intersect C)
  double required = 0;
  double margin = 0;        // mu_saturation - required
  double confidence = 0;    // statistical slack; 0 on exact models
  bool pass = false;
};

struct ExpansionReport {
  double eta = 0;
  std::size_t r_size = 0;
  double mu_c = 0;
  std::vector<ExpansionTest> tests;
  double worst_margin = 0;
  bool pass = false;

  nlohmann::json to_json() const;
  // One "mu_u,mu_saturation,required,pass" row per test, for plotting.
  std::string plot_csv() const;
};

ExpansionReport verify_expansion(const SpaceModel& model, const SampledSet& c,
                                 const GeneratorSet& r, double eta,
                                 const std::vector<SetPredicate>& family);

// Exact pair statistics of a set Y on the product space (grid) x Q:
// p_ab = fraction of pairs (x, g) with 1_Y(x) = a and 1_Y(g.x) = b.
// Symmetry of Q forces p10 = p01 exactly ((x,g) <-> (g.x, g^-1) is a
// measure-preserving involution swapping the two classes).
struct EdgeStatistics {
  Rational m;       // mu(Y)
  Rational p11, p10, p01, p00;
  // Squared mass of the orbit-invariant component of 1_Y - m; the sharp lower
  // bound is p10 >= c * (m(1-m) - invariant_mass) and the invariant term
  // vanishes exactly when Y is balanced across every orbit.
  Rational invariant_mass;

  double m_d() const { return to_double(m); }
  double p11_d() const { return to_double(p11); }
  double p10_d() const { return to_double(p10); }
  double p01_d() const { return to_double(p01); }
  double p00_d() const { return to_double(p00); }

  nlohmann::json to_json() const;
};

EdgeStatistics edge_statistics(const AveragingOperator& op,
                               const SampledSet& y);

// Exact-rational check of p10 >= c * m * (1 - m) (c converted exactly from
// its double bits).  Adversarial sets concentrated on tiny orbits can fail
// this plain form while satisfying the deflation-corrected one.
bool edge_bound_holds(const EdgeStatistics& s, double c);
bool edge_bound_holds_deflated(const EdgeStatistics& s, double c);

// One-step boundary mass bound mu(Q.Y \ Y) >= p10 / |Q|.
double boundary_lower_bound(const EdgeStatistics& s, std::size_t q_size);

// Iterating the p10 bound: mu(Q^(i+1).Y) >= (1 + c eta / |Q|) mu(Q^i.Y) while
// mu stays below 1 - eta; returns the measures mu(Q^i.Y) for i = 0..steps.
std::vector<double> boundary_growth(const AveragingOperator& op,
                                    const SampledSet& y, int steps);

}  // namespace eqd
