#pragma once

#include "equidecomp/certificate.hpp"
#include "equidecomp/expansion.hpp"
#include "equidecomp/graphing.hpp"
#include "equidecomp/matching.hpp"

#include <json.hpp>

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace eqd {

// Open-core reduction: a certificate that A is equidecomposable to A' u C,
// where C is an open core shrunk inside C' until the translates gamma.C,
// gamma in T, are pairwise disjoint.  Pieces follow
// A_i := (gamma_i.C n A) \ union_{j<i} gamma_i gamma_j^{-1}.A_j with
// gamma_0 = e, plus the remainder A'.
struct OpenReduction {
  EquidecompositionCertificate certificate;  // source A, target A' u C
  SetPredicate core;                         // the shrunk C
  std::vector<SetPredicate> piece_predicates;  // A_0..A_k, then A'
  std::vector<GroupElement> motions;           // gamma_i^{-1} per piece, e last
  int core_halfwidth = 0;  // box half-width in grid cells after shrinking
  int shrink_steps = 0;
  bool union_is_core = false;  // union of gamma_i^{-1}.A_i equals C, exactly

  nlohmann::json to_json() const;
};

// pre: exact torus model; T symmetric and containing e; C' nonempty and
// covered by T.A on the model (witness error otherwise).
OpenReduction reduce_to_open(const SpaceModel& model, const SetPredicate& a,
                             const GeneratorSet& t, const SetPredicate& c_prime);

// Doubled problem: A in copy 0, B in copy 1, S lifted across copies.  Always
// legal; required when A and B intersect.
Graphing disjointify(const SampledSet& a, const SampledSet& b,
                     const GeneratorSet& s);

// Where the expansion constant c comes from.  "dense" and "power" compute the
// finite-model gap of `base`; "cited" takes cited_c on trust and the
// certificate is flagged accordingly.
struct GapSourceSpec {
  std::string kind = "dense";  // "dense" | "power" | "cited"
  GeneratorSet base;           // word generators for the expander search
  double cited_c = 0.0;
  int max_word_length = 4;  // R grows through word balls up to this length

  nlohmann::json to_json() const;
};

struct EquidecomposeOptions {
  GapSourceSpec gap;
  double eta_safety = 0.9;  // eta = safety * min(mu(A)/3mu(C), 1/(2|T|))
  int stage_cap = 64;
  double residue_threshold = 0.0;
  std::uint64_t seed = 0;
  int family_boxes_per_scale = 3;

  nlohmann::json to_json() const;
};

struct EquidecomposeResult {
  EquidecompositionCertificate certificate;
  ValidationReport validation;
  ExpansionReport expansion;
  GapEstimate gap;
  double eta = 0;
  int expander_word_length = 0;  // ball radius of R that passed verification
  GeneratorSet r, s;             // R and S = TR u RT
  std::vector<StageReport> stages;
  bool doubled = false;
  bool ok = false;  // validation passed and residue within threshold

  nlohmann::json to_json() const;
};

// Full pipeline: check masses and mutual covering, pick eta, find an
// eta-expanding word ball R for C = A u B over gap.base, form S = TR u RT,
// build the (doubled when needed) graphing, run staged matching until
// exhaustion or the stage cap, extract and independently validate.
//
// errors: measure mismatch or covering failure (invalid_argument with
// witness); expansion verification failure or residue above threshold
// (runtime_error naming the failing test set).
EquidecomposeResult equidecompose(const SpaceModel& model, const SetPredicate& a,
                                  const SetPredicate& b,
                                  const GeneratorSet& cover_t,
                                  const EquidecomposeOptions& options = {});

// Deterministic exact-box test family used to verify expansion on the torus:
// A, B, their boolean combinations, dyadic boxes at several scales and
// positions, strips and split unions.
std::vector<SetPredicate> expansion_test_family(std::int64_t q,
                                                const SetPredicate& a,
                                                const SetPredicate& b,
                                                int boxes_per_scale,
                                                std::uint64_t seed);

// "sl2z" | "translations" | "lps" (q ignored except for translations).
GeneratorSet named_generators(const std::string& name, std::int64_t q);

// A single experiment: model, the pair of predicates, the covering set and
// every pipeline knob.  Identical config implies identical reports.
struct ExperimentConfig {
  ModelKind model_kind = ModelKind::rational_torus;
  std::int64_t model_size = 32;
  std::uint64_t model_seed = 0;
  SetPredicate a, b;
  GeneratorSet cover;
  EquidecomposeOptions options;

  nlohmann::json to_json() const;
};

ExperimentConfig experiment_from_json(const nlohmann::json& j);

// Owns the built model so the certificate's model pointer stays valid for the
// life of the run.
struct ExperimentRun {
  std::shared_ptr<SpaceModel> model;
  EquidecomposeResult result;
};

ExperimentRun run_experiment(const ExperimentConfig& cfg);

}  // namespace eqd
