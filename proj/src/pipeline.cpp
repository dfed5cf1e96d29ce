#include "equidecomp/pipeline.hpp"

#include "equidecomp/util.hpp"

#include <algorithm>
#include <set>
#include <sstream>
#include <stdexcept>
#include <utility>

namespace eqd {

namespace {

std::string point_string(const SpaceModel& m, std::size_t idx) {
  TorusPoint p = m.torus_point(idx);
  std::ostringstream os;
  os << "(" << p.a << "/" << m.q << ", " << p.b << "/" << m.q << ")";
  return os.str();
}

// Cells a in [a0, a0+wa) x b in [b0, b0+wb) mod q as an exact predicate;
// wraps across the torus seam into up to four half-open rational boxes.
SetPredicate torus_cell_box(std::int64_t q, std::int64_t a0, std::int64_t b0,
                            std::int64_t wa, std::int64_t wb) {
  wa = std::min(wa, q);
  wb = std::min(wb, q);
  a0 = ((a0 % q) + q) % q;
  b0 = ((b0 % q) + q) % q;
  std::vector<std::pair<std::int64_t, std::int64_t>> asegs, bsegs;
  if (a0 + wa <= q) {
    asegs.emplace_back(a0, a0 + wa);
  } else {
    asegs.emplace_back(a0, q);
    asegs.emplace_back(0, a0 + wa - q);
  }
  if (b0 + wb <= q) {
    bsegs.emplace_back(b0, b0 + wb);
  } else {
    bsegs.emplace_back(b0, q);
    bsegs.emplace_back(0, b0 + wb - q);
  }
  std::vector<SetPredicate> parts;
  for (const auto& [alo, ahi] : asegs)
    for (const auto& [blo, bhi] : bsegs)
      parts.push_back(pred_box2(Rational(alo, q), Rational(blo, q), Rational(ahi, q),
                                Rational(bhi, q)));
  return parts.size() == 1 ? parts.front() : pred_union(std::move(parts));
}

// Union of the exact images gamma.S over the generator set, as a point mask.
std::vector<std::uint8_t> orbit_cover(const GeneratorSet& gens, const SampledSet& s) {
  std::vector<std::uint8_t> cov(s.mask.size(), 0);
  for (const GroupElement& g : gens.elements) {
    SampledSet img = apply_set(g, s);
    for (std::size_t i = 0; i < cov.size(); ++i) cov[i] |= img.mask[i];
  }
  return cov;
}

}  // namespace

// ---------------------------------------------------------------------------
// Open-core reduction (pieces A_i per the gamma_i gamma_j^-1 subtraction).

OpenReduction reduce_to_open(const SpaceModel& model, const SetPredicate& a,
                             const GeneratorSet& t, const SetPredicate& c_prime) {
  if (model.kind != ModelKind::rational_torus)
    throw std::invalid_argument("reduce_to_open: exact torus model required");
  if (t.size() == 0) throw std::invalid_argument("reduce_to_open: empty covering set");
  if (!is_symmetric(t))
    throw std::invalid_argument("reduce_to_open: covering set must be symmetric");

  // Enumerate T with the identity first.
  std::vector<GroupElement> gammas;
  for (const GroupElement& g : t.elements)
    if (is_identity(g)) {
      gammas.push_back(g);
      break;
    }
  if (gammas.empty())
    throw std::invalid_argument("reduce_to_open: covering set must contain the identity");
  for (const GroupElement& g : t.elements)
    if (!is_identity(g)) gammas.push_back(g);

  SampledSet aset = realize(model, a);
  SampledSet cprime = realize(model, c_prime);
  if (cprime.empty()) throw std::invalid_argument("reduce_to_open: C' is empty on this grid");

  std::vector<std::uint8_t> cov = orbit_cover(t, aset);
  for (std::size_t i = 0; i < cprime.mask.size(); ++i)
    if (cprime.contains(i) && !cov[i])
      throw std::runtime_error("reduce_to_open: C' not covered by T.A; witness point " +
                               point_string(model, i));

  // A point whose T-translates are pairwise distinct; its cell seeds the core.
  const std::int64_t q = model.q;
  std::size_t x_idx = cprime.mask.size();
  for (std::size_t i = 0; i < cprime.mask.size() && x_idx == cprime.mask.size(); ++i) {
    if (!cprime.contains(i)) continue;
    std::set<std::pair<std::int64_t, std::int64_t>> seen;
    bool distinct = true;
    for (const GroupElement& g : gammas) {
      TorusPoint p = eqd::apply(g, model.torus_point(i), q);
      distinct = distinct && seen.insert({p.a, p.b}).second;
    }
    if (distinct) x_idx = i;
  }
  if (x_idx == cprime.mask.size())
    throw std::runtime_error(
        "reduce_to_open: no point of C' has pairwise-distinct images under T");

  // Shrink a box around x until the T-translates of the core are pairwise
  // disjoint; the single cell always succeeds because the translates of x
  // are distinct.
  TorusPoint x = model.torus_point(x_idx);
  OpenReduction out;
  std::int64_t half = q / 8;
  for (;; half /= 2, ++out.shrink_steps) {
    SetPredicate box =
        torus_cell_box(q, x.a - half, x.b - half, 2 * half + 1, 2 * half + 1);
    SetPredicate core = pred_intersection({box, c_prime});
    SampledSet core_set = realize(model, core);
    std::vector<SampledSet> translates;
    for (const GroupElement& g : gammas) translates.push_back(apply_set(g, core_set));
    bool disjoint = true;
    for (std::size_t i = 0; i < translates.size() && disjoint; ++i)
      for (std::size_t j = i + 1; j < translates.size() && disjoint; ++j)
        disjoint = sets_disjoint(translates[i], translates[j]);
    if (disjoint) {
      out.core = core;
      out.core_halfwidth = static_cast<int>(half);
      break;
    }
    if (half == 0)
      throw std::logic_error("reduce_to_open: single-cell core translates collide");
  }

  // A_0 := C n A;  A_i := (gamma_i.C n A) \ union_{j<i} gamma_i gamma_j^-1.A_j.
  std::vector<SetPredicate>& preds = out.piece_predicates;
  preds.push_back(pred_intersection({out.core, a}));
  for (std::size_t i = 1; i < gammas.size(); ++i) {
    SetPredicate base = pred_intersection({transported(out.core, gammas[i]), a});
    std::vector<SetPredicate> shadows;
    for (std::size_t j = 0; j < i; ++j)
      shadows.push_back(transported(preds[j], compose(gammas[i], inverse(gammas[j]))));
    preds.push_back(pred_difference(std::move(base), pred_union(std::move(shadows))));
  }
  SetPredicate leftover = pred_difference(a, pred_union(preds));
  preds.push_back(leftover);

  for (std::size_t i = 0; i < gammas.size(); ++i) out.motions.push_back(inverse(gammas[i]));
  out.motions.push_back(identity_element(SpaceKind::torus2));

  EquidecompositionCertificate& cert = out.certificate;
  cert.model = &model;
  cert.source = aset;
  std::vector<std::uint8_t> target_mask(model.size(), 0);
  std::vector<std::uint8_t> core_image(model.size(), 0);
  for (std::size_t i = 0; i < preds.size(); ++i) {
    CertificatePiece piece;
    piece.piece = realize(model, preds[i]);
    piece.motion = out.motions[i];
    piece.label = static_cast<int>(i);
    SampledSet moved = apply_set(piece.motion, piece.piece);
    for (std::size_t k = 0; k < target_mask.size(); ++k) {
      target_mask[k] |= moved.mask[k];
      if (i + 1 < preds.size()) core_image[k] |= moved.mask[k];
    }
    cert.pieces.push_back(std::move(piece));
  }
  cert.target = from_mask(model, std::move(target_mask));
  cert.residue_mass = 0;
  cert.validation_mode = "exact";
  cert.metadata = {{"construction", "open-core reduction"},
                   {"citation", "Lemma 3.5 / Eq. (3.3)"},
                   {"t_size", t.size()},
                   {"core_halfwidth", out.core_halfwidth},
                   {"shrink_steps", out.shrink_steps}};

  out.union_is_core = core_image == realize(model, out.core).mask;
  return out;
}

nlohmann::json OpenReduction::to_json() const {
  return {{"schema", "equidecomp.open_reduction.v1"},
          {"citation", "Lemma 3.5 / Eq. (3.3)"},
          {"piece_count", certificate.piece_count()},
          {"core_halfwidth", core_halfwidth},
          {"shrink_steps", shrink_steps},
          {"union_is_core", union_is_core},
          {"source_mass", certificate.source.measure()},
          {"target_mass", certificate.target.measure()},
          {"core", eqd::to_json(core)},
          {"validation_mode", certificate.validation_mode}};
}

// ---------------------------------------------------------------------------

Graphing disjointify(const SampledSet& a, const SampledSet& b, const GeneratorSet& s) {
  return bipartite_graphing(a, b, s, /*doubled=*/true);
}

// ---------------------------------------------------------------------------

std::vector<SetPredicate> expansion_test_family(std::int64_t q, const SetPredicate& a,
                                                const SetPredicate& b, int boxes_per_scale,
                                                std::uint64_t seed) {
  std::vector<SetPredicate> fam{a, b, pred_intersection({a, b}), pred_difference(a, b),
                                pred_difference(b, a)};
  Rng rng(seed, "expansion-family");
  for (int k = 1; k <= 4; ++k) {
    std::int64_t cells = std::max<std::int64_t>(1, q >> k);
    for (int i = 0; i < boxes_per_scale; ++i) {
      auto a0 = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(q)));
      auto b0 = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(q)));
      fam.push_back(torus_cell_box(q, a0, b0, cells, cells));
    }
  }
  fam.push_back(torus_cell_box(q, 0, 0, 1, q));  // one column of cells
  fam.push_back(torus_cell_box(q, 0, 0, q, 1));  // one row
  std::int64_t c = std::max<std::int64_t>(1, q / 8);
  fam.push_back(pred_union(
      {torus_cell_box(q, 0, 0, c, c), torus_cell_box(q, q / 2, q / 2, c, c)}));
  fam.push_back(torus_cell_box(q, static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(q))),
                               static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(q))), 1, 1));
  return fam;
}

GeneratorSet named_generators(const std::string& name, std::int64_t q) {
  if (name == "sl2z") return sl2z_generators();
  if (name == "translations") return torus_translation_generators(q);
  if (name == "lps") return lps_generators();
  throw std::invalid_argument("named_generators: unknown set '" + name + "'");
}

// ---------------------------------------------------------------------------

nlohmann::json GapSourceSpec::to_json() const {
  return {{"kind", kind},
          {"base", eqd::to_json(base)},
          {"cited_c", cited_c},
          {"max_word_length", max_word_length}};
}

nlohmann::json EquidecomposeOptions::to_json() const {
  return {{"gap", gap.to_json()},
          {"eta_safety", eta_safety},
          {"stage_cap", stage_cap},
          {"residue_threshold", residue_threshold},
          {"seed", seed},
          {"family_boxes_per_scale", family_boxes_per_scale}};
}

nlohmann::json EquidecomposeResult::to_json() const {
  nlohmann::json stage_list = nlohmann::json::array();
  for (const StageReport& sr : stages) stage_list.push_back(eqd::to_json(sr));
  nlohmann::json failures = nlohmann::json::array();
  for (const std::string& f : validation.failures) failures.push_back(f);
  return {{"schema", "equidecomp.pipeline_result.v1"},
          {"citation", "Thm. 3.3"},
          {"ok", ok},
          {"doubled", doubled},
          {"eta", eta},
          {"gap", gap.to_json()},
          {"expander_word_length", expander_word_length},
          {"r_size", r.size()},
          {"s_size", s.size()},
          {"stage_count", stages.size()},
          {"stages", stage_list},
          {"residue_mass", certificate.residue_mass},
          {"piece_count", certificate.piece_count()},
          {"validation", {{"ok", validation.ok}, {"failures", failures}}},
          {"expansion", expansion.to_json()}};
}

EquidecomposeResult equidecompose(const SpaceModel& model, const SetPredicate& a,
                                  const SetPredicate& b, const GeneratorSet& cover_t,
                                  const EquidecomposeOptions& options) {
  if (model.kind != ModelKind::rational_torus)
    throw std::invalid_argument("equidecompose: exact torus model required");
  if (cover_t.size() == 0) throw std::invalid_argument("equidecompose: empty covering set");
  if (!is_symmetric(cover_t))
    throw std::invalid_argument("equidecompose: covering set must be symmetric");

  SampledSet aset = realize(model, a);
  SampledSet bset = realize(model, b);
  if (aset.empty()) throw std::invalid_argument("equidecompose: A is empty on this grid");
  if (aset.count() != bset.count()) {
    std::ostringstream os;
    os << "equidecompose: measure mismatch: mu(A) = " << aset.measure()
       << ", mu(B) = " << bset.measure();
    throw std::invalid_argument(os.str());
  }
  SampledSet cset = set_union(aset, bset);

  for (const auto& [side, name] : {std::pair{&aset, "A"}, std::pair{&bset, "B"}}) {
    std::vector<std::uint8_t> cov = orbit_cover(cover_t, *side);
    for (std::size_t i = 0; i < cov.size(); ++i)
      if (cset.contains(i) && !cov[i])
        throw std::runtime_error(std::string("equidecompose: C not covered by T.") + name +
                                 "; witness point " + point_string(model, i));
  }

  // Unnormalized form of the eta constraint: eta < min(mu(A)/3mu(C), 1/2|T|).
  EquidecomposeResult res;
  res.eta = options.eta_safety *
            std::min(aset.measure() / (3.0 * cset.measure()),
                     1.0 / (2.0 * static_cast<double>(cover_t.size())));

  const GapSourceSpec& gs = options.gap;
  if (gs.base.size() == 0)
    throw std::invalid_argument("equidecompose: gap source needs base generators");
  if (!is_symmetric(gs.base))
    throw std::invalid_argument("equidecompose: gap base must be symmetric");
  bool cited = false;
  if (gs.kind == "dense") {
    res.gap = dense_gap(make_averaging_operator(model, gs.base));
  } else if (gs.kind == "power") {
    res.gap = estimate_gap(make_averaging_operator(model, gs.base), 10, 2000, 1e-9,
                           options.seed);
  } else if (gs.kind == "cited") {
    if (!(gs.cited_c > 0.0) || gs.cited_c > 1.0)
      throw std::invalid_argument("equidecompose: cited gap must lie in (0, 1]");
    res.gap.c = gs.cited_c;
    res.gap.norm = 1.0 - gs.cited_c;
    res.gap.converged = true;
    cited = true;
  } else {
    throw std::invalid_argument("equidecompose: unknown gap source kind '" + gs.kind + "'");
  }

  // Smallest word ball of the base that verifies as eta-expanding for C.
  std::vector<SetPredicate> family =
      expansion_test_family(model.q, a, b, options.family_boxes_per_scale, options.seed);
  GeneratorSet ball;
  res.expander_word_length = -1;
  for (int l = 1; l <= gs.max_word_length && res.expander_word_length < 0; ++l) {
    GeneratorSet exact_l = word_products(gs.base, l);
    ball = (l == 1) ? exact_l : dedup_union({&ball, &exact_l});
    res.r = with_identity(symmetrize(ball));
    res.expansion = verify_expansion(model, cset, res.r, res.eta, family);
    if (res.expansion.pass) res.expander_word_length = l;
  }
  if (res.expander_word_length < 0) {
    const ExpansionTest* worst = nullptr;
    for (const ExpansionTest& tst : res.expansion.tests)
      if (!tst.pass && (worst == nullptr || tst.margin < worst->margin)) worst = &tst;
    std::ostringstream os;
    os << "equidecompose: no word ball up to length " << gs.max_word_length
       << " is eta-expanding for C (eta = " << res.eta << ")";
    if (worst != nullptr)
      os << "; worst test '" << worst->description << "' short by " << -worst->margin;
    throw std::runtime_error(os.str());
  }

  // S := TR u RT; T is inside S because R contains the identity.
  GeneratorSet tr, rt;
  for (const GroupElement& tel : cover_t.elements)
    for (const GroupElement& rel : res.r.elements) {
      tr.elements.push_back(compose(tel, rel));
      rt.elements.push_back(compose(rel, tel));
    }
  res.s = dedup_union({&tr, &rt});

  res.doubled = !sets_disjoint(aset, bset);
  Graphing g = bipartite_graphing(aset, bset, res.s, res.doubled);
  Matching m = empty_matching(g);
  while (m.unmatched_left() > 0 &&
         static_cast<int>(res.stages.size()) < options.stage_cap) {
    auto [next, report] = advance_stage(g, m);
    m = std::move(next);
    res.stages.push_back(report);
  }

  res.certificate = extract_equidecomposition(g, m, options.residue_threshold);
  res.certificate.metadata["pipeline"] = {
      {"citation", "Thm. 3.3"},
      {"eta", res.eta},
      {"eta_rule", "safety * min(mu(A)/(3 mu(C)), 1/(2|T|))"},
      {"eta_safety", options.eta_safety},
      {"gap", res.gap.to_json()},
      {"gap_source", gs.kind},
      {"gap_taken_on_trust", cited},
      {"expander_word_length", res.expander_word_length},
      {"r_size", res.r.size()},
      {"s_size", res.s.size()},
      {"expansion_worst_margin", res.expansion.worst_margin},
      {"bridge", "R symmetrized and identity adjoined before forming S = TR u RT"},
      {"doubled", res.doubled},
      {"seed", options.seed}};
  res.validation = validate_certificate(res.certificate);
  res.ok = res.validation.ok &&
           res.certificate.residue_mass <= options.residue_threshold + 1e-15;
  return res;
}

// ---------------------------------------------------------------------------

nlohmann::json ExperimentConfig::to_json() const {
  return {{"schema", "equidecomp.experiment.v1"},
          {"model",
           {{"kind", to_string(model_kind)}, {"size", model_size}, {"seed", model_seed}}},
          {"a", eqd::to_json(a)},
          {"b", eqd::to_json(b)},
          {"cover", eqd::to_json(cover)},
          {"options", options.to_json()}};
}

namespace {

GeneratorSet generators_from_json_or_name(const nlohmann::json& j, std::int64_t q) {
  if (j.is_string()) return named_generators(j.get<std::string>(), q);
  return generator_set_from_json(j);
}

}  // namespace

ExperimentConfig experiment_from_json(const nlohmann::json& j) {
  ExperimentConfig cfg;
  const nlohmann::json& m = j.at("model");
  cfg.model_kind = model_kind_from_string(m.at("kind").get<std::string>());
  cfg.model_size = m.at("size").get<std::int64_t>();
  cfg.model_seed = m.value("seed", std::uint64_t{0});
  cfg.a = predicate_from_json(j.at("a"));
  cfg.b = predicate_from_json(j.at("b"));
  cfg.cover = generators_from_json_or_name(j.at("cover"), cfg.model_size);
  if (j.contains("options")) {
    const nlohmann::json& o = j.at("options");
    if (o.contains("gap")) {
      const nlohmann::json& gj = o.at("gap");
      cfg.options.gap.kind = gj.value("kind", std::string("dense"));
      if (gj.contains("base"))
        cfg.options.gap.base = generators_from_json_or_name(gj.at("base"), cfg.model_size);
      cfg.options.gap.cited_c = gj.value("cited_c", 0.0);
      cfg.options.gap.max_word_length = gj.value("max_word_length", 4);
    }
    cfg.options.eta_safety = o.value("eta_safety", 0.9);
    cfg.options.stage_cap = o.value("stage_cap", 64);
    cfg.options.residue_threshold = o.value("residue_threshold", 0.0);
    cfg.options.seed = o.value("seed", std::uint64_t{0});
    cfg.options.family_boxes_per_scale = o.value("family_boxes_per_scale", 3);
  }
  return cfg;
}

ExperimentRun run_experiment(const ExperimentConfig& cfg) {
  ExperimentRun run;
  run.model = std::make_shared<SpaceModel>(
      build_model(cfg.model_kind, cfg.model_size, cfg.model_seed));
  run.result = equidecompose(*run.model, cfg.a, cfg.b, cfg.cover, cfg.options);
  return run;
}

}  // namespace eqd
