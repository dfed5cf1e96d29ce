#include <set>

#include "doctest.h"
#include "equidecomp/matching.hpp"
#include "equidecomp/util.hpp"

using namespace eqd;

namespace {

// Independent maximum-matching oracle (Kuhn's algorithm), sharing nothing with
// the staged engine.
struct KuhnOracle {
  const Graphing& g;
  std::vector<std::uint32_t> match_r;
  std::vector<std::uint8_t> vis;

  explicit KuhnOracle(const Graphing& gg) : g(gg), match_r(gg.num_right(), kNoVertex) {}

  bool try_left(std::uint32_t l) {
    for (auto e : g.adj_left[l]) {
      std::uint32_t r = g.edges[e].r;
      if (vis[r]) continue;
      vis[r] = 1;
      if (match_r[r] == kNoVertex || try_left(g.edges[match_r[r]].l)) {
        match_r[r] = e;
        return true;
      }
    }
    return false;
  }

  std::size_t max_matching() {
    std::size_t total = 0;
    for (std::uint32_t l = 0; l < g.num_left(); ++l) {
      vis.assign(g.num_right(), 0);
      total += try_left(l) ? 1 : 0;
    }
    return total;
  }

  Matching as_matching() {
    Matching m;
    m.match_left.assign(g.num_left(), kNoVertex);
    m.match_right = match_r;
    for (std::uint32_t r = 0; r < match_r.size(); ++r) {
      if (match_r[r] != kNoVertex) m.match_left[g.edges[match_r[r]].l] = match_r[r];
    }
    return m;
  }
};

std::pair<SampledSet, SampledSet> random_disjoint_pair(const SpaceModel& t, Rng& rng,
                                                       std::size_t per_side) {
  std::vector<std::uint32_t> ids(t.size());
  for (std::uint32_t i = 0; i < ids.size(); ++i) ids[i] = i;
  for (std::size_t i = ids.size() - 1; i > 0; --i) std::swap(ids[i], ids[rng.below(i + 1)]);
  std::vector<std::uint8_t> ma(t.size(), 0), mb(t.size(), 0);
  for (std::size_t i = 0; i < per_side; ++i) {
    ma[ids[i]] = 1;
    mb[ids[per_side + i]] = 1;
  }
  return {from_mask(t, std::move(ma)), from_mask(t, std::move(mb))};
}

GeneratorSet random_words(const SpaceModel& t, Rng& rng, int count, int max_len) {
  GeneratorSet base = symmetrize(sl2z_generators());
  GeneratorSet tr = torus_translation_generators(t.q);
  base = dedup_union({&base, &tr});
  GeneratorSet out;
  for (int i = 0; i < count; ++i) {
    GroupElement g = identity_element(SpaceKind::torus2);
    int len = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_len)));
    for (int j = 0; j < len; ++j) {
      g = compose(g, base.elements[rng.below(base.elements.size())]);
    }
    out.elements.push_back(g);
  }
  return dedup_union({&out});
}

Graphing random_instance(const SpaceModel& t, Rng& rng, std::size_t per_side, int words,
                         int max_len) {
  auto [a, b] = random_disjoint_pair(t, rng, per_side);
  return bipartite_graphing(a, b, random_words(t, rng, words, max_len), false);
}

}  // namespace

TEST_CASE("translate pair matches perfectly after one stage") {
  SpaceModel t = build_model(ModelKind::rational_torus, 8, 0);
  SampledSet a = realize(t, pred_box2(0, 0, Rational(1, 2), Rational(1, 2)));
  GroupElement tau = torus_translation(Rational(1, 2), 0);
  GeneratorSet s;
  s.elements.push_back(tau);
  Graphing g = bipartite_graphing(a, apply_set(tau, a), s);
  auto [m, reports] = run_to_stage(g, 1);
  CHECK(matching_valid(g, m));
  CHECK(m.size() == g.num_left());
  CHECK(reports.size() == 1);
  CHECK(reports[0].unmatched_left_count == 0);
  CHECK(reports[0].unmatched_right_count == 0);
  CHECK(reports[0].flipped_edges == g.num_left());

  EquidecompositionCertificate cert = extract_equidecomposition(g, m);
  CHECK(cert.pieces.size() == 1);
  CHECK(cert.pieces[0].piece.mask == a.mask);
  CHECK(elements_equal(cert.pieces[0].motion, tau));
  CHECK(cert.residue_mass == 0.0);
  ValidationReport vr = validate_certificate(cert);
  CHECK(vr.ok);
}

TEST_CASE("staged matching reaches the oracle maximum on random instances") {
  SpaceModel t = build_model(ModelKind::rational_torus, 15, 0);
  Rng rng(2024, "hk-vs-kuhn");
  for (int trial = 0; trial < 12; ++trial) {
    Graphing g = random_instance(t, rng, 80, 5, 3);  // 160 vertices
    std::size_t oracle = KuhnOracle(g).max_matching();
    auto [m, reports] = run_to_stage(g, static_cast<int>(g.num_left() + 1));
    CHECK(matching_valid(g, m));
    CHECK(m.size() == oracle);
    // Monotone decay of unmatched mass.
    for (std::size_t i = 1; i < reports.size(); ++i) {
      CHECK(reports[i].unmatched_left_mass <= reports[i - 1].unmatched_left_mass + 1e-15);
    }
    // Balanced sides: equal unmatched masses at every stage.
    for (const auto& r : reports) {
      CHECK(r.unmatched_left_mass == r.unmatched_right_mass);
    }
  }
}

TEST_CASE("flip accounting obeys the stage bound") {
  SpaceModel t = build_model(ModelKind::rational_torus, 15, 0);
  Rng rng(4, "flips");
  for (int trial = 0; trial < 6; ++trial) {
    Graphing g = random_instance(t, rng, 70, 6, 2);
    double w = g.point_weight();
    double prev_unmatched =
        static_cast<double>(g.num_left() + g.num_right()) * w;  // X^0 union Y^0
    auto [m, reports] = run_to_stage(g, 12);
    for (const auto& rep : reports) {
      double bound = (2.0 * (rep.stage - 1) + 1.0) * prev_unmatched;
      CHECK(rep.flipped_edge_mass <= bound + 1e-12);
      prev_unmatched = rep.unmatched_left_mass + rep.unmatched_right_mass;
    }
  }
}

TEST_CASE("stage certificates verified by the standalone checker") {
  SpaceModel t = build_model(ModelKind::rational_torus, 13, 0);
  Rng rng(9, "stage-verify");
  Graphing g = random_instance(t, rng, 60, 5, 3);
  Matching m = empty_matching(g);
  for (int i = 1; i <= 6; ++i) {
    auto [next, rep] = advance_stage(g, m);
    m = std::move(next);
    CHECK(m.stage == i);
    CHECK(verify_no_short_augmenting_path(g, m, 2 * i - 1));
  }
}

TEST_CASE("verifier finds short witnesses and accepts maximum matchings") {
  SpaceModel t = build_model(ModelKind::rational_torus, 12, 0);
  Rng rng(17, "witness");
  for (int trial = 0; trial < 8; ++trial) {
    Graphing g = random_instance(t, rng, 50, 5, 3);
    if (g.edges.empty()) continue;

    Matching empty = empty_matching(g);
    AugmentingPathWitness w;
    CHECK_FALSE(verify_no_short_augmenting_path(g, empty, 1, &w));
    REQUIRE(w.edge_indices.size() == 1);
    const auto& e = g.edges[w.edge_indices[0]];
    CHECK(empty.match_left[e.l] == kNoVertex);
    CHECK(empty.match_right[e.r] == kNoVertex);

    KuhnOracle oracle(g);
    oracle.max_matching();
    Matching maxm = oracle.as_matching();
    CHECK(matching_valid(g, maxm));
    // Berge: maximum implies no augmenting path of any length.
    CHECK(verify_no_short_augmenting_path(g, maxm, static_cast<int>(2 * g.num_left() + 1)));
  }
}

TEST_CASE("witness paths alternate and improve the matching") {
  SpaceModel t = build_model(ModelKind::rational_torus, 12, 0);
  Rng rng(23, "witness-alt");
  Graphing g = random_instance(t, rng, 55, 4, 3);
  auto [m1, rep1] = advance_stage(g, empty_matching(g));
  AugmentingPathWitness w;
  if (!verify_no_short_augmenting_path(g, m1, 9, &w)) {
    REQUIRE(!w.edge_indices.empty());
    CHECK(w.edge_indices.size() % 2 == 1);
    CHECK(w.edge_indices.size() > static_cast<std::size_t>(2 * m1.stage - 1));
    // Ends free, interior alternates matched edges.
    const auto& first = g.edges[w.edge_indices.front()];
    const auto& last = g.edges[w.edge_indices.back()];
    CHECK(m1.match_left[first.l] == kNoVertex);
    CHECK(m1.match_right[last.r] == kNoVertex);
    for (std::size_t i = 0; i < w.edge_indices.size(); ++i) {
      bool should_be_matched = (i % 2) == 1;
      std::uint32_t e = w.edge_indices[i];
      bool is_matched = m1.match_left[g.edges[e].l] == e && m1.match_right[g.edges[e].r] == e;
      CHECK(is_matched == should_be_matched);
    }
  }
}

TEST_CASE("two perfectly matchable blocks end perfect") {
  SpaceModel t = build_model(ModelKind::rational_torus, 8, 0);
  SampledSet a1 = realize(t, pred_box2(0, 0, Rational(1, 4), Rational(1, 2)));
  SampledSet a2 = realize(t, pred_box2(0, Rational(1, 2), Rational(1, 4), 1));
  GroupElement t1 = torus_translation(Rational(1, 2), 0);
  GroupElement t2 = torus_translation(Rational(3, 8), 0);
  SampledSet b = set_union(apply_set(t1, a1), apply_set(t2, a2));
  GeneratorSet s;
  s.elements.push_back(t1);
  s.elements.push_back(t2);
  Graphing g = bipartite_graphing(set_union(a1, a2), b, s);
  std::size_t oracle = KuhnOracle(g).max_matching();
  CHECK(oracle == g.num_left());
  auto [m, reports] = run_to_stage(g, static_cast<int>(g.num_left()));
  CHECK(m.size() == g.num_left());
  EquidecompositionCertificate cert = extract_equidecomposition(g, m);
  CHECK(validate_certificate(cert).ok);
  CHECK(cert.pieces.size() <= s.elements.size());
}

TEST_CASE("alternating layer bookkeeping matches the proof identities") {
  SpaceModel t = build_model(ModelKind::rational_torus, 14, 0);
  Rng rng(41, "layers");
  Graphing g = random_instance(t, rng, 70, 5, 3);
  auto [m, reports] = run_to_stage(g, 3);
  REQUIRE(m.stage == 3);
  int depth_cap = 2 * m.stage - 1;
  auto layers = alternating_layers(g, m, true, depth_cap);

  std::size_t x0 = layers[0].count();  // the unmatched left mass X
  for (int j = 0; j + 1 <= depth_cap; ++j) {
    // B-side layer growth: X_{j+1} cap B = N(X_j cap A).
    VertexSet a_only = layers[j];
    std::fill(a_only.right.begin(), a_only.right.end(), 0);
    VertexSet n = neighborhood(g, a_only);
    CHECK(layers[j + 1].right == n.right);

    // A-side layer growth: |X_{j+1} cap A| = |X_j cap B| + |X|.
    std::size_t a_next = 0, b_cur = 0;
    for (auto v : layers[j + 1].left) a_next += v;
    for (auto v : layers[j].right) b_cur += v;
    CHECK(a_next == b_cur + x0);

    // Below stage depth every reachable right vertex is matched.
    for (std::uint32_t r = 0; r < g.num_right(); ++r) {
      if (layers[j].right[r]) CHECK(m.match_right[r] != kNoVertex);
    }
  }

  // Opposing trees are disjoint below the stage depth.
  auto from_right = alternating_layers(g, m, false, m.stage);
  const VertexSet& xl = layers[static_cast<std::size_t>(m.stage - 1)];
  const VertexSet& yr = from_right[static_cast<std::size_t>(m.stage)];
  for (std::uint32_t l = 0; l < g.num_left(); ++l) CHECK_FALSE(bool(xl.left[l] && yr.left[l]));
  for (std::uint32_t r = 0; r < g.num_right(); ++r) CHECK_FALSE(bool(xl.right[r] && yr.right[r]));
}

TEST_CASE("extraction partitions both sides up to the residue") {
  SpaceModel t = build_model(ModelKind::rational_torus, 13, 0);
  Rng rng(55, "extract");
  Graphing g = random_instance(t, rng, 65, 6, 3);
  auto [m, reports] = run_to_stage(g, static_cast<int>(g.num_left()));
  double w = g.point_weight();
  double residue = static_cast<double>(m.unmatched_left()) * w;
  if (residue > 0) {
    CHECK_THROWS(extract_equidecomposition(g, m, 0.0));
  }
  EquidecompositionCertificate cert = extract_equidecomposition(g, m, 1.0);
  CHECK(cert.residue_mass == residue);
  CHECK(cert.pieces.size() <= g.labels.elements.size());
  ValidationReport vr = validate_certificate(cert);
  if (!vr.ok) {
    for (const auto& f : vr.failures) MESSAGE(f);
  }
  CHECK(vr.ok);

  // Exhaustive partition replay, independent of the validator.
  std::vector<int> covered(t.size(), 0), image_covered(t.size(), 0);
  for (const auto& piece : cert.pieces) {
    SampledSet moved = apply_set(piece.motion, piece.piece);
    for (std::size_t i = 0; i < t.size(); ++i) {
      if (piece.piece.mask[i]) {
        CHECK(cert.source.mask[i] == 1);
        ++covered[i];
      }
      if (moved.mask[i]) {
        CHECK(cert.target.mask[i] == 1);
        ++image_covered[i];
      }
    }
  }
  for (std::size_t i = 0; i < t.size(); ++i) {
    CHECK(covered[i] <= 1);
    CHECK(image_covered[i] <= 1);
  }
}

TEST_CASE("validator rejects corrupted certificates") {
  SpaceModel t = build_model(ModelKind::rational_torus, 8, 0);
  SampledSet a = realize(t, pred_box2(0, 0, Rational(1, 2), Rational(1, 2)));
  GroupElement tau = torus_translation(Rational(1, 2), 0);
  GeneratorSet s;
  s.elements.push_back(tau);
  Graphing g = bipartite_graphing(a, apply_set(tau, a), s);
  auto [m, reports] = run_to_stage(g, 1);
  EquidecompositionCertificate cert = extract_equidecomposition(g, m);

  EquidecompositionCertificate bad = cert;
  bad.pieces[0].motion = torus_translation(Rational(1, 4), 0);  // wrong motion
  CHECK_FALSE(validate_certificate(bad).ok);

  EquidecompositionCertificate bad2 = cert;
  bad2.pieces[0].piece.mask[0] ^= 1;  // piece no longer partitions the source
  CHECK_FALSE(validate_certificate(bad2).ok);
}

TEST_CASE("certificate chaining composes motions") {
  SpaceModel t = build_model(ModelKind::rational_torus, 8, 0);
  SampledSet a = realize(t, pred_box2(0, 0, Rational(1, 4), Rational(1, 4)));
  GroupElement t1 = torus_translation(Rational(1, 2), 0);
  GroupElement t2 = torus_translation(0, Rational(1, 2));
  SampledSet b = apply_set(t1, a);
  SampledSet c = apply_set(t2, b);

  GeneratorSet s1, s2;
  s1.elements.push_back(t1);
  s2.elements.push_back(t2);
  auto [m1, r1] = run_to_stage(bipartite_graphing(a, b, s1), 1);
  auto [m2, r2] = run_to_stage(bipartite_graphing(b, c, s2), 1);
  EquidecompositionCertificate ab = extract_equidecomposition(bipartite_graphing(a, b, s1), m1);
  EquidecompositionCertificate bc = extract_equidecomposition(bipartite_graphing(b, c, s2), m2);

  EquidecompositionCertificate ac = chain_certificates(ab, bc);
  CHECK(ac.pieces.size() <= ab.pieces.size() * bc.pieces.size());
  CHECK(ac.residue_mass == 0.0);
  CHECK(validate_certificate(ac).ok);
  REQUIRE(ac.pieces.size() == 1);
  CHECK(elements_equal(ac.pieces[0].motion, compose(t2, t1)));
  CHECK(ac.source.mask == a.mask);
  CHECK(ac.target.mask == c.mask);
}

TEST_CASE("reports and certificates serialize with schema tags") {
  StageReport rep;
  rep.stage = 2;
  nlohmann::json jr = to_json(rep);
  CHECK(jr.at("schema") == "equidecomp.stage_report.v1");
  CHECK(jr.at("stage") == 2);

  SpaceModel t = build_model(ModelKind::rational_torus, 4, 0);
  SampledSet a = realize(t, pred_box2(0, 0, Rational(1, 2), Rational(1, 2)));
  GroupElement tau = torus_translation(Rational(1, 2), 0);
  GeneratorSet s;
  s.elements.push_back(tau);
  Graphing g = bipartite_graphing(a, apply_set(tau, a), s);
  auto [m, reports] = run_to_stage(g, 1);
  nlohmann::json jc = to_json(extract_equidecomposition(g, m));
  CHECK(jc.at("schema") == "equidecomp.certificate.v1");
  CHECK(jc.at("pieces").size() == 1);
  CHECK(jc.at("pieces")[0].at("points").size() == a.count());
}
