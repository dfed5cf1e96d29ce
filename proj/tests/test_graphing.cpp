#include <set>

#include "doctest.h"
#include "equidecomp/graphing.hpp"
#include "equidecomp/util.hpp"

using namespace eqd;

namespace {

// Random disjoint equal-size masks over the torus grid.
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

}  // namespace

TEST_CASE("translate pair gives a degree-one graphing") {
  SpaceModel t = build_model(ModelKind::rational_torus, 8, 0);
  SampledSet a = realize(t, pred_box2(0, 0, Rational(1, 2), Rational(1, 2)));
  GroupElement tau = torus_translation(Rational(1, 2), 0);
  SampledSet b = apply_set(tau, a);
  GeneratorSet s;
  s.elements.push_back(tau);
  Graphing g = bipartite_graphing(a, b, s);
  CHECK(g.num_left() == a.count());
  CHECK(g.num_right() == a.count());
  CHECK(g.edges.size() == a.count());
  CHECK(g.max_degree() == 1);
  REQUIRE(g.arrows.size() == 1);
  CHECK(g.arrows[0].domain.mask == a.mask);

  // N on the A side is the tau-image.
  VertexSet y = VertexSet::empty(g);
  for (std::uint32_t l = 0; l < g.num_left(); ++l)
    if (l % 3 == 0) y.left[l] = 1;
  VertexSet n = neighborhood(g, y);
  std::size_t expected = 0;
  for (std::uint32_t l = 0; l < g.num_left(); ++l) expected += y.left[l];
  std::size_t got = 0;
  for (auto v : n.right) got += v;
  CHECK(got == expected);
  for (std::uint32_t l = 0; l < g.num_left(); ++l) {
    if (!y.left[l]) continue;
    TorusPoint moved = eqd::apply(tau, t.torus_point(g.left_points[l]), t.q);
    CHECK(n.right[g.right_of_point[t.torus_index(moved)]] == 1);
  }
}

TEST_CASE("empty generator set gives no edges") {
  SpaceModel t = build_model(ModelKind::rational_torus, 4, 0);
  SampledSet a = realize(t, pred_box2(0, 0, Rational(1, 2), 1));
  SampledSet b = set_complement(a);
  Graphing g = bipartite_graphing(a, b, GeneratorSet{});
  CHECK(g.edges.empty());
  VertexSet all = VertexSet::empty(g);
  std::fill(all.left.begin(), all.left.end(), 1);
  CHECK(neighborhood(g, all).count() == 0);
}

TEST_CASE("edge set matches brute-force pair enumeration") {
  SpaceModel t = build_model(ModelKind::rational_torus, 12, 0);
  Rng rng(31, "graphing-oracle");
  for (int trial = 0; trial < 5; ++trial) {
    auto [a, b] = random_disjoint_pair(t, rng, 40);
    GeneratorSet s = random_words(t, rng, 6, 3);
    Graphing g = bipartite_graphing(a, b, s);

    std::set<std::tuple<std::uint32_t, std::uint32_t, int>> expected;
    for (std::size_t li = 0; li < s.elements.size(); ++li) {
      for (std::size_t x = 0; x < t.size(); ++x) {
        if (!a.mask[x]) continue;
        TorusPoint y = eqd::apply(s.elements[li], t.torus_point(x), t.q);
        std::size_t yi = t.torus_index(y);
        if (b.mask[yi]) {
          expected.insert({static_cast<std::uint32_t>(x), static_cast<std::uint32_t>(yi),
                           static_cast<int>(li)});
        }
      }
    }
    std::set<std::tuple<std::uint32_t, std::uint32_t, int>> got;
    for (const auto& e : g.edges) {
      got.insert({g.left_points[e.l], g.right_points[e.r], e.label});
    }
    CHECK(got == expected);
    CHECK(g.max_degree() <= s.elements.size());
  }
}

TEST_CASE("inverse arrows describe the same undirected edges") {
  SpaceModel t = build_model(ModelKind::rational_torus, 9, 0);
  Rng rng(77, "graphing-sym");
  auto [a, b] = random_disjoint_pair(t, rng, 25);
  GeneratorSet s = symmetrize(random_words(t, rng, 4, 2));
  Graphing fwd = bipartite_graphing(a, b, s);

  // Inverse direction: arrows (y, gamma^-1) out of B must give the transposed
  // edge set.
  GeneratorSet sinv;
  for (const auto& e : s.elements) sinv.elements.push_back(inverse(e));
  Graphing bwd = bipartite_graphing(b, a, sinv);
  std::set<std::pair<std::uint32_t, std::uint32_t>> fset, bset;
  for (const auto& e : fwd.edges) fset.insert({fwd.left_points[e.l], fwd.right_points[e.r]});
  for (const auto& e : bwd.edges) bset.insert({bwd.right_points[e.r], bwd.left_points[e.l]});
  CHECK(fset == bset);
}

TEST_CASE("neighborhood agrees with an adjacency-list oracle") {
  SpaceModel t = build_model(ModelKind::rational_torus, 10, 0);
  Rng rng(5, "nbhd");
  auto [a, b] = random_disjoint_pair(t, rng, 30);
  GeneratorSet s = random_words(t, rng, 5, 3);
  Graphing g = bipartite_graphing(a, b, s);

  VertexSet y = VertexSet::empty(g);
  for (std::uint32_t l = 0; l < g.num_left(); ++l) y.left[l] = rng.below(2);
  for (std::uint32_t r = 0; r < g.num_right(); ++r) y.right[r] = rng.below(2);

  VertexSet oracle = VertexSet::empty(g);
  for (std::uint32_t l = 0; l < g.num_left(); ++l) {
    if (!y.left[l]) continue;
    for (auto e : g.adj_left[l]) oracle.right[g.edges[e].r] = 1;
  }
  for (std::uint32_t r = 0; r < g.num_right(); ++r) {
    if (!y.right[r]) continue;
    for (auto e : g.adj_right[r]) oracle.left[g.edges[e].l] = 1;
  }
  VertexSet got = neighborhood(g, y);
  CHECK(got.left == oracle.left);
  CHECK(got.right == oracle.right);
  CHECK(neighborhood(g, VertexSet::empty(g)).count() == 0);
}

TEST_CASE("overlapping sides are rejected unless doubled") {
  SpaceModel t = build_model(ModelKind::rational_torus, 6, 0);
  SampledSet a = realize(t, pred_box2(0, 0, Rational(2, 3), 1));
  SampledSet b = realize(t, pred_box2(Rational(1, 3), 0, 1, 1));
  GeneratorSet s = with_identity(GeneratorSet{});
  s.elements.push_back(torus_translation(Rational(1, 3), 0));
  CHECK_THROWS_AS(bipartite_graphing(a, b, s), std::invalid_argument);
  Graphing g = bipartite_graphing(a, b, s, /*doubled=*/true);
  CHECK(g.doubled);
  CHECK(g.edges.size() > 0);
}

TEST_CASE("graphing json export") {
  SpaceModel t = build_model(ModelKind::rational_torus, 5, 0);
  SampledSet a = realize(t, pred_box2(0, 0, Rational(2, 5), 1));
  SampledSet b = set_complement(a);
  GeneratorSet s = torus_translation_generators(5);
  Graphing g = bipartite_graphing(a, b, s);
  nlohmann::json j = to_json(g);
  CHECK(j.at("schema") == "equidecomp.graphing.v1");
  CHECK(j.at("edges").size() == g.edges.size());
  CHECK(j.at("left").size() == g.num_left());
  CHECK(j.at("labels").at("elements").size() == s.elements.size());
}
