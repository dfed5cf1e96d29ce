#include "equidecomp/graphing.hpp"

#include <algorithm>

namespace eqd {

std::size_t Graphing::max_degree() const {
  std::size_t d = 0;
  for (const auto& a : adj_left) d = std::max(d, a.size());
  for (const auto& a : adj_right) d = std::max(d, a.size());
  return d;
}

Graphing bipartite_graphing(const SampledSet& a, const SampledSet& b, const GeneratorSet& s,
                            bool doubled) {
  if (a.model != b.model) throw std::invalid_argument("sides live on different models");
  const SpaceModel& m = *a.model;
  if (m.kind != ModelKind::rational_torus) {
    throw std::invalid_argument("graphings require an exact model");
  }
  if (!doubled && !sets_disjoint(a, b)) {
    throw std::invalid_argument("sides intersect; disjointify first");
  }

  Graphing g;
  g.model = &m;
  g.left = a;
  g.right = b;
  g.doubled = doubled;
  g.labels = s;

  g.left_of_point.assign(m.size(), kNoVertex);
  g.right_of_point.assign(m.size(), kNoVertex);
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (a.mask[i]) {
      g.left_of_point[i] = static_cast<std::uint32_t>(g.left_points.size());
      g.left_points.push_back(static_cast<std::uint32_t>(i));
    }
    if (b.mask[i]) {
      g.right_of_point[i] = static_cast<std::uint32_t>(g.right_points.size());
      g.right_points.push_back(static_cast<std::uint32_t>(i));
    }
  }

  for (std::size_t li = 0; li < s.elements.size(); ++li) {
    const GroupElement& gamma = s.elements[li];
    auto perm = torus_permutation(gamma, m.q);
    BorelArrow arrow;
    arrow.element = gamma;
    arrow.label = static_cast<int>(li);
    arrow.domain.model = &m;
    arrow.domain.mask.assign(m.size(), 0);
    for (std::size_t x = 0; x < m.size(); ++x) {
      if (!a.mask[x]) continue;
      std::uint32_t y = perm[x];
      if (!b.mask[y]) continue;
      arrow.domain.mask[x] = 1;
      g.edges.push_back({g.left_of_point[x], g.right_of_point[y], arrow.label});
    }
    g.arrows.push_back(std::move(arrow));
  }

  // Deterministic adjacency: edges sorted by (left, right, label); per-vertex
  // lists then come out ordered by partner id, then label.
  std::sort(g.edges.begin(), g.edges.end(), [](const Graphing::Edge& x, const Graphing::Edge& y) {
    return std::tie(x.l, x.r, x.label) < std::tie(y.l, y.r, y.label);
  });
  g.adj_left.assign(g.num_left(), {});
  g.adj_right.assign(g.num_right(), {});
  for (std::uint32_t e = 0; e < g.edges.size(); ++e) {
    g.adj_left[g.edges[e].l].push_back(e);
    g.adj_right[g.edges[e].r].push_back(e);
  }
  for (auto& lst : g.adj_right) {
    std::sort(lst.begin(), lst.end(), [&](std::uint32_t x, std::uint32_t y) {
      return std::tie(g.edges[x].l, g.edges[x].label) < std::tie(g.edges[y].l, g.edges[y].label);
    });
  }
  return g;
}

std::size_t VertexSet::count() const {
  std::size_t c = 0;
  for (auto b : left) c += b;
  for (auto b : right) c += b;
  return c;
}

VertexSet neighborhood(const Graphing& g, const VertexSet& y) {
  VertexSet n = VertexSet::empty(g);
  for (const auto& e : g.edges) {
    if (y.left[e.l]) n.right[e.r] = 1;
    if (y.right[e.r]) n.left[e.l] = 1;
  }
  return n;
}

double vertex_mass(const Graphing& g, const VertexSet& y) {
  return static_cast<double>(y.count()) * g.point_weight();
}

nlohmann::json to_json(const Graphing& g) {
  nlohmann::json j;
  j["schema"] = "equidecomp.graphing.v1";
  j["doubled"] = g.doubled;
  j["left"] = g.left_points;
  j["right"] = g.right_points;
  nlohmann::json edges = nlohmann::json::array();
  for (const auto& e : g.edges) edges.push_back({e.l, e.r, e.label});
  j["edges"] = edges;
  j["labels"] = to_json(g.labels);
  return j;
}

}  // namespace eqd
