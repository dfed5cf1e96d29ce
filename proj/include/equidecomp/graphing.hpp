#pragma once

#include <cstdint>
#include <vector>

#include "equidecomp/space.hpp"

namespace eqd {

inline constexpr std::uint32_t kNoVertex = 0xffffffffu;

// One labeled arrow (U, gamma): gamma moves every point of U into the right
// side. Edges of the graphing are exactly the pairs (x, gamma.x), x in U.
struct BorelArrow {
  SampledSet domain;
  GroupElement element;
  int label = -1;
};

// Bipartite graphing between realized sets. Vertices are compact ids per
// side; left/right masks live on the same exact model. When `doubled` is set
// the right side is understood to live in a second copy of the model, so the
// sides need not be disjoint as point sets.
struct Graphing {
  const SpaceModel* model = nullptr;
  SampledSet left, right;
  bool doubled = false;
  GeneratorSet labels;
  std::vector<BorelArrow> arrows;

  std::vector<std::uint32_t> left_points, right_points;      // compact id -> point idx
  std::vector<std::uint32_t> left_of_point, right_of_point;  // point idx -> compact id

  struct Edge {
    std::uint32_t l = 0, r = 0;
    int label = -1;
  };
  std::vector<Edge> edges;
  std::vector<std::vector<std::uint32_t>> adj_left, adj_right;  // edge indices, sorted

  std::size_t num_left() const { return left_points.size(); }
  std::size_t num_right() const { return right_points.size(); }
  double point_weight() const { return model->weight(); }
  std::size_t max_degree() const;
};

// Edge set {(x, gamma): x in A, gamma.x in B, gamma in S}. Exact models only.
// Throws if A and B intersect and `doubled` is false.
Graphing bipartite_graphing(const SampledSet& a, const SampledSet& b, const GeneratorSet& s,
                            bool doubled = false);

// Vertex subset of a graphing, by side.
struct VertexSet {
  std::vector<std::uint8_t> left, right;  // compact-id masks

  static VertexSet empty(const Graphing& g) {
    return VertexSet{std::vector<std::uint8_t>(g.num_left(), 0),
                     std::vector<std::uint8_t>(g.num_right(), 0)};
  }
  std::size_t count() const;
};

// All vertices adjacent to y, orientation-blind.
VertexSet neighborhood(const Graphing& g, const VertexSet& y);

double vertex_mass(const Graphing& g, const VertexSet& y);

nlohmann::json to_json(const Graphing& g);

}  // namespace eqd
