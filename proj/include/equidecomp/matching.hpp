#pragma once

#include <optional>
#include <utility>

#include "equidecomp/certificate.hpp"
#include "equidecomp/graphing.hpp"

namespace eqd {

// Partial matching in a bipartite graphing. `stage` certifies that no
// augmenting path of length <= 2*stage - 1 exists.
struct Matching {
  std::vector<std::uint32_t> match_left, match_right;  // edge index or kNoVertex
  int stage = 0;

  std::size_t size() const;
  std::size_t unmatched_left() const;
  std::size_t unmatched_right() const;
};

Matching empty_matching(const Graphing& g);
bool matching_valid(const Graphing& g, const Matching& m);

struct StageReport {
  int stage = 0;
  std::size_t unmatched_left_count = 0, unmatched_right_count = 0;
  double unmatched_left_mass = 0, unmatched_right_mass = 0;
  std::size_t flipped_edges = 0;
  double flipped_edge_mass = 0;
  std::size_t phases = 0;
  double elapsed_seconds = 0;
};

nlohmann::json to_json(const StageReport& r);

// One stage of the staged matching: repeated shortest-augmenting-path phases
// (layered BFS plus a maximal vertex-disjoint path family) until no path of
// length <= 2*(stage+1) - 1 remains.
std::pair<Matching, StageReport> advance_stage(const Graphing& g, const Matching& m);

std::pair<Matching, std::vector<StageReport>> run_to_stage(const Graphing& g, int k);

struct AugmentingPathWitness {
  std::vector<std::uint32_t> edge_indices;  // alternating, free left end to free right end
};

// Standalone certificate check, independent of the stage machinery.
bool verify_no_short_augmenting_path(const Graphing& g, const Matching& m, int max_len,
                                     AugmentingPathWitness* witness = nullptr);

// Cumulative alternating-reach sets: result[j] = vertices reachable from the
// unmatched vertices of the chosen side by an alternating path of length <= j.
std::vector<VertexSet> alternating_layers(const Graphing& g, const Matching& m, bool from_left,
                                          int max_depth);

// Groups matched left points by generator label into equidecomposition pieces.
EquidecompositionCertificate extract_equidecomposition(const Graphing& g, const Matching& m,
                                                       double residue_threshold = 0.0);

}  // namespace eqd
