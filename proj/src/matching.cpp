#include "equidecomp/matching.hpp"

#include <algorithm>

#include "equidecomp/util.hpp"

namespace eqd {

namespace {

constexpr std::uint32_t kInf = 0xffffffffu;

struct HkState {
  std::vector<std::uint32_t> dist;  // left-vertex hop count from a free left vertex
  std::uint32_t found_d = kInf;     // smallest dist with a free right neighbor
};

HkState hk_bfs(const Graphing& g, const Matching& m) {
  HkState st;
  st.dist.assign(g.num_left(), kInf);
  std::vector<std::uint32_t> queue;
  queue.reserve(g.num_left());
  for (std::uint32_t l = 0; l < g.num_left(); ++l) {
    if (m.match_left[l] == kNoVertex) {
      st.dist[l] = 0;
      queue.push_back(l);
    }
  }
  for (std::size_t qi = 0; qi < queue.size(); ++qi) {
    std::uint32_t l = queue[qi];
    if (st.dist[l] >= st.found_d) break;  // deeper layers cannot shorten anything
    for (auto e : g.adj_left[l]) {
      std::uint32_t r = g.edges[e].r;
      std::uint32_t me = m.match_right[r];
      if (me == kNoVertex) {
        st.found_d = std::min(st.found_d, st.dist[l]);
      } else {
        std::uint32_t l2 = g.edges[me].l;
        if (st.dist[l2] == kInf) {
          st.dist[l2] = st.dist[l] + 1;
          queue.push_back(l2);
        }
      }
    }
  }
  return st;
}

// DFS along layered distances; flips one shortest path if found. Returns the
// number of edges flipped (path length), 0 on failure. Consumes dist entries
// so paths in one phase stay vertex-disjoint.
std::size_t hk_dfs(const Graphing& g, Matching& m, HkState& st, std::vector<std::uint8_t>& used_r,
                   std::uint32_t l) {
  std::uint32_t d = st.dist[l];
  for (auto e : g.adj_left[l]) {
    std::uint32_t r = g.edges[e].r;
    if (used_r[r]) continue;
    std::uint32_t me = m.match_right[r];
    if (me == kNoVertex) {
      if (d != st.found_d) continue;  // only shortest paths end here
      used_r[r] = 1;
      m.match_left[l] = e;
      m.match_right[r] = e;
      st.dist[l] = kInf;
      return 1;
    }
    std::uint32_t l2 = g.edges[me].l;
    if (st.dist[l2] != d + 1) continue;
    std::size_t sub = hk_dfs(g, m, st, used_r, l2);
    if (sub > 0) {
      used_r[r] = 1;
      m.match_left[l] = e;
      m.match_right[r] = e;
      st.dist[l] = kInf;
      return sub + 2;  // the matched edge me was flipped out, e flipped in
    }
  }
  st.dist[l] = kInf;  // exhausted
  return 0;
}

}  // namespace

std::size_t Matching::size() const {
  std::size_t c = 0;
  for (auto e : match_left) c += e != kNoVertex;
  return c;
}

std::size_t Matching::unmatched_left() const { return match_left.size() - size(); }

std::size_t Matching::unmatched_right() const {
  std::size_t c = 0;
  for (auto e : match_right) c += e == kNoVertex;
  return c;
}

Matching empty_matching(const Graphing& g) {
  Matching m;
  m.match_left.assign(g.num_left(), kNoVertex);
  m.match_right.assign(g.num_right(), kNoVertex);
  return m;
}

bool matching_valid(const Graphing& g, const Matching& m) {
  if (m.match_left.size() != g.num_left() || m.match_right.size() != g.num_right()) return false;
  std::size_t from_left = 0, from_right = 0;
  for (std::uint32_t l = 0; l < m.match_left.size(); ++l) {
    std::uint32_t e = m.match_left[l];
    if (e == kNoVertex) continue;
    if (e >= g.edges.size() || g.edges[e].l != l) return false;
    if (m.match_right[g.edges[e].r] != e) return false;
    ++from_left;
  }
  for (std::uint32_t r = 0; r < m.match_right.size(); ++r) {
    std::uint32_t e = m.match_right[r];
    if (e == kNoVertex) continue;
    if (e >= g.edges.size() || g.edges[e].r != r) return false;
    if (m.match_left[g.edges[e].l] != e) return false;
    ++from_right;
  }
  return from_left == from_right;
}

nlohmann::json to_json(const StageReport& r) {
  return {
      {"schema", "equidecomp.stage_report.v1"},
      {"stage", r.stage},
      {"unmatched_left_count", r.unmatched_left_count},
      {"unmatched_right_count", r.unmatched_right_count},
      {"unmatched_left_mass", r.unmatched_left_mass},
      {"unmatched_right_mass", r.unmatched_right_mass},
      {"flipped_edges", r.flipped_edges},
      {"flipped_edge_mass", r.flipped_edge_mass},
      {"phases", r.phases},
      {"elapsed_seconds", r.elapsed_seconds},
  };
}

std::pair<Matching, StageReport> advance_stage(const Graphing& g, const Matching& m) {
  Stopwatch timer;
  Matching next = m;
  StageReport rep;
  rep.stage = m.stage + 1;
  std::uint32_t max_len = 2 * static_cast<std::uint32_t>(rep.stage) - 1;

  while (true) {
    HkState st = hk_bfs(g, next);
    if (st.found_d == kInf || 2 * st.found_d + 1 > max_len) break;
    ++rep.phases;
    std::vector<std::uint8_t> used_r(g.num_right(), 0);
    for (std::uint32_t l = 0; l < g.num_left(); ++l) {
      if (next.match_left[l] == kNoVertex && st.dist[l] == 0) {
        rep.flipped_edges += hk_dfs(g, next, st, used_r, l);
      }
    }
  }

  next.stage = rep.stage;
  rep.unmatched_left_count = next.unmatched_left();
  rep.unmatched_right_count = next.unmatched_right();
  double w = g.point_weight();
  rep.unmatched_left_mass = static_cast<double>(rep.unmatched_left_count) * w;
  rep.unmatched_right_mass = static_cast<double>(rep.unmatched_right_count) * w;
  rep.flipped_edge_mass = static_cast<double>(rep.flipped_edges) * w;
  rep.elapsed_seconds = timer.seconds();
  return {std::move(next), rep};
}

std::pair<Matching, std::vector<StageReport>> run_to_stage(const Graphing& g, int k) {
  if (k < 1) throw std::invalid_argument("stage target must be >= 1");
  Matching m = empty_matching(g);
  std::vector<StageReport> reports;
  reports.reserve(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) {
    auto [next, rep] = advance_stage(g, m);
    m = std::move(next);
    reports.push_back(rep);
  }
  return {std::move(m), std::move(reports)};
}

bool verify_no_short_augmenting_path(const Graphing& g, const Matching& m, int max_len,
                                     AugmentingPathWitness* witness) {
  if (max_len < 1) return true;
  // Joint BFS over alternating paths from all free left vertices, tracking
  // entry edges for witness reconstruction. Kept independent of the stage
  // machinery above on purpose.
  std::vector<std::uint32_t> dist(g.num_left(), kInf);
  std::vector<std::uint32_t> entry(g.num_right(), kInf);  // edge by which a right vertex is reached
  std::vector<std::uint32_t> queue;
  for (std::uint32_t l = 0; l < g.num_left(); ++l) {
    if (m.match_left[l] == kNoVertex) {
      dist[l] = 0;
      queue.push_back(l);
    }
  }
  for (std::size_t qi = 0; qi < queue.size(); ++qi) {
    std::uint32_t l = queue[qi];
    if (2 * dist[l] + 1 > static_cast<std::uint32_t>(max_len)) break;
    for (auto e : g.adj_left[l]) {
      if (e == m.match_left[l]) continue;
      std::uint32_t r = g.edges[e].r;
      std::uint32_t me = m.match_right[r];
      if (me == kNoVertex) {
        if (witness) {
          std::vector<std::uint32_t> path{e};
          std::uint32_t cur = l;
          while (dist[cur] > 0) {
            std::uint32_t back = m.match_left[cur];
            path.push_back(back);
            std::uint32_t pe = entry[g.edges[back].r];
            path.push_back(pe);
            cur = g.edges[pe].l;
          }
          std::reverse(path.begin(), path.end());
          witness->edge_indices = std::move(path);
        }
        return false;
      }
      if (entry[r] == kInf) {
        entry[r] = e;
        std::uint32_t l2 = g.edges[me].l;
        if (dist[l2] == kInf) {
          dist[l2] = dist[l] + 1;
          queue.push_back(l2);
        }
      }
    }
  }
  return true;
}

std::vector<VertexSet> alternating_layers(const Graphing& g, const Matching& m, bool from_left,
                                          int max_depth) {
  std::vector<VertexSet> layers;
  VertexSet cur = VertexSet::empty(g);
  if (from_left) {
    for (std::uint32_t l = 0; l < g.num_left(); ++l)
      if (m.match_left[l] == kNoVertex) cur.left[l] = 1;
  } else {
    for (std::uint32_t r = 0; r < g.num_right(); ++r)
      if (m.match_right[r] == kNoVertex) cur.right[r] = 1;
  }
  layers.push_back(cur);
  for (int depth = 1; depth <= max_depth; ++depth) {
    VertexSet next = cur;
    bool expand_from_start_side = (depth % 2) == 1;
    if (expand_from_start_side) {
      // start-side vertices expand along non-matching edges
      for (std::uint32_t idx = 0; idx < g.edges.size(); ++idx) {
        const auto& e = g.edges[idx];
        if (from_left) {
          if (cur.left[e.l] && m.match_left[e.l] != idx) next.right[e.r] = 1;
        } else {
          if (cur.right[e.r] && m.match_right[e.r] != idx) next.left[e.l] = 1;
        }
      }
    } else {
      // opposite-side vertices return along their matched edge
      if (from_left) {
        for (std::uint32_t r = 0; r < g.num_right(); ++r) {
          if (cur.right[r] && m.match_right[r] != kNoVertex) {
            next.left[g.edges[m.match_right[r]].l] = 1;
          }
        }
      } else {
        for (std::uint32_t l = 0; l < g.num_left(); ++l) {
          if (cur.left[l] && m.match_left[l] != kNoVertex) {
            next.right[g.edges[m.match_left[l]].r] = 1;
          }
        }
      }
    }
    layers.push_back(next);
    cur = std::move(next);
  }
  return layers;
}

EquidecompositionCertificate extract_equidecomposition(const Graphing& g, const Matching& m,
                                                       double residue_threshold) {
  const SpaceModel& model = *g.model;
  double w = g.point_weight();
  double residue = static_cast<double>(m.unmatched_left()) * w;
  if (residue > residue_threshold + 1e-15) {
    throw std::runtime_error("unmatched residue " + std::to_string(residue) +
                             " exceeds threshold " + std::to_string(residue_threshold));
  }

  EquidecompositionCertificate cert;
  cert.model = &model;
  cert.source = g.left;
  cert.target = g.right;
  cert.residue_mass = residue;
  cert.validation_mode = "exact";
  cert.metadata["doubled"] = g.doubled;
  cert.metadata["stage"] = m.stage;

  bool have_words = g.labels.words.size() == g.labels.elements.size();
  std::vector<std::vector<std::uint8_t>> piece_masks(g.labels.elements.size());
  for (std::uint32_t l = 0; l < g.num_left(); ++l) {
    std::uint32_t e = m.match_left[l];
    if (e == kNoVertex) continue;
    int label = g.edges[e].label;
    auto& mask = piece_masks[static_cast<std::size_t>(label)];
    if (mask.empty()) mask.assign(model.size(), 0);
    mask[g.left_points[l]] = 1;
  }
  for (std::size_t label = 0; label < piece_masks.size(); ++label) {
    if (piece_masks[label].empty()) continue;
    CertificatePiece piece;
    piece.piece = from_mask(model, std::move(piece_masks[label]));
    piece.motion = g.labels.elements[label];
    if (have_words) piece.word = g.labels.words[label].letters;
    piece.label = static_cast<int>(label);
    cert.pieces.push_back(std::move(piece));
  }
  return cert;
}

}  // namespace eqd
