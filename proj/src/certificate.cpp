#include "equidecomp/certificate.hpp"

#include <algorithm>

namespace eqd {

namespace {

std::vector<std::uint32_t> mask_points(const SampledSet& s) {
  std::vector<std::uint32_t> pts;
  for (std::uint32_t i = 0; i < s.mask.size(); ++i)
    if (s.mask[i]) pts.push_back(i);
  return pts;
}

}  // namespace

nlohmann::json to_json(const EquidecompositionCertificate& cert) {
  nlohmann::json j;
  j["schema"] = "equidecomp.certificate.v1";
  j["validation_mode"] = cert.validation_mode;
  j["residue_mass"] = cert.residue_mass;
  j["source_points"] = mask_points(cert.source);
  j["target_points"] = mask_points(cert.target);
  if (cert.source.source) j["source_predicate"] = to_json(*cert.source.source);
  if (cert.target.source) j["target_predicate"] = to_json(*cert.target.source);
  nlohmann::json pieces = nlohmann::json::array();
  for (const auto& p : cert.pieces) {
    nlohmann::json jp;
    jp["points"] = mask_points(p.piece);
    jp["motion"] = to_json(p.motion);
    jp["label"] = p.label;
    if (!p.word.empty()) {
      nlohmann::json letters = nlohmann::json::array();
      for (const auto& letter : p.word) letters.push_back({{"gen", letter.gen}, {"inv", letter.inverse}});
      jp["word"] = letters;
    }
    pieces.push_back(std::move(jp));
  }
  j["pieces"] = pieces;
  j["metadata"] = cert.metadata;
  return j;
}

ValidationReport validate_certificate(const EquidecompositionCertificate& cert) {
  ValidationReport rep;
  auto fail = [&rep](std::string msg) {
    rep.ok = false;
    rep.failures.push_back(std::move(msg));
  };
  const SpaceModel& m = *cert.model;
  if (m.kind != ModelKind::rational_torus || cert.validation_mode != "exact") {
    // Statistical mode: only mass bookkeeping can be checked.
    double covered = 0;
    for (const auto& p : cert.pieces) covered += p.piece.measure();
    double lhs = covered + cert.residue_mass;
    double rhs = cert.source.measure();
    if (std::abs(lhs - rhs) > 1e-9 * std::max(1.0, rhs)) {
      fail("piece masses plus residue do not add up to the source mass");
    }
    return rep;
  }

  std::vector<std::uint32_t> cover(m.size(), 0), image_cover(m.size(), 0);
  for (std::size_t pi = 0; pi < cert.pieces.size(); ++pi) {
    const auto& p = cert.pieces[pi];
    if (p.piece.model != cert.model) {
      fail("piece " + std::to_string(pi) + " lives on a different model");
      continue;
    }
    SampledSet moved = apply_set(p.motion, p.piece);
    for (std::size_t x = 0; x < m.size(); ++x) {
      if (p.piece.mask[x]) {
        if (!cert.source.mask[x]) fail("piece " + std::to_string(pi) + " leaves the source set");
        if (++cover[x] > 1) fail("pieces overlap at point " + std::to_string(x));
      }
      if (moved.mask[x]) {
        if (!cert.target.mask[x]) fail("moved piece " + std::to_string(pi) + " leaves the target set");
        if (++image_cover[x] > 1) fail("moved pieces overlap at point " + std::to_string(x));
      }
    }
    if (moved.count() != p.piece.count()) {
      fail("motion of piece " + std::to_string(pi) + " is not measure preserving");
    }
  }

  std::size_t source_uncovered = 0, target_uncovered = 0;
  for (std::size_t x = 0; x < m.size(); ++x) {
    if (cert.source.mask[x] && !cover[x]) ++source_uncovered;
    if (cert.target.mask[x] && !image_cover[x]) ++target_uncovered;
  }
  double w = m.weight();
  if (std::abs(static_cast<double>(source_uncovered) * w - cert.residue_mass) > 1e-12) {
    fail("uncovered source mass does not match the recorded residue");
  }
  if (source_uncovered != target_uncovered) {
    fail("source residue count differs from target residue count");
  }
  if (cert.source.count() != cert.target.count()) {
    fail("source and target have different masses");
  }
  if (rep.failures.size() > 32) rep.failures.resize(32);
  return rep;
}

EquidecompositionCertificate chain_certificates(const EquidecompositionCertificate& ab,
                                                const EquidecompositionCertificate& bc) {
  if (ab.model != bc.model) throw std::invalid_argument("certificates on different models");
  const SpaceModel& m = *ab.model;
  if (m.kind != ModelKind::rational_torus) {
    throw std::invalid_argument("chaining requires an exact model");
  }

  EquidecompositionCertificate out;
  out.model = ab.model;
  out.source = ab.source;
  out.target = bc.target;
  out.validation_mode =
      (ab.validation_mode == "exact" && bc.validation_mode == "exact") ? "exact" : "statistical";
  out.metadata["chained_from"] = {ab.pieces.size(), bc.pieces.size()};

  for (const auto& p : ab.pieces) {
    SampledSet moved = apply_set(p.motion, p.piece);
    for (const auto& q : bc.pieces) {
      SampledSet overlap = set_intersection(moved, q.piece);
      if (overlap.empty()) continue;
      CertificatePiece piece;
      piece.piece = apply_set(inverse(p.motion), overlap);
      piece.motion = compose(q.motion, p.motion);
      piece.label = -1;
      out.pieces.push_back(std::move(piece));
    }
  }
  double covered = 0;
  for (const auto& piece : out.pieces) covered += piece.piece.measure();
  out.residue_mass = out.source.measure() - covered;
  return out;
}

}  // namespace eqd
