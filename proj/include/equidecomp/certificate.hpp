#pragma once

#include <string>
#include <vector>

#include "equidecomp/space.hpp"

namespace eqd {

struct CertificatePiece {
  SampledSet piece;
  GroupElement motion;
  std::vector<Word::Letter> word;  // provenance over the base generators, may be empty
  int label = -1;
};

// Witness that source can be partitioned into pieces whose motions partition
// the target, up to the recorded residue.
struct EquidecompositionCertificate {
  const SpaceModel* model = nullptr;
  SampledSet source, target;
  std::vector<CertificatePiece> pieces;
  double residue_mass = 0;
  std::string validation_mode = "exact";  // "exact" | "statistical"
  nlohmann::json metadata;

  std::size_t piece_count() const { return pieces.size(); }
};

nlohmann::json to_json(const EquidecompositionCertificate& cert);

struct ValidationReport {
  bool ok = true;
  std::vector<std::string> failures;
};

// Re-verifies the certificate from scratch: pieces within the source and
// pairwise disjoint, images within the target and pairwise disjoint, unions
// exhaust both sides up to the recorded residue, masses balance.
ValidationReport validate_certificate(const EquidecompositionCertificate& cert);

// Composes witnesses A->B and B->C into A->C by intersecting pieces with
// moved-piece preimages. Exact models only.
EquidecompositionCertificate chain_certificates(const EquidecompositionCertificate& ab,
                                                const EquidecompositionCertificate& bc);

}  // namespace eqd
