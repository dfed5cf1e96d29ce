#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "equidecomp/rational.hpp"

#include <json.hpp>

namespace eqd {

// Point of the exact q x q torus grid: (a/q, b/q) with 0 <= a, b < q.
struct TorusPoint {
  std::int64_t a = 0;
  std::int64_t b = 0;
  friend bool operator==(const TorusPoint&, const TorusPoint&) = default;
};

using Vec3 = std::array<double, 3>;

enum class SpaceKind { torus2, euclid3 };
enum class ElementKind { rotation, rigid_motion, torus_automorphism, affine };

std::string to_string(SpaceKind k);
std::string to_string(ElementKind k);

// An isometry of R^3 or an affine torus map x -> Mx + t (mod 1).  Exact
// elements carry authoritative rational entries; the double mirrors are kept
// in sync for geometry code.  Inexact elements (irrational translations) use
// the mirrors only.
struct GroupElement {
  SpaceKind space = SpaceKind::euclid3;
  ElementKind kind = ElementKind::rotation;
  bool exact = true;
  std::array<Rational, 9> lin{};  // row-major dim x dim block, rest unused
  std::array<Rational, 3> tr{};
  std::array<double, 9> lin_d{};
  std::array<double, 3> tr_d{};

  int dim() const { return space == SpaceKind::torus2 ? 2 : 3; }
  void sync_mirrors();
};

GroupElement identity_element(SpaceKind space);

// Torus factories require integer matrix entries (grid closure for every q);
// translations may be any rationals and are reduced mod 1.
GroupElement torus_automorphism(std::int64_t m00, std::int64_t m01, std::int64_t m10,
                                std::int64_t m11);
GroupElement torus_translation(const Rational& tx, const Rational& ty);
GroupElement torus_affine(const std::array<Rational, 4>& lin, const Rational& tx,
                          const Rational& ty);

GroupElement rotation3(const std::array<Rational, 9>& lin);
GroupElement rigid_motion3(const std::array<Rational, 9>& lin, const std::array<Rational, 3>& tr);
// Float-mode rigid motion; the linear part must still be orthogonal det +1.
GroupElement rigid_motion3_approx(const std::array<double, 9>& lin, const std::array<double, 3>& tr);

// x -> g.(h.x)
GroupElement compose(const GroupElement& g, const GroupElement& h);
GroupElement inverse(const GroupElement& g);

TorusPoint apply(const GroupElement& g, TorusPoint x, std::int64_t q);
Vec3 apply(const GroupElement& g, const Vec3& v);

bool is_identity(const GroupElement& g, double tol = 1e-9);
bool elements_equal(const GroupElement& a, const GroupElement& b, double tol = 1e-9);
// max |R^T R - I| entry, from the double mirrors.
double orthogonality_residual(const GroupElement& g);
Rational det(const GroupElement& g);

// The permutation of grid indices (idx = a*q + b) induced by an exact torus
// element.  Throws if the element moves a grid point off the grid.
std::vector<std::uint32_t> torus_permutation(const GroupElement& g, std::int64_t q);

struct Word {
  struct Letter {
    int gen = 0;
    bool inverse = false;
    friend bool operator==(const Letter&, const Letter&) = default;
  };
  std::vector<Letter> letters;
  GroupElement evaluated;
};

// Multiset of group elements with stable labels (the vector index).  `words`
// is optional provenance, parallel to `elements`, expressed over some base
// generator set.
struct GeneratorSet {
  std::vector<GroupElement> elements;
  std::vector<Word> words;
  bool symmetric_flag = false;

  std::size_t size() const { return elements.size(); }
};

Word make_word(const GeneratorSet& base, const std::vector<Word::Letter>& letters);

// Checks the multiset symmetry invariant: each element's inverse occurs with
// the same multiplicity.
bool is_symmetric(const GeneratorSet& q, double tol = 1e-9);

// The 6 Lubotzky-Phillips-Sarnak rotations (quaternions 1 +/- 2i, 1 +/- 2j,
// 1 +/- 2k), exact entries in (1/5)Z.  Averaging-operator norm sqrt(5)/3 on
// mean-zero functions of the sphere.
GeneratorSet lps_generators();

// {S, S^-1, T, T^-1} in SL(2, Z) acting on the torus.
GeneratorSet sl2z_generators();

// {(1/q, 0), (-1/q, 0), (0, 1/q), (0, -1/q)} torus translations.
GeneratorSet torus_translation_generators(std::int64_t q);

// Rotation by pi/2 in the (y, z) plane; exact, order 4.
GroupElement quarter_turn_yz();

struct SizeCapExceeded : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Deduplicated products of exactly l letters from Q, with generator-word
// provenance.  Throws SizeCapExceeded when the deduplicated set would pass
// `cap`.
GeneratorSet word_products(const GeneratorSet& q, int l, std::size_t cap = 1 << 20);

// Set-level helpers used when bridging expander output into matching runs:
// dedup union, adjoining inverses, adjoining the identity.
GeneratorSet dedup_union(const std::vector<const GeneratorSet*>& parts, double tol = 1e-9);
GeneratorSet symmetrize(const GeneratorSet& q, double tol = 1e-9);
GeneratorSet with_identity(const GeneratorSet& q, double tol = 1e-9);

nlohmann::json to_json(const GroupElement& g);
GroupElement element_from_json(const nlohmann::json& j);
nlohmann::json to_json(const GeneratorSet& q);
GeneratorSet generator_set_from_json(const nlohmann::json& j);

}  // namespace eqd
