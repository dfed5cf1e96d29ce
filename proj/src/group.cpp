#include "equidecomp/group.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_map>

namespace eqd {

namespace {

ElementKind classify(SpaceKind space, const std::array<Rational, 3>& tr, bool exact,
                     const std::array<double, 3>& tr_d, int dim) {
  bool no_translation = true;
  if (exact) {
    for (int i = 0; i < dim; ++i) no_translation = no_translation && tr[i] == 0;
  } else {
    for (int i = 0; i < dim; ++i) no_translation = no_translation && tr_d[i] == 0.0;
  }
  if (space == SpaceKind::torus2) {
    return no_translation ? ElementKind::torus_automorphism : ElementKind::affine;
  }
  return no_translation ? ElementKind::rotation : ElementKind::rigid_motion;
}

void require_same_space(const GroupElement& g, const GroupElement& h) {
  if (g.space != h.space) {
    throw std::invalid_argument("group elements live on different spaces");
  }
}

std::int64_t to_i64(const Rational& r, const char* what) {
  if (!is_integer(r)) throw std::domain_error(std::string(what) + ": entry is not an integer");
  BigInt n = numerator(r);
  if (n > std::numeric_limits<std::int32_t>::max() || n < std::numeric_limits<std::int32_t>::min()) {
    throw std::domain_error(std::string(what) + ": entry out of range");
  }
  return n.template convert_to<std::int64_t>();
}

std::string canonical_key(const GroupElement& g, double tol) {
  std::ostringstream os;
  os << to_string(g.space) << '|';
  int d = g.dim();
  if (g.exact) {
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) os << to_string(g.lin[i * d + j]) << ',';
    for (int i = 0; i < d; ++i) os << to_string(g.tr[i]) << ',';
  } else {
    // Quantize well below tol so equal-within-tol elements collide.
    double grid = tol / 8;
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) os << std::llround(g.lin_d[i * d + j] / grid) << ',';
    for (int i = 0; i < d; ++i) os << std::llround(g.tr_d[i] / grid) << ',';
  }
  return os.str();
}

Word inverse_word(const Word& w, const GroupElement& evaluated_inverse) {
  Word r;
  r.letters.reserve(w.letters.size());
  for (auto it = w.letters.rbegin(); it != w.letters.rend(); ++it) {
    r.letters.push_back({it->gen, !it->inverse});
  }
  r.evaluated = evaluated_inverse;
  return r;
}

}  // namespace

std::string to_string(SpaceKind k) { return k == SpaceKind::torus2 ? "torus2" : "euclid3"; }

std::string to_string(ElementKind k) {
  switch (k) {
    case ElementKind::rotation: return "rotation";
    case ElementKind::rigid_motion: return "rigid-motion";
    case ElementKind::torus_automorphism: return "torus-automorphism";
    case ElementKind::affine: return "affine";
  }
  return "?";
}

void GroupElement::sync_mirrors() {
  int d = dim();
  for (int i = 0; i < d * d; ++i) lin_d[i] = to_double(lin[i]);
  for (int i = 0; i < d; ++i) tr_d[i] = to_double(tr[i]);
}

GroupElement identity_element(SpaceKind space) {
  GroupElement g;
  g.space = space;
  g.exact = true;
  int d = g.dim();
  for (int i = 0; i < d; ++i) g.lin[i * d + i] = 1;
  g.kind = space == SpaceKind::torus2 ? ElementKind::torus_automorphism : ElementKind::rotation;
  g.sync_mirrors();
  return g;
}

GroupElement torus_affine(const std::array<Rational, 4>& lin, const Rational& tx,
                          const Rational& ty) {
  GroupElement g;
  g.space = SpaceKind::torus2;
  g.exact = true;
  for (int i = 0; i < 4; ++i) {
    if (!is_integer(lin[i])) throw std::invalid_argument("torus linear part must be integral");
    g.lin[i] = lin[i];
  }
  Rational d = lin[0] * lin[3] - lin[1] * lin[2];
  if (d != 1 && d != -1) throw std::invalid_argument("torus linear part must have determinant +-1");
  g.tr[0] = mod1(tx);
  g.tr[1] = mod1(ty);
  g.kind = classify(g.space, g.tr, true, g.tr_d, 2);
  g.sync_mirrors();
  return g;
}

GroupElement torus_automorphism(std::int64_t m00, std::int64_t m01, std::int64_t m10,
                                std::int64_t m11) {
  return torus_affine({Rational(m00), Rational(m01), Rational(m10), Rational(m11)}, 0, 0);
}

GroupElement torus_translation(const Rational& tx, const Rational& ty) {
  return torus_affine({Rational(1), Rational(0), Rational(0), Rational(1)}, tx, ty);
}

GroupElement rotation3(const std::array<Rational, 9>& lin) {
  return rigid_motion3(lin, {Rational(0), Rational(0), Rational(0)});
}

GroupElement rigid_motion3(const std::array<Rational, 9>& lin, const std::array<Rational, 3>& tr) {
  GroupElement g;
  g.space = SpaceKind::euclid3;
  g.exact = true;
  g.lin = lin;
  g.tr = tr;
  // Exact orthogonality and determinant +1.
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      Rational dot = 0;
      for (int k = 0; k < 3; ++k) dot += lin[k * 3 + i] * lin[k * 3 + j];
      if (dot != Rational(i == j ? 1 : 0)) {
        throw std::invalid_argument("rigid motion linear part is not orthogonal");
      }
    }
  }
  g.kind = classify(g.space, g.tr, true, g.tr_d, 3);
  g.sync_mirrors();
  if (det(g) != 1) throw std::invalid_argument("rigid motion must have determinant +1");
  return g;
}

GroupElement rigid_motion3_approx(const std::array<double, 9>& lin,
                                  const std::array<double, 3>& tr) {
  GroupElement g;
  g.space = SpaceKind::euclid3;
  g.exact = false;
  g.lin_d = lin;
  g.tr_d = tr;
  g.kind = classify(g.space, g.tr, false, g.tr_d, 3);
  if (orthogonality_residual(g) > 1e-12) {
    throw std::invalid_argument("rigid motion linear part is not orthogonal (1e-12)");
  }
  return g;
}

GroupElement compose(const GroupElement& g, const GroupElement& h) {
  require_same_space(g, h);
  int d = g.dim();
  GroupElement r;
  r.space = g.space;
  r.exact = g.exact && h.exact;
  if (r.exact) {
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j < d; ++j) {
        Rational s = 0;
        for (int k = 0; k < d; ++k) s += g.lin[i * d + k] * h.lin[k * d + j];
        r.lin[i * d + j] = s;
      }
      Rational t = g.tr[i];
      for (int k = 0; k < d; ++k) t += g.lin[i * d + k] * h.tr[k];
      r.tr[i] = g.space == SpaceKind::torus2 ? mod1(t) : t;
    }
    r.kind = classify(r.space, r.tr, true, r.tr_d, d);
    r.sync_mirrors();
  } else {
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j < d; ++j) {
        double s = 0;
        for (int k = 0; k < d; ++k) s += g.lin_d[i * d + k] * h.lin_d[k * d + j];
        r.lin_d[i * d + j] = s;
      }
      double t = g.tr_d[i];
      for (int k = 0; k < d; ++k) t += g.lin_d[i * d + k] * h.tr_d[k];
      r.tr_d[i] = t;
    }
    r.kind = classify(r.space, r.tr, false, r.tr_d, d);
  }
  return r;
}

GroupElement inverse(const GroupElement& g) {
  int d = g.dim();
  GroupElement r;
  r.space = g.space;
  r.exact = g.exact;
  if (g.exact) {
    Rational dt = det(g);
    if (dt == 0) throw std::domain_error("singular element");
    if (d == 2) {
      r.lin[0] = g.lin[3] / dt;
      r.lin[1] = -g.lin[1] / dt;
      r.lin[2] = -g.lin[2] / dt;
      r.lin[3] = g.lin[0] / dt;
    } else {
      auto& m = g.lin;
      auto cof = [&](int a, int b, int c, int e) { return m[a] * m[e] - m[b] * m[c]; };
      r.lin[0] = cof(4, 5, 7, 8) / dt;
      r.lin[1] = -cof(1, 2, 7, 8) / dt;
      r.lin[2] = cof(1, 2, 4, 5) / dt;
      r.lin[3] = -cof(3, 5, 6, 8) / dt;
      r.lin[4] = cof(0, 2, 6, 8) / dt;
      r.lin[5] = -cof(0, 2, 3, 5) / dt;
      r.lin[6] = cof(3, 4, 6, 7) / dt;
      r.lin[7] = -cof(0, 1, 6, 7) / dt;
      r.lin[8] = cof(0, 1, 3, 4) / dt;
    }
    for (int i = 0; i < d; ++i) {
      Rational t = 0;
      for (int k = 0; k < d; ++k) t -= r.lin[i * d + k] * g.tr[k];
      r.tr[i] = g.space == SpaceKind::torus2 ? mod1(t) : t;
    }
    r.kind = classify(r.space, r.tr, true, r.tr_d, d);
    r.sync_mirrors();
  } else {
    // Inexact elements are isometries; the inverse of x -> Rx + t is
    // x -> R^T x - R^T t.
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) r.lin_d[i * d + j] = g.lin_d[j * d + i];
    for (int i = 0; i < d; ++i) {
      double t = 0;
      for (int k = 0; k < d; ++k) t -= r.lin_d[i * d + k] * g.tr_d[k];
      r.tr_d[i] = t;
    }
    r.kind = classify(r.space, r.tr, false, r.tr_d, d);
  }
  return r;
}

TorusPoint apply(const GroupElement& g, TorusPoint x, std::int64_t q) {
  if (g.space != SpaceKind::torus2) throw std::invalid_argument("not a torus element");
  if (!g.exact) throw std::invalid_argument("torus application requires an exact element");
  std::int64_t m00 = to_i64(g.lin[0], "torus matrix");
  std::int64_t m01 = to_i64(g.lin[1], "torus matrix");
  std::int64_t m10 = to_i64(g.lin[2], "torus matrix");
  std::int64_t m11 = to_i64(g.lin[3], "torus matrix");
  std::int64_t t0 = to_i64(g.tr[0] * q, "translation step (must be a multiple of 1/q)");
  std::int64_t t1 = to_i64(g.tr[1] * q, "translation step (must be a multiple of 1/q)");
  auto mod = [q](std::int64_t v) {
    v %= q;
    return v < 0 ? v + q : v;
  };
  return TorusPoint{mod(m00 * x.a + m01 * x.b + t0), mod(m10 * x.a + m11 * x.b + t1)};
}

Vec3 apply(const GroupElement& g, const Vec3& v) {
  if (g.space != SpaceKind::euclid3) throw std::invalid_argument("not a euclidean element");
  Vec3 r{};
  for (int i = 0; i < 3; ++i) {
    r[i] = g.tr_d[i];
    for (int k = 0; k < 3; ++k) r[i] += g.lin_d[i * 3 + k] * v[k];
  }
  return r;
}

bool is_identity(const GroupElement& g, double tol) {
  return elements_equal(g, identity_element(g.space), tol);
}

bool elements_equal(const GroupElement& a, const GroupElement& b, double tol) {
  if (a.space != b.space) return false;
  int d = a.dim();
  if (a.exact && b.exact) {
    for (int i = 0; i < d * d; ++i)
      if (a.lin[i] != b.lin[i]) return false;
    for (int i = 0; i < d; ++i)
      if (a.tr[i] != b.tr[i]) return false;
    return true;
  }
  for (int i = 0; i < d * d; ++i)
    if (std::abs(a.lin_d[i] - b.lin_d[i]) > tol) return false;
  for (int i = 0; i < d; ++i)
    if (std::abs(a.tr_d[i] - b.tr_d[i]) > tol) return false;
  return true;
}

double orthogonality_residual(const GroupElement& g) {
  int d = g.dim();
  double worst = 0;
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      double dot = 0;
      for (int k = 0; k < d; ++k) dot += g.lin_d[k * d + i] * g.lin_d[k * d + j];
      worst = std::max(worst, std::abs(dot - (i == j ? 1.0 : 0.0)));
    }
  }
  return worst;
}

Rational det(const GroupElement& g) {
  int d = g.dim();
  if (!g.exact) {
    double v = d == 2 ? g.lin_d[0] * g.lin_d[3] - g.lin_d[1] * g.lin_d[2]
                      : g.lin_d[0] * (g.lin_d[4] * g.lin_d[8] - g.lin_d[5] * g.lin_d[7]) -
                            g.lin_d[1] * (g.lin_d[3] * g.lin_d[8] - g.lin_d[5] * g.lin_d[6]) +
                            g.lin_d[2] * (g.lin_d[3] * g.lin_d[7] - g.lin_d[4] * g.lin_d[6]);
    return rational_from_double(v);
  }
  if (d == 2) return g.lin[0] * g.lin[3] - g.lin[1] * g.lin[2];
  const auto& m = g.lin;
  return m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6]) +
         m[2] * (m[3] * m[7] - m[4] * m[6]);
}

std::vector<std::uint32_t> torus_permutation(const GroupElement& g, std::int64_t q) {
  std::vector<std::uint32_t> perm(static_cast<std::size_t>(q * q));
  std::vector<std::uint8_t> hit(perm.size(), 0);
  for (std::int64_t a = 0; a < q; ++a) {
    for (std::int64_t b = 0; b < q; ++b) {
      TorusPoint y = apply(g, {a, b}, q);
      auto idx = static_cast<std::uint32_t>(y.a * q + y.b);
      perm[static_cast<std::size_t>(a * q + b)] = idx;
      hit[idx] = 1;
    }
  }
  for (auto h : hit) {
    if (!h) throw std::logic_error("torus element is not a grid bijection");
  }
  return perm;
}

Word make_word(const GeneratorSet& base, const std::vector<Word::Letter>& letters) {
  Word w;
  w.letters = letters;
  SpaceKind space = base.elements.empty() ? SpaceKind::torus2 : base.elements.front().space;
  w.evaluated = identity_element(space);
  for (const auto& letter : letters) {
    const GroupElement& gen = base.elements.at(static_cast<std::size_t>(letter.gen));
    w.evaluated = compose(w.evaluated, letter.inverse ? inverse(gen) : gen);
  }
  return w;
}

bool is_symmetric(const GeneratorSet& q, double tol) {
  std::unordered_map<std::string, int> mult;
  for (const auto& g : q.elements) mult[canonical_key(g, tol)]++;
  for (const auto& g : q.elements) {
    auto it = mult.find(canonical_key(inverse(g), tol));
    if (it == mult.end()) return false;
    auto self = mult.find(canonical_key(g, tol));
    if (it->second != self->second) return false;
  }
  return true;
}

GeneratorSet lps_generators() {
  auto r = [](long long n) { return Rational(n, 5); };
  GeneratorSet q;
  q.symmetric_flag = true;
  // 1+2i, 1-2i
  q.elements.push_back(rotation3({Rational(1), 0, 0, 0, r(-3), r(-4), 0, r(4), r(-3)}));
  q.elements.push_back(rotation3({Rational(1), 0, 0, 0, r(-3), r(4), 0, r(-4), r(-3)}));
  // 1+2j, 1-2j
  q.elements.push_back(rotation3({r(-3), 0, r(4), 0, Rational(1), 0, r(-4), 0, r(-3)}));
  q.elements.push_back(rotation3({r(-3), 0, r(-4), 0, Rational(1), 0, r(4), 0, r(-3)}));
  // 1+2k, 1-2k
  q.elements.push_back(rotation3({r(-3), r(-4), 0, r(4), r(-3), 0, 0, 0, Rational(1)}));
  q.elements.push_back(rotation3({r(-3), r(4), 0, r(-4), r(-3), 0, 0, 0, Rational(1)}));
  return q;
}

GeneratorSet sl2z_generators() {
  GeneratorSet q;
  q.symmetric_flag = true;
  q.elements.push_back(torus_automorphism(0, -1, 1, 0));   // S
  q.elements.push_back(torus_automorphism(0, 1, -1, 0));   // S^-1
  q.elements.push_back(torus_automorphism(1, 1, 0, 1));    // T
  q.elements.push_back(torus_automorphism(1, -1, 0, 1));   // T^-1
  return q;
}

GeneratorSet torus_translation_generators(std::int64_t q) {
  GeneratorSet s;
  s.symmetric_flag = true;
  Rational step(1, q);
  s.elements.push_back(torus_translation(step, 0));
  s.elements.push_back(torus_translation(-step, 0));
  s.elements.push_back(torus_translation(0, step));
  s.elements.push_back(torus_translation(0, -step));
  return s;
}

GroupElement quarter_turn_yz() {
  return rotation3({Rational(1), 0, 0, 0, 0, Rational(-1), 0, Rational(1), 0});
}

GeneratorSet word_products(const GeneratorSet& q, int l, std::size_t cap) {
  if (l < 1) throw std::invalid_argument("word_products: l must be >= 1");
  if (q.elements.empty()) throw std::invalid_argument("word_products: empty generator set");

  std::vector<GroupElement> level;
  std::vector<std::vector<Word::Letter>> level_words;
  std::unordered_map<std::string, std::size_t> seen;

  for (std::size_t i = 0; i < q.elements.size(); ++i) {
    auto key = canonical_key(q.elements[i], 1e-9);
    if (seen.emplace(key, level.size()).second) {
      level.push_back(q.elements[i]);
      level_words.push_back({{static_cast<int>(i), false}});
    }
  }

  for (int step = 2; step <= l; ++step) {
    std::vector<GroupElement> next;
    std::vector<std::vector<Word::Letter>> next_words;
    seen.clear();
    for (std::size_t p = 0; p < level.size(); ++p) {
      for (std::size_t i = 0; i < q.elements.size(); ++i) {
        GroupElement prod = compose(level[p], q.elements[i]);
        auto key = canonical_key(prod, 1e-9);
        if (seen.emplace(key, next.size()).second) {
          if (next.size() >= cap) {
            throw SizeCapExceeded("word_products: deduplicated level exceeds cap");
          }
          next.push_back(std::move(prod));
          auto w = level_words[p];
          w.push_back({static_cast<int>(i), false});
          next_words.push_back(std::move(w));
        }
      }
    }
    level = std::move(next);
    level_words = std::move(next_words);
  }

  GeneratorSet out;
  out.elements = std::move(level);
  out.words.reserve(out.elements.size());
  for (std::size_t i = 0; i < out.elements.size(); ++i) {
    Word w;
    w.letters = std::move(level_words[i]);
    w.evaluated = out.elements[i];
    out.words.push_back(std::move(w));
  }
  out.symmetric_flag = is_symmetric(out);
  return out;
}

GeneratorSet dedup_union(const std::vector<const GeneratorSet*>& parts, double tol) {
  GeneratorSet out;
  bool all_words = true;
  for (const auto* p : parts) all_words = all_words && p->words.size() == p->elements.size();
  std::unordered_map<std::string, std::size_t> seen;
  for (const auto* p : parts) {
    for (std::size_t i = 0; i < p->elements.size(); ++i) {
      auto key = canonical_key(p->elements[i], tol);
      if (seen.emplace(key, out.elements.size()).second) {
        out.elements.push_back(p->elements[i]);
        if (all_words) out.words.push_back(p->words[i]);
      }
    }
  }
  out.symmetric_flag = is_symmetric(out, tol);
  return out;
}

GeneratorSet symmetrize(const GeneratorSet& q, double tol) {
  GeneratorSet inv;
  bool words = q.words.size() == q.elements.size();
  for (std::size_t i = 0; i < q.elements.size(); ++i) {
    GroupElement g = inverse(q.elements[i]);
    if (words) inv.words.push_back(inverse_word(q.words[i], g));
    inv.elements.push_back(std::move(g));
  }
  return dedup_union({&q, &inv}, tol);
}

GeneratorSet with_identity(const GeneratorSet& q, double tol) {
  GeneratorSet e;
  SpaceKind space = q.elements.empty() ? SpaceKind::torus2 : q.elements.front().space;
  e.elements.push_back(identity_element(space));
  if (q.words.size() == q.elements.size()) e.words.push_back(Word{{}, e.elements.front()});
  return dedup_union({&q, &e}, tol);
}

nlohmann::json to_json(const GroupElement& g) {
  nlohmann::json j;
  j["space"] = to_string(g.space);
  j["kind"] = to_string(g.kind);
  j["exact"] = g.exact;
  int d = g.dim();
  nlohmann::json lin = nlohmann::json::array();
  for (int i = 0; i < d; ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (int k = 0; k < d; ++k) {
      if (g.exact) row.push_back(to_string(g.lin[i * d + k]));
      else row.push_back(g.lin_d[i * d + k]);
    }
    lin.push_back(row);
  }
  j["lin"] = lin;
  nlohmann::json tr = nlohmann::json::array();
  for (int i = 0; i < d; ++i) {
    if (g.exact) tr.push_back(to_string(g.tr[i]));
    else tr.push_back(g.tr_d[i]);
  }
  j["tr"] = tr;
  return j;
}

GroupElement element_from_json(const nlohmann::json& j) {
  GroupElement g;
  g.space = j.at("space").get<std::string>() == "torus2" ? SpaceKind::torus2 : SpaceKind::euclid3;
  g.exact = j.at("exact").get<bool>();
  int d = g.dim();
  const auto& lin = j.at("lin");
  const auto& tr = j.at("tr");
  for (int i = 0; i < d; ++i) {
    for (int k = 0; k < d; ++k) {
      if (g.exact) g.lin[i * d + k] = parse_rational(lin.at(i).at(k).get<std::string>());
      else g.lin_d[i * d + k] = lin.at(i).at(k).get<double>();
    }
    if (g.exact) g.tr[i] = parse_rational(tr.at(i).get<std::string>());
    else g.tr_d[i] = tr.at(i).get<double>();
  }
  if (g.exact) g.sync_mirrors();
  g.kind = classify(g.space, g.tr, g.exact, g.tr_d, d);
  return g;
}

nlohmann::json to_json(const GeneratorSet& q) {
  nlohmann::json j;
  j["schema"] = "equidecomp.generator_set.v1";
  j["symmetric"] = q.symmetric_flag;
  nlohmann::json els = nlohmann::json::array();
  for (const auto& g : q.elements) els.push_back(to_json(g));
  j["elements"] = els;
  if (q.words.size() == q.elements.size()) {
    nlohmann::json words = nlohmann::json::array();
    for (const auto& w : q.words) {
      nlohmann::json letters = nlohmann::json::array();
      for (const auto& letter : w.letters) {
        letters.push_back({{"gen", letter.gen}, {"inv", letter.inverse}});
      }
      words.push_back(letters);
    }
    j["words"] = words;
  }
  return j;
}

GeneratorSet generator_set_from_json(const nlohmann::json& j) {
  GeneratorSet q;
  q.symmetric_flag = j.at("symmetric").get<bool>();
  for (const auto& je : j.at("elements")) q.elements.push_back(element_from_json(je));
  if (j.contains("words")) {
    for (std::size_t i = 0; i < j["words"].size(); ++i) {
      Word w;
      for (const auto& jl : j["words"][i]) {
        w.letters.push_back({jl.at("gen").get<int>(), jl.at("inv").get<bool>()});
      }
      w.evaluated = q.elements.at(i);
      q.words.push_back(std::move(w));
    }
  }
  return q;
}

}  // namespace eqd
