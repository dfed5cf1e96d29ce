#include "equidecomp/space.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "equidecomp/util.hpp"

namespace eqd {

namespace {

constexpr double kPi = std::numbers::pi;

double norm(const Vec3& v) { return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]); }

double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

void require_same_model(const SampledSet& a, const SampledSet& b) {
  if (a.model != b.model) throw std::invalid_argument("sets live on different models");
}

}  // namespace

std::string to_string(ModelKind k) {
  switch (k) {
    case ModelKind::rational_torus: return "rational-torus";
    case ModelKind::sphere_cloud: return "sphere-cloud";
    case ModelKind::annulus_cloud: return "annulus-cloud";
    case ModelKind::cube_cloud: return "cube-cloud";
  }
  return "?";
}

ModelKind model_kind_from_string(const std::string& s) {
  if (s == "rational-torus") return ModelKind::rational_torus;
  if (s == "sphere-cloud") return ModelKind::sphere_cloud;
  if (s == "annulus-cloud") return ModelKind::annulus_cloud;
  if (s == "cube-cloud") return ModelKind::cube_cloud;
  throw std::invalid_argument("unknown model kind: " + s);
}

SpaceModel build_model(ModelKind kind, std::int64_t size, std::uint64_t seed) {
  if (size < 1) throw std::invalid_argument("model size must be >= 1");
  SpaceModel m;
  m.kind = kind;
  m.rng_seed = seed;
  Rng rng(seed, "space-model/" + to_string(kind));
  switch (kind) {
    case ModelKind::rational_torus: {
      m.q = size;
      m.total_mass = 1.0;
      break;
    }
    case ModelKind::sphere_cloud: {
      m.total_mass = 4 * kPi;
      m.points.reserve(static_cast<std::size_t>(size));
      while (m.points.size() < static_cast<std::size_t>(size)) {
        Vec3 v{rng.gaussian(), rng.gaussian(), rng.gaussian()};
        double n = norm(v);
        if (n < 1e-12) continue;
        m.points.push_back({v[0] / n, v[1] / n, v[2] / n});
      }
      break;
    }
    case ModelKind::annulus_cloud: {
      double rho = annulus_outer_radius();
      m.total_mass = 4 * kPi * (rho * rho * rho - 1) / 3;
      m.proposal_volume = 8 * rho * rho * rho;
      m.points.reserve(static_cast<std::size_t>(size));
      while (m.points.size() < static_cast<std::size_t>(size)) {
        Vec3 v{rng.uniform(-rho, rho), rng.uniform(-rho, rho), rng.uniform(-rho, rho)};
        ++m.proposal_attempts;
        double n = norm(v);
        if (n >= 1.0 && n <= rho) m.points.push_back(v);
      }
      break;
    }
    case ModelKind::cube_cloud: {
      double h = cube_gap_height();
      m.total_mass = 1.0;
      m.proposal_volume = 1.0;
      m.proposal_attempts = static_cast<std::uint64_t>(size);
      m.points.reserve(static_cast<std::size_t>(size));
      for (std::int64_t i = 0; i < size; ++i) {
        m.points.push_back({rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5), rng.uniform(h, h + 1)});
      }
      break;
    }
  }
  return m;
}

void validate_model(const SpaceModel& m) {
  double wsum = static_cast<double>(m.size()) * m.weight();
  if (std::abs(wsum - m.total_mass) > 1e-12 * std::max(1.0, m.total_mass)) {
    throw std::logic_error("weights do not sum to total_mass");
  }
  switch (m.kind) {
    case ModelKind::rational_torus: {
      if (m.q < 1) throw std::logic_error("torus model with q < 1");
      // Exact closure under torus automorphisms: the standard generators must
      // permute the grid.
      for (const auto& g : sl2z_generators().elements) torus_permutation(g, m.q);
      break;
    }
    case ModelKind::sphere_cloud: {
      for (const auto& p : m.points) {
        if (std::abs(norm(p) - 1.0) > 1e-9) throw std::logic_error("sphere point off S^2");
      }
      break;
    }
    case ModelKind::annulus_cloud: {
      double rho = annulus_outer_radius();
      for (const auto& p : m.points) {
        double n = norm(p);
        if (n < 1.0 - 1e-9 || n > rho + 1e-9) throw std::logic_error("annulus point out of range");
      }
      break;
    }
    case ModelKind::cube_cloud: {
      double h = cube_gap_height();
      for (const auto& p : m.points) {
        if (p[0] < -0.5 - 1e-9 || p[0] > 0.5 + 1e-9 || p[1] < -0.5 - 1e-9 || p[1] > 0.5 + 1e-9 ||
            p[2] < h - 1e-9 || p[2] > h + 1 + 1e-9) {
          throw std::logic_error("cube point out of range");
        }
      }
      break;
    }
  }
}

// ---------------------------------------------------------------------------

std::string to_string(PredKind k) {
  switch (k) {
    case PredKind::all: return "all";
    case PredKind::none: return "none";
    case PredKind::ball: return "ball";
    case PredKind::cap: return "cap";
    case PredKind::shell: return "shell";
    case PredKind::box: return "box";
    case PredKind::half_space: return "half-space";
    case PredKind::sector: return "sector";
    case PredKind::set_union: return "union";
    case PredKind::set_intersection: return "intersection";
    case PredKind::set_complement: return "complement";
    case PredKind::set_difference: return "difference";
  }
  return "?";
}

namespace {

PredKind pred_kind_from_string(const std::string& s) {
  static const std::vector<std::pair<std::string, PredKind>> table = {
      {"all", PredKind::all},           {"none", PredKind::none},
      {"ball", PredKind::ball},         {"cap", PredKind::cap},
      {"shell", PredKind::shell},       {"box", PredKind::box},
      {"half-space", PredKind::half_space}, {"sector", PredKind::sector},
      {"union", PredKind::set_union},   {"intersection", PredKind::set_intersection},
      {"complement", PredKind::set_complement}, {"difference", PredKind::set_difference},
  };
  for (const auto& [name, kind] : table)
    if (name == s) return kind;
  throw std::invalid_argument("unknown predicate kind: " + s);
}

bool is_primitive(PredKind k) {
  return k != PredKind::set_union && k != PredKind::set_intersection &&
         k != PredKind::set_complement && k != PredKind::set_difference;
}

}  // namespace

SetPredicate pred_all() { return SetPredicate{.kind = PredKind::all}; }
SetPredicate pred_none() { return SetPredicate{.kind = PredKind::none}; }

SetPredicate pred_ball(const Vec3& center, double radius) {
  SetPredicate p{.kind = PredKind::ball};
  p.center = center;
  p.radius = radius;
  return p;
}

SetPredicate pred_cap(const Vec3& axis, double angle) {
  SetPredicate p{.kind = PredKind::cap};
  double n = norm(axis);
  if (n < 1e-12) throw std::invalid_argument("cap axis must be nonzero");
  p.axis = {axis[0] / n, axis[1] / n, axis[2] / n};
  p.angle = angle;
  return p;
}

SetPredicate pred_shell(double z_min, double z_max) {
  if (z_min > z_max) throw std::invalid_argument("shell with z_min > z_max");
  SetPredicate p{.kind = PredKind::shell};
  p.z_min = z_min;
  p.z_max = z_max;
  return p;
}

SetPredicate pred_box3(const Vec3& lo, const Vec3& hi) {
  SetPredicate p{.kind = PredKind::box};
  p.lo = lo;
  p.hi = hi;
  return p;
}

SetPredicate pred_box2(const Rational& lo0, const Rational& lo1, const Rational& hi0,
                       const Rational& hi1) {
  if (lo0 < 0 || lo1 < 0 || hi0 > 1 || hi1 > 1 || lo0 > hi0 || lo1 > hi1) {
    throw std::invalid_argument("torus box bounds must satisfy 0 <= lo <= hi <= 1");
  }
  SetPredicate p{.kind = PredKind::box};
  p.rational_box = true;
  p.rlo = {lo0, lo1};
  p.rhi = {hi0, hi1};
  return p;
}

SetPredicate pred_half_space(const Vec3& normal, double offset) {
  SetPredicate p{.kind = PredKind::half_space};
  p.normal = normal;
  p.offset = offset;
  return p;
}

SetPredicate pred_sector(double alpha, double beta) {
  SetPredicate p{.kind = PredKind::sector};
  p.alpha = alpha;
  p.beta = beta;
  return p;
}

SetPredicate pred_union(std::vector<SetPredicate> parts) {
  SetPredicate p{.kind = PredKind::set_union};
  p.children = std::move(parts);
  return p;
}

SetPredicate pred_intersection(std::vector<SetPredicate> parts) {
  SetPredicate p{.kind = PredKind::set_intersection};
  p.children = std::move(parts);
  return p;
}

SetPredicate pred_complement(SetPredicate q) {
  SetPredicate p{.kind = PredKind::set_complement};
  p.children.push_back(std::move(q));
  return p;
}

SetPredicate pred_difference(SetPredicate a, SetPredicate b) {
  SetPredicate p{.kind = PredKind::set_difference};
  p.children.push_back(std::move(a));
  p.children.push_back(std::move(b));
  return p;
}

SetPredicate transported(const SetPredicate& p, const GroupElement& g) {
  SetPredicate r = p;
  if (is_primitive(p.kind)) {
    if (p.kind == PredKind::all || p.kind == PredKind::none) return r;
    GroupElement ginv = inverse(g);
    r.pose_inv = p.pose_inv ? compose(*p.pose_inv, ginv) : ginv;
  } else {
    for (auto& c : r.children) c = transported(c, g);
  }
  return r;
}

namespace {

bool eval_cloud_primitive(const SetPredicate& p, Vec3 v) {
  if (p.pose_inv) v = eqd::apply(*p.pose_inv, v);
  switch (p.kind) {
    case PredKind::all: return true;
    case PredKind::none: return false;
    case PredKind::ball: {
      Vec3 d{v[0] - p.center[0], v[1] - p.center[1], v[2] - p.center[2]};
      return norm(d) <= p.radius;
    }
    case PredKind::cap: {
      double n = norm(v);
      if (n < 1e-12) return false;
      double c = std::clamp(dot(v, p.axis) / n, -1.0, 1.0);
      return std::acos(c) <= p.angle;
    }
    case PredKind::shell: {
      double n = norm(v);
      return n >= p.z_min && n <= p.z_max;
    }
    case PredKind::box: {
      if (p.rational_box) throw std::invalid_argument("torus box evaluated on a cloud model");
      for (int i = 0; i < 3; ++i)
        if (v[i] < p.lo[i] || v[i] >= p.hi[i]) return false;
      return true;
    }
    case PredKind::half_space: return dot(v, p.normal) >= p.offset;
    case PredKind::sector: {
      double theta = std::atan2(v[1], v[0]);
      if (theta < 0) theta += 2 * kPi;
      double a = p.alpha, b = p.beta;
      if (a <= b) return theta >= a && theta < b;
      return theta >= a || theta < b;  // wrapped sector
    }
    default: break;
  }
  throw std::logic_error("unreachable predicate kind");
}

bool eval_torus_primitive(const SetPredicate& p, const SpaceModel& m, TorusPoint x) {
  if (p.pose_inv) x = apply(*p.pose_inv, x, m.q);
  switch (p.kind) {
    case PredKind::all: return true;
    case PredKind::none: return false;
    case PredKind::box: {
      if (!p.rational_box) throw std::invalid_argument("euclidean box evaluated on the torus");
      Rational c0(x.a, m.q), c1(x.b, m.q);
      return c0 >= p.rlo[0] && c0 < p.rhi[0] && c1 >= p.rlo[1] && c1 < p.rhi[1];
    }
    default:
      throw std::invalid_argument("predicate kind '" + to_string(p.kind) +
                                  "' is not defined on the torus");
  }
}

}  // namespace

bool eval_predicate(const SetPredicate& p, const SpaceModel& m, std::size_t idx) {
  switch (p.kind) {
    case PredKind::set_union:
      for (const auto& c : p.children)
        if (eval_predicate(c, m, idx)) return true;
      return false;
    case PredKind::set_intersection:
      for (const auto& c : p.children)
        if (!eval_predicate(c, m, idx)) return false;
      return true;
    case PredKind::set_complement: return !eval_predicate(p.children.at(0), m, idx);
    case PredKind::set_difference:
      return eval_predicate(p.children.at(0), m, idx) && !eval_predicate(p.children.at(1), m, idx);
    default:
      return m.kind == ModelKind::rational_torus
                 ? eval_torus_primitive(p, m, m.torus_point(idx))
                 : eval_cloud_primitive(p, m.cloud_point(idx));
  }
}

nlohmann::json to_json(const SetPredicate& p) {
  nlohmann::json j;
  j["schema"] = "equidecomp.predicate.v1";
  j["kind"] = to_string(p.kind);
  switch (p.kind) {
    case PredKind::ball:
      j["center"] = p.center;
      j["radius"] = p.radius;
      break;
    case PredKind::cap:
      j["axis"] = p.axis;
      j["angle"] = p.angle;
      break;
    case PredKind::shell:
      j["z_min"] = p.z_min;
      j["z_max"] = p.z_max;
      break;
    case PredKind::box:
      if (p.rational_box) {
        j["rlo"] = {to_string(p.rlo[0]), to_string(p.rlo[1])};
        j["rhi"] = {to_string(p.rhi[0]), to_string(p.rhi[1])};
      } else {
        j["lo"] = p.lo;
        j["hi"] = p.hi;
      }
      break;
    case PredKind::half_space:
      j["normal"] = p.normal;
      j["offset"] = p.offset;
      break;
    case PredKind::sector:
      j["alpha"] = p.alpha;
      j["beta"] = p.beta;
      break;
    default: break;
  }
  if (p.pose_inv) j["pose_inv"] = to_json(*p.pose_inv);
  if (!p.children.empty()) {
    nlohmann::json kids = nlohmann::json::array();
    for (const auto& c : p.children) kids.push_back(to_json(c));
    j["children"] = kids;
  }
  return j;
}

SetPredicate predicate_from_json(const nlohmann::json& j) {
  SetPredicate p;
  p.kind = pred_kind_from_string(j.at("kind").get<std::string>());
  switch (p.kind) {
    case PredKind::ball:
      p.center = j.at("center").get<Vec3>();
      p.radius = j.at("radius").get<double>();
      break;
    case PredKind::cap:
      p.axis = j.at("axis").get<Vec3>();
      p.angle = j.at("angle").get<double>();
      break;
    case PredKind::shell:
      p.z_min = j.at("z_min").get<double>();
      p.z_max = j.at("z_max").get<double>();
      break;
    case PredKind::box:
      if (j.contains("rlo")) {
        p.rational_box = true;
        p.rlo = {parse_rational(j["rlo"][0].get<std::string>()),
                 parse_rational(j["rlo"][1].get<std::string>())};
        p.rhi = {parse_rational(j["rhi"][0].get<std::string>()),
                 parse_rational(j["rhi"][1].get<std::string>())};
      } else {
        p.lo = j.at("lo").get<Vec3>();
        p.hi = j.at("hi").get<Vec3>();
      }
      break;
    case PredKind::half_space:
      p.normal = j.at("normal").get<Vec3>();
      p.offset = j.at("offset").get<double>();
      break;
    case PredKind::sector:
      p.alpha = j.at("alpha").get<double>();
      p.beta = j.at("beta").get<double>();
      break;
    default: break;
  }
  if (j.contains("pose_inv")) p.pose_inv = element_from_json(j["pose_inv"]);
  if (j.contains("children")) {
    for (const auto& c : j["children"]) p.children.push_back(predicate_from_json(c));
  }
  return p;
}

// ---------------------------------------------------------------------------

std::size_t SampledSet::count() const {
  std::size_t c = 0;
  for (auto b : mask) c += b;
  return c;
}

SampledSet realize(const SpaceModel& m, const SetPredicate& p) {
  SampledSet s;
  s.model = &m;
  s.source = p;
  s.mask.assign(m.size(), 0);
  parallel_shards(m.size(), [&](int, std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) s.mask[i] = eval_predicate(p, m, i) ? 1 : 0;
  });
  return s;
}

SampledSet from_mask(const SpaceModel& m, std::vector<std::uint8_t> mask) {
  if (mask.size() != m.size()) throw std::invalid_argument("mask size mismatch");
  SampledSet s;
  s.model = &m;
  s.mask = std::move(mask);
  return s;
}

SampledSet set_union(const SampledSet& a, const SampledSet& b) {
  require_same_model(a, b);
  SampledSet r;
  r.model = a.model;
  r.mask.resize(a.mask.size());
  for (std::size_t i = 0; i < a.mask.size(); ++i) r.mask[i] = a.mask[i] | b.mask[i];
  if (a.source && b.source) r.source = pred_union({*a.source, *b.source});
  return r;
}

SampledSet set_intersection(const SampledSet& a, const SampledSet& b) {
  require_same_model(a, b);
  SampledSet r;
  r.model = a.model;
  r.mask.resize(a.mask.size());
  for (std::size_t i = 0; i < a.mask.size(); ++i) r.mask[i] = a.mask[i] & b.mask[i];
  if (a.source && b.source) r.source = pred_intersection({*a.source, *b.source});
  return r;
}

SampledSet set_difference(const SampledSet& a, const SampledSet& b) {
  require_same_model(a, b);
  SampledSet r;
  r.model = a.model;
  r.mask.resize(a.mask.size());
  for (std::size_t i = 0; i < a.mask.size(); ++i) r.mask[i] = a.mask[i] & ~b.mask[i];
  if (a.source && b.source) r.source = pred_difference(*a.source, *b.source);
  return r;
}

SampledSet set_complement(const SampledSet& a) {
  SampledSet r;
  r.model = a.model;
  r.mask.resize(a.mask.size());
  for (std::size_t i = 0; i < a.mask.size(); ++i) r.mask[i] = a.mask[i] ? 0 : 1;
  if (a.source) r.source = pred_complement(*a.source);
  return r;
}

bool sets_disjoint(const SampledSet& a, const SampledSet& b) {
  require_same_model(a, b);
  for (std::size_t i = 0; i < a.mask.size(); ++i)
    if (a.mask[i] & b.mask[i]) return false;
  return true;
}

SampledSet apply_set(const GroupElement& g, const SampledSet& a) {
  const SpaceModel& m = *a.model;
  if (m.kind != ModelKind::rational_torus) {
    throw std::invalid_argument("exact set images require the torus model");
  }
  auto perm = torus_permutation(g, m.q);
  SampledSet r;
  r.model = a.model;
  r.mask.assign(a.mask.size(), 0);
  for (std::size_t i = 0; i < a.mask.size(); ++i) {
    if (a.mask[i]) r.mask[perm[i]] = 1;
  }
  if (a.source) r.source = transported(*a.source, g);
  return r;
}

MeasureEstimate measure_set(const SampledSet& a) {
  const SpaceModel& m = *a.model;
  MeasureEstimate e;
  std::size_t c = a.count();
  e.value = static_cast<double>(c) * m.weight();
  if (m.kind != ModelKind::rational_torus) {
    double n = static_cast<double>(m.size());
    double phat = static_cast<double>(c) / n;
    e.confidence = 2.5758293035489004 * std::sqrt(phat * (1 - phat) / n) * m.total_mass;
  }
  return e;
}

MeasureEstimate measure(const SpaceModel& m, const SetPredicate& p) {
  return measure_set(realize(m, p));
}

MeasureEstimate saturate(const SpaceModel& m, const GeneratorSet& s, const SampledSet& u,
                         const SampledSet& c) {
  if (u.model != &m || c.model != &m) throw std::invalid_argument("sets live on a different model");
  std::vector<std::uint8_t> moved(m.size(), 0);
  if (m.kind == ModelKind::rational_torus) {
    for (const auto& g : s.elements) {
      auto perm = torus_permutation(g, m.q);
      for (std::size_t i = 0; i < u.mask.size(); ++i) {
        if (u.mask[i]) moved[perm[i]] = 1;
      }
    }
  } else {
    if (!u.source) {
      throw std::invalid_argument("cloud saturation requires a predicate-backed set");
    }
    std::vector<SetPredicate> images;
    images.reserve(s.elements.size());
    for (const auto& g : s.elements) images.push_back(transported(*u.source, g));
    parallel_shards(m.size(), [&](int, std::size_t begin, std::size_t end) {
      for (std::size_t i = begin; i < end; ++i) {
        if (!c.mask[i]) continue;
        for (const auto& img : images) {
          if (eval_predicate(img, m, i)) {
            moved[i] = 1;
            break;
          }
        }
      }
    });
  }
  SampledSet hit;
  hit.model = &m;
  hit.mask.resize(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) hit.mask[i] = moved[i] & c.mask[i];
  return measure_set(hit);
}

std::string export_csv(const SpaceModel& m) {
  std::ostringstream os;
  os << "# schema: equidecomp.model.v1\n";
  os << "# kind: " << to_string(m.kind) << "\n";
  os << "# total_mass: " << m.total_mass << "\n";
  os.precision(17);
  if (m.kind == ModelKind::rational_torus) {
    os << "x,y,weight\n";
    for (std::int64_t a = 0; a < m.q; ++a) {
      for (std::int64_t b = 0; b < m.q; ++b) {
        os << to_string(Rational(a, m.q)) << ',' << to_string(Rational(b, m.q)) << ','
           << m.weight() << "\n";
      }
    }
  } else {
    os << "x,y,z,weight\n";
    for (const auto& p : m.points) {
      os << p[0] << ',' << p[1] << ',' << p[2] << ',' << m.weight() << "\n";
    }
  }
  return os.str();
}

}  // namespace eqd
