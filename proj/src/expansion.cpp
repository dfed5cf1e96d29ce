#include "equidecomp/expansion.hpp"

#include "equidecomp/util.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace eqd {

namespace {

// Union-find over grid indices.
struct DisjointSets {
  std::vector<std::uint32_t> parent;
  explicit DisjointSets(std::size_t n) : parent(n) {
    std::iota(parent.begin(), parent.end(), 0u);
  }
  std::uint32_t find(std::uint32_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
  void unite(std::uint32_t a, std::uint32_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[b] = a;
  }
};

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

std::string pred_label(const SetPredicate& p, std::size_t idx) {
  std::ostringstream os;
  os << "U[" << idx << "]:" << to_string(p.kind);
  return os.str();
}

}  // namespace

void AveragingOperator::apply(const std::vector<double>& in,
                              std::vector<double>& out) const {
  const std::size_t n = size();
  if (in.size() != n) throw std::invalid_argument("apply: vector size mismatch");
  out.assign(n, 0.0);
  const double w = perms.empty() ? 0.0 : 1.0 / static_cast<double>(perms.size());
  parallel_shards(n, [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      double s = 0;
      for (const auto& perm : perms) s += in[perm[i]];
      out[i] = s * w;
    }
  });
}

void AveragingOperator::project_mean_zero(std::vector<double>& v) const {
  const std::size_t n = size();
  if (v.size() != n) throw std::invalid_argument("project: vector size mismatch");
  std::vector<double> sum(orbit_count(), 0.0);
  for (std::size_t i = 0; i < n; ++i) sum[orbit_of[i]] += v[i];
  for (std::size_t k = 0; k < sum.size(); ++k) sum[k] /= orbit_size[k];
  for (std::size_t i = 0; i < n; ++i) v[i] -= sum[orbit_of[i]];
}

AveragingOperator make_averaging_operator(const SpaceModel& model,
                                          const GeneratorSet& generators) {
  if (model.kind != ModelKind::rational_torus)
    throw std::invalid_argument("averaging operator requires a torus grid");
  if (generators.elements.empty())
    throw std::invalid_argument("averaging operator requires a nonempty Q");
  if (!is_symmetric(generators))
    throw std::invalid_argument("averaging operator requires symmetric Q");

  AveragingOperator op;
  op.model = &model;
  op.generators = generators;
  op.perms.reserve(generators.elements.size());
  for (const auto& g : generators.elements)
    op.perms.push_back(torus_permutation(g, model.q));

  const std::size_t n = model.size();
  DisjointSets ds(n);
  for (const auto& perm : op.perms)
    for (std::uint32_t i = 0; i < n; ++i) ds.unite(i, perm[i]);

  op.orbit_of.resize(n);
  std::vector<std::uint32_t> label(n, 0xffffffffu);
  std::uint32_t next = 0;
  for (std::uint32_t i = 0; i < n; ++i) {
    std::uint32_t root = ds.find(i);
    if (label[root] == 0xffffffffu) label[root] = next++;
    op.orbit_of[i] = label[root];
  }
  op.orbit_size.assign(next, 0);
  for (std::uint32_t i = 0; i < n; ++i) ++op.orbit_size[op.orbit_of[i]];
  return op;
}

nlohmann::json GapEstimate::to_json() const {
  return nlohmann::json{{"schema", "equidecomp.gap.v1"},
                        {"c", c},
                        {"norm", norm},
                        {"residual", residual},
                        {"iterations", iterations},
                        {"restarts", restarts},
                        {"converged", converged}};
}

GapEstimate estimate_gap(const AveragingOperator& op, int restarts,
                         int max_iterations, double tolerance,
                         std::uint64_t seed) {
  if (restarts < 1 || max_iterations < 1)
    throw std::invalid_argument("estimate_gap: need restarts, iterations >= 1");
  const std::size_t n = op.size();
  GapEstimate ge;
  ge.restarts = restarts;
  if (op.orbit_count() == n) {
    // Every orbit is a singleton: T_Q is the identity and mixes nothing.
    ge.c = 0.0;
    ge.norm = 1.0;
    ge.converged = true;
    return ge;
  }

  double best = 0.0;
  bool all_converged = true;
  std::vector<double> v(n), tv(n), w(n);
  for (int r = 0; r < restarts; ++r) {
    Rng rng(seed, "gap-restart-" + std::to_string(r));
    for (auto& x : v) x = rng.uniform() < 0.5 ? -1.0 : 1.0;
    op.project_mean_zero(v);
    double nv = norm2(v);
    if (nv < 1e-12) {
      // Start vector fell inside the invariant subspace; count as converged
      // at eigenvalue 0 (other restarts explore the complement).
      continue;
    }
    for (auto& x : v) x /= nv;

    double prev = std::numeric_limits<double>::infinity();
    double lambda = 0.0, resid = 0.0;
    bool converged = false;
    int it = 0;
    while (it < max_iterations) {
      ++it;
      op.apply(v, tv);
      op.apply(tv, w);
      op.project_mean_zero(w);
      lambda = dot(v, w);  // Rayleigh quotient of T^2 at unit v
      resid = std::abs(lambda - prev);
      prev = lambda;
      double nw = norm2(w);
      if (nw < 1e-300) {
        lambda = 0.0;
        converged = true;
        break;
      }
      for (std::size_t i = 0; i < n; ++i) v[i] = w[i] / nw;
      if (resid < tolerance) {
        converged = true;
        break;
      }
    }
    best = std::max(best, lambda);
    ge.residual = std::max(ge.residual, resid);
    ge.iterations = std::max(ge.iterations, it);
    all_converged = all_converged && converged;
  }
  ge.converged = all_converged;
  ge.norm = std::sqrt(std::max(0.0, best));
  ge.c = 1.0 - ge.norm;
  return ge;
}

GapEstimate dense_gap(const AveragingOperator& op) {
  const std::size_t n = op.size();
  GapEstimate ge;
  ge.converged = true;
  if (op.orbit_count() == n) {
    ge.c = 0.0;
    ge.norm = 1.0;
    return ge;
  }
  std::vector<double> a(n * n, 0.0);
  const double w = 1.0 / static_cast<double>(op.perms.size());
  for (const auto& perm : op.perms)
    for (std::size_t i = 0; i < n; ++i)
      a[i + n * static_cast<std::size_t>(perm[i])] += w;

  // Deflate the fixed subspace: orbit indicators are exactly T_Q-fixed, so
  // subtracting sum_O (1/|O|) 1_O 1_O^T zeroes them out and leaves the rest
  // of the spectrum untouched.
  std::vector<std::vector<std::uint32_t>> members(op.orbit_count());
  for (std::uint32_t k = 0; k < op.orbit_count(); ++k)
    members[k].reserve(op.orbit_size[k]);
  for (std::uint32_t i = 0; i < n; ++i) members[op.orbit_of[i]].push_back(i);
  for (const auto& orbit : members) {
    const double d = 1.0 / static_cast<double>(orbit.size());
    for (std::uint32_t j : orbit)
      for (std::uint32_t i : orbit) a[i + n * static_cast<std::size_t>(j)] -= d;
  }

  std::vector<double> eval(n);
  lapack_int info = LAPACKE_dsyev(LAPACK_COL_MAJOR, 'N', 'U',
                                  static_cast<lapack_int>(n), a.data(),
                                  static_cast<lapack_int>(n), eval.data());
  if (info != 0) throw std::runtime_error("dense_gap: eigensolve failed");
  ge.norm = std::max(std::abs(eval.front()), std::abs(eval.back()));
  ge.c = 1.0 - ge.norm;
  return ge;
}

double translation_grid_norm(std::int64_t q) {
  if (q < 2) throw std::invalid_argument("translation_grid_norm: q >= 2");
  if (q % 2 == 0) return 1.0;  // bipartite grid, eigenvalue -1 at (q/2-ish, ...)
  return std::cos(std::acos(-1.0) / static_cast<double>(q));
}

nlohmann::json ExpanderRecipe::to_json() const {
  nlohmann::json j{{"schema", "equidecomp.expander.v1"},
                   {"l", l.str()},
                   {"growth_factor", growth_factor},
                   {"enumerated", enumerated},
                   {"word_bound_log10", static_cast<double>(word_bound_log10)}};
  if (enumerated) {
    j["word_count"] = words.elements.size();
    j["words"] = eqd::to_json(words);
  }
  return j;
}

ExpanderRecipe build_expander(const GeneratorSet& q, double c, double eta,
                              std::size_t max_enumeration) {
  if (!(c > 0.0 && c <= 1.0)) throw std::invalid_argument("build_expander: c in (0,1]");
  if (!(eta > 0.0 && eta < 1.0)) throw std::invalid_argument("build_expander: eta in (0,1)");
  if (q.elements.empty()) throw std::invalid_argument("build_expander: empty Q");

  const std::size_t qs = q.elements.size();
  const BigFloat x = BigFloat(c) * BigFloat(eta) / BigFloat(qs);
  const BigFloat base = BigFloat(1) + x;
  const BigFloat target = BigFloat(1) / BigFloat(eta);

  BigInt l = static_cast<BigInt>(floor(log(target) / log(base))) + 1;
  if (l < 1) l = 1;
  auto power = [&](const BigInt& e) { return pow(base, BigFloat(e)); };
  while (power(l) <= target) ++l;
  while (l > 1 && power(l - 1) > target) --l;

  ExpanderRecipe r;
  r.l = l;
  r.growth_factor = static_cast<double>(base);
  const BigFloat branches = BigFloat(qs > 1 ? qs - 1 : 1);
  r.word_bound_log10 = log10(BigFloat(qs)) + BigFloat(l - 1) * log10(branches);

  if (l <= 1000000 &&
      r.word_bound_log10 <= log10(BigFloat(std::max<std::size_t>(max_enumeration, 1)))) {
    try {
      r.words = word_products(q, static_cast<int>(l), max_enumeration);
      r.enumerated = true;
    } catch (const SizeCapExceeded&) {
      r.enumerated = false;
    }
  }
  return r;
}

nlohmann::json ExpansionReport::to_json() const {
  nlohmann::json tests_j = nlohmann::json::array();
  for (const auto& t : tests) {
    tests_j.push_back({{"description", t.description},
                       {"mu_u", t.mu_u},
                       {"mu_saturation", t.mu_saturation},
                       {"required", t.required},
                       {"margin", t.margin},
                       {"confidence", t.confidence},
                       {"pass", t.pass}});
  }
  return nlohmann::json{{"schema", "equidecomp.expansion_report.v1"},
                        {"eta", eta},
                        {"r_size", r_size},
                        {"mu_c", mu_c},
                        {"worst_margin", worst_margin},
                        {"pass", pass},
                        {"tests", tests_j}};
}

std::string ExpansionReport::plot_csv() const {
  std::ostringstream os;
  os << "mu_u,mu_saturation,required,pass\n";
  os.precision(17);
  for (const auto& t : tests)
    os << t.mu_u << "," << t.mu_saturation << "," << t.required << ","
       << (t.pass ? 1 : 0) << "\n";
  return os.str();
}

ExpansionReport verify_expansion(const SpaceModel& model, const SampledSet& c,
                                 const GeneratorSet& r, double eta,
                                 const std::vector<SetPredicate>& family) {
  if (!(eta > 0.0 && eta < 1.0)) throw std::invalid_argument("verify_expansion: eta in (0,1)");
  if (c.model != &model) throw std::invalid_argument("verify_expansion: C built on another model");

  ExpansionReport report;
  report.eta = eta;
  report.r_size = r.elements.size();
  MeasureEstimate mc = measure_set(c);
  report.mu_c = mc.value;
  report.pass = true;
  report.worst_margin = std::numeric_limits<double>::infinity();

  for (std::size_t i = 0; i < family.size(); ++i) {
    SampledSet u = set_intersection(realize(model, family[i]), c);
    MeasureEstimate mu = measure_set(u);
    MeasureEstimate sat = saturate(model, r, u, c);

    ExpansionTest t;
    t.description = pred_label(family[i], i);
    t.mu_u = mu.value;
    t.mu_saturation = sat.value;
    t.required = std::min((1.0 - eta) * mc.value, mu.value / eta);
    t.margin = t.mu_saturation - t.required;
    t.confidence =
        sat.confidence + std::max(mc.confidence * (1.0 - eta), mu.confidence / eta);
    t.pass = t.margin >= -t.confidence;
    report.worst_margin = std::min(report.worst_margin, t.margin);
    report.pass = report.pass && t.pass;
    report.tests.push_back(std::move(t));
  }
  if (report.tests.empty()) report.worst_margin = 0.0;
  return report;
}

nlohmann::json EdgeStatistics::to_json() const {
  return nlohmann::json{{"schema", "equidecomp.edge_statistics.v1"},
                        {"m", to_string(m)},
                        {"p11", to_string(p11)},
                        {"p10", to_string(p10)},
                        {"p01", to_string(p01)},
                        {"p00", to_string(p00)},
                        {"invariant_mass", to_string(invariant_mass)},
                        {"m_double", m_d()},
                        {"p10_double", p10_d()}};
}

EdgeStatistics edge_statistics(const AveragingOperator& op,
                               const SampledSet& y) {
  const std::size_t n = op.size();
  if (y.model != op.model)
    throw std::invalid_argument("edge_statistics: set built on another model");

  std::int64_t c11 = 0, c10 = 0, c01 = 0, c00 = 0, cy = 0;
  for (std::size_t i = 0; i < n; ++i) cy += y.mask[i] ? 1 : 0;
  for (const auto& perm : op.perms) {
    for (std::size_t i = 0; i < n; ++i) {
      const bool a = y.mask[i] != 0;
      const bool b = y.mask[perm[i]] != 0;
      if (a) {
        if (b) ++c11; else ++c10;
      } else {
        if (b) ++c01; else ++c00;
      }
    }
  }

  const BigInt pairs = BigInt(n) * BigInt(op.perms.size());
  EdgeStatistics s;
  s.m = Rational(BigInt(cy), BigInt(n));
  s.p11 = Rational(BigInt(c11), pairs);
  s.p10 = Rational(BigInt(c10), pairs);
  s.p01 = Rational(BigInt(c01), pairs);
  s.p00 = Rational(BigInt(c00), pairs);

  // ||orbit-mean component of (1_Y - m)||^2 under uniform probability weights:
  // sum_O |O| * (|Y n O|/|O| - m)^2 / n.
  std::vector<std::int64_t> in_orbit(op.orbit_count(), 0);
  for (std::size_t i = 0; i < n; ++i)
    if (y.mask[i]) ++in_orbit[op.orbit_of[i]];
  Rational inv = 0;
  for (std::size_t k = 0; k < op.orbit_count(); ++k) {
    const Rational mean =
        Rational(BigInt(in_orbit[k]), BigInt(op.orbit_size[k])) - s.m;
    inv += Rational(BigInt(op.orbit_size[k]), BigInt(n)) * mean * mean;
  }
  s.invariant_mass = inv;
  return s;
}

bool edge_bound_holds(const EdgeStatistics& s, double c) {
  const Rational cr = rational_from_double(c);
  return s.p10 >= cr * s.m * (Rational(1) - s.m);
}

bool edge_bound_holds_deflated(const EdgeStatistics& s, double c) {
  const Rational cr = rational_from_double(c);
  Rational bound = s.m * (Rational(1) - s.m) - s.invariant_mass;
  if (bound < 0) bound = 0;
  return s.p10 >= cr * bound;
}

double boundary_lower_bound(const EdgeStatistics& s, std::size_t q_size) {
  if (q_size == 0) throw std::invalid_argument("boundary_lower_bound: |Q| >= 1");
  return to_double(s.p10) / static_cast<double>(q_size);
}

std::vector<double> boundary_growth(const AveragingOperator& op,
                                    const SampledSet& y, int steps) {
  const std::size_t n = op.size();
  if (y.model != op.model)
    throw std::invalid_argument("boundary_growth: set built on another model");
  if (steps < 0) throw std::invalid_argument("boundary_growth: steps >= 0");

  const double w = op.model->weight();
  std::vector<std::uint8_t> mask = y.mask;
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(steps) + 1);
  auto mass = [&](const std::vector<std::uint8_t>& m) {
    std::size_t cnt = 0;
    for (auto b : m) cnt += b ? 1 : 0;
    return static_cast<double>(cnt) * w;
  };
  out.push_back(mass(mask));
  for (int s = 0; s < steps; ++s) {
    // (Q u {e})^(s+1).Y: keep the current set and adjoin every generator image.
    std::vector<std::uint8_t> next = mask;
    for (const auto& perm : op.perms)
      for (std::size_t i = 0; i < n; ++i)
        if (mask[i]) next[perm[i]] = 1;
    mask = std::move(next);
    out.push_back(mass(mask));
  }
  return out;
}

}  // namespace eqd
