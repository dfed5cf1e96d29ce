#include "equidecomp/foliation.hpp"

#include "equidecomp/util.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace eqd {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kZ99 = 2.5758293035489004;  // 99% two-sided normal quantile

double norm3(const Vec3& p) {
  return std::sqrt(p[0] * p[0] + p[1] * p[1] + p[2] * p[2]);
}

double binomial_half_width(std::size_t hits, std::size_t n) {
  if (n == 0) return 0;
  const double p = static_cast<double>(hits) / static_cast<double>(n);
  return kZ99 * std::sqrt(std::max(0.0, p * (1.0 - p)) / static_cast<double>(n));
}

BigFloat big_pi() { return atan(BigFloat(1)) * 4; }

BigFloat log10_of(const BigBound& b) { return b.log10_value(); }

// log10(sum of coefficient*5^exponent terms), evaluated stably.
BigFloat log10_sum(const std::vector<BigBound>& terms) {
  BigFloat top = log10_of(terms.front());
  for (const auto& t : terms) top = std::max(top, log10_of(t), std::less<BigFloat>());
  BigFloat acc = 0;
  for (const auto& t : terms) acc += pow(BigFloat(10), log10_of(t) - top);
  return top + log10(acc);
}

}  // namespace

int Foliation::bin_of(double z) const {
  if (z < z_lo || z > z_hi) return -1;
  int b = static_cast<int>((z - z_lo) / bin_width());
  return std::min(b, bins - 1);
}

Foliation Foliation::annulus(int bins) {
  if (bins < 1) throw std::invalid_argument("foliation: bins >= 1");
  Foliation f;
  f.z_lo = 1.0;
  f.z_hi = annulus_rho();
  f.bins = bins;
  f.m_bound = leaf_area(f.z_hi);  // 4 pi rho^2 dominates mu_z(Y) and nu(Z)
  return f;
}

double annulus_rho() { return annulus_outer_radius(); }
double leaf_of(const Vec3& y) { return norm3(y); }
double leaf_area(double z) { return 4.0 * kPi * z * z; }

nlohmann::json FoliationReport::to_json() const {
  nlohmann::json bj = nlohmann::json::array();
  for (const auto& b : bins) {
    bj.push_back({{"z_lo", b.z_lo},
                  {"z_hi", b.z_hi},
                  {"samples", b.samples},
                  {"mu_z_estimate", b.mu_z_estimate},
                  {"mu_z_analytic", b.mu_z_analytic},
                  {"confidence", b.confidence},
                  {"pass", b.pass}});
  }
  return nlohmann::json{{"schema", "equidecomp.foliation_report.v1"},
                        {"citation", "Def. 4.4 / Eq. (4.5)"},
                        {"total_estimate", total_estimate},
                        {"total_analytic", total_analytic},
                        {"model_total", model_total},
                        {"pass", pass},
                        {"bins", bj}};
}

FoliationReport foliation_consistency(const SpaceModel& annulus,
                                      const Foliation& fol) {
  if (annulus.kind != ModelKind::annulus_cloud)
    throw std::invalid_argument("foliation_consistency: annulus cloud required");

  const std::size_t n = annulus.size();
  const double w = annulus.weight();
  const double width = fol.bin_width();
  std::vector<std::size_t> counts(fol.bins, 0);
  for (std::size_t i = 0; i < n; ++i) {
    int b = fol.bin_of(leaf_of(annulus.cloud_point(i)));
    if (b >= 0) ++counts[b];
  }

  FoliationReport rep;
  rep.model_total = annulus.total_mass;
  rep.pass = true;
  // Midpoint evaluation of 4 pi z^2 differs from the bin average by exactly
  // 4 pi width^2 / 12; allow that on top of the statistical slack.
  const double discretization = 4.0 * kPi * width * width / 12.0;
  for (int b = 0; b < fol.bins; ++b) {
    FoliationBin bin;
    bin.z_lo = fol.bin_lo(b);
    bin.z_hi = fol.bin_lo(b + 1);
    bin.samples = counts[b];
    bin.mu_z_estimate = static_cast<double>(counts[b]) * w / width;
    bin.mu_z_analytic = leaf_area(fol.bin_mid(b));
    bin.confidence = binomial_half_width(counts[b], n) * annulus.total_mass / width;
    bin.pass = std::abs(bin.mu_z_estimate - bin.mu_z_analytic) <=
               bin.confidence + discretization;
    rep.total_estimate += bin.mu_z_estimate * width;
    rep.total_analytic += bin.mu_z_analytic * width;
    rep.pass = rep.pass && bin.pass;
    rep.bins.push_back(bin);
  }
  rep.pass = rep.pass &&
             std::abs(rep.total_estimate - rep.model_total) <= 1e-9 * rep.model_total;
  return rep;
}

double CubeDiffuser::height() const { return face_a[0][2]; }

bool CubeDiffuser::contains(const Vec3& p) const {
  const double h = height();
  return std::abs(p[0]) <= 0.5 && std::abs(p[1]) <= 0.5 && p[2] >= h &&
         p[2] <= h + 1.0;
}

CubeDiffuser construct_cube() {
  const double h = cube_gap_height();
  CubeDiffuser k;
  int v = 0;
  for (double z : {h, h + 1.0})
    for (double x : {-0.5, 0.5})
      for (double y : {-0.5, 0.5}) k.vertices[v++] = Vec3{x, y, z};
  for (int i = 0; i < 4; ++i) {
    k.face_a[i] = k.vertices[i];
    k.face_b[i] = k.vertices[4 + i];
  }
  // Quarter turn in the (x, z) plane about the cube center (0, 0, h + 1/2):
  // (x, y, z) -> (c - z, y, x + c) with c = h + 1/2 sends the plane z = h
  // (face A) to x = 1/2 (the +x side wall) and preserves K.
  const double c = h + 0.5;
  k.f = rigid_motion3_approx({0, 0, -1, 0, 1, 0, 1, 0, 0}, {c, 0, c});
  k.d_constant = 0.5;
  return k;
}

nlohmann::json CubeGeometryReport::to_json() const {
  return nlohmann::json{{"schema", "equidecomp.cube_geometry.v1"},
                        {"citation", "Lemma 4.9"},
                        {"h", h},
                        {"rho_closure_residual", rho_closure_residual},
                        {"corner_norm_residual", corner_norm_residual},
                        {"tangency_residual", tangency_residual},
                        {"corner_angle_residual", corner_angle_residual},
                        {"max_interior_angle", max_interior_angle},
                        {"f_orthogonality_residual", f_orthogonality_residual},
                        {"f_wall_residual", f_wall_residual},
                        {"f_cube_residual", f_cube_residual},
                        {"pass", pass}};
}

CubeGeometryReport check_cube_geometry(const CubeDiffuser& k, int angle_samples,
                                       std::uint64_t seed) {
  CubeGeometryReport rep;
  const double rho = annulus_rho();
  rep.h = k.height();
  rep.rho_closure_residual = std::abs(rep.h + 1.0 - rho);

  for (const Vec3& a : k.face_a)
    rep.corner_norm_residual =
        std::max(rep.corner_norm_residual, std::abs(norm3(a) - 1.0));

  // Face B is the horizontal plane z = h + 1; tangency to Y_rho means its
  // center sits on the sphere and every other point lies outside.
  Vec3 b_center{0, 0, rep.h + 1.0};
  rep.tangency_residual = std::abs(norm3(b_center) - rho);
  double min_b_norm = std::numeric_limits<double>::infinity();
  for (const Vec3& b : k.face_b) min_b_norm = std::min(min_b_norm, norm3(b));
  rep.pass = min_b_norm >= rho - 1e-12;

  // Angle between the tangent plane of Y_z and the plane of face A at p:
  // the planes' normals are p/|p| and e_z, so the angle is acos(z/|p|).
  const double quarter = kPi / 4.0;
  for (const Vec3& a : k.face_a) {
    double ang = std::acos(std::clamp(a[2] / norm3(a), -1.0, 1.0));
    rep.corner_angle_residual =
        std::max(rep.corner_angle_residual, std::abs(ang - quarter));
  }

  Rng rng(seed, "cube-angle");
  int kept = 0;
  for (int i = 0; i < angle_samples || kept == 0; ++i) {
    if (i > 100 * angle_samples) break;
    Vec3 p{rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5),
           rng.uniform(rep.h, rep.h + 1.0)};
    double r = norm3(p);
    if (r < 1.0 || r > rho) continue;
    ++kept;
    double ang = std::acos(std::clamp(p[2] / r, -1.0, 1.0));
    rep.max_interior_angle = std::max(rep.max_interior_angle, ang);
  }

  rep.f_orthogonality_residual = orthogonality_residual(k.f);
  for (const Vec3& a : k.face_a) {
    Vec3 fa = eqd::apply(k.f, a);
    rep.f_wall_residual = std::max(rep.f_wall_residual, std::abs(fa[0] - 0.5));
  }
  for (const Vec3& v : k.vertices) {
    Vec3 fv = eqd::apply(k.f, v);
    double best = std::numeric_limits<double>::infinity();
    for (const Vec3& u : k.vertices) {
      double d = std::max({std::abs(fv[0] - u[0]), std::abs(fv[1] - u[1]),
                           std::abs(fv[2] - u[2])});
      best = std::min(best, d);
    }
    rep.f_cube_residual = std::max(rep.f_cube_residual, best);
  }

  const double tol = 1e-12;
  rep.pass = rep.pass && rep.rho_closure_residual <= tol &&
             rep.corner_norm_residual <= tol && rep.tangency_residual <= tol &&
             rep.corner_angle_residual <= tol &&
             rep.max_interior_angle <= quarter + tol &&
             rep.f_orthogonality_residual <= tol && rep.f_wall_residual <= tol &&
             rep.f_cube_residual <= tol;
  return rep;
}

bool z_subset_contains(const ZSubset& r, double z) {
  for (const auto& [lo, hi] : r)
    if (z >= lo && z <= hi) return true;
  return false;
}

nlohmann::json DiffuserReport::to_json() const {
  nlohmann::json bj = nlohmann::json::array();
  for (const auto& b : bins) {
    bj.push_back({{"z_lo", b.z_lo},
                  {"z_hi", b.z_hi},
                  {"samples", b.samples},
                  {"mu_z_f_kr", b.mu_z_f_kr},
                  {"confidence", b.confidence},
                  {"margin", b.margin},
                  {"pass", b.pass}});
  }
  return nlohmann::json{{"schema", "equidecomp.diffuser_report.v1"},
                        {"citation", "Lemma 4.10"},
                        {"mu_kr", mu_kr},
                        {"mu_kr_confidence", mu_kr_confidence},
                        {"required", required},
                        {"max_mu_z_k", max_mu_z_k},
                        {"worst_margin", worst_margin},
                        {"usable_samples", usable_samples},
                        {"pass", pass},
                        {"bins", bj}};
}

DiffuserReport diffuser_check(const CubeDiffuser& k, const SpaceModel& model,
                              const ZSubset& r, const Foliation& fol,
                              std::size_t min_bin_samples) {
  if (model.kind != ModelKind::cube_cloud &&
      model.kind != ModelKind::annulus_cloud)
    throw std::invalid_argument("diffuser_check: cube or annulus cloud required");
  for (const auto& [lo, hi] : r)
    if (!(lo <= hi) || lo < fol.z_lo - 1e-12 || hi > fol.z_hi + 1e-12)
      throw std::invalid_argument("diffuser_check: R must sit inside [1, rho]");

  const GroupElement finv = inverse(k.f);
  const std::size_t n = model.size();
  const double w = model.weight();
  const double width = fol.bin_width();

  std::vector<std::size_t> bin_total(fol.bins, 0), bin_fkr(fol.bins, 0);
  std::size_t kr_count = 0, usable = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3& p = model.cloud_point(i);
    if (!k.contains(p)) continue;
    const int b = fol.bin_of(leaf_of(p));
    if (b < 0) continue;  // inside K but outside the annulus
    ++usable;
    ++bin_total[b];
    if (z_subset_contains(r, leaf_of(p))) ++kr_count;
    Vec3 q = eqd::apply(finv, p);
    if (k.contains(q) && z_subset_contains(r, leaf_of(q))) ++bin_fkr[b];
  }

  DiffuserReport rep;
  rep.usable_samples = usable;
  rep.mu_kr = static_cast<double>(kr_count) * w;
  rep.mu_kr_confidence = binomial_half_width(kr_count, n) * model.total_mass;
  rep.required = k.d_constant * rep.mu_kr;
  rep.pass = true;
  rep.worst_margin = std::numeric_limits<double>::infinity();

  for (int b = 0; b < fol.bins; ++b) {
    if (bin_total[b] < min_bin_samples) {
      std::ostringstream os;
      os << "diffuser_check: bin " << b << " resolves only " << bin_total[b]
         << " samples (< " << min_bin_samples
         << "); bin too thin for statistical resolution";
      throw std::runtime_error(os.str());
    }
    DiffuserBin bin;
    bin.z_lo = fol.bin_lo(b);
    bin.z_hi = fol.bin_lo(b + 1);
    bin.samples = bin_total[b];
    bin.mu_z_f_kr = static_cast<double>(bin_fkr[b]) * w / width;
    bin.confidence = binomial_half_width(bin_fkr[b], n) * model.total_mass / width;
    bin.margin = bin.mu_z_f_kr - rep.required;
    bin.pass = bin.margin >= -(bin.confidence + k.d_constant * rep.mu_kr_confidence);
    rep.max_mu_z_k = std::max(
        rep.max_mu_z_k, static_cast<double>(bin_total[b]) * w / width);
    rep.worst_margin = std::min(rep.worst_margin, bin.margin);
    rep.pass = rep.pass && bin.pass;
    rep.bins.push_back(bin);
  }
  return rep;
}

nlohmann::json DeltaSolution::to_json() const {
  return nlohmann::json{{"schema", "equidecomp.delta.v1"},
                        {"citation", "Lemma 4.5"},
                        {"delta", delta},
                        {"delta_max", delta_max},
                        {"lhs", lhs},
                        {"paper_form", paper_form}};
}

DeltaSolution solve_delta(double d_const, double m, std::size_t t_size,
                          double eps) {
  if (!(d_const > 0.0 && d_const < 1.0))
    throw std::invalid_argument("solve_delta: D in (0,1)");
  if (!(eps > 0.0 && eps < 1.0))
    throw std::invalid_argument("solve_delta: eps in (0,1)");
  if (!(m > 0.0) || t_size < 1)
    throw std::invalid_argument("solve_delta: M > 0, |T| >= 1");

  DeltaSolution s;
  const double tm = static_cast<double>(t_size) * m;
  s.delta_max = eps * d_const / (tm + eps);
  s.paper_form = (d_const == 0.5 && t_size == 1);
  s.delta = s.paper_form ? eps / (4.0 * m) : s.delta_max;
  s.lhs = s.delta * tm / (d_const - s.delta);
  if (!(s.delta > 0.0 && s.delta < d_const && s.lhs <= eps * (1.0 + 1e-12)))
    throw std::runtime_error("solve_delta: no feasible delta");
  return s;
}

nlohmann::json ComposedParams::to_json() const {
  return nlohmann::json{{"schema", "equidecomp.composed_params.v1"},
                        {"citation", "Prop. 4.8 / Cor. 4.12"},
                        {"eta", eta},
                        {"m", m},
                        {"epsilon", epsilon},
                        {"delta", delta},
                        {"beta", beta},
                        {"beta_literal", beta_literal}};
}

ComposedParams composed_expander_params(double eta, double m) {
  if (!(eta > 0.0 && eta <= 1.0))
    throw std::invalid_argument("composed_expander_params: eta in (0,1]");
  if (!(m >= 1.0)) throw std::invalid_argument("composed_expander_params: M >= 1");
  ComposedParams p;
  p.eta = eta;
  p.m = m;
  p.epsilon = eta / (3.0 * m * m);
  p.delta = solve_delta(0.5, m, 1, p.epsilon).delta;  // eps/(4M) = eta/(12 M^3)
  p.beta = p.delta * p.epsilon;                       // eta^2/(36 M^5)
  p.beta_literal = p.beta / (2.0 * m);                // eta^2/(72 M^6)
  return p;
}

BigBound BigBound::from_int_exp(double coeff, const BigInt& e) {
  BigBound b;
  b.coefficient = coeff;
  b.exact_exponent = true;
  b.exponent_int = e;
  b.exponent = BigFloat(e);
  return b;
}

BigBound BigBound::from_float_exp(double coeff, const BigFloat& e) {
  BigBound b;
  b.coefficient = coeff;
  b.exact_exponent = false;
  b.exponent = e;
  return b;
}

BigFloat BigBound::log10_value() const {
  return log10(BigFloat(coefficient)) + exponent * log10(BigFloat(5));
}

nlohmann::json BigBound::to_json() const {
  nlohmann::json j{{"coefficient", coefficient},
                   {"base", 5},
                   {"exact_exponent", exact_exponent},
                   {"log10", static_cast<double>(log10_value())}};
  if (exact_exponent)
    j["exponent"] = exponent_int.str();
  else
    j["exponent"] = static_cast<double>(exponent);
  return j;
}

int compare(const BigBound& a, const BigBound& b) {
  if (a.exact_exponent && b.exact_exponent) {
    // Normalize coefficients into [1, 5); then the exponent decides.
    double ca = a.coefficient, cb = b.coefficient;
    BigInt ea = a.exponent_int, eb = b.exponent_int;
    while (ca >= 5.0) { ca /= 5.0; ++ea; }
    while (ca < 1.0) { ca *= 5.0; --ea; }
    while (cb >= 5.0) { cb /= 5.0; ++eb; }
    while (cb < 1.0) { cb *= 5.0; --eb; }
    if (ea != eb) return ea < eb ? -1 : 1;
    if (ca != cb) return ca < cb ? -1 : 1;
    return 0;
  }
  const BigFloat la = a.log10_value(), lb = b.log10_value();
  if (la < lb) return -1;
  if (lb < la) return 1;
  return 0;
}

namespace {

// |ln x| / ln(1 + x/24), the word-level exponent of a leaf-wise x-expanding
// quaternion product set.
BigFloat word_exponent(const BigFloat& x) {
  return abs(log(x)) / log(BigFloat(1) + x / 24);
}

}  // namespace

nlohmann::json SizeBoundLedger::to_json() const {
  return nlohmann::json{
      {"schema", "equidecomp.size_bound.v1"},
      {"citation", "Cor. 4.12"},
      {"eta", eta},
      {"params", params.to_json()},
      {"e_beta", static_cast<double>(e_beta)},
      {"e_delta", static_cast<double>(e_delta)},
      {"term_pair", term_pair.to_json()},
      {"term_beta", term_beta.to_json()},
      {"term_delta", term_delta.to_json()},
      {"three_term_log10", static_cast<double>(three_term_log10)},
      {"paper_bound", paper_bound.to_json()},
      {"middle_form", middle_form.to_json()},
      {"stated_final", stated_final.to_json()},
      {"recomputed_final", recomputed_final.to_json()},
      {"stated_final_exponent_log2",
       static_cast<double>(stated_final_exponent_log2)},
      {"three_term_below_paper_bound", three_term_below_paper_bound},
      {"paper_bound_below_middle", paper_bound_below_middle},
      {"middle_equals_recomputed", middle_equals_recomputed},
      {"stated_matches_chain", stated_matches_chain}};
}

SizeBoundLedger expander_size_bound(double eta) {
  if (!(eta > 0.0 && eta <= 1.0))
    throw std::invalid_argument("expander_size_bound: eta in (0,1]");

  SizeBoundLedger L;
  L.eta = eta;
  const BigFloat rho = BigFloat(1) + sqrt(BigFloat(2)) / 2;
  const BigFloat m = 4 * big_pi() * rho * rho;
  L.params = composed_expander_params(eta, static_cast<double>(m));

  const BigFloat etaB(eta);
  const BigFloat epsB = etaB / (3 * m * m);
  const BigFloat deltaB = epsB / (4 * m);
  const BigFloat betaB = deltaB * epsB;

  L.e_beta = word_exponent(betaB);
  L.e_delta = word_exponent(deltaB);
  L.term_pair = BigBound::from_float_exp(36, L.e_beta + L.e_delta);
  L.term_beta = BigBound::from_float_exp(6, L.e_beta);
  L.term_delta = BigBound::from_float_exp(6, L.e_delta);
  L.three_term_log10 = log10_sum({L.term_pair, L.term_beta, L.term_delta});
  L.paper_bound = BigBound::from_float_exp(38, 2 * L.e_beta);

  const BigFloat eta2 = etaB * etaB;
  const BigFloat middle_exp =
      BigFloat(48) * pow(BigFloat(2), 32) * abs(4 * log(etaB) - 64) / eta2;
  const BigFloat stated_exp =
      BigFloat(3) * pow(BigFloat(2), 37) * abs(log(etaB) - 16) / eta2;
  const BigFloat recomputed_exp =
      BigFloat(3) * pow(BigFloat(2), 38) * abs(log(etaB) - 16) / eta2;
  L.middle_form = BigBound::from_float_exp(38, middle_exp);
  L.stated_final = BigBound::from_float_exp(38, stated_exp);
  L.recomputed_final = BigBound::from_float_exp(38, recomputed_exp);
  L.stated_final_exponent_log2 = BigFloat(3) * pow(BigFloat(2), 37) *
                                 abs(log(etaB) / log(BigFloat(2)) - 16) / eta2;

  L.three_term_below_paper_bound =
      L.three_term_log10 < L.paper_bound.log10_value();
  L.paper_bound_below_middle = compare(L.paper_bound, L.middle_form) <= 0;
  L.middle_equals_recomputed = (middle_exp == recomputed_exp);
  L.stated_matches_chain = (stated_exp == recomputed_exp);
  return L;
}

nlohmann::json TarskiLedger::to_json() const {
  nlohmann::json entries = nlohmann::json::array();
  auto entry = [&](const std::string& name, nlohmann::json value,
                   const std::string& formula, const std::string& citation) {
    entries.push_back({{"name", name},
                       {"value", std::move(value)},
                       {"formula", formula},
                       {"citation", citation}});
  };
  entry("rho", rho, "1 + sqrt(2)/2", "Cor. 4.12 proof");
  entry("cube_side", cube_side, "sqrt(6)/6 = (rho - 1)/sqrt(3)",
        "Cor. 5.2 proof");
  entry("covering_value", covering_value, "(2 rho / cube_side)^3",
        "Cor. 5.2 proof");
  entry("t_prime_bound", t_prime_bound, "covering_value < 800",
        "Cor. 5.2 proof");
  entry("t_bound", t_bound, "8 ball copies per cube: 8 * 800",
        "Cor. 5.2 proof");
  entry("eta", eta, "1/(2|T|) = 1/12800", "Cor. 5.2 proof");
  entry("eta_below_2_pow_14", eta_below_2_pow_14,
        "printed claim 1/12800 < 1/2^14; 1/12800 > 1/16384", "Cor. 5.2 proof");
  entry("s_bound_stated", s_bound_stated.to_json(),
        "38*5^{3*2^37 |log eta - 16| / eta^2} at eta = 1/12800", "Cor. 4.12");
  entry("s_bound_recomputed", s_bound_recomputed.to_json(),
        "38*5^{3*2^38 |log eta - 16| / eta^2}", "Cor. 4.12 proof, rechecked");
  entry("final_stated", final_stated.to_json(), "38*5^{90*2^60}", "Cor. 5.2");
  entry("final_cap", final_cap.to_json(), "5^{2^72}", "Cor. 5.2");
  entry("final_inequality_ok", final_inequality_ok,
        "log_5(38) + 90*2^60 < 2^72, exact integer check", "Cor. 5.2");
  entry("stated_vs_chain_ratio", static_cast<double>(stated_vs_chain_ratio),
        "chain exponent at eta = 1/12800 over 90*2^60",
        "Cor. 5.2 vs Cor. 4.12, unreconciled");
  entry("sphere_gap_set", sphere_gap_set.to_json(), "6*5^277",
        "Remark after Cor. 5.2");
  entry("sphere_pieces", sphere_pieces.to_json(), "24*5^277",
        "Remark after Cor. 5.2");
  entry("sphere_min_l", sphere_min_l.str(),
        "minimal l with (1 + (3-sqrt5)/18 * 1/6)^l > 6",
        "Remark after Cor. 5.2, rechecked");
  entry("sphere_recomputed", sphere_recomputed.to_json(), "6*5^{l-1}",
        "Remark after Cor. 5.2, rechecked");
  return nlohmann::json{{"schema", "equidecomp.tarski_ledger.v1"},
                        {"covering_ok", covering_ok},
                        {"final_inequality_ok", final_inequality_ok},
                        {"sphere_stated_covers_recomputed",
                         sphere_stated_covers_recomputed},
                        {"entries", entries}};
}

std::string TarskiLedger::to_markdown() const {
  std::ostringstream os;
  os.precision(15);
  os << "| constant | value | formula | citation |\n";
  os << "|---|---|---|---|\n";
  auto row = [&](const std::string& n, const std::string& v,
                 const std::string& f, const std::string& c) {
    os << "| " << n << " | " << v << " | " << f << " | " << c << " |\n";
  };
  auto num = [&](double x) {
    std::ostringstream t;
    t.precision(15);
    t << x;
    return t.str();
  };
  auto bound = [&](const BigBound& b) {
    std::ostringstream t;
    t.precision(6);
    t << b.coefficient << "*5^";
    if (b.exact_exponent)
      t << b.exponent_int.str();
    else
      t << static_cast<double>(b.exponent);
    return t.str();
  };
  row("rho", num(rho), "1 + sqrt(2)/2", "Cor. 4.12 proof");
  row("cube side", num(cube_side), "sqrt(6)/6", "Cor. 5.2 proof");
  row("covering value", num(covering_value), "(2 rho / side)^3 < 800",
      "Cor. 5.2 proof");
  row("|T'|", std::to_string(t_prime_bound), "< 800", "Cor. 5.2 proof");
  row("|T|", std::to_string(t_bound), "8 * 800", "Cor. 5.2 proof");
  row("eta", num(eta), "1/(2|T|)", "Cor. 5.2 proof");
  row("eta < 1/2^14", eta_below_2_pow_14 ? "true" : "false (1/12800 > 1/16384)",
      "printed claim", "Cor. 5.2 proof");
  row("S bound (stated)", bound(s_bound_stated),
      "38*5^{3*2^37 |log eta - 16|/eta^2}", "Cor. 4.12");
  row("S bound (chain)", bound(s_bound_recomputed),
      "38*5^{3*2^38 |log eta - 16|/eta^2}", "Cor. 4.12 proof, rechecked");
  row("pieces (stated)", bound(final_stated), "38*5^{90*2^60}", "Cor. 5.2");
  row("cap", bound(final_cap), "5^{2^72}", "Cor. 5.2");
  row("log_5 38 + 90*2^60 < 2^72", final_inequality_ok ? "true" : "false",
      "exact integer check", "Cor. 5.2");
  row("chain/stated exponent ratio",
      num(static_cast<double>(stated_vs_chain_ratio)), "unreconciled",
      "Cor. 5.2 vs Cor. 4.12");
  row("sphere gap set", bound(sphere_gap_set), "6*5^277",
      "Remark after Cor. 5.2");
  row("sphere pieces", bound(sphere_pieces), "24*5^277",
      "Remark after Cor. 5.2");
  row("sphere minimal l", sphere_min_l.str(),
      "(1 + (3-sqrt5)/108)^l > 6", "Remark after Cor. 5.2, rechecked");
  row("sphere recomputed", bound(sphere_recomputed), "6*5^{l-1}",
      "Remark after Cor. 5.2, rechecked");
  return os.str();
}

TarskiLedger tarski_piece_bound() {
  TarskiLedger t;
  t.rho = annulus_rho();
  t.cube_side = std::sqrt(6.0) / 6.0;
  t.cube_side_residual =
      std::abs(t.cube_side - (t.rho - 1.0) / std::sqrt(3.0));
  t.covering_value = std::pow(2.0 * t.rho / t.cube_side, 3.0);
  t.covering_ok = t.covering_value < 800.0;
  t.t_prime_bound = 800;
  t.t_bound = 6400;
  t.eta = 1.0 / 12800.0;
  t.eta_below_2_pow_14 = (t.eta < 1.0 / 16384.0);

  SizeBoundLedger s = expander_size_bound(t.eta);
  t.s_bound_stated = s.stated_final;
  t.s_bound_recomputed = s.recomputed_final;

  const BigInt stated_exp = BigInt(90) << 60;
  t.final_stated = BigBound::from_int_exp(38, stated_exp);
  t.final_cap = BigBound::from_int_exp(1, BigInt(1) << 72);
  // log_5(38) < 3 because 5^3 = 125 > 38; then 90*2^60 + 3 < 2^72 exactly.
  t.final_inequality_ok =
      (BigInt(125) > BigInt(38)) && (stated_exp + 3 < (BigInt(1) << 72));
  t.stated_vs_chain_ratio = t.s_bound_recomputed.exponent / BigFloat(stated_exp);

  t.sphere_gap_set = BigBound::from_int_exp(6, 277);
  t.sphere_pieces = BigBound::from_int_exp(24, 277);
  const double c = 1.0 - std::sqrt(5.0) / 3.0;
  t.sphere_min_l = build_expander(lps_generators(), c, 1.0 / 6.0).l;
  t.sphere_recomputed = BigBound::from_int_exp(6, t.sphere_min_l - 1);
  t.sphere_stated_covers_recomputed =
      compare(t.sphere_recomputed, t.sphere_gap_set) <= 0;
  return t;
}

nlohmann::json AnnulusExpanderRecipe::to_json() const {
  return nlohmann::json{{"schema", "equidecomp.annulus_expander.v1"},
                        {"citation", "Prop. 4.8"},
                        {"composition", "S_beta T S_delta | S_beta T | S_delta"},
                        {"eta", eta},
                        {"m", m},
                        {"params", params.to_json()},
                        {"s_beta", s_beta.to_json()},
                        {"s_delta", s_delta.to_json()},
                        {"t_size", t_size},
                        {"term_pair", term_pair.to_json()},
                        {"term_beta", term_beta.to_json()},
                        {"term_delta", term_delta.to_json()},
                        {"total_log10", static_cast<double>(total_log10)},
                        {"enumerable", enumerable}};
}

AnnulusExpanderRecipe annulus_expander(double eta,
                                       std::size_t max_enumeration) {
  AnnulusExpanderRecipe r;
  r.eta = eta;
  r.m = leaf_area(annulus_rho());  // 4 pi rho^2
  r.params = composed_expander_params(eta, r.m);
  const double c = 1.0 - std::sqrt(5.0) / 3.0;
  r.s_beta = build_expander(lps_generators(), c, r.params.beta, max_enumeration);
  r.s_delta = build_expander(lps_generators(), c, r.params.delta, max_enumeration);
  r.t_size = 1;  // the cube diffuser {f}

  // |S_x| <= 6*5^{l_x - 1}; |T| = 1 keeps the pair term at 36.
  r.term_pair = BigBound::from_int_exp(
      36.0 * static_cast<double>(r.t_size), r.s_beta.l + r.s_delta.l - 2);
  r.term_beta =
      BigBound::from_int_exp(6.0 * static_cast<double>(r.t_size), r.s_beta.l - 1);
  r.term_delta = BigBound::from_int_exp(6, r.s_delta.l - 1);
  r.total_log10 = log10_sum({r.term_pair, r.term_beta, r.term_delta});
  r.enumerable = r.s_beta.enumerated && r.s_delta.enumerated;
  return r;
}

}  // namespace eqd
