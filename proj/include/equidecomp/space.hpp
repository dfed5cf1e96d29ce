#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "equidecomp/group.hpp"
#include "json.hpp"

namespace eqd {

// Discrete stand-ins for the measure space: an exact rational torus grid and
// Monte Carlo point clouds on the sphere, the solid annulus and a cube.
enum class ModelKind { rational_torus, sphere_cloud, annulus_cloud, cube_cloud };

std::string to_string(ModelKind k);
ModelKind model_kind_from_string(const std::string& s);

inline double annulus_outer_radius() { return 1.0 + std::numbers::sqrt2 / 2; }
inline double cube_gap_height() { return std::numbers::sqrt2 / 2; }

struct SpaceModel {
  ModelKind kind = ModelKind::rational_torus;
  std::int64_t q = 0;             // rational torus resolution
  std::vector<Vec3> points;       // cloud models only
  double total_mass = 1.0;
  std::uint64_t rng_seed = 0;
  // Rejection-sampling provenance (annulus cloud): proposals drawn from a box
  // of the given volume. Enables an unbiased Monte Carlo estimate of the
  // model's true mass, independent of the analytic total_mass.
  std::uint64_t proposal_attempts = 0;
  double proposal_volume = 0.0;

  std::size_t size() const {
    return kind == ModelKind::rational_torus ? static_cast<std::size_t>(q) * static_cast<std::size_t>(q)
                                             : points.size();
  }
  double weight() const { return total_mass / static_cast<double>(size()); }
  TorusPoint torus_point(std::size_t idx) const {
    auto iq = static_cast<std::int64_t>(idx);
    return TorusPoint{iq / q, iq % q};
  }
  std::size_t torus_index(TorusPoint p) const {
    return static_cast<std::size_t>(p.a * q + p.b);
  }
  const Vec3& cloud_point(std::size_t idx) const { return points[idx]; }
};

// total_mass conventions: torus 1; sphere cloud 4*pi (surface area of the unit
// sphere); annulus cloud 4*pi*(rho^3-1)/3 (volume, consistent with the leaf
// masses 4*pi*z^2); cube cloud 1.
SpaceModel build_model(ModelKind kind, std::int64_t size, std::uint64_t seed);

void validate_model(const SpaceModel& m);  // throws std::logic_error on violation

// ---------------------------------------------------------------------------
// Set description language. Primitives carry a pose (inverse group element)
// so that images under group elements are again predicates, exactly.

enum class PredKind {
  all,
  none,
  ball,
  cap,
  shell,
  box,
  half_space,
  sector,
  set_union,
  set_intersection,
  set_complement,
  set_difference,
};

std::string to_string(PredKind k);

struct SetPredicate {
  PredKind kind = PredKind::none;

  // ball
  Vec3 center{};
  double radius = 0;
  // cap: angle(x, axis) <= angle, x taken as a direction through the origin
  Vec3 axis{};
  double angle = 0;
  // shell: z_min <= |x| <= z_max
  double z_min = 0, z_max = 0;
  // box, euclidean: lo <= x < hi componentwise
  Vec3 lo{}, hi{};
  // box, torus: exact half-open rational box [rlo, rhi) in [0,1)^2
  bool rational_box = false;
  std::array<Rational, 2> rlo{}, rhi{};
  // half-space: normal . x >= offset
  Vec3 normal{};
  double offset = 0;
  // sector: azimuthal angle of (x,y) in [alpha, beta), wrapping allowed
  double alpha = 0, beta = 0;

  std::vector<SetPredicate> children;
  std::optional<GroupElement> pose_inv;  // primitives only; nullopt = identity
};

SetPredicate pred_all();
SetPredicate pred_none();
SetPredicate pred_ball(const Vec3& center, double radius);
SetPredicate pred_cap(const Vec3& axis, double angle);
SetPredicate pred_shell(double z_min, double z_max);
SetPredicate pred_box3(const Vec3& lo, const Vec3& hi);
SetPredicate pred_box2(const Rational& lo0, const Rational& lo1, const Rational& hi0,
                       const Rational& hi1);
SetPredicate pred_half_space(const Vec3& normal, double offset);
SetPredicate pred_sector(double alpha, double beta);
SetPredicate pred_union(std::vector<SetPredicate> parts);
SetPredicate pred_intersection(std::vector<SetPredicate> parts);
SetPredicate pred_complement(SetPredicate p);
SetPredicate pred_difference(SetPredicate p, SetPredicate q);

// Image of the predicate under g: x in result iff g^-1.x in p.
SetPredicate transported(const SetPredicate& p, const GroupElement& g);

bool eval_predicate(const SetPredicate& p, const SpaceModel& m, std::size_t point_idx);

nlohmann::json to_json(const SetPredicate& p);
SetPredicate predicate_from_json(const nlohmann::json& j);

// ---------------------------------------------------------------------------

struct SampledSet {
  const SpaceModel* model = nullptr;
  std::vector<std::uint8_t> mask;  // one byte per model point
  std::optional<SetPredicate> source;

  std::size_t count() const;
  double measure() const { return static_cast<double>(count()) * model->weight(); }
  bool contains(std::size_t idx) const { return mask[idx] != 0; }
  bool empty() const { return count() == 0; }
};

SampledSet realize(const SpaceModel& m, const SetPredicate& p);
SampledSet from_mask(const SpaceModel& m, std::vector<std::uint8_t> mask);

SampledSet set_union(const SampledSet& a, const SampledSet& b);
SampledSet set_intersection(const SampledSet& a, const SampledSet& b);
SampledSet set_difference(const SampledSet& a, const SampledSet& b);
SampledSet set_complement(const SampledSet& a);
bool sets_disjoint(const SampledSet& a, const SampledSet& b);

// Exact image g.A on the rational torus.
SampledSet apply_set(const GroupElement& g, const SampledSet& a);

struct MeasureEstimate {
  double value = 0;
  double confidence = 0;  // 99% binomial half-width; 0 when exact
};

MeasureEstimate measure(const SpaceModel& m, const SetPredicate& p);
MeasureEstimate measure_set(const SampledSet& a);

// mu(S.U intersect C). Exact on the torus; predicate transport on clouds
// (requires U to be predicate-backed there).
MeasureEstimate saturate(const SpaceModel& m, const GeneratorSet& s, const SampledSet& u,
                         const SampledSet& c);

std::string export_csv(const SpaceModel& m);

}  // namespace eqd
