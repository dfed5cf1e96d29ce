// Command-line front door. Every subcommand computes its full report first
// and prints in one shot, so a failing run never leaves partial output.
// Exit codes: 0 pass, 1 validation failure, 2 usage error.

#include <CLI11.hpp>

#include "equidecomp/foliation.hpp"
#include "equidecomp/pipeline.hpp"
#include "equidecomp/util.hpp"

#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace eqd;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

nlohmann::json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file '" + path + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw UsageError("config file '" + path + "' is not valid JSON: " + e.what());
  }
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << content;
}

SpaceModel model_from_json(const nlohmann::json& j) {
  return build_model(model_kind_from_string(j.at("kind").get<std::string>()),
                     j.at("size").get<std::int64_t>(), j.value("seed", std::uint64_t{0}));
}

GeneratorSet generators_from_config(const nlohmann::json& j, std::int64_t q) {
  if (j.is_string()) return named_generators(j.get<std::string>(), q);
  return generator_set_from_json(j);
}

// Cumulative word ball of the base up to length l, symmetrized with identity.
GeneratorSet word_ball(const GeneratorSet& base, int l) {
  GeneratorSet ball;
  for (int i = 1; i <= l; ++i) {
    GeneratorSet exact = word_products(base, i);
    ball = (i == 1) ? exact : dedup_union({&ball, &exact});
  }
  return with_identity(symmetrize(ball));
}

ZSubset parse_intervals(const std::string& spec) {
  ZSubset r;
  std::stringstream ss(spec);
  std::string part;
  while (std::getline(ss, part, ',')) {
    auto colon = part.find(':');
    if (colon == std::string::npos)
      throw UsageError("interval '" + part + "' is not of the form lo:hi");
    try {
      r.emplace_back(std::stod(part.substr(0, colon)), std::stod(part.substr(colon + 1)));
    } catch (const std::exception&) {
      throw UsageError("interval '" + part + "' is not of the form lo:hi");
    }
  }
  if (r.empty()) throw UsageError("empty interval list");
  return r;
}

std::string markdown_table(const nlohmann::json& j) {
  std::ostringstream os;
  os << "| field | value |\n|---|---|\n";
  for (const auto& [key, value] : j.items())
    os << "| " << key << " | " << (value.is_string() ? value.get<std::string>() : value.dump())
       << " |\n";
  return os.str();
}

struct Output {
  bool json_mode = false;
  nlohmann::json report;
  std::string text;
  int exit_code = 0;

  void print() const {
    if (json_mode)
      std::cout << report.dump(2) << "\n";
    else
      std::cout << text;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"equidecomposition laboratory: expanders, matchings, certificates, bound ledgers"};
  app.require_subcommand(1);
  app.fallthrough();

  std::uint64_t seed = 0;
  bool json_mode = false;
  int threads = 0;
  app.add_option("--seed", seed, "seed for randomized legs (default 0)");
  app.add_flag("--json", json_mode, "emit machine-readable JSON reports");
  app.add_option("--threads", threads,
                 "worker threads (default: EQUIDECOMP_THREADS or hardware)");
  bool seed_given = false;

  Output out;

  // Callbacks run at the end of parse; resolve shared flags before any work.
  auto prepare = [&] {
    seed_given = app.count("--seed") > 0;
    if (threads > 0) set_thread_count(threads);
  };

  // ---- gap ----------------------------------------------------------------
  auto* gap_cmd = app.add_subcommand("gap", "finite-model spectral gap of an averaging operator");
  std::int64_t gap_size = 32;
  std::string gap_gens = "sl2z", gap_method = "dense";
  gap_cmd->add_option("--size", gap_size, "torus resolution q");
  gap_cmd->add_option("--generators", gap_gens, "sl2z | translations | lps");
  gap_cmd->add_option("--method", gap_method, "dense | power | fourier")
      ->check(CLI::IsMember({"dense", "power", "fourier"}));
  gap_cmd->callback([&] {
    prepare();
    GapEstimate gap;
    if (gap_method == "fourier") {
      if (gap_gens != "translations")
        throw UsageError("--method fourier has a closed form for --generators translations only");
      gap.norm = translation_grid_norm(gap_size);
      gap.c = 1.0 - gap.norm;
      gap.converged = true;
    } else {
      SpaceModel m = build_model(ModelKind::rational_torus, gap_size, 0);
      AveragingOperator op = make_averaging_operator(m, named_generators(gap_gens, gap_size));
      gap = gap_method == "dense" ? dense_gap(op) : estimate_gap(op, 10, 2000, 1e-9, seed);
    }
    out.report = gap.to_json();
    out.report["method"] = gap_method;
    out.report["q"] = gap_size;
    out.report["generators"] = gap_gens;
    std::ostringstream os;
    os << "gap c = " << gap.c << " (norm " << gap.norm << ", method " << gap_method
       << ", q = " << gap_size << ", generators " << gap_gens << ")\n";
    out.text = os.str();
    out.exit_code = (gap_method == "power" && !gap.converged) ? 1 : 0;
  });

  // ---- expander -----------------------------------------------------------
  auto* exp_cmd = app.add_subcommand("expander", "eta-expanding word-set recipe from a gap");
  double exp_eta = 0, exp_c = 0;
  std::string exp_gens = "lps";
  std::int64_t exp_size = 32;
  std::size_t exp_cap = 1u << 18;
  exp_cmd->add_option("--eta", exp_eta, "target eta in (0,1)")->required();
  exp_cmd->add_option("--c", exp_c, "spectral gap c in (0,1]")->required();
  exp_cmd->add_option("--generators", exp_gens, "sl2z | translations | lps");
  exp_cmd->add_option("--size", exp_size, "torus resolution (translations only)");
  exp_cmd->add_option("--cap", exp_cap, "max enumerated word count");
  exp_cmd->callback([&] {
    prepare();
    if (!(exp_eta > 0.0 && exp_eta < 1.0)) throw UsageError("--eta must lie in (0,1)");
    if (!(exp_c > 0.0) || exp_c > 1.0) throw UsageError("--c must lie in (0,1]");
    ExpanderRecipe recipe =
        build_expander(named_generators(exp_gens, exp_size), exp_c, exp_eta, exp_cap);
    out.report = recipe.to_json();
    std::ostringstream os;
    os << "minimal l = " << recipe.l.str() << " (growth factor " << recipe.growth_factor
       << ", " << (recipe.enumerated ? "enumerated" : "symbolic") << ", word bound log10 = "
       << static_cast<double>(recipe.word_bound_log10) << ")\n";
    out.text = os.str();
  });

  // ---- verify-expansion ----------------------------------------------------
  auto* ver_cmd = app.add_subcommand("verify-expansion",
                                     "check the expansion inequality for a word ball");
  std::string ver_config, ver_plot;
  ver_cmd->add_option("--config", ver_config, "JSON config")->required();
  ver_cmd->add_option("--plot-data", ver_plot, "write per-test CSV to this path");
  ver_cmd->callback([&] {
    prepare();
    nlohmann::json cfg = load_json(ver_config);
    SpaceModel m = model_from_json(cfg.at("model"));
    SampledSet cset = realize(m, predicate_from_json(cfg.at("c_set")));
    GeneratorSet base = generators_from_config(cfg.at("base"), m.q);
    GeneratorSet r = word_ball(base, cfg.value("word_length", 2));
    const nlohmann::json& famj = cfg.at("family");
    std::uint64_t fam_seed = seed_given ? seed : famj.value("seed", std::uint64_t{0});
    std::vector<SetPredicate> family = expansion_test_family(
        m.q, predicate_from_json(famj.at("a")), predicate_from_json(famj.at("b")),
        famj.value("boxes_per_scale", 3), fam_seed);
    ExpansionReport rep =
        verify_expansion(m, cset, r, cfg.at("eta").get<double>(), family);
    if (!ver_plot.empty()) write_file(ver_plot, rep.plot_csv());
    out.report = rep.to_json();
    std::ostringstream os;
    os << "expansion " << (rep.pass ? "PASS" : "FAIL") << ": " << rep.tests.size()
       << " test sets, |R| = " << rep.r_size << ", eta = " << rep.eta
       << ", worst margin = " << rep.worst_margin << "\n";
    for (const ExpansionTest& t : rep.tests)
      if (!t.pass)
        os << "  fail " << t.description << ": mu(R.U n C) = " << t.mu_saturation
           << " < required " << t.required << "\n";
    out.text = os.str();
    out.exit_code = rep.pass ? 0 : 1;
  });

  // ---- match ----------------------------------------------------------------
  auto* match_cmd = app.add_subcommand("match", "staged bipartite matching run");
  std::string match_config;
  match_cmd->add_option("--config", match_config, "JSON config")->required();
  match_cmd->callback([&] {
    prepare();
    nlohmann::json cfg = load_json(match_config);
    SpaceModel m = model_from_json(cfg.at("model"));
    SampledSet a = realize(m, predicate_from_json(cfg.at("a")));
    SampledSet b = realize(m, predicate_from_json(cfg.at("b")));
    GeneratorSet s = generators_from_config(cfg.at("s"), m.q);
    bool doubled = cfg.value("doubled", !sets_disjoint(a, b));
    int stages = cfg.value("stages", 8);
    Graphing g = bipartite_graphing(a, b, s, doubled);
    auto [matching, reports] = run_to_stage(g, stages);
    bool certified = verify_no_short_augmenting_path(g, matching, 2 * stages - 1);
    bool valid = matching_valid(g, matching);
    nlohmann::json stage_list = nlohmann::json::array();
    for (const StageReport& sr : reports) stage_list.push_back(to_json(sr));
    out.report = {{"schema", "equidecomp.match_run.v1"},
                  {"citation", "Lemma 2.2 / Thm. 2.3"},
                  {"doubled", doubled},
                  {"stages", stage_list},
                  {"matched_mass", static_cast<double>(matching.size()) * g.point_weight()},
                  {"unmatched_left_mass",
                   static_cast<double>(matching.unmatched_left()) * g.point_weight()},
                  {"stage_certified", certified},
                  {"matching_valid", valid}};
    std::ostringstream os;
    os << "matching after stage " << stages << ": " << matching.size() << " edges, "
       << matching.unmatched_left() << " unmatched left, stage certificate "
       << (certified ? "holds" : "FAILS") << ", matching "
       << (valid ? "valid" : "INVALID") << "\n";
    out.text = os.str();
    out.exit_code = (certified && valid) ? 0 : 1;
  });

  // ---- equidecompose ---------------------------------------------------------
  auto* eq_cmd = app.add_subcommand("equidecompose", "full pipeline from an experiment config");
  std::string eq_config, eq_out;
  eq_cmd->add_option("--config", eq_config, "experiment JSON config")->required();
  eq_cmd->add_option("--out", eq_out, "write the full certificate JSON here");
  eq_cmd->callback([&] {
    prepare();
    ExperimentConfig cfg = experiment_from_json(load_json(eq_config));
    if (seed_given) cfg.options.seed = seed;
    ExperimentRun run = run_experiment(cfg);
    if (!eq_out.empty()) write_file(eq_out, to_json(run.result.certificate).dump(2) + "\n");
    out.report = run.result.to_json();
    std::ostringstream os;
    os << "equidecompose " << (run.result.ok ? "PASS" : "FAIL") << ": "
       << run.result.certificate.piece_count() << " pieces, residue "
       << run.result.certificate.residue_mass << ", eta = " << run.result.eta
       << ", |R| = " << run.result.r.size() << ", |S| = " << run.result.s.size()
       << ", stages = " << run.result.stages.size() << ", validator "
       << (run.result.validation.ok ? "accepts" : "rejects") << "\n";
    out.text = os.str();
    out.exit_code = run.result.ok ? 0 : 1;
  });

  // ---- diffuser ---------------------------------------------------------------
  auto* dif_cmd = app.add_subcommand("diffuser", "cube diffuser inequality per shell bin");
  std::size_t dif_samples = 200000, dif_min_bin = 50;
  int dif_bins = 32;
  std::string dif_intervals;
  dif_cmd->add_option("--samples", dif_samples, "cube cloud sample count");
  dif_cmd->add_option("--bins", dif_bins, "shell bin count");
  dif_cmd->add_option("--intervals", dif_intervals,
                      "R as comma-separated lo:hi pairs in [1,rho] (default all)");
  dif_cmd->add_option("--min-bin-samples", dif_min_bin, "statistical resolution floor");
  dif_cmd->callback([&] {
    prepare();
    SpaceModel m = build_model(ModelKind::cube_cloud, static_cast<std::int64_t>(dif_samples), seed);
    Foliation fol = Foliation::annulus(dif_bins);
    ZSubset r = dif_intervals.empty() ? ZSubset{{1.0, annulus_rho()}}
                                      : parse_intervals(dif_intervals);
    DiffuserReport rep = diffuser_check(construct_cube(), m, r, fol, dif_min_bin);
    out.report = rep.to_json();
    std::ostringstream os;
    os << "diffuser " << (rep.pass ? "PASS" : "FAIL") << ": mu(K_R) = " << rep.mu_kr
       << ", required per leaf >= " << rep.required << ", worst margin = " << rep.worst_margin
       << " over " << rep.bins.size() << " bins (" << rep.usable_samples
       << " usable samples)\n";
    out.text = os.str();
    out.exit_code = rep.pass ? 0 : 1;
  });

  // ---- cube ---------------------------------------------------------------------
  auto* cube_cmd = app.add_subcommand("cube", "cube diffuser geometry audit");
  bool cube_check = false;
  int cube_samples = 20000;
  cube_cmd->add_flag("--check", cube_check, "run the geometry audit");
  cube_cmd->add_option("--angle-samples", cube_samples, "interior tangent-angle sample count");
  cube_cmd->callback([&] {
    prepare();
    CubeGeometryReport rep = check_cube_geometry(construct_cube(), cube_samples, seed);
    out.report = rep.to_json();
    std::ostringstream os;
    os.precision(17);
    os << "h = " << rep.h << " (sqrt(2)/2)\n"
       << "rho = " << annulus_rho() << " (1 + sqrt(2)/2), closure residual "
       << rep.rho_closure_residual << "\n"
       << "corner norm residual = " << rep.corner_norm_residual << "\n"
       << "face B tangency residual = " << rep.tangency_residual << "\n"
       << "corner angle residual (vs pi/4) = " << rep.corner_angle_residual << "\n"
       << "max interior angle = " << rep.max_interior_angle
       << " (bound pi/4 = " << std::numbers::pi / 4 << ")\n"
       << "quarter turn: orthogonality " << rep.f_orthogonality_residual << ", wall "
       << rep.f_wall_residual << ", cube invariance " << rep.f_cube_residual << "\n"
       << (rep.pass ? "PASS" : "FAIL") << "\n";
    out.text = os.str();
    out.exit_code = rep.pass ? 0 : 1;
  });

  // ---- bounds ----------------------------------------------------------------------
  auto* bounds_cmd = app.add_subcommand("bounds", "piece-count bound ledgers");
  double bounds_eta = 0, bounds_annulus_eta = 0;
  bool bounds_tarski = false, bounds_markdown = false;
  auto* eta_opt = bounds_cmd->add_option("--eta", bounds_eta, "word-set size chain at this eta");
  bounds_cmd->add_flag("--tarski", bounds_tarski, "full piece-count constant ledger");
  auto* ann_opt = bounds_cmd->add_option("--annulus-eta", bounds_annulus_eta,
                                         "composed annulus recipe at this eta");
  bounds_cmd->add_flag("--markdown", bounds_markdown, "render ledgers as markdown tables");
  bounds_cmd->callback([&] {
    prepare();
    bool has_eta = eta_opt->count() > 0, has_ann = ann_opt->count() > 0;
    if (!has_eta && !bounds_tarski && !has_ann)
      throw UsageError("bounds needs at least one of --eta, --tarski, --annulus-eta");
    std::ostringstream os;
    if (has_eta) {
      if (!(bounds_eta > 0.0) || bounds_eta > 1.0)
        throw UsageError("--eta must lie in (0,1]");
      SizeBoundLedger ledger = expander_size_bound(bounds_eta);
      out.report["size_bound"] = ledger.to_json();
      os << (bounds_markdown ? markdown_table(ledger.to_json())
                             : ledger.to_json().dump(2) + "\n");
    }
    if (bounds_tarski) {
      TarskiLedger ledger = tarski_piece_bound();
      out.report["tarski"] = ledger.to_json();
      os << (bounds_markdown ? ledger.to_markdown() : ledger.to_json().dump(2) + "\n");
    }
    if (has_ann) {
      if (!(bounds_annulus_eta > 0.0) || bounds_annulus_eta > 1.0)
        throw UsageError("--annulus-eta must lie in (0,1]");
      AnnulusExpanderRecipe recipe = annulus_expander(bounds_annulus_eta);
      out.report["annulus"] = recipe.to_json();
      os << (bounds_markdown ? markdown_table(recipe.to_json())
                             : recipe.to_json().dump(2) + "\n");
    }
    out.text = os.str();
  });

  // ---- reduce-open ---------------------------------------------------------------------
  auto* red_cmd = app.add_subcommand("reduce-open", "open-core reduction certificate");
  std::string red_config, red_out;
  red_cmd->add_option("--config", red_config, "JSON config")->required();
  red_cmd->add_option("--out", red_out, "write the full certificate JSON here");
  red_cmd->callback([&] {
    prepare();
    nlohmann::json cfg = load_json(red_config);
    SpaceModel m = model_from_json(cfg.at("model"));
    OpenReduction red = reduce_to_open(m, predicate_from_json(cfg.at("a")),
                                       generators_from_config(cfg.at("t"), m.q),
                                       predicate_from_json(cfg.at("c_prime")));
    ValidationReport rep = validate_certificate(red.certificate);
    if (!red_out.empty()) write_file(red_out, to_json(red.certificate).dump(2) + "\n");
    out.report = red.to_json();
    out.report["validation"] = {{"ok", rep.ok}, {"failures", rep.failures}};
    std::ostringstream os;
    os << "open-core reduction: " << red.certificate.piece_count() << " pieces, core halfwidth "
       << red.core_halfwidth << " cells, union recovers core: "
       << (red.union_is_core ? "yes" : "NO") << ", validator "
       << (rep.ok ? "accepts" : "rejects") << "\n";
    out.text = os.str();
    out.exit_code = (red.union_is_core && rep.ok) ? 0 : 1;
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help / --version
    std::cerr << nlohmann::json{{"error", e.what()}}.dump() << "\n";
    return 2;
  } catch (const UsageError& e) {
    std::cerr << nlohmann::json{{"error", e.what()}}.dump() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << nlohmann::json{{"error", e.what()}}.dump() << "\n";
    return 1;
  }

  out.json_mode = json_mode;
  out.print();
  return out.exit_code;
}
