#include "rocsurf/cli.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <json.hpp>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "rocsurf/bootstrap.hpp"
#include "rocsurf/data_model.hpp"
#include "rocsurf/estimators_knn.hpp"
#include "rocsurf/estimators_parametric.hpp"
#include "rocsurf/neighbors.hpp"
#include "rocsurf/simulation.hpp"
#include "rocsurf/surface.hpp"
#include "rocsurf/types.hpp"
#include "rocsurf/variance.hpp"

namespace rocsurf {

namespace {

using json = nlohmann::ordered_json;

CutPair parse_cut_text(const std::string& text) {
  const std::size_t comma = text.find(',');
  if (comma == std::string::npos) {
    throw validation_error("--cut expects c1,c2, got '" + text + "'");
  }
  CutPair cut;
  try {
    std::size_t used = 0;
    cut.c1 = std::stod(text.substr(0, comma), &used);
    if (used != comma) throw std::invalid_argument(text);
    const std::string rest = text.substr(comma + 1);
    cut.c2 = std::stod(rest, &used);
    if (used != rest.size()) throw std::invalid_argument(text);
  } catch (const std::exception&) {
    throw validation_error("--cut expects c1,c2, got '" + text + "'");
  }
  check_cut(cut);
  return cut;
}

EstimatorKind parse_estimator_text(const std::string& text) {
  if (text == "knn") return EstimatorKind::KNN;
  if (text == "fi") return EstimatorKind::FI;
  if (text == "msi") return EstimatorKind::MSI;
  if (text == "ipw") return EstimatorKind::IPW;
  if (text == "spe") return EstimatorKind::SPE;
  if (text == "complete") return EstimatorKind::COMPLETE;
  throw validation_error("unknown estimator '" + text +
                         "' (expected knn, fi, msi, ipw, spe or complete)");
}

json triple_json(const Triple& t) {
  return json::array({t[0], t[1], t[2]});
}

json matrix3_json(const Matrix3& m) {
  json rows = json::array();
  for (const auto& row : m) rows.push_back(json::array({row[0], row[1], row[2]}));
  return rows;
}

json cut_json(const CutPair& cut) {
  json j;
  j["c1"] = cut.c1;
  j["c2"] = cut.c2;
  return j;
}

// Writes through a temporary sibling and renames, so a failure never
// leaves a partial output file behind.
void atomic_write(const std::string& path,
                  const std::function<void(std::ostream&)>& writer) {
  const std::string tmp = path + ".tmp";
  try {
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      if (!out) throw validation_error("cannot open '" + tmp + "' for writing");
      writer(out);
      out.flush();
      if (!out) throw validation_error("write to '" + tmp + "' failed");
    }
    std::filesystem::rename(tmp, path);
  } catch (...) {
    std::error_code ec;
    std::filesystem::remove(tmp, ec);
    throw;
  }
}

struct CommonArgs {
  std::string input;
  std::string metric = "euclidean";
};

Dataset load_input(const std::string& path) {
  if (path.empty()) throw validation_error("--input is required");
  return load_dataset_file(path);
}

struct EstimateArgs {
  CommonArgs common;
  std::string cut_text;
  std::string estimator = "knn";
  std::size_t k = 1;
  bool select_k_flag = false;
  std::size_t k_max = 10;
  std::string disease_formula;
  std::string verification_formula;
  std::string variance = "none";
  std::size_t b = 500;
  std::uint64_t seed = 1;
  bool clamp = false;
  std::size_t k_bar = 2;
  bool k_given = false;
  bool disease_given = false;
  bool verification_given = false;
  bool clamp_given = false;
};

int run_estimate(const EstimateArgs& args, std::ostream& out) {
  const EstimatorKind kind = parse_estimator_text(args.estimator);
  const bool parametric = kind == EstimatorKind::FI || kind == EstimatorKind::MSI ||
                          kind == EstimatorKind::IPW || kind == EstimatorKind::SPE;
  if (args.k_given && kind != EstimatorKind::KNN) {
    throw validation_error("--k applies to the knn estimator only");
  }
  if (args.select_k_flag && kind != EstimatorKind::KNN) {
    throw validation_error("--select-k applies to the knn estimator only");
  }
  if (args.k_given && args.select_k_flag) {
    throw validation_error("pass either --k or --select-k, not both");
  }
  if ((args.disease_given || args.verification_given) && !parametric) {
    throw validation_error(
        "model formulas apply to the fi, msi, ipw and spe estimators only");
  }
  if (args.clamp_given &&
      kind != EstimatorKind::IPW && kind != EstimatorKind::SPE) {
    throw validation_error(
        "--clamp-propensity applies to the ipw and spe estimators only");
  }
  if (args.variance != "none" && args.variance != "asymptotic" &&
      args.variance != "bootstrap") {
    throw validation_error("--variance must be asymptotic, bootstrap or none");
  }

  const Dataset dataset = load_input(args.common.input);
  const CutPair cut = parse_cut_text(args.cut_text);

  EstimatorSpec spec;
  spec.kind = kind;
  spec.k = args.k;
  spec.metric = parse_metric(args.common.metric);
  if (args.disease_given) {
    spec.disease_formula = parse_formula(args.disease_formula, dataset.p);
  }
  if (args.verification_given) {
    spec.verification_formula =
        parse_formula(args.verification_formula, dataset.p);
  }
  spec.policy.clamp = args.clamp;

  std::optional<std::size_t> k_star;
  if (args.select_k_flag) {
    const KSelection sel = select_k(dataset, spec.metric, args.k_max);
    spec.k = sel.k_star;
    k_star = sel.k_star;
  }

  TcfEstimate est = apply_estimator(dataset, spec, cut);

  json doc;
  doc["schema"] = 1;
  doc["command"] = "estimate";
  doc["estimator"] = args.estimator;
  doc["cut"] = cut_json(cut);
  doc["n"] = dataset.n();
  if (kind == EstimatorKind::KNN) {
    doc["k"] = spec.k;
    if (k_star.has_value()) doc["k_star"] = *k_star;
  }
  doc["tcf"] = triple_json(est.tcf);
  doc["out_of_range"] = est.out_of_range;
  doc["variance"] = args.variance;

  if (args.variance == "asymptotic") {
    Matrix3 cov{};
    if (kind == EstimatorKind::KNN) {
      const MomentSet moments = estimate_moments(dataset, spec.k, spec.metric, cut);
      cov = estimate_knn_covariance(dataset, spec.metric, moments, args.k_bar);
    } else if (kind == EstimatorKind::COMPLETE) {
      const MomentSet moments = complete_data_moments(dataset, cut);
      const Xi xi = xi_scalar(moments, complete_data_omegas(moments));
      const double nd = static_cast<double>(dataset.n());
      for (std::size_t i = 0; i < 3; ++i) {
        for (std::size_t j = 0; j < 3; ++j) cov[i][j] = xi.matrix[i][j] / nd;
      }
    } else {
      throw validation_error(
          "asymptotic variance is available for the knn and complete "
          "estimators; use --variance bootstrap here");
    }
    est.covariance = cov;
  } else if (args.variance == "bootstrap") {
    const BootstrapResult boot =
        bootstrap_covariance(dataset, spec, cut, args.b, args.seed);
    est.covariance = boot.covariance;
    json info;
    info["b"] = boot.b;
    info["seed"] = boot.seed;
    info["failures"] = boot.failures;
    info["replicates_used"] = boot.replicates.size();
    doc["bootstrap"] = info;
  }

  if (est.covariance.has_value()) {
    doc["covariance"] = matrix3_json(*est.covariance);
    Triple sd{};
    for (std::size_t i = 0; i < 3; ++i) {
      const double v = (*est.covariance)[i][i];
      if (v < 0.0) {
        throw numerical_error("negative variance on the diagonal");
      }
      sd[i] = std::sqrt(v);
    }
    doc["sd"] = triple_json(sd);
  }

  out << doc.dump(2) << '\n';
  return 0;
}

struct SurfaceArgs {
  CommonArgs common;
  std::string estimator = "knn";
  std::size_t k = 1;
  std::string grid = "quantile:10";
  std::string disease_formula;
  std::string verification_formula;
  bool clamp = false;
  std::string out_path;
  bool disease_given = false;
  bool verification_given = false;
};

GridSpec parse_grid_text(const std::string& text) {
  GridSpec grid;
  const std::size_t colon = text.find(':');
  if (colon == std::string::npos) {
    throw validation_error("--grid expects quantile:m or file:cuts.csv, got '" +
                           text + "'");
  }
  const std::string head = text.substr(0, colon);
  const std::string tail = text.substr(colon + 1);
  if (head == "quantile") {
    try {
      std::size_t used = 0;
      const unsigned long m = std::stoul(tail, &used);
      if (used != tail.size() || m == 0) throw std::invalid_argument(tail);
      grid.kind = GridSpec::Kind::QUANTILE;
      grid.m = m;
    } catch (const std::exception&) {
      throw validation_error("malformed quantile count '" + tail + "'");
    }
    return grid;
  }
  if (head == "file") {
    std::ifstream in(tail);
    if (!in) throw validation_error("cannot open cut file '" + tail + "'");
    grid.kind = GridSpec::Kind::EXPLICIT;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      std::string body = line;
      body.erase(0, body.find_first_not_of(" \t"));
      if (!body.empty()) body.erase(body.find_last_not_of(" \t") + 1);
      if (body.empty()) continue;
      if (line_no == 1 && body == "c1,c2") continue;
      try {
        grid.cuts.push_back(parse_cut_text(body));
      } catch (const validation_error& err) {
        std::ostringstream msg;
        msg << err.what() << " (cut file line " << line_no << ")";
        throw validation_error(msg.str());
      }
    }
    if (grid.cuts.empty()) {
      throw validation_error("cut file '" + tail + "' holds no cut pairs");
    }
    return grid;
  }
  throw validation_error("--grid expects quantile:m or file:cuts.csv, got '" +
                         text + "'");
}

int run_surface(const SurfaceArgs& args, std::ostream& out) {
  if (args.out_path.empty()) throw validation_error("--out is required");
  const EstimatorKind kind = parse_estimator_text(args.estimator);
  const Dataset dataset = load_input(args.common.input);
  const GridSpec grid = parse_grid_text(args.grid);

  EstimatorSpec spec;
  spec.kind = kind;
  spec.k = args.k;
  spec.metric = parse_metric(args.common.metric);
  if (args.disease_given) {
    spec.disease_formula = parse_formula(args.disease_formula, dataset.p);
  }
  if (args.verification_given) {
    spec.verification_formula =
        parse_formula(args.verification_formula, dataset.p);
  }
  spec.policy.clamp = args.clamp;

  const SurfaceGrid surface = roc_surface(dataset, spec, grid);
  atomic_write(args.out_path,
               [&](std::ostream& file) { write_surface_csv(surface, file); });

  json doc;
  doc["schema"] = 1;
  doc["command"] = "surface";
  doc["estimator"] = args.estimator;
  doc["points"] = surface.points.size();
  doc["monotone_envelope"] = surface.monotone_envelope;
  doc["notes"] = surface.notes;
  doc["out"] = args.out_path;
  out << doc.dump(2) << '\n';
  return 0;
}

struct SelectKArgs {
  CommonArgs common;
  std::size_t k_max = 10;
};

int run_select_k(const SelectKArgs& args, std::ostream& out) {
  const Dataset dataset = load_input(args.common.input);
  const Metric metric = parse_metric(args.common.metric);
  const KSelection sel = select_k(dataset, metric, args.k_max);

  json doc;
  doc["schema"] = 1;
  doc["command"] = "select-k";
  doc["k_max"] = args.k_max;
  doc["k_star"] = sel.k_star;
  doc["criterion"] = sel.criterion;
  out << doc.dump(2) << '\n';
  return 0;
}

struct EllipsoidArgs {
  CommonArgs common;
  std::string cut_text;
  std::string estimator = "knn";
  std::size_t k = 1;
  double level = 0.95;
  std::size_t k_bar = 2;
};

int run_ellipsoid(const EllipsoidArgs& args, std::ostream& out) {
  if (args.estimator != "knn") {
    throw validation_error("ellipsoid supports the knn estimator only");
  }
  const Dataset dataset = load_input(args.common.input);
  const CutPair cut = parse_cut_text(args.cut_text);
  const Metric metric = parse_metric(args.common.metric);

  TcfEstimate est = estimate_tcf_knn(dataset, args.k, metric, cut);
  const MomentSet moments = estimate_moments(dataset, args.k, metric, cut);
  est.covariance = estimate_knn_covariance(dataset, metric, moments, args.k_bar);
  const EllipsoidSpec spec = confidence_ellipsoid(est, args.level);

  json doc;
  doc["schema"] = 1;
  doc["command"] = "ellipsoid";
  doc["estimator"] = args.estimator;
  doc["k"] = args.k;
  doc["cut"] = cut_json(cut);
  doc["level"] = spec.level;
  doc["center"] = triple_json(spec.center);
  doc["cholesky"] = matrix3_json(spec.cholesky);
  doc["radius2"] = spec.radius2;
  out << doc.dump(2) << '\n';
  return 0;
}

struct SimulateArgs {
  std::string config_path;
  std::string out_path;
};

int run_simulate(const SimulateArgs& args, std::ostream& out) {
  if (args.config_path.empty()) throw validation_error("--config is required");
  if (args.out_path.empty()) throw validation_error("--out is required");
  std::ifstream in(args.config_path);
  if (!in) {
    throw validation_error("cannot open config '" + args.config_path + "'");
  }
  const SimConfig config = parse_sim_config(in);
  const SummaryTable table = run_monte_carlo(config);
  atomic_write(args.out_path,
               [&](std::ostream& file) { write_summary_csv(table, file); });

  json doc;
  doc["schema"] = 1;
  doc["command"] = "simulate";
  doc["scenario"] = config.scenario;
  doc["n"] = config.n;
  doc["reps"] = config.reps;
  doc["rows"] = table.rows.size();
  doc["out"] = args.out_path;
  out << doc.dump(2) << '\n';
  return 0;
}

struct SubsampleArgs {
  std::string input;
  std::string rule;
  std::uint64_t seed = 1;
  std::string out_path;
};

int run_subsample(const SubsampleArgs& args, std::ostream& out) {
  if (args.out_path.empty()) throw validation_error("--out is required");
  const Dataset dataset = load_input(args.input);
  const SubsampleRule rule = parse_subsample_rule(args.rule);
  const Dataset sub = subsample_verification(dataset, rule, args.seed);
  atomic_write(args.out_path,
               [&](std::ostream& file) { serialize_dataset(sub, file); });

  json doc;
  doc["schema"] = 1;
  doc["command"] = "subsample";
  doc["n"] = sub.n();
  doc["verified"] = sub.verified_count();
  doc["rate"] =
      static_cast<double>(sub.verified_count()) / static_cast<double>(sub.n());
  doc["seed"] = args.seed;
  doc["out"] = args.out_path;
  out << doc.dump(2) << '\n';
  return 0;
}

void emit_error(std::ostream& err, const std::string& type,
                const std::string& message) {
  json doc;
  doc["schema"] = 1;
  doc["error"] = json{{"type", type}, {"message", message}};
  err << doc.dump(2) << '\n';
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out,
             std::ostream& err) {
  CLI::App app{"Three-class ROC surface estimation under verification bias"};
  app.require_subcommand(1);

  EstimateArgs estimate_args;
  CLI::App* estimate = app.add_subcommand(
      "estimate", "TCF triple at one cut pair, optionally with a covariance");
  estimate->add_option("--input", estimate_args.common.input, "Input CSV")
      ->required();
  estimate->add_option("--cut", estimate_args.cut_text, "Cut pair c1,c2")
      ->required();
  estimate->add_option("--estimator", estimate_args.estimator,
                       "knn, fi, msi, ipw, spe or complete");
  CLI::Option* opt_k =
      estimate->add_option("--k", estimate_args.k, "Neighborhood size");
  CLI::Option* opt_select =
      estimate->add_flag("--select-k", estimate_args.select_k_flag,
                         "Pick k by cross-validation");
  estimate->add_option("--k-max", estimate_args.k_max,
                       "Largest k tried by --select-k");
  estimate->add_option("--metric", estimate_args.common.metric,
                       "euclidean, manhattan, canberra or mahalanobis");
  CLI::Option* opt_df = estimate->add_option(
      "--disease-formula", estimate_args.disease_formula, "Disease model terms");
  CLI::Option* opt_vf =
      estimate->add_option("--verification-formula",
                           estimate_args.verification_formula,
                           "Verification model terms");
  estimate->add_option("--variance", estimate_args.variance,
                       "asymptotic, bootstrap or none");
  estimate->add_option("--b", estimate_args.b, "Bootstrap replicates");
  estimate->add_option("--seed", estimate_args.seed, "Bootstrap seed");
  CLI::Option* opt_clamp =
      estimate->add_flag("--clamp-propensity", estimate_args.clamp,
                         "Clamp tiny propensities instead of failing");
  estimate->add_option("--k-bar", estimate_args.k_bar,
                       "Imputation size for variance plug-ins");

  SurfaceArgs surface_args;
  CLI::App* surface =
      app.add_subcommand("surface", "TCF triples over a grid of cut pairs");
  surface->add_option("--input", surface_args.common.input, "Input CSV")
      ->required();
  surface->add_option("--estimator", surface_args.estimator,
                      "knn, fi, msi, ipw, spe or complete");
  surface->add_option("--k", surface_args.k, "Neighborhood size");
  surface->add_option("--metric", surface_args.common.metric, "Distance metric");
  surface->add_option("--grid", surface_args.grid,
                      "quantile:m or file:cuts.csv");
  CLI::Option* sopt_df = surface->add_option(
      "--disease-formula", surface_args.disease_formula, "Disease model terms");
  CLI::Option* sopt_vf =
      surface->add_option("--verification-formula",
                          surface_args.verification_formula,
                          "Verification model terms");
  surface->add_flag("--clamp-propensity", surface_args.clamp,
                    "Clamp tiny propensities instead of failing");
  surface->add_option("--out", surface_args.out_path, "Output CSV path")
      ->required();

  SelectKArgs select_args;
  CLI::App* select =
      app.add_subcommand("select-k", "Cross-validated neighborhood size");
  select->add_option("--input", select_args.common.input, "Input CSV")
      ->required();
  select->add_option("--metric", select_args.common.metric, "Distance metric");
  select->add_option("--k-max", select_args.k_max, "Largest k tried");

  EllipsoidArgs ellipsoid_args;
  CLI::App* ellipsoid = app.add_subcommand(
      "ellipsoid", "Confidence ellipsoid for the knn TCF triple");
  ellipsoid->add_option("--input", ellipsoid_args.common.input, "Input CSV")
      ->required();
  ellipsoid->add_option("--cut", ellipsoid_args.cut_text, "Cut pair c1,c2")
      ->required();
  ellipsoid->add_option("--estimator", ellipsoid_args.estimator,
                        "Must be knn");
  ellipsoid->add_option("--k", ellipsoid_args.k, "Neighborhood size");
  ellipsoid->add_option("--level", ellipsoid_args.level, "Confidence level");
  ellipsoid->add_option("--metric", ellipsoid_args.common.metric,
                        "Distance metric");
  ellipsoid->add_option("--k-bar", ellipsoid_args.k_bar,
                        "Imputation size for variance plug-ins");

  SimulateArgs simulate_args;
  CLI::App* simulate =
      app.add_subcommand("simulate", "Monte Carlo summary table");
  simulate->add_option("--config", simulate_args.config_path, "Config file")
      ->required();
  simulate->add_option("--out", simulate_args.out_path, "Output CSV path")
      ->required();

  SubsampleArgs subsample_args;
  CLI::App* subsample = app.add_subcommand(
      "subsample", "Resample verification status on complete data");
  subsample->add_option("--input", subsample_args.input, "Input CSV")
      ->required();
  subsample->add_option("--rule", subsample_args.rule, "Selection rule")
      ->required();
  subsample->add_option("--seed", subsample_args.seed, "Seed");
  subsample->add_option("--out", subsample_args.out_path, "Output CSV path")
      ->required();

  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("rocsurf");
  for (const std::string& a : args) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    const auto parsed = app.get_subcommands();
    out << (parsed.empty() ? app.help() : parsed.front()->help());
    return 0;
  } catch (const CLI::ParseError& e) {
    emit_error(err, "validation", e.what());
    return 1;
  }

  estimate_args.k_given = opt_k->count() > 0;
  estimate_args.disease_given = opt_df->count() > 0;
  estimate_args.verification_given = opt_vf->count() > 0;
  estimate_args.clamp_given = opt_clamp->count() > 0;
  (void)opt_select;
  surface_args.disease_given = sopt_df->count() > 0;
  surface_args.verification_given = sopt_vf->count() > 0;

  try {
    if (estimate->parsed()) return run_estimate(estimate_args, out);
    if (surface->parsed()) return run_surface(surface_args, out);
    if (select->parsed()) return run_select_k(select_args, out);
    if (ellipsoid->parsed()) return run_ellipsoid(ellipsoid_args, out);
    if (simulate->parsed()) return run_simulate(simulate_args, out);
    if (subsample->parsed()) return run_subsample(subsample_args, out);
    emit_error(err, "validation", "no command given");
    return 1;
  } catch (const validation_error& e) {
    emit_error(err, "validation", e.what());
    return 1;
  } catch (const numerical_error& e) {
    emit_error(err, "numerical", e.what());
    return 2;
  } catch (const std::exception& e) {
    emit_error(err, "validation", e.what());
    return 1;
  }
}

}  // namespace rocsurf
