#include "rocsurf/simulation.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "rocsurf/estimators_knn.hpp"
#include "rocsurf/math.hpp"
#include "rocsurf/rng.hpp"
#include "rocsurf/variance.hpp"

namespace rocsurf {

namespace {

constexpr double kTruthTol = 1e-8;
constexpr double kBandHalfWidth = 10.0;

void check_theta_vector(const Triple& theta) {
  double sum = 0.0;
  for (double th : theta) {
    if (!(th > 0.0)) throw validation_error("class probabilities must be positive");
    sum += th;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw validation_error("class probabilities must sum to 1");
  }
}

struct Cholesky2 {
  double l11 = 0.0;
  double l21 = 0.0;
  double l22 = 0.0;
};

Cholesky2 cholesky2(const std::array<std::array<double, 2>, 2>& sigma) {
  if (!(sigma[0][0] > 0.0)) throw validation_error("sigma[0][0] must be positive");
  Cholesky2 ch;
  ch.l11 = std::sqrt(sigma[0][0]);
  ch.l21 = sigma[0][1] / ch.l11;
  const double rest = sigma[1][1] - ch.l21 * ch.l21;
  if (!(rest > 0.0)) throw validation_error("sigma is not positive definite");
  ch.l22 = std::sqrt(rest);
  return ch;
}

// Full draw: the class label is kept on every unit regardless of v, so
// the same replication can feed both masked and complete analyses.
Dataset scenario_i_full(const ScenarioIConfig& config) {
  check_theta_vector(config.theta);
  if (config.n == 0) throw validation_error("n must be positive");
  const auto sigma = scenario_i_sigma(config.sigma_choice);
  const Cholesky2 ch = cholesky2(sigma);
  const std::vector<double> probs(config.theta.begin(), config.theta.end());

  Rng rng(config.seed);
  Dataset out;
  out.p = 1;
  out.units.resize(config.n);
  for (auto& unit : out.units) {
    const std::size_t k = rng.categorical(probs);
    const double z1 = rng.normal();
    const double z2 = rng.normal();
    const double mean_t = 2.0 * static_cast<double>(k + 1);
    const double mean_a = static_cast<double>(k + 1);
    unit.t = mean_t + ch.l11 * z1;
    unit.a.assign(1, mean_a + ch.l21 * z1 + ch.l22 * z2);
    const double lin = config.delta[0] + config.delta[1] * unit.t +
                       config.delta[2] * unit.a[0];
    unit.v = rng.bernoulli(expit(lin)) ? 1 : 0;
    unit.d = static_cast<int>(k) + 1;
  }
  return out;
}

Dataset scenario_ii_full(const ScenarioIIConfig& config) {
  if (config.n == 0) throw validation_error("n must be positive");
  if (!(config.noise_variance > 0.0)) {
    throw validation_error("noise_variance must be positive");
  }
  const auto [h1, h2] = solve_thresholds(config.theta1, config.theta3);
  const double sd_z = std::sqrt(0.5);
  const double sd_eps = std::sqrt(config.noise_variance);

  Rng rng(config.seed);
  Dataset out;
  out.p = 1;
  out.units.resize(config.n);
  for (auto& unit : out.units) {
    const double z = sd_z * rng.normal() + sd_z * rng.normal();
    const double e1 = rng.normal();
    const double e2 = rng.normal();
    unit.t = config.alpha * z + sd_eps * e1;
    unit.a.assign(1, z + sd_eps * e2);
    const double lin = config.delta[0] + config.delta[1] * unit.t +
                       config.delta[2] * unit.a[0];
    unit.v = rng.bernoulli(expit(lin)) ? 1 : 0;
    unit.d = z < h1 ? 1 : (z < h2 ? 2 : 3);
  }
  return out;
}

void mask_unverified(Dataset& dataset) {
  for (auto& unit : dataset.units) {
    if (unit.v == 0) unit.d = 0;
  }
}

double band_mass(double lo, double hi) {
  return normal_cdf(hi) - normal_cdf(lo);
}

}  // namespace

std::array<std::array<double, 2>, 2> scenario_i_sigma(int sigma_choice) {
  switch (sigma_choice) {
    case 1:
      return {{{1.75, 0.1}, {0.1, 2.5}}};
    case 2:
      return {{{2.5, 1.5}, {1.5, 2.5}}};
    case 3:
      return {{{5.5, 3.0}, {3.0, 2.5}}};
    default:
      throw validation_error("sigma_choice must be 1, 2 or 3");
  }
}

Dataset generate_scenario_i(const ScenarioIConfig& config) {
  Dataset out = scenario_i_full(config);
  if (config.mask_labels) mask_unverified(out);
  return out;
}

Dataset generate_scenario_ii(const ScenarioIIConfig& config) {
  Dataset out = scenario_ii_full(config);
  if (config.mask_labels) mask_unverified(out);
  return out;
}

std::pair<double, double> solve_thresholds(double theta1, double theta3) {
  if (!(theta1 > 0.0 && theta3 > 0.0 && theta1 + theta3 < 1.0)) {
    throw validation_error(
        "class probabilities must satisfy theta1 > 0, theta3 > 0, "
        "theta1 + theta3 < 1");
  }
  return {normal_quantile(theta1), normal_quantile(1.0 - theta3)};
}

ScenarioTruth true_tcf_scenario_i(int sigma_choice, const CutPair& cut) {
  check_cut(cut);
  const auto sigma = scenario_i_sigma(sigma_choice);
  const double sd = std::sqrt(sigma[0][0]);
  ScenarioTruth truth;
  truth.method = TruthMethod::CLOSED_FORM_PHI;
  truth.tcf[0] = normal_cdf((cut.c1 - 2.0) / sd);
  truth.tcf[1] = normal_cdf((cut.c2 - 4.0) / sd) - normal_cdf((cut.c1 - 4.0) / sd);
  truth.tcf[2] = 1.0 - normal_cdf((cut.c2 - 6.0) / sd);
  return truth;
}

ScenarioTruth true_tcf_scenario_ii(const ScenarioIIConfig& config,
                                   const CutPair& cut) {
  check_cut(cut);
  if (!(config.noise_variance > 0.0)) {
    throw validation_error("noise_variance must be positive");
  }
  const auto [h1, h2] = solve_thresholds(config.theta1, config.theta3);
  const double sd_eps = std::sqrt(config.noise_variance);
  const double alpha = config.alpha;

  const auto below = [&](double c, double z) {
    return normal_cdf((c - alpha * z) / sd_eps);
  };
  const auto integral = [&](double lo, double hi, auto&& g) {
    return integrate([&](double z) { return g(z) * normal_pdf(z); }, lo, hi,
                     kTruthTol);
  };

  ScenarioTruth truth;
  truth.method = TruthMethod::NUMERIC_INTEGRATION;
  truth.tcf[0] =
      integral(-kBandHalfWidth, h1, [&](double z) { return below(cut.c1, z); }) /
      band_mass(-kBandHalfWidth, h1);
  truth.tcf[1] = integral(h1, h2,
                          [&](double z) {
                            return below(cut.c2, z) - below(cut.c1, z);
                          }) /
                 band_mass(h1, h2);
  truth.tcf[2] = integral(h2, kBandHalfWidth,
                          [&](double z) { return 1.0 - below(cut.c2, z); }) /
                 band_mass(h2, kBandHalfWidth);
  return truth;
}

double true_vus_scenario_i(int sigma_choice) {
  const auto sigma = scenario_i_sigma(sigma_choice);
  const double sd = std::sqrt(sigma[0][0]);
  const auto f = [&](double t) {
    return normal_cdf((t - 2.0) / sd) * (1.0 - normal_cdf((t - 6.0) / sd)) *
           normal_pdf((t - 4.0) / sd) / sd;
  };
  return integrate(f, 4.0 - kBandHalfWidth * sd, 4.0 + kBandHalfWidth * sd, 1e-9);
}

double complete_data_vus(const Dataset& dataset, bool tie_weights) {
  std::vector<double> t1, t2, t3;
  for (const auto& u : dataset.units) {
    if (u.v != 1) {
      throw validation_error("empirical VUS needs a fully verified dataset");
    }
    if (u.d == 1) t1.push_back(u.t);
    if (u.d == 2) t2.push_back(u.t);
    if (u.d == 3) t3.push_back(u.t);
  }
  if (t1.empty() || t2.empty() || t3.empty()) {
    throw validation_error("empirical VUS needs all three classes present");
  }
  std::sort(t1.begin(), t1.end());
  std::sort(t3.begin(), t3.end());

  if (!tie_weights) {
    unsigned long long count = 0;
    for (double b : t2) {
      const auto below =
          static_cast<unsigned long long>(std::lower_bound(t1.begin(), t1.end(), b) -
                                          t1.begin());
      const auto above =
          static_cast<unsigned long long>(t3.end() -
                                          std::upper_bound(t3.begin(), t3.end(), b));
      count += below * above;
    }
    return static_cast<double>(count) /
           (static_cast<double>(t1.size()) * static_cast<double>(t2.size()) *
            static_cast<double>(t3.size()));
  }

  double sum = 0.0;
  for (double b : t2) {
    const auto lo1 = std::lower_bound(t1.begin(), t1.end(), b);
    const auto hi1 = std::upper_bound(lo1, t1.end(), b);
    const auto lo3 = std::lower_bound(t3.begin(), t3.end(), b);
    const auto hi3 = std::upper_bound(lo3, t3.end(), b);
    const double below = static_cast<double>(lo1 - t1.begin());
    const double eq1 = static_cast<double>(hi1 - lo1);
    const double above = static_cast<double>(t3.end() - hi3);
    const double eq3 = static_cast<double>(hi3 - lo3);
    sum += below * above + 0.5 * (eq1 * above + below * eq3) + eq1 * eq3 / 6.0;
  }
  return sum / (static_cast<double>(t1.size()) * static_cast<double>(t2.size()) *
                static_cast<double>(t3.size()));
}

namespace {

std::string trim_copy(const std::string& s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == sep) {
      out.push_back(trim_copy(s.substr(start, i - start)));
      start = i + 1;
    }
  }
  return out;
}

double parse_double(const std::string& text, const std::string& key) {
  const std::string body = trim_copy(text);
  double value = 0.0;
  const auto [ptr, ec] =
      std::from_chars(body.data(), body.data() + body.size(), value);
  if (ec != std::errc{} || ptr != body.data() + body.size()) {
    throw validation_error("malformed number '" + body + "' for key " + key);
  }
  return value;
}

std::uint64_t parse_u64(const std::string& text, const std::string& key) {
  const std::string body = trim_copy(text);
  std::uint64_t value = 0;
  const auto [ptr, ec] =
      std::from_chars(body.data(), body.data() + body.size(), value);
  if (ec != std::errc{} || ptr != body.data() + body.size()) {
    throw validation_error("malformed integer '" + body + "' for key " + key);
  }
  return value;
}

EstimatorKind parse_estimator_token(const std::string& token) {
  if (token == "fi") return EstimatorKind::FI;
  if (token == "msi") return EstimatorKind::MSI;
  if (token == "ipw") return EstimatorKind::IPW;
  if (token == "spe") return EstimatorKind::SPE;
  if (token == "knn") return EstimatorKind::KNN;
  if (token == "complete") return EstimatorKind::COMPLETE;
  throw validation_error("unknown estimator '" + token + "'");
}

}  // namespace

SimConfig parse_sim_config(std::istream& in) {
  SimConfig config;
  bool has_estimators = false;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim_copy(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      std::ostringstream msg;
      msg << "expected key = value on line " << line_no;
      throw validation_error(msg.str());
    }
    const std::string key = trim_copy(line.substr(0, eq));
    const std::string value = trim_copy(line.substr(eq + 1));
    if (key == "scenario") {
      config.scenario = static_cast<int>(parse_u64(value, key));
      if (config.scenario != 1 && config.scenario != 2) {
        throw validation_error("scenario must be 1 or 2");
      }
    } else if (key == "n") {
      config.n = static_cast<std::size_t>(parse_u64(value, key));
    } else if (key == "reps") {
      config.reps = static_cast<std::size_t>(parse_u64(value, key));
    } else if (key == "seed") {
      config.seed = parse_u64(value, key);
    } else if (key == "sigma_choice") {
      config.sigma_choice = static_cast<int>(parse_u64(value, key));
    } else if (key == "alpha") {
      config.alpha = parse_double(value, key);
    } else if (key == "cuts") {
      config.cuts.clear();
      for (const std::string& pair : split(value, ';')) {
        if (pair.empty()) continue;
        const auto parts = split(pair, ',');
        if (parts.size() != 2) {
          throw validation_error("cut '" + pair + "' must be c1,c2");
        }
        CutPair cut{parse_double(parts[0], key), parse_double(parts[1], key)};
        check_cut(cut);
        config.cuts.push_back(cut);
      }
    } else if (key == "estimators") {
      has_estimators = true;
      config.estimators.clear();
      for (const std::string& token : split(value, ',')) {
        if (token.empty()) continue;
        config.estimators.push_back(parse_estimator_token(token));
      }
    } else if (key == "k") {
      config.k.clear();
      for (const std::string& token : split(value, ',')) {
        if (token.empty()) continue;
        const std::uint64_t k = parse_u64(token, key);
        if (k == 0) throw validation_error("k values must be positive");
        config.k.push_back(static_cast<std::size_t>(k));
      }
    } else if (key == "metric") {
      config.metric = parse_metric(value);
    } else if (key == "k_bar") {
      config.k_bar = static_cast<std::size_t>(parse_u64(value, key));
    } else {
      throw validation_error("unknown config key '" + key + "'");
    }
  }
  if (!has_estimators) {
    throw validation_error("config must set estimators");
  }
  return config;
}

namespace {

struct CellAccumulator {
  std::vector<Triple> estimates;
  std::vector<Triple> asy_sd;
  std::array<std::size_t, 3> oor{0, 0, 0};
  std::size_t failures = 0;

  void record(const TcfEstimate& est) {
    estimates.push_back(est.tcf);
    for (std::size_t k = 0; k < 3; ++k) {
      if (est.tcf[k] < 0.0 || est.tcf[k] > 1.0) ++oor[k];
    }
  }
};

std::string row_label(EstimatorKind kind) {
  std::string label = estimator_name(kind);
  for (char& c : label) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return label;
}

SummaryRow summarize(const std::string& label, const CutPair& cut,
                     const CellAccumulator& cell) {
  SummaryRow row;
  row.estimator = label;
  row.cut = cut;
  row.failures = cell.failures;
  row.reps_used = cell.estimates.size();
  const std::size_t used = cell.estimates.size();
  if (used > 0) {
    for (const Triple& e : cell.estimates) {
      for (std::size_t k = 0; k < 3; ++k) row.mean[k] += e[k];
    }
    for (std::size_t k = 0; k < 3; ++k) {
      row.mean[k] /= static_cast<double>(used);
      row.oor_freq[k] =
          static_cast<double>(cell.oor[k]) / static_cast<double>(used);
    }
  }
  if (used >= 2) {
    Triple ss{0.0, 0.0, 0.0};
    for (const Triple& e : cell.estimates) {
      for (std::size_t k = 0; k < 3; ++k) {
        const double d = e[k] - row.mean[k];
        ss[k] += d * d;
      }
    }
    Triple sd{};
    for (std::size_t k = 0; k < 3; ++k) {
      sd[k] = std::sqrt(ss[k] / static_cast<double>(used - 1));
    }
    row.mc_sd = sd;
  }
  if (!cell.asy_sd.empty()) {
    Triple mean_sd{0.0, 0.0, 0.0};
    for (const Triple& s : cell.asy_sd) {
      for (std::size_t k = 0; k < 3; ++k) mean_sd[k] += s[k];
    }
    for (std::size_t k = 0; k < 3; ++k) {
      mean_sd[k] /= static_cast<double>(cell.asy_sd.size());
    }
    row.asy_sd_mean = mean_sd;
  }
  return row;
}

}  // namespace

SummaryTable run_monte_carlo(const SimConfig& config) {
  if (config.cuts.empty()) throw validation_error("config must set cuts");
  if (config.reps == 0) throw validation_error("reps must be positive");
  if (config.estimators.empty()) throw validation_error("config must set estimators");
  bool wants_knn = false;
  std::vector<EstimatorKind> others;
  for (EstimatorKind kind : config.estimators) {
    if (kind == EstimatorKind::KNN) {
      wants_knn = true;
    } else {
      others.push_back(kind);
    }
  }
  if (wants_knn && config.k.empty()) {
    throw validation_error("knn estimator requested but no k values configured");
  }
  if (!wants_knn && !config.k.empty()) {
    throw validation_error("k values configured but knn is not an estimator");
  }

  SummaryTable table;
  for (const CutPair& cut : config.cuts) {
    if (config.scenario == 1) {
      table.truth.emplace_back(cut,
                               true_tcf_scenario_i(config.sigma_choice, cut).tcf);
    } else {
      ScenarioIIConfig truth_config;
      truth_config.alpha = config.alpha;
      table.truth.emplace_back(cut, true_tcf_scenario_ii(truth_config, cut).tcf);
    }
  }

  const std::size_t n_cuts = config.cuts.size();
  std::vector<std::vector<CellAccumulator>> other_cells(
      others.size(), std::vector<CellAccumulator>(n_cuts));
  std::vector<std::vector<CellAccumulator>> knn_cells(
      config.k.size(), std::vector<CellAccumulator>(n_cuts));

  // Scenario 2 fits deliberately misspecified working models: the disease
  // model drops the covariate and the verification model enters it as
  // |a1|^(2/3).
  Formula disease_formula;
  Formula verification_formula;
  if (config.scenario == 1) {
    disease_formula = full_formula(1);
    verification_formula = full_formula(1);
  } else {
    disease_formula.terms.push_back(FormulaTerm{-1, 1.0});
    verification_formula.terms.push_back(FormulaTerm{-1, 1.0});
    verification_formula.terms.push_back(FormulaTerm{0, 2.0 / 3.0});
  }

  const bool wants_parametric =
      std::any_of(others.begin(), others.end(), [](EstimatorKind kind) {
        return kind != EstimatorKind::COMPLETE;
      });

  for (std::size_t rep = 0; rep < config.reps; ++rep) {
    const std::uint64_t rep_seed = derive_seed(config.seed, rep);
    Dataset full;
    if (config.scenario == 1) {
      ScenarioIConfig gen;
      gen.sigma_choice = config.sigma_choice;
      gen.n = config.n;
      gen.seed = rep_seed;
      full = scenario_i_full(gen);
    } else {
      ScenarioIIConfig gen;
      gen.alpha = config.alpha;
      gen.n = config.n;
      gen.seed = rep_seed;
      full = scenario_ii_full(gen);
    }
    Dataset masked = full;
    mask_unverified(masked);

    bool have_nuisance = false;
    NuisanceEstimates nuisance;
    if (wants_parametric) {
      try {
        nuisance = estimate_nuisance(masked, disease_formula, verification_formula);
        have_nuisance = true;
      } catch (const std::runtime_error&) {
        have_nuisance = false;
      }
    }

    for (std::size_t e = 0; e < others.size(); ++e) {
      const EstimatorKind kind = others[e];
      for (std::size_t c = 0; c < n_cuts; ++c) {
        CellAccumulator& cell = other_cells[e][c];
        try {
          if (kind == EstimatorKind::COMPLETE) {
            Dataset complete = full;
            for (auto& unit : complete.units) unit.v = 1;
            cell.record(complete_data_tcf(complete, config.cuts[c]));
            continue;
          }
          if (!have_nuisance) {
            ++cell.failures;
            continue;
          }
          switch (kind) {
            case EstimatorKind::FI:
              cell.record(estimate_tcf_fi(masked, nuisance, config.cuts[c]));
              break;
            case EstimatorKind::MSI:
              cell.record(estimate_tcf_msi(masked, nuisance, config.cuts[c]));
              break;
            case EstimatorKind::IPW:
              cell.record(estimate_tcf_ipw(masked, nuisance, config.cuts[c]));
              break;
            default:
              cell.record(estimate_tcf_spe(masked, nuisance, config.cuts[c]));
              break;
          }
        } catch (const std::runtime_error&) {
          ++cell.failures;
        }
      }
    }

    if (wants_knn) {
      bool have_plugin = false;
      PluginEstimates plugin;
      try {
        plugin = plugin_rho_pi(masked, config.metric, config.k_bar);
        have_plugin = true;
      } catch (const std::runtime_error&) {
        have_plugin = false;
      }
      for (std::size_t ki = 0; ki < config.k.size(); ++ki) {
        RhoMatrix rho;
        bool have_rho = false;
        try {
          rho = impute_rho(masked, config.k[ki], config.metric);
          have_rho = true;
        } catch (const std::runtime_error&) {
          have_rho = false;
        }
        for (std::size_t c = 0; c < n_cuts; ++c) {
          CellAccumulator& cell = knn_cells[ki][c];
          if (!have_rho) {
            ++cell.failures;
            continue;
          }
          try {
            cell.record(estimate_tcf_knn(masked, rho, config.cuts[c]));
          } catch (const std::runtime_error&) {
            ++cell.failures;
            continue;
          }
          if (!have_plugin) continue;
          try {
            const MomentSet moments =
                estimate_moments(masked, rho, config.cuts[c]);
            const OmegaSet omegas =
                omega_terms(masked, plugin.rho_tilde, plugin.pi_tilde,
                            config.k[ki], moments);
            const Xi xi = xi_scalar(moments, omegas);
            Triple sd{};
            bool ok = true;
            for (std::size_t k = 0; k < 3; ++k) {
              const double var = xi.matrix[k][k] / static_cast<double>(masked.n());
              if (var < 0.0) {
                ok = false;
                break;
              }
              sd[k] = std::sqrt(var);
            }
            if (ok) cell.asy_sd.push_back(sd);
          } catch (const std::runtime_error&) {
          }
        }
      }
    }
  }

  for (std::size_t e = 0; e < others.size(); ++e) {
    for (std::size_t c = 0; c < n_cuts; ++c) {
      table.rows.push_back(
          summarize(row_label(others[e]), config.cuts[c], other_cells[e][c]));
    }
  }
  for (std::size_t ki = 0; ki < config.k.size(); ++ki) {
    const std::string label = std::to_string(config.k[ki]) + "NN";
    for (std::size_t c = 0; c < n_cuts; ++c) {
      table.rows.push_back(summarize(label, config.cuts[c], knn_cells[ki][c]));
    }
  }
  return table;
}

namespace {

std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

void write_triple(std::ostream& out, const Triple& t) {
  out << ',' << fixed6(t[0]) << ',' << fixed6(t[1]) << ',' << fixed6(t[2]);
}

void write_optional_triple(std::ostream& out, const std::optional<Triple>& t) {
  if (t.has_value()) {
    write_triple(out, *t);
  } else {
    out << ",,,";
  }
}

}  // namespace

void write_summary_csv(const SummaryTable& table, std::ostream& out) {
  out << "estimator,c1,c2,tcf1,tcf2,tcf3,mc_sd1,mc_sd2,mc_sd3,"
         "asy_sd1,asy_sd2,asy_sd3,oor1,oor2,oor3,reps_used,failures\n";
  for (const auto& [cut, tcf] : table.truth) {
    out << "True," << fixed6(cut.c1) << ',' << fixed6(cut.c2);
    write_triple(out, tcf);
    out << ",,,,,,,,,,,\n";
  }
  for (const SummaryRow& row : table.rows) {
    out << row.estimator << ',' << fixed6(row.cut.c1) << ',' << fixed6(row.cut.c2);
    write_triple(out, row.mean);
    write_optional_triple(out, row.mc_sd);
    write_optional_triple(out, row.asy_sd_mean);
    write_triple(out, row.oor_freq);
    out << ',' << row.reps_used << ',' << row.failures << '\n';
  }
}

}  // namespace rocsurf
