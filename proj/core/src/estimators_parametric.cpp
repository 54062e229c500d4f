#include "rocsurf/estimators_parametric.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <sstream>

#include "rocsurf/math.hpp"

namespace rocsurf {

namespace {

constexpr double kSeparationGuard = 1e4;
constexpr double kRidge = 1e-10;

std::string trim(const std::string& s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

double term_value(const FormulaTerm& term, const Unit& unit) {
  const double x =
      term.variable < 0 ? unit.t : unit.a[static_cast<std::size_t>(term.variable)];
  if (term.power == 1.0) return x;
  if (term.power == std::floor(term.power)) return std::pow(x, term.power);
  return std::pow(std::abs(x), term.power);
}

Eigen::MatrixXd to_design(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) throw validation_error("empty design matrix");
  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto m = static_cast<Eigen::Index>(rows[0].size());
  Eigen::MatrixXd x(n, m);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (static_cast<Eigen::Index>(rows[static_cast<std::size_t>(i)].size()) != m) {
      throw validation_error("design matrix rows have unequal lengths");
    }
    for (Eigen::Index j = 0; j < m; ++j) {
      x(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
  }
  return x;
}

double log1pexp(double x) {
  if (x > 0.0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

}  // namespace

std::vector<double> Formula::design_row(const Unit& unit) const {
  std::vector<double> row;
  row.reserve(terms.size() + 1);
  row.push_back(1.0);
  for (const auto& term : terms) row.push_back(term_value(term, unit));
  return row;
}

Formula parse_formula(const std::string& text, std::size_t p) {
  Formula formula;
  const std::string body = trim(text);
  if (body.empty()) throw validation_error("formula is empty");
  std::size_t start = 0;
  for (std::size_t i = 0; i <= body.size(); ++i) {
    if (i != body.size() && body[i] != ',') continue;
    const std::string token = trim(body.substr(start, i - start));
    start = i + 1;
    if (token.empty()) throw validation_error("empty term in formula");
    std::string name = token;
    double power = 1.0;
    const std::size_t caret = token.find('^');
    if (caret != std::string::npos) {
      name = trim(token.substr(0, caret));
      const std::string ptext = trim(token.substr(caret + 1));
      const auto [ptr, ec] =
          std::from_chars(ptext.data(), ptext.data() + ptext.size(), power);
      if (ec != std::errc{} || ptr != ptext.data() + ptext.size()) {
        throw validation_error("malformed power '" + ptext + "' in formula");
      }
    }
    FormulaTerm term;
    term.power = power;
    if (name == "t") {
      term.variable = -1;
    } else if (name.size() >= 2 && name[0] == 'a') {
      long idx = 0;
      const auto [ptr, ec] =
          std::from_chars(name.data() + 1, name.data() + name.size(), idx);
      if (ec != std::errc{} || ptr != name.data() + name.size() || idx < 1) {
        throw validation_error("unknown formula variable '" + name + "'");
      }
      if (static_cast<std::size_t>(idx) > p) {
        throw validation_error("formula references a" + std::to_string(idx) +
                               " but the dataset has p = " + std::to_string(p));
      }
      term.variable = static_cast<int>(idx - 1);
    } else {
      throw validation_error("unknown formula variable '" + name + "'");
    }
    formula.terms.push_back(term);
  }
  return formula;
}

Formula full_formula(std::size_t p) {
  Formula formula;
  formula.terms.push_back(FormulaTerm{-1, 1.0});
  for (std::size_t j = 0; j < p; ++j) {
    formula.terms.push_back(FormulaTerm{static_cast<int>(j), 1.0});
  }
  return formula;
}

double LogitModel::predict(const std::vector<double>& row) const {
  if (row.size() != coefficients.size()) {
    throw validation_error("prediction row does not match coefficient length");
  }
  double eta = 0.0;
  for (std::size_t j = 0; j < row.size(); ++j) eta += coefficients[j] * row[j];
  return expit(eta);
}

LogitModel fit_binary_logit(const std::vector<std::vector<double>>& design,
                            const std::vector<int>& response, int max_iter,
                            double tol) {
  if (design.size() != response.size()) {
    throw validation_error("design and response lengths differ");
  }
  const Eigen::MatrixXd x = to_design(design);
  if (x.rows() <= x.cols()) {
    throw validation_error("logistic fit needs more observations than parameters");
  }
  for (int y : response) {
    if (y != 0 && y != 1) throw validation_error("binary response must be 0 or 1");
  }
  const Eigen::Index n = x.rows();
  const Eigen::Index m = x.cols();
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) y(i) = response[static_cast<std::size_t>(i)];

  LogitModel model;
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(m);
  bool converged = false;
  int iter = 0;
  while (iter < max_iter) {
    ++iter;
    const Eigen::VectorXd eta = x * beta;
    Eigen::VectorXd mu(n);
    Eigen::VectorXd w(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      mu(i) = expit(eta(i));
      w(i) = mu(i) * (1.0 - mu(i));
    }
    Eigen::MatrixXd h = x.transpose() * w.asDiagonal() * x;
    h.diagonal().array() += kRidge;
    const Eigen::VectorXd score = x.transpose() * (y - mu);
    const Eigen::VectorXd step = h.ldlt().solve(score);
    beta += step;
    if (!beta.allFinite() || beta.cwiseAbs().maxCoeff() > kSeparationGuard) {
      converged = false;
      break;
    }
    const double rel =
        step.cwiseAbs().maxCoeff() / std::max(1.0, beta.cwiseAbs().maxCoeff());
    if (rel < tol) {
      converged = true;
      break;
    }
  }
  model.converged = converged;
  model.iterations = iter;
  model.coefficients.assign(beta.data(), beta.data() + beta.size());
  const Eigen::VectorXd eta = x * beta;
  double ll = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    ll += y(i) * eta(i) - log1pexp(eta(i));
  }
  model.log_likelihood = ll;
  return model;
}

Triple MultinomialLogitModel::predict(const std::vector<double>& row) const {
  double eta1 = 0.0;
  double eta2 = 0.0;
  if (row.size() != coefficients[0].size() ||
      row.size() != coefficients[1].size()) {
    throw validation_error("prediction row does not match coefficient length");
  }
  for (std::size_t j = 0; j < row.size(); ++j) {
    eta1 += coefficients[0][j] * row[j];
    eta2 += coefficients[1][j] * row[j];
  }
  // Guard against overflow for wildly non-converged coefficients.
  const double shift = std::max({0.0, eta1, eta2});
  const double e1 = std::exp(eta1 - shift);
  const double e2 = std::exp(eta2 - shift);
  const double e3 = std::exp(-shift);
  const double denom = e1 + e2 + e3;
  return Triple{e1 / denom, e2 / denom, e3 / denom};
}

MultinomialLogitModel fit_multinomial_logit(
    const std::vector<std::vector<double>>& design, const std::vector<int>& labels,
    int max_iter, double tol) {
  if (design.size() != labels.size()) {
    throw validation_error("design and labels lengths differ");
  }
  std::array<int, 3> tally{0, 0, 0};
  for (int d : labels) {
    if (d < 1 || d > 3) throw validation_error("labels must be in {1,2,3}");
    ++tally[static_cast<std::size_t>(d - 1)];
  }
  if ((tally[0] > 0) + (tally[1] > 0) + (tally[2] > 0) < 2) {
    throw validation_error("degenerate response: labels take a single value");
  }
  const Eigen::MatrixXd x = to_design(design);
  const Eigen::Index n = x.rows();
  const Eigen::Index m = x.cols();
  if (n <= 2 * m) {
    throw validation_error("multinomial fit needs more observations than parameters");
  }

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(2 * m);
  bool converged = false;
  int iter = 0;
  Eigen::MatrixXd prob(n, 2);
  while (iter < max_iter) {
    ++iter;
    const Eigen::VectorXd eta1 = x * beta.head(m);
    const Eigen::VectorXd eta2 = x * beta.tail(m);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double shift = std::max({0.0, eta1(i), eta2(i)});
      const double e1 = std::exp(eta1(i) - shift);
      const double e2 = std::exp(eta2(i) - shift);
      const double e3 = std::exp(-shift);
      const double denom = e1 + e2 + e3;
      prob(i, 0) = e1 / denom;
      prob(i, 1) = e2 / denom;
    }
    Eigen::VectorXd score(2 * m);
    Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(2 * m, 2 * m);
    Eigen::VectorXd r1(n);
    Eigen::VectorXd r2(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const int d = labels[static_cast<std::size_t>(i)];
      r1(i) = (d == 1 ? 1.0 : 0.0) - prob(i, 0);
      r2(i) = (d == 2 ? 1.0 : 0.0) - prob(i, 1);
    }
    score.head(m) = x.transpose() * r1;
    score.tail(m) = x.transpose() * r2;
    Eigen::VectorXd w11(n);
    Eigen::VectorXd w22(n);
    Eigen::VectorXd w12(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      w11(i) = prob(i, 0) * (1.0 - prob(i, 0));
      w22(i) = prob(i, 1) * (1.0 - prob(i, 1));
      w12(i) = -prob(i, 0) * prob(i, 1);
    }
    hess.topLeftCorner(m, m) = x.transpose() * w11.asDiagonal() * x;
    hess.bottomRightCorner(m, m) = x.transpose() * w22.asDiagonal() * x;
    hess.topRightCorner(m, m) = x.transpose() * w12.asDiagonal() * x;
    hess.bottomLeftCorner(m, m) = hess.topRightCorner(m, m).transpose();
    hess.diagonal().array() += kRidge;
    const Eigen::VectorXd step = hess.ldlt().solve(score);
    beta += step;
    if (!beta.allFinite() || beta.cwiseAbs().maxCoeff() > kSeparationGuard) {
      converged = false;
      break;
    }
    const double rel =
        step.cwiseAbs().maxCoeff() / std::max(1.0, beta.cwiseAbs().maxCoeff());
    if (rel < tol) {
      converged = true;
      break;
    }
  }

  MultinomialLogitModel model;
  model.converged = converged;
  model.iterations = iter;
  model.coefficients[0].assign(beta.data(), beta.data() + m);
  model.coefficients[1].assign(beta.data() + m, beta.data() + 2 * m);
  const Eigen::VectorXd eta1 = x * beta.head(m);
  const Eigen::VectorXd eta2 = x * beta.tail(m);
  double ll = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double shift = std::max({0.0, eta1(i), eta2(i)});
    const double denom = std::exp(eta1(i) - shift) + std::exp(eta2(i) - shift) +
                         std::exp(-shift);
    const int d = labels[static_cast<std::size_t>(i)];
    const double eta_d = d == 1 ? eta1(i) : (d == 2 ? eta2(i) : 0.0);
    ll += eta_d - shift - std::log(denom);
  }
  model.log_likelihood = ll;
  return model;
}

NuisanceEstimates estimate_nuisance(const Dataset& dataset,
                                    const Formula& disease_formula,
                                    const Formula& verification_formula) {
  std::vector<std::vector<double>> disease_design;
  std::vector<int> disease_labels;
  for (const auto& unit : dataset.units) {
    if (unit.v == 1) {
      disease_design.push_back(disease_formula.design_row(unit));
      disease_labels.push_back(unit.d);
    }
  }
  if (disease_design.empty()) {
    throw validation_error("no verified units to fit the disease model");
  }
  const MultinomialLogitModel disease =
      fit_multinomial_logit(disease_design, disease_labels);

  std::vector<std::vector<double>> ver_design;
  std::vector<int> ver_response;
  ver_design.reserve(dataset.n());
  for (const auto& unit : dataset.units) {
    ver_design.push_back(verification_formula.design_row(unit));
    ver_response.push_back(unit.v);
  }
  const LogitModel verification = fit_binary_logit(ver_design, ver_response);

  NuisanceEstimates out;
  out.disease_converged = disease.converged;
  out.verification_converged = verification.converged;
  out.rho_hat.reserve(dataset.n());
  out.pi_hat.reserve(dataset.n());
  for (std::size_t i = 0; i < dataset.n(); ++i) {
    out.rho_hat.push_back(disease.predict(disease_formula.design_row(dataset.units[i])));
    out.pi_hat.push_back(verification.predict(ver_design[i]));
  }
  return out;
}

namespace {

struct WeightedRaw {
  Triple s{0.0, 0.0, 0.0};
  std::array<Triple, 2> b{Triple{0.0, 0.0, 0.0}, Triple{0.0, 0.0, 0.0}};
};

// Accumulates the ratio sums from per-unit class weights.
template <typename WeightFn>
WeightedRaw accumulate(const Dataset& dataset, const CutPair& cut, WeightFn&& fn) {
  WeightedRaw raw;
  for (std::size_t i = 0; i < dataset.n(); ++i) {
    const auto& u = dataset.units[i];
    for (std::size_t k = 0; k < 3; ++k) {
      const double c = fn(i, u, k);
      raw.s[k] += c;
      if (u.t >= cut.c1) raw.b[0][k] += c;
      if (u.t >= cut.c2) raw.b[1][k] += c;
    }
  }
  return raw;
}

TcfEstimate tcf_from_weighted(const WeightedRaw& raw, const CutPair& cut,
                              EstimatorKind kind) {
  for (std::size_t k = 0; k < 3; ++k) {
    if (!(raw.s[k] > 0.0)) {
      std::ostringstream msg;
      msg << "nonpositive weight sum for class " << (k + 1) << " in "
          << estimator_name(kind) << " estimator";
      throw numerical_error(msg.str());
    }
  }
  TcfEstimate est;
  est.cut = cut;
  est.estimator = kind;
  est.tcf[0] = 1.0 - raw.b[0][0] / raw.s[0];
  est.tcf[1] = (raw.b[0][1] - raw.b[1][1]) / raw.s[1];
  est.tcf[2] = raw.b[1][2] / raw.s[2];
  for (double v : est.tcf) {
    if (v < 0.0 || v > 1.0) est.out_of_range = true;
  }
  return est;
}

void check_nuisance(const Dataset& dataset, const NuisanceEstimates& nuisance) {
  if (nuisance.rho_hat.size() != dataset.n() ||
      nuisance.pi_hat.size() != dataset.n()) {
    throw validation_error("nuisance estimates do not match dataset size");
  }
}

// Applies the clamping policy to the propensities used by IPW and SPE.
// verified_only restricts the positivity check to units whose weight
// actually divides by pi.
std::vector<double> checked_propensity(const Dataset& dataset,
                                       const NuisanceEstimates& nuisance,
                                       const PropensityPolicy& policy,
                                       bool verified_only) {
  std::vector<double> pi = nuisance.pi_hat;
  std::vector<std::size_t> offenders;
  for (std::size_t i = 0; i < pi.size(); ++i) {
    if (verified_only && dataset.units[i].v == 0) continue;
    if (pi[i] < policy.floor) {
      if (policy.clamp) {
        pi[i] = policy.floor;
      } else {
        offenders.push_back(i + 1);
      }
    }
  }
  if (!offenders.empty()) {
    std::ostringstream msg;
    msg << "propensity below " << policy.floor << " for unit";
    msg << (offenders.size() > 1 ? "s" : "");
    const std::size_t shown = std::min<std::size_t>(offenders.size(), 10);
    for (std::size_t j = 0; j < shown; ++j) msg << ' ' << offenders[j];
    if (offenders.size() > shown) {
      msg << " and " << (offenders.size() - shown) << " more";
    }
    msg << "; rerun with clamping enabled to floor them";
    throw numerical_error(msg.str());
  }
  return pi;
}

}  // namespace

TcfEstimate estimate_tcf_fi(const Dataset& dataset, const NuisanceEstimates& nuisance,
                            const CutPair& cut) {
  check_cut(cut);
  check_nuisance(dataset, nuisance);
  const WeightedRaw raw =
      accumulate(dataset, cut, [&](std::size_t i, const Unit&, std::size_t k) {
        return nuisance.rho_hat[i][k];
      });
  return tcf_from_weighted(raw, cut, EstimatorKind::FI);
}

TcfEstimate estimate_tcf_msi(const Dataset& dataset, const NuisanceEstimates& nuisance,
                             const CutPair& cut) {
  check_cut(cut);
  check_nuisance(dataset, nuisance);
  const WeightedRaw raw =
      accumulate(dataset, cut, [&](std::size_t i, const Unit& u, std::size_t k) {
        return u.v == 1 ? (u.d == static_cast<int>(k) + 1 ? 1.0 : 0.0)
                        : nuisance.rho_hat[i][k];
      });
  return tcf_from_weighted(raw, cut, EstimatorKind::MSI);
}

TcfEstimate estimate_tcf_ipw(const Dataset& dataset, const NuisanceEstimates& nuisance,
                             const CutPair& cut, const PropensityPolicy& policy) {
  check_cut(cut);
  check_nuisance(dataset, nuisance);
  const std::vector<double> pi = checked_propensity(dataset, nuisance, policy, true);
  const WeightedRaw raw =
      accumulate(dataset, cut, [&](std::size_t i, const Unit& u, std::size_t k) {
        if (u.v != 1) return 0.0;
        return (u.d == static_cast<int>(k) + 1 ? 1.0 : 0.0) / pi[i];
      });
  return tcf_from_weighted(raw, cut, EstimatorKind::IPW);
}

TcfEstimate estimate_tcf_spe(const Dataset& dataset, const NuisanceEstimates& nuisance,
                             const CutPair& cut, const PropensityPolicy& policy) {
  check_cut(cut);
  check_nuisance(dataset, nuisance);
  const std::vector<double> pi = checked_propensity(dataset, nuisance, policy, false);
  const WeightedRaw raw =
      accumulate(dataset, cut, [&](std::size_t i, const Unit& u, std::size_t k) {
        const double v = u.v;
        const double d = u.v == 1 && u.d == static_cast<int>(k) + 1 ? 1.0 : 0.0;
        return v * d / pi[i] - nuisance.rho_hat[i][k] * (v - pi[i]) / pi[i];
      });
  return tcf_from_weighted(raw, cut, EstimatorKind::SPE);
}

}  // namespace rocsurf
