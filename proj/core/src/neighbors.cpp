#include "rocsurf/neighbors.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <sstream>
#include <utility>

namespace rocsurf {

namespace {

std::vector<double> feature_row(const Unit& unit) {
  std::vector<double> x;
  x.reserve(unit.a.size() + 1);
  x.push_back(unit.t);
  x.insert(x.end(), unit.a.begin(), unit.a.end());
  return x;
}

Eigen::MatrixXd to_eigen(const std::vector<std::vector<double>>& m) {
  const auto rows = static_cast<Eigen::Index>(m.size());
  const auto cols = rows > 0 ? static_cast<Eigen::Index>(m[0].size()) : 0;
  Eigen::MatrixXd out(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    if (static_cast<Eigen::Index>(m[static_cast<std::size_t>(i)].size()) != cols) {
      throw validation_error("covariance matrix rows have unequal lengths");
    }
    for (Eigen::Index j = 0; j < cols; ++j) {
      out(i, j) = m[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
  }
  return out;
}

// Precomputed Cholesky factor for Mahalanobis distances.
struct MetricContext {
  MetricKind kind = MetricKind::EUCLIDEAN;
  Eigen::LLT<Eigen::MatrixXd> llt;
  std::size_t dim = 0;
};

MetricContext make_context(const Metric& metric, std::size_t dim) {
  MetricContext ctx;
  ctx.kind = metric.kind;
  ctx.dim = dim;
  if (metric.kind != MetricKind::MAHALANOBIS) return ctx;
  if (!metric.mahalanobis_covariance.has_value()) {
    throw validation_error(
        "mahalanobis metric requires a covariance; call resolve_metric first");
  }
  const Eigen::MatrixXd cov = to_eigen(*metric.mahalanobis_covariance);
  if (cov.rows() != cov.cols() ||
      cov.rows() != static_cast<Eigen::Index>(dim)) {
    std::ostringstream msg;
    msg << "mahalanobis covariance must be " << dim << "x" << dim << ", got "
        << cov.rows() << "x" << cov.cols();
    throw validation_error(msg.str());
  }
  for (Eigen::Index i = 0; i < cov.rows(); ++i) {
    for (Eigen::Index j = 0; j < i; ++j) {
      const double scale =
          std::max({1.0, std::abs(cov(i, j)), std::abs(cov(j, i))});
      if (std::abs(cov(i, j) - cov(j, i)) > 1e-9 * scale) {
        throw validation_error("mahalanobis covariance is not symmetric");
      }
    }
  }
  ctx.llt.compute(cov);
  if (ctx.llt.info() != Eigen::Success) {
    throw validation_error("mahalanobis covariance is not positive definite");
  }
  return ctx;
}

double context_distance(const std::vector<double>& x, const std::vector<double>& y,
                        const MetricContext& ctx) {
  if (x.size() != y.size() || x.size() != ctx.dim) {
    throw validation_error("distance: dimension mismatch");
  }
  switch (ctx.kind) {
    case MetricKind::EUCLIDEAN: {
      double sum = 0.0;
      for (std::size_t j = 0; j < x.size(); ++j) {
        const double d = x[j] - y[j];
        sum += d * d;
      }
      return std::sqrt(sum);
    }
    case MetricKind::MANHATTAN: {
      double sum = 0.0;
      for (std::size_t j = 0; j < x.size(); ++j) sum += std::abs(x[j] - y[j]);
      return sum;
    }
    case MetricKind::CANBERRA: {
      double sum = 0.0;
      for (std::size_t j = 0; j < x.size(); ++j) {
        const double denom = std::abs(x[j]) + std::abs(y[j]);
        if (denom > 0.0) sum += std::abs(x[j] - y[j]) / denom;
      }
      return sum;
    }
    case MetricKind::MAHALANOBIS: {
      Eigen::VectorXd diff(static_cast<Eigen::Index>(x.size()));
      for (std::size_t j = 0; j < x.size(); ++j) {
        diff(static_cast<Eigen::Index>(j)) = x[j] - y[j];
      }
      const Eigen::VectorXd z = ctx.llt.matrixL().solve(diff);
      return z.norm();
    }
  }
  return 0.0;
}

// Neighbor candidates of one query, ordered by (distance, index).
struct Candidate {
  double dist;
  std::size_t index;

  bool operator<(const Candidate& other) const {
    if (dist != other.dist) return dist < other.dist;
    return index < other.index;
  }
};

std::vector<std::vector<double>> all_features(const Dataset& dataset) {
  std::vector<std::vector<double>> rows;
  rows.reserve(dataset.n());
  for (const auto& unit : dataset.units) rows.push_back(feature_row(unit));
  return rows;
}

}  // namespace

Metric parse_metric(const std::string& name) {
  Metric metric;
  if (name == "euclidean") {
    metric.kind = MetricKind::EUCLIDEAN;
  } else if (name == "manhattan") {
    metric.kind = MetricKind::MANHATTAN;
  } else if (name == "canberra") {
    metric.kind = MetricKind::CANBERRA;
  } else if (name == "mahalanobis") {
    metric.kind = MetricKind::MAHALANOBIS;
  } else {
    throw validation_error(
        "unknown metric '" + name +
        "' (expected euclidean, manhattan, canberra or mahalanobis)");
  }
  return metric;
}

double distance(const std::vector<double>& x, const std::vector<double>& y,
                const Metric& metric) {
  const MetricContext ctx = make_context(metric, x.size());
  return context_distance(x, y, ctx);
}

Metric resolve_metric(const Metric& metric, const Dataset& dataset) {
  if (metric.kind != MetricKind::MAHALANOBIS) return metric;
  const std::size_t dim = dataset.p + 1;
  if (metric.mahalanobis_covariance.has_value()) {
    make_context(metric, dim);
    return metric;
  }
  if (dataset.n() < 2) {
    throw validation_error(
        "estimating a mahalanobis covariance needs at least 2 units");
  }
  const auto rows = all_features(dataset);
  std::vector<double> mean(dim, 0.0);
  for (const auto& row : rows) {
    for (std::size_t j = 0; j < dim; ++j) mean[j] += row[j];
  }
  for (double& m : mean) m /= static_cast<double>(rows.size());
  std::vector<std::vector<double>> cov(dim, std::vector<double>(dim, 0.0));
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < dim; ++i) {
      const double di = row[i] - mean[i];
      for (std::size_t j = i; j < dim; ++j) {
        cov[i][j] += di * (row[j] - mean[j]);
      }
    }
  }
  const double denom = static_cast<double>(rows.size() - 1);
  for (std::size_t i = 0; i < dim; ++i) {
    for (std::size_t j = i; j < dim; ++j) {
      cov[i][j] /= denom;
      cov[j][i] = cov[i][j];
    }
  }
  Metric resolved = metric;
  resolved.mahalanobis_covariance = std::move(cov);
  make_context(resolved, dim);
  return resolved;
}

std::vector<std::size_t> knn_indices(std::size_t query, std::size_t k,
                                     const Dataset& dataset, const Metric& metric,
                                     NeighborPool pool) {
  if (query >= dataset.n()) throw validation_error("query index out of range");
  if (k == 0) throw validation_error("k must be positive");
  const Metric resolved = resolve_metric(metric, dataset);
  const MetricContext ctx = make_context(resolved, dataset.p + 1);
  const auto rows = all_features(dataset);

  std::vector<Candidate> candidates;
  candidates.reserve(dataset.n());
  for (std::size_t i = 0; i < dataset.n(); ++i) {
    if (i == query) continue;
    if (pool == NeighborPool::VERIFIED && dataset.units[i].v == 0) continue;
    candidates.push_back({context_distance(rows[query], rows[i], ctx), i});
  }
  if (k > candidates.size()) {
    std::ostringstream msg;
    msg << "k = " << k << " exceeds pool size " << candidates.size();
    throw validation_error(msg.str());
  }
  std::nth_element(candidates.begin(),
                   candidates.begin() + static_cast<std::ptrdiff_t>(k - 1),
                   candidates.end());
  std::sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(k));
  std::vector<std::size_t> out;
  out.reserve(k);
  for (std::size_t l = 0; l < k; ++l) out.push_back(candidates[l].index);
  return out;
}

RhoMatrix impute_rho(const Dataset& dataset, std::size_t k, const Metric& metric) {
  if (k == 0) throw validation_error("k must be positive");
  const std::size_t n_ver = dataset.verified_count();
  if (n_ver < k + 1) {
    std::ostringstream msg;
    msg << "insufficient verified units: imputation with k = " << k
        << " needs at least " << (k + 1) << ", found " << n_ver;
    throw validation_error(msg.str());
  }
  const Metric resolved = resolve_metric(metric, dataset);
  const MetricContext ctx = make_context(resolved, dataset.p + 1);
  const auto rows = all_features(dataset);

  std::vector<std::size_t> verified;
  verified.reserve(n_ver);
  for (std::size_t i = 0; i < dataset.n(); ++i) {
    if (dataset.units[i].v == 1) verified.push_back(i);
  }

  RhoMatrix rho;
  rho.k = k;
  rho.values.resize(dataset.n());
  rho.counts.resize(dataset.n());
  std::vector<Candidate> candidates;
  for (std::size_t i = 0; i < dataset.n(); ++i) {
    candidates.clear();
    for (std::size_t v : verified) {
      if (v == i) continue;
      candidates.push_back({context_distance(rows[i], rows[v], ctx), v});
    }
    std::nth_element(candidates.begin(),
                     candidates.begin() + static_cast<std::ptrdiff_t>(k - 1),
                     candidates.end());
    std::array<int, 3> counts{0, 0, 0};
    for (std::size_t l = 0; l < k; ++l) {
      // nth_element already isolates the k nearest; label counts do not
      // depend on their internal order.
      const std::size_t id = candidates[l].index;
      ++counts[static_cast<std::size_t>(dataset.units[id].d - 1)];
    }
    rho.counts[i] = counts;
    const double kd = static_cast<double>(k);
    rho.values[i] = Triple{counts[0] / kd, counts[1] / kd, counts[2] / kd};
  }
  return rho;
}

PropensityVector adaptive_propensity(const Dataset& dataset, const Metric& metric) {
  const std::size_t n_ver = dataset.verified_count();
  if (n_ver == 0 || n_ver == dataset.n()) {
    throw validation_error(
        "adaptive propensity needs both verified and unverified units; "
        "fully verified data takes the complete-data path");
  }
  const Metric resolved = resolve_metric(metric, dataset);
  const MetricContext ctx = make_context(resolved, dataset.p + 1);
  const auto rows = all_features(dataset);

  PropensityVector out;
  out.values.resize(dataset.n());
  out.k_star.resize(dataset.n());
  std::vector<Candidate> order;
  for (std::size_t i = 0; i < dataset.n(); ++i) {
    order.clear();
    order.reserve(dataset.n() - 1);
    for (std::size_t j = 0; j < dataset.n(); ++j) {
      if (j == i) continue;
      order.push_back({context_distance(rows[i], rows[j], ctx), j});
    }
    std::sort(order.begin(), order.end());
    if (dataset.units[i].v == 0) {
      std::size_t k_star = 0;
      double sum = 0.0;
      for (const auto& c : order) {
        ++k_star;
        sum += dataset.units[c.index].v;
        if (dataset.units[c.index].v == 1) break;
      }
      out.k_star[i] = k_star;
      out.values[i] = sum / static_cast<double>(k_star);
    } else {
      // The chain starts at the unit itself, so the window always holds
      // k_star - 1 verified units and ends at the first unverified one.
      std::size_t k_star = 1;
      double sum = 1.0;
      for (const auto& c : order) {
        ++k_star;
        sum += dataset.units[c.index].v;
        if (dataset.units[c.index].v == 0) break;
      }
      out.k_star[i] = k_star;
      out.values[i] = sum / static_cast<double>(k_star);
    }
  }
  return out;
}

KSelection select_k(const Dataset& dataset, const Metric& metric,
                    std::size_t k_max) {
  const std::size_t n_ver = dataset.verified_count();
  if (n_ver < 2) throw validation_error("select_k needs at least 2 verified units");
  if (k_max == 0 || k_max > n_ver - 1) {
    std::ostringstream msg;
    msg << "k_max must lie in [1, " << (n_ver - 1) << "], got " << k_max;
    throw validation_error(msg.str());
  }
  const Metric resolved = resolve_metric(metric, dataset);
  const MetricContext ctx = make_context(resolved, dataset.p + 1);
  const auto rows = all_features(dataset);

  std::vector<std::size_t> verified;
  verified.reserve(n_ver);
  for (std::size_t i = 0; i < dataset.n(); ++i) {
    if (dataset.units[i].v == 1) verified.push_back(i);
  }

  KSelection sel;
  sel.criterion.assign(k_max, 0.0);
  std::vector<Candidate> order;
  for (std::size_t q : verified) {
    order.clear();
    order.reserve(n_ver - 1);
    for (std::size_t v : verified) {
      if (v == q) continue;
      order.push_back({context_distance(rows[q], rows[v], ctx), v});
    }
    std::sort(order.begin(), order.end());
    const double d1 = dataset.units[q].d == 1 ? 1.0 : 0.0;
    const double d2 = dataset.units[q].d == 2 ? 1.0 : 0.0;
    int c1 = 0;
    int c2 = 0;
    for (std::size_t k = 1; k <= k_max; ++k) {
      const int label = dataset.units[order[k - 1].index].d;
      if (label == 1) ++c1;
      if (label == 2) ++c2;
      const double kd = static_cast<double>(k);
      sel.criterion[k - 1] +=
          std::abs(d1 - c1 / kd) + std::abs(d2 - c2 / kd);
    }
  }
  const double denom = static_cast<double>(n_ver) * 2.0;
  for (double& c : sel.criterion) c /= denom;
  std::size_t best = 0;
  for (std::size_t k = 1; k < k_max; ++k) {
    if (sel.criterion[k] < sel.criterion[best]) best = k;
  }
  sel.k_star = best + 1;
  return sel;
}

}  // namespace rocsurf
