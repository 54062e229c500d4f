#include "rocsurf/variance.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <cmath>
#include <sstream>
#include <utility>

#include "rocsurf/math.hpp"

namespace rocsurf {

namespace {

struct PatternPair {
  double s1 = 0.0;
  double s2 = 0.0;
};

void check_theta(double th1, double th2, double th3) {
  const double th[3] = {th1, th2, th3};
  for (int k = 0; k < 3; ++k) {
    if (!(th[k] > 0.0)) {
      std::ostringstream msg;
      msg << "class " << (k + 1) << " mass " << th[k]
          << " is nonpositive; the variance formulas are undefined";
      throw numerical_error(msg.str());
    }
  }
}

}  // namespace

PluginEstimates plugin_rho_pi(const Dataset& dataset, const Metric& metric,
                              std::size_t k_bar) {
  if (k_bar < 2) throw validation_error("k_bar must be at least 2");
  PluginEstimates out;
  out.rho_tilde = impute_rho(dataset, k_bar, metric);
  if (dataset.fully_verified()) {
    out.pi_tilde.assign(dataset.n(), 1.0);
    out.k_star.assign(dataset.n(), 0);
  } else {
    PropensityVector pv = adaptive_propensity(dataset, metric);
    out.pi_tilde = std::move(pv.values);
    out.k_star = std::move(pv.k_star);
  }
  return out;
}

OmegaSet omega_terms(const Dataset& dataset, const RhoMatrix& rho_tilde,
                     const std::vector<double>& pi_tilde,
                     std::size_t k_imputation, const MomentSet& moments) {
  const std::size_t n = dataset.n();
  if (n == 0) throw validation_error("empty dataset");
  if (rho_tilde.values.size() != n || pi_tilde.size() != n) {
    throw validation_error("plug-in vectors do not match dataset size");
  }
  if (k_imputation == 0) throw validation_error("k_imputation must be positive");
  check_cut(moments.cut);

  PatternPair w_k[3];
  PatternPair w_jk[2][3];
  PatternPair e_jk[2][3];
  PatternPair p1212, p112, p213, p12, p113, p223, p1223;

  const double c1 = moments.cut.c1;
  const double c2 = moments.cut.c2;
  for (std::size_t i = 0; i < n; ++i) {
    const double pi = pi_tilde[i];
    if (!(pi > 0.0)) {
      std::ostringstream msg;
      msg << "plug-in propensity " << pi << " for unit " << (i + 1)
          << " is nonpositive";
      throw numerical_error(msg.str());
    }
    const double om = 1.0 - pi;
    const Triple& r = rho_tilde.values[i];
    const double w1 = r[0] * (1.0 - r[0]);
    const double w2 = r[1] * (1.0 - r[1]);
    const double w3 = r[2] * (1.0 - r[2]);
    const double w12 = r[0] * r[1];
    const double w13 = r[0] * r[2];
    const double w23 = r[1] * r[2];
    const double t = dataset.units[i].t;
    const bool ge1 = t >= c1;
    const bool ge2 = t >= c2;
    const bool lt1 = t < c1;
    const bool lt2 = t < c2;
    const bool mid = ge1 && lt2;

    const auto add = [&](PatternPair& p, double w) {
      p.s1 += w * om;
      p.s2 += w * om * om / pi;
    };
    add(w_k[0], w1);
    add(w_k[1], w2);
    add(w_k[2], w3);
    if (ge1) {
      add(w_jk[0][0], w1);
      add(w_jk[0][1], w2);
      add(w_jk[0][2], w3);
      add(p112, w12);
      add(p113, w13);
    }
    if (ge2) {
      add(w_jk[1][0], w1);
      add(w_jk[1][1], w2);
      add(w_jk[1][2], w3);
      add(p213, w13);
      add(p223, w23);
    }
    if (lt1) {
      add(e_jk[0][0], w1);
      add(e_jk[0][1], w2);
      add(e_jk[0][2], w3);
    }
    if (lt2) {
      add(e_jk[1][0], w1);
      add(e_jk[1][1], w2);
      add(e_jk[1][2], w3);
    }
    if (mid) {
      add(p1212, w12);
      add(p1223, w23);
    }
    add(p12, w12);
  }

  const double nd = static_cast<double>(n);
  const double kd = static_cast<double>(k_imputation);
  const auto combine = [&](const PatternPair& p) {
    return (kd + 1.0) / (nd * kd) * p.s1 + p.s2 / nd;
  };

  OmegaSet out;
  for (std::size_t k = 0; k < 3; ++k) {
    out.omega_k[k] = combine(w_k[k]);
    out.omega_jk[0][k] = combine(w_jk[0][k]);
    out.omega_jk[1][k] = combine(w_jk[1][k]);
    out.eta_jk[0][k] = combine(e_jk[0][k]);
    out.eta_jk[1][k] = combine(e_jk[1][k]);
  }
  out.psi_1212 = combine(p1212);
  out.psi_112 = combine(p112);
  out.psi_213 = combine(p213);
  out.psi_12 = combine(p12);
  out.psi_113 = combine(p113);
  out.psi_223 = combine(p223);
  out.psi_1223 = combine(p1223);
  out.k_imputation = k_imputation;
  out.k_bar = rho_tilde.k;

  const double m = moments.beta[0][1] - moments.beta[1][1];
  out.lambda_sq = m * (1.0 - m) + out.omega_jk[0][1] - out.omega_jk[1][1];
  if (out.lambda_sq < 0.0) {
    std::ostringstream msg;
    msg << "band variance term lambda^2 = " << out.lambda_sq
        << " came out negative";
    throw numerical_error(msg.str());
  }
  return out;
}

OmegaSet complete_data_omegas(const MomentSet& moments) {
  OmegaSet out;
  const double m = moments.beta[0][1] - moments.beta[1][1];
  out.lambda_sq = m * (1.0 - m);
  // The (K+1)/(nK) factor multiplies an exact zero; 1 keeps it finite.
  out.k_imputation = 1;
  out.k_bar = 0;
  return out;
}

SigmaStar build_sigma_star(const MomentSet& moments, const OmegaSet& omegas) {
  const double th1 = moments.theta[0];
  const double th2 = moments.theta[1];
  const double b11 = moments.beta[0][0];
  const double b12 = moments.beta[0][1];
  const double b22 = moments.beta[1][1];
  const double b23 = moments.beta[1][2];
  const double g11 = moments.gamma[0][0];
  const double g12 = moments.gamma[0][1];
  const double g22 = moments.gamma[1][1];

  const double s1 = th1 * (1.0 - th1) + omegas.omega_k[0];
  const double s2 = th2 * (1.0 - th2) + omegas.omega_k[1];
  const double s11 = b11 * (1.0 - b11) + omegas.omega_jk[0][0];
  const double s12 = b12 * (1.0 - b12) + omegas.omega_jk[0][1];
  const double s22 = b22 * (1.0 - b22) + omegas.omega_jk[1][1];
  const double s23 = b23 * (1.0 - b23) + omegas.omega_jk[1][2];
  const double z11 = g11 * (1.0 - g11) + omegas.eta_jk[0][0];
  const double z12 = g12 * (1.0 - g12) + omegas.eta_jk[0][1];
  const double z22 = g22 * (1.0 - g22) + omegas.eta_jk[1][1];

  SigmaStar out;
  auto& a = out.matrix;
  const auto set = [&](std::size_t i, std::size_t j, double v) {
    a[i][j] = v;
    a[j][i] = v;
  };
  a[0][0] = s1;
  a[1][1] = s2;
  a[2][2] = s11;
  a[3][3] = s12;
  a[4][4] = s22;
  a[5][5] = s23;
  set(0, 1, -(th1 * th2 + omegas.psi_12));
  set(0, 2, 0.5 * (s1 + s11 - z11));
  set(0, 3, -(omegas.psi_112 + th1 * b12));
  set(0, 4, -((omegas.psi_112 - omegas.psi_1212) + th1 * b22));
  set(0, 5, -(omegas.psi_213 + th1 * b23));
  set(1, 2, -(omegas.psi_112 + th2 * b11));
  set(1, 3, 0.5 * (s2 + s12 - z12));
  set(1, 4, 0.5 * (s2 + s22 - z22));
  set(1, 5, -(omegas.psi_223 + th2 * b23));
  set(2, 3, -(omegas.psi_112 + b11 * b12));
  set(2, 4, -((omegas.psi_112 - omegas.psi_1212) + b11 * b22));
  set(2, 5, -(omegas.psi_213 + b11 * b23));
  set(3, 4, 0.5 * (s12 + s22 - omegas.lambda_sq));
  set(3, 5, -(omegas.psi_223 + b12 * b23));
  set(4, 5, -(omegas.psi_223 + b22 * b23));
  return out;
}

Xi xi_scalar(const MomentSet& moments, const OmegaSet& omegas) {
  const double th1 = moments.theta[0];
  const double th2 = moments.theta[1];
  const double th3 = 1.0 - th1 - th2;
  check_theta(th1, th2, th3);
  const double b11 = moments.beta[0][0];
  const double b12 = moments.beta[0][1];
  const double b22 = moments.beta[1][1];
  const double b23 = moments.beta[1][2];
  const double g11 = moments.gamma[0][0];
  const double g12 = moments.gamma[0][1];
  const double g22 = moments.gamma[1][1];
  const double g23 = moments.gamma[1][2];
  const double m = b12 - b22;

  const double s1 = th1 * (1.0 - th1) + omegas.omega_k[0];
  const double s2 = th2 * (1.0 - th2) + omegas.omega_k[1];
  const double s11 = b11 * (1.0 - b11) + omegas.omega_jk[0][0];
  const double s12 = b12 * (1.0 - b12) + omegas.omega_jk[0][1];
  const double s22 = b22 * (1.0 - b22) + omegas.omega_jk[1][1];
  const double s23 = b23 * (1.0 - b23) + omegas.omega_jk[1][2];
  const double z11 = g11 * (1.0 - g11) + omegas.eta_jk[0][0];
  const double z12 = g12 * (1.0 - g12) + omegas.eta_jk[0][1];
  const double z22 = g22 * (1.0 - g22) + omegas.eta_jk[1][1];
  const double z23 = g23 * (1.0 - g23) + omegas.eta_jk[1][2];
  const double lam = omegas.lambda_sq;

  // Covariances among the theta/beta moments, written directly in terms
  // of the psi plug-ins.
  const double s12star = -(th1 * th2 + omegas.psi_12);
  const double s3 = s1 + 2.0 * s12star + s2;
  const double s111 = 0.5 * (s1 + s11 - z11);
  const double s212 = 0.5 * (s2 + s12 - z12);
  const double s222 = 0.5 * (s2 + s22 - z22);
  const double s323 = 0.5 * (s3 + s23 - z23);
  const double s211 = -(omegas.psi_112 + th2 * b11);
  const double s123 = -(omegas.psi_213 + th1 * b23);
  const double s1123 = -(omegas.psi_213 + b11 * b23);
  const double s223 = -(omegas.psi_223 + th2 * b23);
  const double diff_b_row1 = -(b11 * m + omegas.psi_1212);
  const double diff_t_row1 = -(omegas.psi_1212 + th1 * m);
  const double sum_111_211 = omegas.psi_113 + th3 * b11;
  const double diff_23 = -b23 * m;
  const double sum_cross = omegas.psi_1223 + th3 * m;

  const double th1_2 = th1 * th1;
  const double th2_2 = th2 * th2;
  const double th3_2 = th3 * th3;

  Xi xi;
  xi.matrix[0][0] = (b11 * b11 / (th1_2 * th1_2)) * s1 + s11 / th1_2 -
                    2.0 * (b11 / (th1_2 * th1)) * s111;
  xi.matrix[1][1] = (m * m / (th2_2 * th2_2)) * s2 + lam / th2_2 -
                    2.0 * (m / (th2_2 * th2)) * (s212 - s222);
  xi.matrix[2][2] = (b23 * b23 / (th3_2 * th3_2)) * s3 + s23 / th3_2 -
                    2.0 * (b23 / (th3_2 * th3)) * s323;
  const double xi12 = -diff_b_row1 / (th1 * th2) +
                      (b11 / (th1_2 * th2)) * diff_t_row1 -
                      (m / th2_2) * ((b11 / th1_2) * s12star - s211 / th1);
  const double xi13 =
      (1.0 / th3) * ((b11 / th1_2) * s123 - s1123 / th1) +
      (b23 / (th1 * th3_2)) * ((b11 / th1) * (s1 + s12star) - sum_111_211);
  const double xi23 =
      (1.0 / (th2 * th3)) * (diff_23 - (m / th2) * s223) +
      (b23 / (th2 * th3_2)) * (sum_cross - (m / th2) * (s2 + s12star));
  xi.matrix[0][1] = xi12;
  xi.matrix[1][0] = xi12;
  xi.matrix[0][2] = xi13;
  xi.matrix[2][0] = xi13;
  xi.matrix[1][2] = xi23;
  xi.matrix[2][1] = xi23;
  return xi;
}

Xi xi_delta_method(const MomentSet& moments, const SigmaStar& sigma_star) {
  const double th1 = moments.theta[0];
  const double th2 = moments.theta[1];
  const double th3 = 1.0 - th1 - th2;
  check_theta(th1, th2, th3);
  const double b11 = moments.beta[0][0];
  const double b23 = moments.beta[1][2];
  const double m = moments.beta[0][1] - moments.beta[1][1];

  const double h[3][6] = {
      {b11 / (th1 * th1), 0.0, -1.0 / th1, 0.0, 0.0, 0.0},
      {0.0, -m / (th2 * th2), 0.0, 1.0 / th2, -1.0 / th2, 0.0},
      {b23 / (th3 * th3), b23 / (th3 * th3), 0.0, 0.0, 0.0, 1.0 / th3},
  };

  Xi xi;
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = i; j < 3; ++j) {
      double sum = 0.0;
      for (std::size_t a = 0; a < 6; ++a) {
        if (h[i][a] == 0.0) continue;
        double inner = 0.0;
        for (std::size_t b = 0; b < 6; ++b) {
          inner += sigma_star.matrix[a][b] * h[j][b];
        }
        sum += h[i][a] * inner;
      }
      xi.matrix[i][j] = sum;
      xi.matrix[j][i] = sum;
    }
  }
  return xi;
}

Matrix3 estimate_knn_covariance(const Dataset& dataset, const Metric& metric,
                                const MomentSet& moments, std::size_t k_bar) {
  if (moments.k == 0) {
    throw validation_error(
        "asymptotic covariance needs moments from a KNN fit (k >= 1)");
  }
  const PluginEstimates plugin = plugin_rho_pi(dataset, metric, k_bar);
  const OmegaSet omegas =
      omega_terms(dataset, plugin.rho_tilde, plugin.pi_tilde, moments.k, moments);
  const Xi xi = xi_scalar(moments, omegas);
  for (std::size_t k = 0; k < 3; ++k) {
    if (xi.matrix[k][k] < 0.0) {
      std::ostringstream msg;
      msg << "variance estimate for component " << (k + 1)
          << " is negative; the plug-ins are unstable here, use the "
             "bootstrap instead";
      throw numerical_error(msg.str());
    }
  }
  const double nd = static_cast<double>(dataset.n());
  Matrix3 out{};
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) {
      out[i][j] = xi.matrix[i][j] / nd;
    }
  }
  return out;
}

EllipsoidSpec confidence_ellipsoid(const TcfEstimate& estimate, double level) {
  if (!(level > 0.0 && level < 1.0)) {
    std::ostringstream msg;
    msg << "confidence level must lie strictly inside (0,1), got " << level;
    throw validation_error(msg.str());
  }
  if (!estimate.covariance.has_value()) {
    throw validation_error(
        "estimate carries no covariance; compute a variance first");
  }
  Eigen::Matrix3d cov;
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) {
      cov(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          (*estimate.covariance)[i][j];
    }
  }
  const Eigen::LLT<Eigen::Matrix3d> llt(cov);
  if (llt.info() != Eigen::Success) {
    throw numerical_error(
        "covariance matrix is singular or indefinite; no ellipsoid exists");
  }
  const Eigen::Matrix3d l = llt.matrixL();
  EllipsoidSpec spec;
  spec.center = estimate.tcf;
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) {
      spec.cholesky[i][j] = l(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
  }
  spec.level = level;
  spec.radius2 = chi_square_quantile(level, 3);
  return spec;
}

}  // namespace rocsurf
