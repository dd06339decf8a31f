#include "qpgnn/box_qp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace qpgnn {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double inf_norm(const Eigen::VectorXd& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

Eigen::VectorXd clamp_rows(const Eigen::VectorXd& v, const Eigen::VectorXd& lo,
                           const Eigen::VectorXd& hi) {
  return v.cwiseMax(lo).cwiseMin(hi);
}

struct Residuals {
  double prim = 0.0;
  double dual = 0.0;
  double comp = 0.0;
};

Residuals residuals_at(const BoxQP& qp, const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  Residuals r;
  const Eigen::VectorXd mx = qp.m * x;
  for (int i = 0; i < mx.size(); ++i) {
    double below = qp.zlo(i) - mx(i);
    double above = mx(i) - qp.zhi(i);
    r.prim = std::max({r.prim, below, above});
    if (y(i) > 0.0) {
      // Upper side pressed: either complementary slack or a sign violation.
      r.comp = std::max(r.comp, std::isfinite(qp.zhi(i)) ? y(i) * std::abs(mx(i) - qp.zhi(i))
                                                         : y(i));
    } else if (y(i) < 0.0) {
      r.comp = std::max(r.comp, std::isfinite(qp.zlo(i)) ? -y(i) * std::abs(mx(i) - qp.zlo(i))
                                                         : -y(i));
    }
  }
  r.prim = std::max(r.prim, 0.0);
  r.dual = inf_norm(qp.p * x + qp.q + qp.m.transpose() * y);
  return r;
}

/// Active-set polish: re-solves the equality-constrained QP suggested by the
/// multiplier signs and slacks, with light regularization plus refinement.
bool try_polish(const BoxQP& qp, BoxQPResult& result) {
  const int n = static_cast<int>(qp.q.size());
  const int k = static_cast<int>(qp.zlo.size());
  const double eps_active = 1e-7;

  std::vector<int> rows;
  std::vector<double> rhs;
  std::vector<int> side;  // -1 lower, +1 upper, 0 equality
  for (int i = 0; i < k; ++i) {
    const bool equality = qp.zlo(i) == qp.zhi(i);
    if (equality) {
      rows.push_back(i);
      rhs.push_back(qp.zlo(i));
      side.push_back(0);
      continue;
    }
    const double slack_lo = std::isfinite(qp.zlo(i)) ? result.z(i) - qp.zlo(i) : kInf;
    const double slack_hi = std::isfinite(qp.zhi(i)) ? qp.zhi(i) - result.z(i) : kInf;
    const bool lower = result.y(i) < -eps_active || slack_lo <= eps_active;
    const bool upper = result.y(i) > eps_active || slack_hi <= eps_active;
    if (lower && (!upper || slack_lo <= slack_hi)) {
      rows.push_back(i);
      rhs.push_back(qp.zlo(i));
      side.push_back(-1);
    } else if (upper) {
      rows.push_back(i);
      rhs.push_back(qp.zhi(i));
      side.push_back(+1);
    }
  }

  const int a = static_cast<int>(rows.size());
  Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(n + a, n + a);
  const double delta = 1e-10;
  kkt.topLeftCorner(n, n) = qp.p + delta * Eigen::MatrixXd::Identity(n, n);
  for (int r = 0; r < a; ++r) {
    kkt.block(n + r, 0, 1, n) = qp.m.row(rows[r]);
    kkt.block(0, n + r, n, 1) = qp.m.row(rows[r]).transpose();
    kkt(n + r, n + r) = -delta;
  }
  Eigen::VectorXd full_rhs(n + a);
  full_rhs.head(n) = -qp.q;
  for (int r = 0; r < a; ++r) full_rhs(n + r) = rhs[r];

  Eigen::PartialPivLU<Eigen::MatrixXd> lu(kkt);
  Eigen::VectorXd sol = lu.solve(full_rhs);
  // Refine against the unregularized system.
  for (int step = 0; step < 3; ++step) {
    Eigen::VectorXd residual = full_rhs;
    residual.head(n) -= qp.p * sol.head(n);
    for (int r = 0; r < a; ++r) {
      residual.head(n) -= qp.m.row(rows[r]).transpose() * sol(n + r);
      residual(n + r) -= qp.m.row(rows[r]).dot(sol.head(n));
    }
    sol += lu.solve(residual);
  }

  Eigen::VectorXd x = sol.head(n);
  Eigen::VectorXd y = Eigen::VectorXd::Zero(k);
  for (int r = 0; r < a; ++r) y(rows[r]) = sol(n + r);

  const double polished_kkt = kkt_residual(qp, x, y);
  if (polished_kkt < result.kkt_residual) {
    result.x = x;
    result.y = y;
    result.z = clamp_rows(qp.m * x, qp.zlo, qp.zhi);
    result.kkt_residual = polished_kkt;
    result.polished = true;
    return true;
  }
  return false;
}

}  // namespace

double kkt_residual(const BoxQP& qp, const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  const Residuals r = residuals_at(qp, x, y);
  return std::max({r.prim, r.dual, r.comp});
}

BoxQPResult solve_box_qp(const BoxQP& qp, const BoxQPSettings& settings) {
  const int n = static_cast<int>(qp.q.size());
  const int k = static_cast<int>(qp.zlo.size());

  // Equality rows take a stiffer step scale, as usual for splitting methods.
  Eigen::VectorXd rho(k);
  for (int i = 0; i < k; ++i)
    rho(i) = qp.zlo(i) == qp.zhi(i) ? 1e3 * settings.rho0 : settings.rho0;

  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd z = clamp_rows(Eigen::VectorXd::Zero(k), qp.zlo, qp.zhi);
  Eigen::VectorXd y = Eigen::VectorXd::Zero(k);

  auto factorize = [&](const Eigen::VectorXd& rho_now) {
    Eigen::MatrixXd kmat = qp.p + settings.sigma * Eigen::MatrixXd::Identity(n, n) +
                           qp.m.transpose() * rho_now.asDiagonal() * qp.m;
    return Eigen::LLT<Eigen::MatrixXd>(kmat);
  };
  Eigen::LLT<Eigen::MatrixXd> llt = factorize(rho);

  BoxQPResult result;
  const int check_every = 25;
  for (int iter = 1; iter <= settings.max_iterations; ++iter) {
    const Eigen::VectorXd x_tilde =
        llt.solve(settings.sigma * x - qp.q + qp.m.transpose() * (rho.cwiseProduct(z) - y));
    const Eigen::VectorXd z_tilde = qp.m * x_tilde;
    const Eigen::VectorXd x_next = settings.alpha * x_tilde + (1.0 - settings.alpha) * x;
    const Eigen::VectorXd z_relaxed = settings.alpha * z_tilde + (1.0 - settings.alpha) * z +
                                      y.cwiseQuotient(rho);
    const Eigen::VectorXd z_next = clamp_rows(z_relaxed, qp.zlo, qp.zhi);
    y = rho.cwiseProduct(z_relaxed - z_next);
    x = x_next;
    z = z_next;

    if (iter % check_every != 0 && iter != settings.max_iterations) continue;

    const Eigen::VectorXd mx = qp.m * x;
    const double prim = inf_norm(mx - z);
    const double dual = inf_norm(qp.p * x + qp.q + qp.m.transpose() * y);
    const double prim_scale = std::max({inf_norm(mx), inf_norm(z), 1.0});
    const double dual_scale =
        std::max({inf_norm(qp.p * x), inf_norm(qp.q), inf_norm(qp.m.transpose() * y), 1.0});

    if (prim <= settings.eps_abs + settings.eps_rel * prim_scale &&
        dual <= settings.eps_abs + settings.eps_rel * dual_scale) {
      const Residuals r = residuals_at(qp, x, y);
      if (r.comp <= settings.comp_tol * std::max(1.0, std::abs(qp.q.dot(x)))) {
        result.converged = true;
        result.iterations = iter;
        break;
      }
    }

    // Rebalance the step scale when the residuals drift apart.
    if (iter % (check_every * 40) == 0) {
      const double ratio = (prim / prim_scale) / std::max(dual / dual_scale, 1e-16);
      const double factor = std::sqrt(ratio);
      if (factor > 5.0 || factor < 0.2) {
        const double clamped = std::clamp(factor, 1e-3, 1e3);
        rho *= clamped;
        for (int i = 0; i < k; ++i) rho(i) = std::clamp(rho(i), 1e-6, 1e7);
        llt = factorize(rho);
      }
    }
    result.iterations = iter;
  }

  result.x = x;
  result.y = y;
  result.z = clamp_rows(qp.m * x, qp.zlo, qp.zhi);
  result.kkt_residual = kkt_residual(qp, x, y);
  if (settings.polish) try_polish(qp, result);
  // A successful polish can rescue an unconverged run.
  if (!result.converged && result.kkt_residual <= settings.eps_abs * 10) result.converged = true;
  return result;
}

}  // namespace qpgnn
