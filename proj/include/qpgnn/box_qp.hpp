#pragma once

#include <Eigen/Dense>

namespace qpgnn {

/// Convex QP in box-row form:
///   min 1/2 x^T P x + q^T x   s.t.  zlo <= M x <= zhi,
/// rows with zlo == zhi are equalities, infinite entries drop one side.
/// P must be symmetric positive semidefinite.
struct BoxQP {
  Eigen::MatrixXd p;
  Eigen::VectorXd q;
  Eigen::MatrixXd m;
  Eigen::VectorXd zlo;
  Eigen::VectorXd zhi;
};

struct BoxQPSettings {
  int max_iterations = 200000;
  double eps_abs = 1e-9;
  double eps_rel = 1e-9;
  double comp_tol = 1e-9;   // duality-gap (complementarity) stop
  double sigma = 1e-6;
  double alpha = 1.6;       // over-relaxation
  double rho0 = 0.1;
  bool polish = true;
};

struct BoxQPResult {
  bool converged = false;
  Eigen::VectorXd x;
  Eigen::VectorXd y;  // row multipliers: <= 0 on lower-active, >= 0 on upper-active
  Eigen::VectorXd z;  // projected row values
  double kkt_residual = 0.0;
  int iterations = 0;
  bool polished = false;
};

/// Max of stationarity, primal feasibility, complementarity, and dual-sign
/// residuals at (x, y), all in the infinity norm.
double kkt_residual(const BoxQP& qp, const Eigen::VectorXd& x, const Eigen::VectorXd& y);

/// ADMM (operator-splitting) iteration with over-relaxation and adaptive
/// step scaling, finished by an active-set polish solve.
BoxQPResult solve_box_qp(const BoxQP& qp, const BoxQPSettings& settings = {});

}  // namespace qpgnn
