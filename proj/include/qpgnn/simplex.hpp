#pragma once

#include <Eigen/Dense>

#include <vector>

#include "qpgnn/types.hpp"

namespace qpgnn {

enum class LPStatus { OPTIMAL, INFEASIBLE, UNBOUNDED, ITERATION_LIMIT };

struct LPResult {
  LPStatus status = LPStatus::ITERATION_LIMIT;
  Eigen::VectorXd x;       // structural variables
  double objective = 0.0;  // g^T x at termination (phase-2 objective)
  Eigen::VectorXd row_duals;
  double phase1_infeasibility = 0.0;  // residual left by phase 1
};

/// LP over rows:  min g^T x  s.t.  a_r^T x (sense_r) b_r,  lo <= x <= hi,
/// with +-inf bounds allowed. Solved by a dense bounded-variable two-phase
/// primal simplex with Bland's rule (deterministic, cycle-free).
struct RowLP {
  int nv = 0;
  std::vector<Triplet> rows;  // (r, j, coefficient)
  std::vector<double> rhs;
  std::vector<Sense> senses;
  Eigen::VectorXd objective;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
};

LPResult solve_lp(const RowLP& lp, int max_iterations = 50000);

/// Feasibility tolerance accepted by phase 1 (absolute, on row residuals).
inline constexpr double kLpFeasTol = 1e-7;

}  // namespace qpgnn
