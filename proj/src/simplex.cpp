#include "qpgnn/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace qpgnn {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kDualTol = 1e-9;
constexpr double kPivotTol = 1e-10;

enum class VarState : char { BASIC, AT_LOWER, AT_UPPER, FREE_AT_ZERO };

/// Dense two-phase simplex over Ex = h, lo <= x <= hi. Columns are the
/// structural variables, then row slacks, then one artificial per row.
class Simplex {
 public:
  Simplex(const RowLP& lp, int max_iterations) : max_iter_(max_iterations) {
    const int k = static_cast<int>(lp.rhs.size());
    int slacks = 0;
    for (Sense s : lp.senses)
      if (s != Sense::EQ) ++slacks;
    nv_ = lp.nv;
    cols_ = nv_ + slacks + k;
    art0_ = nv_ + slacks;
    e_ = Eigen::MatrixXd::Zero(k, cols_);
    h_ = Eigen::Map<const Eigen::VectorXd>(lp.rhs.data(), k);
    lo_ = Eigen::VectorXd::Constant(cols_, 0.0);
    hi_ = Eigen::VectorXd::Constant(cols_, 0.0);
    lo_.head(nv_) = lp.lower;
    hi_.head(nv_) = lp.upper;
    cost_ = Eigen::VectorXd::Zero(cols_);
    cost_.head(nv_) = lp.objective;

    for (const Triplet& t : lp.rows) e_(t.row, t.col) = t.value;
    int slack = nv_;
    for (int r = 0; r < k; ++r) {
      if (lp.senses[r] == Sense::LE) {
        e_(r, slack) = 1.0;
        lo_(slack) = 0.0;
        hi_(slack) = kInf;
        ++slack;
      } else if (lp.senses[r] == Sense::GE) {
        e_(r, slack) = 1.0;
        lo_(slack) = -kInf;
        hi_(slack) = 0.0;
        ++slack;
      }
    }

    // Start every structural/slack variable at a finite bound (0 if free),
    // then cover the row residuals with artificial columns.
    x_ = Eigen::VectorXd::Zero(cols_);
    state_.assign(cols_, VarState::AT_LOWER);
    for (int j = 0; j < art0_; ++j) {
      if (std::isfinite(lo_(j))) {
        x_(j) = lo_(j);
        state_[j] = VarState::AT_LOWER;
      } else if (std::isfinite(hi_(j))) {
        x_(j) = hi_(j);
        state_[j] = VarState::AT_UPPER;
      } else {
        x_(j) = 0.0;
        state_[j] = VarState::FREE_AT_ZERO;
      }
    }
    Eigen::VectorXd residual = h_ - e_.leftCols(art0_) * x_.head(art0_);
    basis_.resize(k);
    for (int r = 0; r < k; ++r) {
      const int a = art0_ + r;
      e_(r, a) = residual(r) >= 0.0 ? 1.0 : -1.0;
      lo_(a) = 0.0;
      hi_(a) = kInf;
      x_(a) = std::abs(residual(r));
      state_[a] = VarState::BASIC;
      basis_[r] = a;
    }
  }

  LPResult run() {
    LPResult result;

    // Phase 1: drive the artificial mass to zero.
    Eigen::VectorXd phase1 = Eigen::VectorXd::Zero(cols_);
    phase1.tail(cols_ - art0_).setConstant(1.0);
    if (!iterate(phase1)) {
      result.status = LPStatus::ITERATION_LIMIT;
      return result;
    }
    const double infeasibility = x_.tail(cols_ - art0_).sum();
    result.phase1_infeasibility = infeasibility;
    if (infeasibility > kLpFeasTol) {
      result.status = LPStatus::INFEASIBLE;
      result.x = x_.head(nv_);
      result.row_duals = duals(phase1);
      return result;
    }
    // Artificials are pinned at zero for phase 2.
    for (int j = art0_; j < cols_; ++j) hi_(j) = 0.0;

    const bool finished = iterate(cost_);
    result.x = x_.head(nv_);
    result.objective = cost_.head(nv_).dot(result.x);
    result.row_duals = duals(cost_);
    if (!finished)
      result.status = LPStatus::ITERATION_LIMIT;
    else if (unbounded_)
      result.status = LPStatus::UNBOUNDED;
    else
      result.status = LPStatus::OPTIMAL;
    return result;
  }

 private:
  Eigen::VectorXd duals(const Eigen::VectorXd& g) {
    const int k = static_cast<int>(basis_.size());
    Eigen::MatrixXd basis_matrix(k, k);
    Eigen::VectorXd gb(k);
    for (int r = 0; r < k; ++r) {
      basis_matrix.col(r) = e_.col(basis_[r]);
      gb(r) = g(basis_[r]);
    }
    return basis_matrix.transpose().partialPivLu().solve(gb);
  }

  /// Primal simplex loop for objective g. Returns false on iteration limit.
  bool iterate(const Eigen::VectorXd& g) {
    const int k = static_cast<int>(basis_.size());
    unbounded_ = false;
    for (int iter = 0; iter < max_iter_; ++iter) {
      Eigen::MatrixXd basis_matrix(k, k);
      for (int r = 0; r < k; ++r) basis_matrix.col(r) = e_.col(basis_[r]);
      Eigen::PartialPivLU<Eigen::MatrixXd> lu(basis_matrix);

      // Basic values from the nonbasic assignment.
      Eigen::VectorXd rhs = h_;
      for (int j = 0; j < cols_; ++j)
        if (state_[j] != VarState::BASIC && x_(j) != 0.0) rhs -= e_.col(j) * x_(j);
      Eigen::VectorXd xb = lu.solve(rhs);
      for (int r = 0; r < k; ++r) x_(basis_[r]) = xb(r);

      Eigen::VectorXd gb(k);
      for (int r = 0; r < k; ++r) gb(r) = g(basis_[r]);
      Eigen::VectorXd y = lu.transpose().solve(gb);

      // Bland: entering is the smallest eligible index.
      int enter = -1;
      int dir = 0;
      for (int j = 0; j < cols_; ++j) {
        if (state_[j] == VarState::BASIC) continue;
        if (lo_(j) == hi_(j)) continue;  // fixed
        const double reduced = g(j) - y.dot(e_.col(j));
        if ((state_[j] == VarState::AT_LOWER || state_[j] == VarState::FREE_AT_ZERO) &&
            reduced < -kDualTol) {
          enter = j;
          dir = +1;
          break;
        }
        if ((state_[j] == VarState::AT_UPPER || state_[j] == VarState::FREE_AT_ZERO) &&
            reduced > kDualTol) {
          enter = j;
          dir = -1;
          break;
        }
      }
      if (enter < 0) return true;  // optimal for this phase

      Eigen::VectorXd w = lu.solve(e_.col(enter));

      // Ratio test: x_basic(t) = x_basic - t * dir * w; x_enter moves t * dir.
      double t_max = kInf;
      int leave = -1;       // basis position
      int leave_sign = 0;   // +1: leaving var hits lower, -1: hits upper
      for (int r = 0; r < k; ++r) {
        const double step = dir * w(r);
        const int jb = basis_[r];
        if (step > kPivotTol && std::isfinite(lo_(jb))) {
          const double t = std::max(0.0, (x_(jb) - lo_(jb)) / step);
          if (t < t_max - kPivotTol || (t < t_max + kPivotTol && (leave < 0 || jb < basis_[leave]))) {
            t_max = t;
            leave = r;
            leave_sign = +1;
          }
        } else if (step < -kPivotTol && std::isfinite(hi_(jb))) {
          const double t = std::max(0.0, (hi_(jb) - x_(jb)) / (-step));
          if (t < t_max - kPivotTol || (t < t_max + kPivotTol && (leave < 0 || jb < basis_[leave]))) {
            t_max = t;
            leave = r;
            leave_sign = -1;
          }
        }
      }
      // The entering variable can also be blocked by its opposite bound.
      double t_enter = kInf;
      if (dir > 0 && std::isfinite(hi_(enter))) t_enter = hi_(enter) - x_(enter);
      if (dir < 0 && std::isfinite(lo_(enter))) t_enter = x_(enter) - lo_(enter);

      if (t_enter < t_max) {
        // Bound flip, basis unchanged.
        x_(enter) += dir * t_enter;
        state_[enter] = dir > 0 ? VarState::AT_UPPER : VarState::AT_LOWER;
        continue;
      }
      if (leave < 0) {
        unbounded_ = true;
        x_(enter) += dir;  // expose one step of the improving ray
        return true;
      }

      const int jb = basis_[leave];
      x_(enter) += dir * t_max;
      for (int r = 0; r < k; ++r) x_(basis_[r]) -= t_max * dir * w(r);
      x_(jb) = leave_sign > 0 ? lo_(jb) : hi_(jb);
      state_[jb] = leave_sign > 0 ? VarState::AT_LOWER : VarState::AT_UPPER;
      state_[enter] = VarState::BASIC;
      basis_[leave] = enter;
    }
    return false;
  }

  int nv_ = 0;
  int cols_ = 0;
  int art0_ = 0;
  int max_iter_ = 0;
  bool unbounded_ = false;
  Eigen::MatrixXd e_;
  Eigen::VectorXd h_, lo_, hi_, cost_, x_;
  std::vector<VarState> state_;
  std::vector<int> basis_;
};

}  // namespace

LPResult solve_lp(const RowLP& lp, int max_iterations) {
  if (lp.rhs.size() != lp.senses.size()) throw std::invalid_argument("rhs/senses size mismatch");
  if (lp.objective.size() != lp.nv || lp.lower.size() != lp.nv || lp.upper.size() != lp.nv)
    throw std::invalid_argument("objective/bounds size mismatch");
  for (const Triplet& t : lp.rows)
    if (t.row < 0 || t.row >= static_cast<int>(lp.rhs.size()) || t.col < 0 || t.col >= lp.nv)
      throw std::invalid_argument("row triplet out of range");

  if (lp.rhs.empty()) {
    // Pure box problem; solve coordinate-wise.
    LPResult result;
    result.x = Eigen::VectorXd::Zero(lp.nv);
    result.row_duals = Eigen::VectorXd::Zero(0);
    result.status = LPStatus::OPTIMAL;
    for (int j = 0; j < lp.nv; ++j) {
      const double gj = lp.objective(j);
      if (lp.lower(j) > lp.upper(j)) {
        result.status = LPStatus::INFEASIBLE;
        result.phase1_infeasibility = lp.lower(j) - lp.upper(j);
        return result;
      }
      if (gj > 0.0) {
        if (!std::isfinite(lp.lower(j))) {
          result.status = LPStatus::UNBOUNDED;
          result.x(j) = -1.0;
          continue;
        }
        result.x(j) = lp.lower(j);
      } else if (gj < 0.0) {
        if (!std::isfinite(lp.upper(j))) {
          result.status = LPStatus::UNBOUNDED;
          result.x(j) = 1.0;
          continue;
        }
        result.x(j) = lp.upper(j);
      } else {
        result.x(j) = std::isfinite(lp.lower(j)) ? lp.lower(j)
                      : std::isfinite(lp.upper(j)) ? lp.upper(j)
                                                   : 0.0;
      }
    }
    if (result.status == LPStatus::OPTIMAL) result.objective = lp.objective.dot(result.x);
    return result;
  }

  Simplex simplex(lp, max_iterations);
  return simplex.run();
}

}  // namespace qpgnn
