#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "qpgnn/instance.hpp"

namespace qpgnn {

enum class SolveStatus { INFEASIBLE, UNBOUNDED, OPTIMAL };

const char* status_name(SolveStatus status);

/// Tolerances used by the continuous solver.
inline constexpr double kFeasTol = 1e-7;  // primal feasibility
inline constexpr double kKktTol = 1e-6;   // accepted KKT residual

struct SolveResult {
  SolveStatus status = SolveStatus::OPTIMAL;
  std::optional<double> value;                 // present iff OPTIMAL
  std::optional<std::vector<double>> x_star;   // minimum-norm optimum (LCQP)
  double kkt_residual = 0.0;
  /// UNBOUNDED: an improving recession direction; INFEASIBLE: phase-1 row duals.
  std::optional<std::vector<double>> certificate;
  /// Row multipliers (A rows then bound rows) backing kkt_residual, OPTIMAL only.
  std::optional<std::vector<double>> duals;
};

/// Targets of Definition-style labels: feasibility bit, optimal value in
/// R u {+-inf} (+inf infeasible, -inf unbounded), and the solution when finite.
struct TargetLabels {
  int feas = 0;
  double obj = 0.0;
  std::optional<std::vector<double>> sol;
};

/// Thrown when an iteration limit is hit without a trustworthy verdict.
class SolverIterationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Thrown when the mixed-integer search exhausts its node budget: an
/// explicit INCOMPLETE outcome, never mapped onto a status.
class SolveBudgetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct LCQPSolveOptions {
  bool min_norm = true;  // run the second stage selecting the min-norm optimum
  int max_admm_iterations = 200000;
};

/// Feasibility by LP phase 1; unboundedness by a recession-cone LP restricted
/// to the null space of Q; otherwise the two-stage optimal solve returning
/// the unique minimum-l2-norm optimum.
SolveResult solve_lcqp(const LCQPInstance& instance, const LCQPSolveOptions& options = {});

struct MISolveOptions {
  long node_budget = 500000;
  double integrality_tol = 1e-7;
  /// Candidates within this of the incumbent value enter the norm/lex tie-break.
  double tie_tol = 1e-9;
};

/// Exact branch-and-bound over the integer variables on top of solve_lcqp
/// relaxations; ties among optimal solutions are broken by smallest l2-norm,
/// then lexicographically.
SolveResult solve_milcqp(const MILCQPInstance& instance, const MISolveOptions& options = {});

inline constexpr long kBruteForceCap = 1000000;

/// Independent reference: enumerates every integer assignment (product of
/// ranges capped at 10^6) and solves the continuous QP in the rest.
SolveResult brute_force_milcqp(const MILCQPInstance& instance);

TargetLabels evaluate_targets(const LCQPInstance& instance);
TargetLabels evaluate_targets(const MILCQPInstance& instance);

/// KKT residual of (x, duals) for the instance (duals: m A-rows then n bounds).
double instance_kkt_residual(const LCQPInstance& instance, const std::vector<double>& x,
                             const std::vector<double>& duals);

}  // namespace qpgnn
