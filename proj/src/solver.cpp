#include "qpgnn/solver.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>

#include "qpgnn/box_qp.hpp"
#include "qpgnn/simplex.hpp"

namespace qpgnn {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNullspaceTol = 1e-9;
constexpr double kUnboundedTol = 1e-8;

Eigen::VectorXd to_eigen(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::vector<double> to_std(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

void require_valid(const ValidationReport& report) {
  if (!report.ok)
    throw std::invalid_argument("instance does not validate: " + report.violations.front().first);
}

/// Rows of the box-form problem: the m A-rows, then the n bound rows.
BoxQP to_box_qp(const LCQPInstance& inst) {
  BoxQP qp;
  qp.p = Eigen::MatrixXd::Zero(inst.n, inst.n);
  for (const Triplet& t : inst.q) qp.p(t.row, t.col) = t.value;
  qp.q = to_eigen(inst.c);
  qp.m = Eigen::MatrixXd::Zero(inst.m + inst.n, inst.n);
  qp.zlo.resize(inst.m + inst.n);
  qp.zhi.resize(inst.m + inst.n);
  for (const Triplet& t : inst.a) qp.m(t.row, t.col) = t.value;
  for (int i = 0; i < inst.m; ++i) {
    switch (inst.senses[i]) {
      case Sense::LE:
        qp.zlo(i) = -kInf;
        qp.zhi(i) = inst.b[i];
        break;
      case Sense::GE:
        qp.zlo(i) = inst.b[i];
        qp.zhi(i) = kInf;
        break;
      case Sense::EQ:
        qp.zlo(i) = inst.b[i];
        qp.zhi(i) = inst.b[i];
        break;
    }
  }
  for (int j = 0; j < inst.n; ++j) {
    qp.m(inst.m + j, j) = 1.0;
    qp.zlo(inst.m + j) = inst.lower[j];
    qp.zhi(inst.m + j) = inst.upper[j];
  }
  return qp;
}

LPResult phase1_feasibility(const LCQPInstance& inst) {
  RowLP lp;
  lp.nv = inst.n;
  lp.rows = inst.a;
  lp.rhs = inst.b;
  lp.senses = inst.senses;
  lp.objective = Eigen::VectorXd::Zero(inst.n);
  lp.lower = to_eigen(inst.lower);
  lp.upper = to_eigen(inst.upper);
  return solve_lp(lp);
}

struct Spectrum {
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXd eigenvectors;
  int rank = 0;
};

Spectrum spectrum_of(const Eigen::MatrixXd& p) {
  Spectrum s;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(p);
  s.eigenvalues = eig.eigenvalues();
  s.eigenvectors = eig.eigenvectors();
  const double scale = std::max(1.0, s.eigenvalues.size() ? s.eigenvalues.cwiseAbs().maxCoeff() : 0.0);
  for (int i = 0; i < s.eigenvalues.size(); ++i)
    if (s.eigenvalues(i) > kNullspaceTol * scale) ++s.rank;
  return s;
}

/// Range-space rows of Q: Qx = Qx0 iff V_+^T x = V_+^T x0.
Eigen::MatrixXd range_rows(const Spectrum& s) {
  const int n = static_cast<int>(s.eigenvalues.size());
  Eigen::MatrixXd rows(s.rank, n);
  int r = 0;
  const double scale = std::max(1.0, n ? s.eigenvalues.cwiseAbs().maxCoeff() : 0.0);
  for (int i = 0; i < n; ++i)
    if (s.eigenvalues(i) > kNullspaceTol * scale) rows.row(r++) = s.eigenvectors.col(i).transpose();
  return rows;
}

/// LP over the recession cone intersected with null(Q), minimizing c^T d with
/// box normalization. Returns an improving direction when one exists.
std::optional<std::vector<double>> find_unbounded_direction(const LCQPInstance& inst,
                                                            const Spectrum& spec) {
  bool any_ray_dim = false;
  for (int j = 0; j < inst.n; ++j)
    if (!(std::isfinite(inst.lower[j]) && std::isfinite(inst.upper[j]))) {
      any_ray_dim = true;
      break;
    }
  if (!any_ray_dim) return std::nullopt;  // compact feasible set

  RowLP lp;
  lp.nv = inst.n;
  lp.rows = inst.a;
  const Eigen::MatrixXd qrows = range_rows(spec);
  for (int r = 0; r < qrows.rows(); ++r)
    for (int j = 0; j < inst.n; ++j)
      if (qrows(r, j) != 0.0) lp.rows.push_back({inst.m + r, j, qrows(r, j)});
  lp.rhs.assign(inst.m + qrows.rows(), 0.0);
  lp.senses = inst.senses;
  lp.senses.insert(lp.senses.end(), qrows.rows(), Sense::EQ);
  lp.objective = to_eigen(inst.c);
  lp.lower.resize(inst.n);
  lp.upper.resize(inst.n);
  for (int j = 0; j < inst.n; ++j) {
    const bool lo_fin = std::isfinite(inst.lower[j]);
    const bool hi_fin = std::isfinite(inst.upper[j]);
    lp.lower(j) = lo_fin ? 0.0 : -1.0;
    lp.upper(j) = hi_fin ? 0.0 : 1.0;
  }
  LPResult lpr = solve_lp(lp);
  if (lpr.status == LPStatus::ITERATION_LIMIT)
    throw SolverIterationError("recession LP hit its iteration limit");
  const double scale = std::max(1.0, lp.objective.cwiseAbs().maxCoeff());
  if (lpr.status == LPStatus::OPTIMAL && lpr.objective < -kUnboundedTol * scale)
    return to_std(lpr.x);
  return std::nullopt;
}

BoxQPResult run_stage(const BoxQP& qp, int max_iter, const char* what) {
  BoxQPSettings settings;
  settings.max_iterations = max_iter;
  BoxQPResult r = solve_box_qp(qp, settings);
  if (r.kkt_residual > kKktTol) {
    // One stiffer retry before giving up.
    settings.rho0 = 10.0;
    settings.max_iterations = 2 * max_iter;
    r = solve_box_qp(qp, settings);
  }
  if (r.kkt_residual > kKktTol)
    throw SolverIterationError(std::string(what) + ": iteration limit exceeded (residual " +
                               std::to_string(r.kkt_residual) + ")");
  return r;
}

double norm2sq(const std::vector<double>& x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return s;
}

/// Tie-break order for mixed-integer optima: value, then l2-norm, then lex.
bool candidate_better(double value_a, const std::vector<double>& xa, double value_b,
                      const std::vector<double>& xb, double tie_tol) {
  if (value_a < value_b - tie_tol) return true;
  if (value_a > value_b + tie_tol) return false;
  const double na = norm2sq(xa), nb = norm2sq(xb);
  if (na < nb - tie_tol) return true;
  if (na > nb + tie_tol) return false;
  for (std::size_t j = 0; j < xa.size(); ++j) {
    if (std::abs(xa[j] - xb[j]) <= 1e-9) continue;
    return xa[j] < xb[j];
  }
  return false;
}

}  // namespace

const char* status_name(SolveStatus status) {
  switch (status) {
    case SolveStatus::INFEASIBLE: return "INFEASIBLE";
    case SolveStatus::UNBOUNDED: return "UNBOUNDED";
    case SolveStatus::OPTIMAL: return "OPTIMAL";
  }
  throw std::logic_error("invalid status");
}

double instance_kkt_residual(const LCQPInstance& instance, const std::vector<double>& x,
                             const std::vector<double>& duals) {
  return kkt_residual(to_box_qp(instance), to_eigen(x), to_eigen(duals));
}

SolveResult solve_lcqp(const LCQPInstance& inst, const LCQPSolveOptions& options) {
  require_valid(validate(inst));
  SolveResult result;

  // Fully fixed instances reduce to a feasibility check.
  bool all_fixed = true;
  for (int j = 0; j < inst.n && all_fixed; ++j)
    all_fixed = std::isfinite(inst.lower[j]) && inst.lower[j] == inst.upper[j];
  if (all_fixed) {
    const std::vector<double>& x = inst.lower;
    const double violation = feasibility_violation(inst, x);
    if (violation > kFeasTol) {
      result.status = SolveStatus::INFEASIBLE;
      return result;
    }
    result.status = SolveStatus::OPTIMAL;
    result.value = objective_value(inst, x);
    result.x_star = x;
    std::vector<double> duals(inst.m + inst.n, 0.0);
    Eigen::VectorXd grad = to_box_qp(inst).p * to_eigen(x) + to_eigen(inst.c);
    for (int j = 0; j < inst.n; ++j) duals[inst.m + j] = -grad(j);
    result.duals = duals;
    result.kkt_residual = instance_kkt_residual(inst, x, duals);
    return result;
  }

  LPResult feas = phase1_feasibility(inst);
  if (feas.status == LPStatus::ITERATION_LIMIT)
    throw SolverIterationError("phase-1 simplex hit its iteration limit");
  if (feas.status == LPStatus::INFEASIBLE) {
    result.status = SolveStatus::INFEASIBLE;
    result.certificate = to_std(feas.row_duals);
    return result;
  }

  BoxQP qp = to_box_qp(inst);
  const Spectrum spec = spectrum_of(qp.p);

  if (auto ray = find_unbounded_direction(inst, spec)) {
    result.status = SolveStatus::UNBOUNDED;
    result.certificate = std::move(*ray);
    return result;
  }

  const BoxQPResult stage1 = run_stage(qp, options.max_admm_iterations, "stage-1 solve");

  Eigen::VectorXd x_star = stage1.x;
  if (options.min_norm && spec.rank < inst.n) {
    // The optimal set is {x in X : Qx = Q xbar, c^T x = c^T xbar}; minimizing
    // ||x||^2 over it is strictly convex, so the stage-2 optimum is unique.
    BoxQP stage2;
    stage2.p = Eigen::MatrixXd::Identity(inst.n, inst.n);
    stage2.q = Eigen::VectorXd::Zero(inst.n);
    const Eigen::MatrixXd qrows = range_rows(spec);
    const int extra = static_cast<int>(qrows.rows()) + 1;
    stage2.m.resize(qp.m.rows() + extra, inst.n);
    stage2.m.topRows(qp.m.rows()) = qp.m;
    stage2.m.middleRows(qp.m.rows(), qrows.rows()) = qrows;
    stage2.m.bottomRows(1) = qp.q.transpose();
    stage2.zlo.resize(qp.zlo.size() + extra);
    stage2.zhi.resize(qp.zhi.size() + extra);
    stage2.zlo.head(qp.zlo.size()) = qp.zlo;
    stage2.zhi.head(qp.zhi.size()) = qp.zhi;
    stage2.zlo.segment(qp.zlo.size(), qrows.rows()) = qrows * stage1.x;
    stage2.zhi.segment(qp.zhi.size(), qrows.rows()) = qrows * stage1.x;
    stage2.zlo(stage2.zlo.size() - 1) = qp.q.dot(stage1.x);
    stage2.zhi(stage2.zhi.size() - 1) = qp.q.dot(stage1.x);
    x_star = run_stage(stage2, options.max_admm_iterations, "minimum-norm stage").x;
  }

  result.status = SolveStatus::OPTIMAL;
  result.x_star = to_std(x_star);
  result.value = objective_value(inst, *result.x_star);
  result.duals = to_std(stage1.y);
  // Optimal duals pair with every optimal primal, so stage-1 multipliers
  // certify the stage-2 point as well.
  result.kkt_residual = kkt_residual(qp, x_star, stage1.y);
  if (result.kkt_residual > kKktTol)
    throw SolverIterationError("combined KKT residual above tolerance: " +
                               std::to_string(result.kkt_residual));
  return result;
}

namespace {

struct BnBNode {
  std::vector<double> lower, upper;
};

class BranchAndBound {
 public:
  BranchAndBound(const MILCQPInstance& mi, const MISolveOptions& options)
      : mi_(mi), options_(options) {}

  SolveResult run() {
    SolveResult out;
    std::vector<BnBNode> stack;
    stack.push_back({mi_.base.lower, mi_.base.upper});

    while (!stack.empty()) {
      BnBNode node = std::move(stack.back());
      stack.pop_back();
      if (process(node, stack, out)) return out;  // unbounded verdict
    }

    if (!incumbent_) {
      out.status = SolveStatus::INFEASIBLE;
      return out;
    }
    out = std::move(*incumbent_);
    return out;
  }

 private:
  LCQPInstance with_bounds(const BnBNode& node) const {
    LCQPInstance inst = mi_.base;
    inst.lower = node.lower;
    inst.upper = node.upper;
    return inst;
  }

  SolveResult relax(const BnBNode& node, bool min_norm) {
    if (++nodes_ > options_.node_budget)
      throw SolveBudgetError("node budget exhausted: INCOMPLETE after " +
                             std::to_string(nodes_ - 1) + " relaxations");
    LCQPSolveOptions opt;
    opt.min_norm = min_norm;
    return solve_lcqp(with_bounds(node), opt);
  }

  /// Returns true when the search can stop with a global verdict in `out`.
  bool process(const BnBNode& node, std::vector<BnBNode>& stack, SolveResult& out) {
    SolveResult rel;
    try {
      rel = relax(node, /*min_norm=*/false);
    } catch (const SolveBudgetError&) {
      throw;
    }
    if (rel.status == SolveStatus::INFEASIBLE) return false;

    if (rel.status == SolveStatus::UNBOUNDED) {
      const std::vector<double>& ray = *rel.certificate;
      for (int j : mi_.integer_set)
        if (std::abs(ray[j]) > 1e-9)
          throw SolveBudgetError(
              "unbounded relaxation moves an unbounded integer variable; not decidable at this scale");
      if (subtree_has_integer_point(node)) {
        out.status = SolveStatus::UNBOUNDED;
        out.certificate = ray;
        return true;
      }
      return false;
    }

    const std::vector<double>& x = *rel.x_star;
    if (incumbent_ && *rel.value > *incumbent_->value + options_.tie_tol) return false;

    const int frac = most_fractional(x);
    if (frac >= 0) {
      branch_binary(node, frac, x[frac], stack);
      return false;
    }

    // Integral relaxation: take the rounded assignment as a candidate, then
    // keep enumerating the node so equal-value assignments join the tie-break.
    offer_candidate(node, x);
    const int unfixed = first_unfixed_integer(node);
    if (unfixed >= 0) branch_ternary(node, unfixed, std::round(x[unfixed]), stack);
    return false;
  }

  int most_fractional(const std::vector<double>& x) const {
    int best = -1;
    double best_score = options_.integrality_tol;
    for (int j : mi_.integer_set) {
      const double frac = std::abs(x[j] - std::round(x[j]));
      if (frac > best_score) {
        best_score = frac;
        best = j;
      }
    }
    return best;
  }

  int first_unfixed_integer(const BnBNode& node) const {
    for (int j : mi_.integer_set)
      if (node.lower[j] < node.upper[j]) return j;
    return -1;
  }

  void branch_binary(const BnBNode& node, int j, double v, std::vector<BnBNode>& stack) {
    BnBNode up = node;
    up.lower[j] = std::ceil(v);
    if (up.lower[j] <= up.upper[j]) stack.push_back(std::move(up));
    BnBNode down = node;
    down.upper[j] = std::floor(v);
    if (down.lower[j] <= down.upper[j]) stack.push_back(std::move(down));
  }

  void branch_ternary(const BnBNode& node, int j, double v, std::vector<BnBNode>& stack) {
    BnBNode above = node;
    above.lower[j] = v + 1.0;
    if (above.lower[j] <= above.upper[j]) stack.push_back(std::move(above));
    BnBNode below = node;
    below.upper[j] = v - 1.0;
    if (below.lower[j] <= below.upper[j]) stack.push_back(std::move(below));
    BnBNode fixed = node;
    fixed.lower[j] = v;
    fixed.upper[j] = v;
    stack.push_back(std::move(fixed));
  }

  void offer_candidate(const BnBNode& node, const std::vector<double>& x) {
    BnBNode fixed = node;
    for (int j : mi_.integer_set) {
      const double v = std::round(x[j]);
      fixed.lower[j] = v;
      fixed.upper[j] = v;
    }
    SolveResult solved;
    try {
      solved = relax(fixed, /*min_norm=*/true);
    } catch (const SolveBudgetError&) {
      throw;
    }
    if (solved.status != SolveStatus::OPTIMAL) return;  // rounding fell off the node
    if (!incumbent_ || candidate_better(*solved.value, *solved.x_star, *incumbent_->value,
                                        *incumbent_->x_star, options_.tie_tol))
      incumbent_ = std::move(solved);
  }

  /// Feasibility-only search below `node` (used under unbounded relaxations).
  bool subtree_has_integer_point(const BnBNode& root) {
    std::vector<BnBNode> stack{root};
    while (!stack.empty()) {
      BnBNode node = std::move(stack.back());
      stack.pop_back();
      LCQPInstance feas = with_bounds(node);
      feas.q.clear();
      std::fill(feas.c.begin(), feas.c.end(), 0.0);
      if (++nodes_ > options_.node_budget)
        throw SolveBudgetError("node budget exhausted during feasibility search: INCOMPLETE");
      const SolveResult r = solve_lcqp(feas);
      if (r.status != SolveStatus::OPTIMAL) continue;
      const int frac = most_fractional(*r.x_star);
      if (frac < 0) return true;
      branch_binary(node, frac, (*r.x_star)[frac], stack);
    }
    return false;
  }

  const MILCQPInstance& mi_;
  MISolveOptions options_;
  long nodes_ = 0;
  std::optional<SolveResult> incumbent_;
};

}  // namespace

SolveResult solve_milcqp(const MILCQPInstance& instance, const MISolveOptions& options) {
  require_valid(validate(instance));
  if (instance.integer_set.empty()) return solve_lcqp(instance.base);
  BranchAndBound search(instance, options);
  return search.run();
}

SolveResult brute_force_milcqp(const MILCQPInstance& instance) {
  require_valid(validate(instance));
  const LCQPInstance& base = instance.base;
  if (instance.integer_set.empty()) return solve_lcqp(base);

  std::vector<long> lo, hi;
  long combinations = 1;
  for (int j : instance.integer_set) {
    const double l = base.lower[j], u = base.upper[j];
    if (!std::isfinite(l) || !std::isfinite(u))
      throw std::invalid_argument("brute force needs finite integer bounds");
    const long lo_int = static_cast<long>(std::ceil(l - 1e-9));
    const long hi_int = static_cast<long>(std::floor(u + 1e-9));
    if (lo_int > hi_int) {
      SolveResult out;
      out.status = SolveStatus::INFEASIBLE;
      return out;
    }
    lo.push_back(lo_int);
    hi.push_back(hi_int);
    combinations *= hi_int - lo_int + 1;
    if (combinations > kBruteForceCap)
      throw std::invalid_argument("enumeration bound exceeded (over 10^6 assignments)");
  }

  const bool pure_integer = static_cast<int>(instance.integer_set.size()) == base.n;
  std::optional<SolveResult> best;
  std::vector<long> odo = lo;
  bool done = false;
  while (!done) {
    LCQPInstance fixed = base;
    for (std::size_t k = 0; k < odo.size(); ++k) {
      fixed.lower[instance.integer_set[k]] = static_cast<double>(odo[k]);
      fixed.upper[instance.integer_set[k]] = static_cast<double>(odo[k]);
    }
    SolveResult solved;
    if (pure_integer) {
      // Every variable pinned: plain feasibility check, no inner solve.
      if (feasibility_violation(fixed, fixed.lower) <= kFeasTol) {
        solved.status = SolveStatus::OPTIMAL;
        solved.value = objective_value(fixed, fixed.lower);
        solved.x_star = fixed.lower;
      } else {
        solved.status = SolveStatus::INFEASIBLE;
      }
    } else {
      solved = solve_lcqp(fixed);
    }
    if (solved.status == SolveStatus::UNBOUNDED) return solved;
    if (solved.status == SolveStatus::OPTIMAL &&
        (!best || candidate_better(*solved.value, *solved.x_star, *best->value, *best->x_star,
                                   1e-9)))
      best = std::move(solved);

    for (std::size_t k = 0;; ++k) {
      if (k == odo.size()) {
        done = true;
        break;
      }
      if (++odo[k] <= hi[k]) break;
      odo[k] = lo[k];
    }
  }
  if (!best) {
    SolveResult out;
    out.status = SolveStatus::INFEASIBLE;
    return out;
  }
  return *best;
}

TargetLabels evaluate_targets(const LCQPInstance& instance) {
  const SolveResult r = solve_lcqp(instance);
  TargetLabels labels;
  switch (r.status) {
    case SolveStatus::INFEASIBLE:
      labels.feas = 0;
      labels.obj = kInf;
      break;
    case SolveStatus::UNBOUNDED:
      // Feasibility is a statement about the constraint set only.
      labels.feas = 1;
      labels.obj = -kInf;
      break;
    case SolveStatus::OPTIMAL:
      labels.feas = 1;
      labels.obj = *r.value;
      labels.sol = r.x_star;
      break;
  }
  return labels;
}

TargetLabels evaluate_targets(const MILCQPInstance& instance) {
  const SolveResult r = solve_milcqp(instance);
  TargetLabels labels;
  switch (r.status) {
    case SolveStatus::INFEASIBLE:
      labels.feas = 0;
      labels.obj = kInf;
      break;
    case SolveStatus::UNBOUNDED:
      labels.feas = 1;
      labels.obj = -kInf;
      break;
    case SolveStatus::OPTIMAL:
      labels.feas = 1;
      labels.obj = *r.value;
      labels.sol = r.x_star;
      break;
  }
  return labels;
}

}  // namespace qpgnn
