#include "qpgnn/instance.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace qpgnn {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string entry_str(int i, int j, double v) {
  std::ostringstream os;
  os << "(" << i << "," << j << ")=" << v;
  return os.str();
}

void check_triplets(const std::vector<Triplet>& ts, int rows, int cols, const char* name,
                    ValidationReport& report) {
  for (std::size_t k = 0; k < ts.size(); ++k) {
    const Triplet& t = ts[k];
    if (t.row < 0 || t.row >= rows || t.col < 0 || t.col >= cols) {
      report.add(std::string(name) + ".index_range", entry_str(t.row, t.col, t.value));
      return;
    }
    if (!std::isfinite(t.value)) {
      report.add(std::string(name) + ".finite", entry_str(t.row, t.col, t.value));
      return;
    }
    if (k > 0) {
      const Triplet& p = ts[k - 1];
      if (!triplet_before(p, t)) {
        report.add(std::string(name) + (p.row == t.row && p.col == t.col ? ".duplicate" : ".order"),
                   entry_str(t.row, t.col, t.value));
        return;
      }
    }
  }
}

}  // namespace

Sense sense_from_token(const std::string& token) {
  if (token == "<=") return Sense::LE;
  if (token == "=") return Sense::EQ;
  if (token == ">=") return Sense::GE;
  throw ParseError("unknown sense token: \"" + token + "\"");
}

void sort_triplets(std::vector<Triplet>& ts) { std::sort(ts.begin(), ts.end(), triplet_before); }

std::vector<double> dense_q(const LCQPInstance& instance) {
  std::vector<double> q(static_cast<std::size_t>(instance.n) * instance.n, 0.0);
  for (const Triplet& t : instance.q) q[static_cast<std::size_t>(t.row) * instance.n + t.col] = t.value;
  return q;
}

double objective_value(const LCQPInstance& instance, const std::vector<double>& x) {
  double quad = 0.0;
  for (const Triplet& t : instance.q) quad += x[t.row] * t.value * x[t.col];
  double lin = 0.0;
  for (int j = 0; j < instance.n; ++j) lin += instance.c[j] * x[j];
  return 0.5 * quad + lin;
}

double feasibility_violation(const LCQPInstance& instance, const std::vector<double>& x) {
  std::vector<double> ax(instance.m, 0.0);
  for (const Triplet& t : instance.a) ax[t.row] += t.value * x[t.col];
  double worst = 0.0;
  for (int i = 0; i < instance.m; ++i) {
    double r = ax[i] - instance.b[i];
    switch (instance.senses[i]) {
      case Sense::LE: worst = std::max(worst, r); break;
      case Sense::GE: worst = std::max(worst, -r); break;
      case Sense::EQ: worst = std::max(worst, std::abs(r)); break;
    }
  }
  for (int j = 0; j < instance.n; ++j) {
    if (instance.lower[j] > -kInf) worst = std::max(worst, instance.lower[j] - x[j]);
    if (instance.upper[j] < kInf) worst = std::max(worst, x[j] - instance.upper[j]);
  }
  return worst;
}

ValidationReport validate(const LCQPInstance& instance) {
  ValidationReport report;
  if (instance.n < 0 || instance.m < 0) {
    report.add("dims.nonnegative", "n or m negative");
    return report;
  }
  const auto n = static_cast<std::size_t>(instance.n);
  const auto m = static_cast<std::size_t>(instance.m);
  if (instance.c.size() != n || instance.lower.size() != n || instance.upper.size() != n)
    report.add("dims.variables", "c/l/u length != n");
  if (instance.b.size() != m || instance.senses.size() != m)
    report.add("dims.constraints", "b/senses length != m");
  if (!report.ok) return report;

  check_triplets(instance.q, instance.n, instance.n, "Q", report);
  check_triplets(instance.a, instance.m, instance.n, "A", report);
  if (!report.ok) return report;

  for (int j = 0; j < instance.n; ++j) {
    if (std::isnan(instance.lower[j]) || instance.lower[j] == kInf)
      report.add("bounds.lower_domain", "l[" + std::to_string(j) + "]");
    if (std::isnan(instance.upper[j]) || instance.upper[j] == -kInf)
      report.add("bounds.upper_domain", "u[" + std::to_string(j) + "]");
    if (instance.lower[j] > instance.upper[j])
      report.add("bounds.ordered", "l > u at j=" + std::to_string(j));
  }
  for (int i = 0; i < instance.m; ++i)
    if (!std::isfinite(instance.b[i])) report.add("rhs.finite", "b[" + std::to_string(i) + "]");
  for (int j = 0; j < instance.n; ++j)
    if (!std::isfinite(instance.c[j])) report.add("objective.finite", "c[" + std::to_string(j) + "]");

  // Q symmetric: exact entry equality as stored.
  {
    auto mirrored = instance.q;
    for (Triplet& t : mirrored) std::swap(t.row, t.col);
    sort_triplets(mirrored);
    if (mirrored != instance.q) report.add("Q.symmetric", "Q not symmetric");
  }

  // Q PSD within tolerance, via smallest eigenvalue of the dense copy.
  if (report.ok && instance.n > 0 && !instance.q.empty()) {
    Eigen::MatrixXd q = Eigen::MatrixXd::Zero(instance.n, instance.n);
    double frob2 = 0.0;
    for (const Triplet& t : instance.q) {
      q(t.row, t.col) = t.value;
      frob2 += t.value * t.value;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(q, Eigen::EigenvaluesOnly);
    const double lambda_min = eig.eigenvalues().minCoeff();
    if (lambda_min < -kPsdTol * std::max(1.0, std::sqrt(frob2)))
      report.add("Q.psd", "Q not PSD: smallest eigenvalue " + std::to_string(lambda_min));
  }
  return report;
}

ValidationReport validate(const MILCQPInstance& instance) {
  ValidationReport report = validate(instance.base);
  const auto& is = instance.integer_set;
  for (std::size_t k = 0; k < is.size(); ++k) {
    if (is[k] < 0 || is[k] >= instance.base.n) {
      report.add("integer_set.range", "index " + std::to_string(is[k]));
      break;
    }
    if (k > 0 && is[k] <= is[k - 1]) {
      report.add("integer_set.sorted_unique", "index " + std::to_string(is[k]));
      break;
    }
  }
  return report;
}

bool is_permutation(const std::vector<int>& sigma) {
  std::vector<char> seen(sigma.size(), 0);
  for (int v : sigma) {
    if (v < 0 || static_cast<std::size_t>(v) >= sigma.size() || seen[v]) return false;
    seen[v] = 1;
  }
  return true;
}

LCQPInstance permute_instance(const LCQPInstance& instance, const VertexPermutation& perm) {
  if (perm.sigma_v.size() != static_cast<std::size_t>(instance.m) ||
      perm.sigma_w.size() != static_cast<std::size_t>(instance.n))
    throw std::invalid_argument("permutation size mismatch");
  if (!is_permutation(perm.sigma_v) || !is_permutation(perm.sigma_w))
    throw std::invalid_argument("not a permutation");

  LCQPInstance out;
  out.n = instance.n;
  out.m = instance.m;
  out.c.resize(instance.n);
  out.lower.resize(instance.n);
  out.upper.resize(instance.n);
  out.b.resize(instance.m);
  out.senses.resize(instance.m);
  for (int j = 0; j < instance.n; ++j) {
    out.c[perm.sigma_w[j]] = instance.c[j];
    out.lower[perm.sigma_w[j]] = instance.lower[j];
    out.upper[perm.sigma_w[j]] = instance.upper[j];
  }
  for (int i = 0; i < instance.m; ++i) {
    out.b[perm.sigma_v[i]] = instance.b[i];
    out.senses[perm.sigma_v[i]] = instance.senses[i];
  }
  out.q.reserve(instance.q.size());
  for (const Triplet& t : instance.q)
    out.q.push_back({perm.sigma_w[t.row], perm.sigma_w[t.col], t.value});
  sort_triplets(out.q);
  out.a.reserve(instance.a.size());
  for (const Triplet& t : instance.a)
    out.a.push_back({perm.sigma_v[t.row], perm.sigma_w[t.col], t.value});
  sort_triplets(out.a);
  return out;
}

MILCQPInstance permute_instance(const MILCQPInstance& instance, const VertexPermutation& perm) {
  MILCQPInstance out;
  out.base = permute_instance(instance.base, perm);
  out.integer_set.reserve(instance.integer_set.size());
  for (int j : instance.integer_set) out.integer_set.push_back(perm.sigma_w[j]);
  std::sort(out.integer_set.begin(), out.integer_set.end());
  return out;
}

}  // namespace qpgnn
