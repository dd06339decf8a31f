#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "qpgnn/generator.hpp"
#include "qpgnn/gnn.hpp"
#include "qpgnn/solver.hpp"

namespace qpgnn {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct Report {
  std::vector<CheckResult> checks;

  void add(std::string name, bool passed, std::string detail = "");
  bool all_passed() const;
  int failures() const;
};

/// The three verification clauses per counter-example pair: WL equivalence,
/// identical GNN outputs over random parameter draws, and differing optima
/// (fig2) / equal optima with disjoint singleton feasible sets (propB).
/// Also pins the corpus integrity hash.
Report verify_counterexamples(std::uint64_t seed = 1);

/// Every module-level invariant in one consolidated report.
Report run_property_suite(std::uint64_t seed = 1);

// ---------------------------------------------------------------------------
// Datasets with oracle labels

struct LabeledLCQP {
  LCQPInstance instance;
  TargetLabels labels;
};

struct LabeledMILCQP {
  MILCQPInstance instance;
  TargetLabels labels;
};

/// First `count` generated instances with finite optima, scanning seeds
/// upward from config.seed. Deterministic.
std::vector<LabeledLCQP> solvable_lcqp_set(const GenConfig& config, int count);

/// Mixed-integer variant; instances keep at most `max_integers` integer
/// variables so the in-repo exact oracles stay cheap.
std::vector<LabeledMILCQP> solvable_milcqp_set(const GenConfig& config, int count,
                                               int max_integers = 12);

// ---------------------------------------------------------------------------
// Fitting experiments

struct FitSpec {
  enum class Task { FIT_OBJ, FIT_SOL };
  enum class Problem { LCQP, MILCQP };

  Task task = Task::FIT_OBJ;
  Problem problem = Problem::LCQP;
  GenConfig gen;
  int instance_count = 100;
  std::vector<int> widths{16, 32, 64};
  int layers = 2;
  int epochs = 2000;
  double learning_rate = 2e-3;
  double stop_below = 0.0;
  std::vector<std::uint64_t> seeds{1, 2, 3};
  std::string out_dir;  // empty: nothing written
  std::string format = "csv";
};

struct FitCell {
  int width = 0;
  std::uint64_t seed = 0;
  double best_rel_err = 0.0;
  int best_epoch = 0;
};

struct FitOutcome {
  std::vector<FitCell> cells;
  std::map<int, double> median_best;  // width -> median over seeds
};

FitOutcome run_fit(const FitSpec& spec);

// ---------------------------------------------------------------------------
// Generalization experiments (fixed-structure family)

struct GeneralizationSpec {
  GenConfig gen;
  std::vector<int> train_sizes{100, 500, 2000};
  int val_count = 200;
  int width = 32;
  int layers = 2;
  int epochs = 400;
  double learning_rate = 2e-3;
  std::vector<std::uint64_t> seeds{1, 2, 3};
  std::string out_dir;
  std::string format = "csv";
};

struct GeneralizationCell {
  int train_size = 0;
  std::uint64_t seed = 0;
  double train_rel_err = 0.0;
  double val_rel_err = 0.0;
};

struct GeneralizationOutcome {
  std::vector<GeneralizationCell> cells;
  std::map<int, double> median_val;  // train size -> median val error
};

GeneralizationOutcome run_generalization(const GeneralizationSpec& spec);

// ---------------------------------------------------------------------------
// Verification helpers shared by the property suite and the acceptance run

/// Random feasible-direction steps inside the optimal face never shrink
/// ||x||_2 below ||x_star||_2 - 1e-8.
bool min_norm_perturbation_ok(const LCQPInstance& instance, const SolveResult& result,
                              std::uint64_t seed, int directions = 5);

/// Reverse-mode vs central finite differences over random configurations;
/// fills `worst` with the largest per-coordinate relative error seen.
bool gradient_check_ok(std::uint64_t seed, int configs, double step, double tolerance,
                       double* worst = nullptr);

/// Branch-and-bound equals enumeration (status, value to 1e-6, solution) on
/// random small mixed-integer instances.
bool mi_oracle_agreement_ok(const GenConfig& base, int count, std::uint64_t seed,
                            std::string* detail = nullptr);

// ---------------------------------------------------------------------------
// Small shared output helpers (deterministic formatting)

std::string format_double(double v);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace qpgnn
