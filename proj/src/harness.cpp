#include "qpgnn/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "qpgnn/corpus.hpp"
#include "qpgnn/rng.hpp"
#include "qpgnn/graph.hpp"
#include "qpgnn/wl.hpp"

namespace qpgnn {

void Report::add(std::string name, bool passed, std::string detail) {
  checks.push_back({std::move(name), passed, std::move(detail)});
}

bool Report::all_passed() const { return failures() == 0; }

int Report::failures() const {
  int n = 0;
  for (const CheckResult& c : checks) n += c.passed ? 0 : 1;
  return n;
}

std::string format_double(double v) {
  char buf[40];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  return std::string(buf, end);
}

void write_text_file(const std::string& path, const std::string& content) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for write: " + path);
  out << content;
}

// ---------------------------------------------------------------------------
// Counter-example verification

namespace {

/// |a - b| within an absolute-plus-relative band.


bool gnn_outputs_match_graph(const QPGraph& g1, const QPGraph& g2, int draws,
                             std::uint64_t seed, double tol, std::string& detail) {
  GNNConfig config;
  config.variant = GNNConfig::Variant::MILCQP;
  config.head = GNNConfig::Head::GRAPH;
  config.width = 16;
  config.layers = 3;
  for (int k = 0; k < draws; ++k) {
    const GNNParams params = init_params(config, derive_seed(seed, 100 + k));
    const double y1 = forward_graph(params, g1);
    const double y2 = forward_graph(params, g2);
    if (std::abs(y1 - y2) > tol * (1.0 + std::abs(y1))) {
      detail = "draw " + std::to_string(k) + ": " + format_double(y1) + " vs " + format_double(y2);
      return false;
    }
  }
  return true;
}

bool gnn_outputs_match_node(const QPGraph& g1, const QPGraph& g2, int draws, std::uint64_t seed,
                            double tol, std::string& detail) {
  GNNConfig config;
  config.variant = GNNConfig::Variant::MILCQP;
  config.head = GNNConfig::Head::NODE;
  config.width = 16;
  config.layers = 3;
  for (int k = 0; k < draws; ++k) {
    const GNNParams params = init_params(config, derive_seed(seed, 200 + k));
    const std::vector<double> y1 = forward_node(params, g1);
    const std::vector<double> y2 = forward_node(params, g2);
    for (std::size_t j = 0; j < y1.size(); ++j)
      if (std::abs(y1[j] - y2[j]) > tol * (1.0 + std::abs(y1[j]))) {
        detail = "draw " + std::to_string(k) + ", node " + std::to_string(j);
        return false;
      }
  }
  return true;
}

bool vectors_close(const std::vector<double>& a, const std::vector<double>& b, double tol) {
  if (a.size() != b.size()) return false;
  for (std::size_t k = 0; k < a.size(); ++k)
    if (std::abs(a[k] - b[k]) > tol) return false;
  return true;
}

}  // namespace

Report verify_counterexamples(std::uint64_t seed) {
  Report report;
  report.add("corpus.integrity_hash", corpus::corpus_hash() == corpus::kPinnedCorpusHash);

  const MILCQPInstance fig2_a = corpus::fig2_first();
  const MILCQPInstance fig2_b = corpus::fig2_second();
  const QPGraph fig2_ga = encode_milcqp(fig2_a);
  const QPGraph fig2_gb = encode_milcqp(fig2_b);

  report.add("fig2.wl_equivalent",
             wl_equivalent(fig2_ga, fig2_gb, WLVariant::MILCQP_MULTISET));

  std::string detail;
  report.add("fig2.gnn_outputs_identical",
             gnn_outputs_match_graph(fig2_ga, fig2_gb, 20, seed, 1e-8, detail), detail);

  const SolveResult bf_a = brute_force_milcqp(fig2_a);
  const SolveResult bf_b = brute_force_milcqp(fig2_b);
  const bool fig2_values = bf_a.status == SolveStatus::OPTIMAL &&
                           bf_b.status == SolveStatus::OPTIMAL &&
                           std::abs(*bf_a.value - 4.5) <= 1e-8 && std::abs(*bf_b.value - 6.0) <= 1e-8;
  report.add("fig2.optima_differ", fig2_values,
             "objectives " + format_double(bf_a.value.value_or(-1)) + " vs " +
                 format_double(bf_b.value.value_or(-1)));

  const MILCQPInstance propb_a = corpus::propb_first();
  const MILCQPInstance propb_b = corpus::propb_second();
  const QPGraph propb_ga = encode_milcqp(propb_a);
  const QPGraph propb_gb = encode_milcqp(propb_b);

  report.add("propb.wl_equivalent",
             wl_equivalent(propb_ga, propb_gb, WLVariant::MILCQP_MULTISET));
  report.add("propb.wl_equivalent_node_wise",
             wl_equivalent_W(propb_ga, propb_gb, WLVariant::MILCQP_MULTISET));

  detail.clear();
  report.add("propb.gnn_node_outputs_identical",
             gnn_outputs_match_node(propb_ga, propb_gb, 20, seed, 1e-8, detail), detail);

  const SolveResult pb_a = brute_force_milcqp(propb_a);
  const SolveResult pb_b = brute_force_milcqp(propb_b);
  const bool propb_values = pb_a.status == SolveStatus::OPTIMAL &&
                            pb_b.status == SolveStatus::OPTIMAL &&
                            std::abs(*pb_a.value - 24.0) <= 1e-8 &&
                            std::abs(*pb_b.value - 24.0) <= 1e-8;
  report.add("propb.common_objective_24", propb_values);
  report.add("propb.solution_sets_disjoint_singletons",
             pb_a.x_star && pb_b.x_star &&
                 vectors_close(*pb_a.x_star, {3, 3, 0, 0, 0, 0, 0}, 1e-7) &&
                 vectors_close(*pb_b.x_star, {2, 2, 2, 0, 0, 0, 0}, 1e-7));

  // A corrupted pair must be detected (corpus integrity guard).
  {
    MILCQPInstance corrupted = corpus::fig2_second();
    corrupted.base.c[0] += 1.0;
    report.add("fig2.corruption_detected",
               !wl_equivalent(fig2_ga, encode_milcqp(corrupted), WLVariant::MILCQP_MULTISET));
  }
  return report;
}

// ---------------------------------------------------------------------------
// Labeled datasets

std::vector<LabeledLCQP> solvable_lcqp_set(const GenConfig& config, int count) {
  std::vector<LabeledLCQP> out;
  GenConfig gen = config;
  for (std::uint64_t attempt = 0; static_cast<int>(out.size()) < count; ++attempt) {
    if (attempt > 50 * static_cast<std::uint64_t>(count) + 1000)
      throw std::runtime_error("could not collect enough feasible bounded instances");
    gen.seed = derive_seed(config.seed, 0xd5e + attempt);
    LCQPInstance inst = gen_lcqp(gen);
    const TargetLabels labels = evaluate_targets(inst);
    if (!labels.sol) continue;
    out.push_back({std::move(inst), labels});
  }
  return out;
}

std::vector<LabeledMILCQP> solvable_milcqp_set(const GenConfig& config, int count,
                                               int max_integers) {
  std::vector<LabeledMILCQP> out;
  GenConfig gen = config;
  for (std::uint64_t attempt = 0; static_cast<int>(out.size()) < count; ++attempt) {
    if (attempt > 100 * static_cast<std::uint64_t>(count) + 1000)
      throw std::runtime_error("could not collect enough solvable mixed-integer instances");
    gen.seed = derive_seed(config.seed, 0xd5e + attempt);
    MILCQPInstance inst = gen_milcqp(gen);
    if (static_cast<int>(inst.integer_set.size()) > max_integers) continue;
    TargetLabels labels;
    try {
      labels = evaluate_targets(inst);
    } catch (const SolveBudgetError&) {
      continue;
    }
    if (!labels.sol) continue;
    out.push_back({std::move(inst), labels});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Fit experiments

namespace {

std::string history_csv(const TrainResult& result, bool with_val) {
  std::ostringstream os;
  os << "epoch,lr,train_rel_err,best_rel_err" << (with_val ? ",val_rel_err" : "") << "\n";
  for (const EpochRecord& r : result.history) {
    os << r.epoch << "," << format_double(r.learning_rate) << ","
       << format_double(r.train_rel_err) << "," << format_double(r.best_rel_err);
    if (with_val) os << "," << format_double(r.val_rel_err.value_or(-1.0));
    os << "\n";
  }
  return os.str();
}

std::string history_json(const TrainResult& result, bool with_val) {
  nlohmann::json rows = nlohmann::json::array();
  for (const EpochRecord& r : result.history) {
    nlohmann::json row{{"epoch", r.epoch},
                       {"lr", r.learning_rate},
                       {"train_rel_err", r.train_rel_err},
                       {"best_rel_err", r.best_rel_err}};
    if (with_val) row["val_rel_err"] = r.val_rel_err.value_or(-1.0);
    rows.push_back(row);
  }
  return rows.dump(2) + "\n";
}

double median(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const std::size_t k = values.size();
  return k % 2 ? values[k / 2] : 0.5 * (values[k / 2 - 1] + values[k / 2]);
}

}  // namespace

FitOutcome run_fit(const FitSpec& spec) {
  std::vector<LabeledGraph> data;
  const bool node_head = spec.task == FitSpec::Task::FIT_SOL;
  if (spec.problem == FitSpec::Problem::LCQP) {
    for (const LabeledLCQP& s : solvable_lcqp_set(spec.gen, spec.instance_count))
      data.push_back({encode_lcqp(s.instance),
                      node_head ? *s.labels.sol : std::vector<double>{s.labels.obj}});
  } else {
    for (const LabeledMILCQP& s : solvable_milcqp_set(spec.gen, spec.instance_count))
      data.push_back({encode_milcqp(s.instance),
                      node_head ? *s.labels.sol : std::vector<double>{s.labels.obj}});
  }

  FitOutcome outcome;
  const char* task_tag = node_head ? "sol" : "obj";
  const char* prob_tag = spec.problem == FitSpec::Problem::LCQP ? "lcqp" : "milcqp";
  std::ostringstream summary;
  summary << "width,seed,best_rel_err,best_epoch\n";
  for (int width : spec.widths) {
    std::vector<double> bests;
    for (std::uint64_t seed : spec.seeds) {
      GNNConfig config;
      config.layers = spec.layers;
      config.width = width;
      config.variant = spec.problem == FitSpec::Problem::LCQP ? GNNConfig::Variant::LCQP
                                                              : GNNConfig::Variant::MILCQP;
      config.head = node_head ? GNNConfig::Head::NODE : GNNConfig::Head::GRAPH;
      GNNParams params = init_params(config, seed);
      TrainSchedule schedule;
      schedule.epochs = spec.epochs;
      schedule.learning_rate = spec.learning_rate;
      schedule.seed = seed;
      schedule.stop_below = spec.stop_below;
      const TrainResult result = train(params, data, schedule);

      outcome.cells.push_back({width, seed, result.best_rel_err, result.best_epoch});
      bests.push_back(result.best_rel_err);
      summary << width << "," << seed << "," << format_double(result.best_rel_err) << ","
              << result.best_epoch << "\n";
      if (!spec.out_dir.empty()) {
        std::ostringstream name;
        name << spec.out_dir << "/fit_" << task_tag << "_" << prob_tag << "_w" << width << "_s"
             << seed << (spec.format == "json" ? ".json" : ".csv");
        write_text_file(name.str(), spec.format == "json" ? history_json(result, false)
                                                          : history_csv(result, false));
      }
    }
    outcome.median_best[width] = median(bests);
  }
  if (!spec.out_dir.empty())
    write_text_file(spec.out_dir + "/fit_" + std::string(task_tag) + "_" + prob_tag +
                        "_summary.csv",
                    summary.str());
  return outcome;
}

// ---------------------------------------------------------------------------
// Generalization experiments

GeneralizationOutcome run_generalization(const GeneralizationSpec& spec) {
  const int max_size = *std::max_element(spec.train_sizes.begin(), spec.train_sizes.end());

  // The family shares one structure; feasibility does not depend on c, so
  // scan deterministically for a feasible structure seed.
  GenConfig gen = spec.gen;
  std::vector<LCQPInstance> pool;
  std::vector<LCQPInstance> val_pool;
  bool found = false;
  for (int attempt = 0; attempt < 50 && !found; ++attempt) {
    gen.seed = derive_seed(spec.gen.seed, 0xf1 + attempt);
    LCQPInstance probe = gen_fixed_structure(gen, 1)[0];
    found = evaluate_targets(probe).sol.has_value();
  }
  if (!found) throw std::runtime_error("no feasible fixed structure found");
  pool = gen_fixed_structure(gen, max_size);
  val_pool = gen_fixed_structure_validation(gen, spec.val_count);

  auto labeled = [](const std::vector<LCQPInstance>& instances) {
    std::vector<LabeledGraph> out;
    out.reserve(instances.size());
    for (const LCQPInstance& inst : instances) {
      const TargetLabels labels = evaluate_targets(inst);
      if (!labels.sol) throw std::runtime_error("fixed-structure instance unexpectedly unsolved");
      out.push_back({encode_lcqp(inst), {labels.obj}});
    }
    return out;
  };
  const std::vector<LabeledGraph> all_train = labeled(pool);
  const std::vector<LabeledGraph> val = labeled(val_pool);

  GeneralizationOutcome outcome;
  std::ostringstream summary;
  summary << "train_size,seed,train_rel_err,val_rel_err\n";
  for (int size : spec.train_sizes) {
    const std::vector<LabeledGraph> subset(all_train.begin(), all_train.begin() + size);
    std::vector<double> vals;
    for (std::uint64_t seed : spec.seeds) {
      GNNConfig config;
      config.layers = spec.layers;
      config.width = spec.width;
      GNNParams params = init_params(config, seed);
      TrainSchedule schedule;
      schedule.epochs = spec.epochs;
      schedule.learning_rate = spec.learning_rate;
      schedule.seed = seed;
      const TrainResult result = train(params, subset, schedule, &val);

      // Errors of the returned (best) parameters.
      const double train_err = relative_error(forward_batch(params, subset),
                                              [&] {
                                                std::vector<std::vector<double>> l;
                                                for (const auto& s : subset) l.push_back(s.label);
                                                return l;
                                              }());
      const double val_err = relative_error(forward_batch(params, val), [&] {
        std::vector<std::vector<double>> l;
        for (const auto& s : val) l.push_back(s.label);
        return l;
      }());
      outcome.cells.push_back({size, seed, train_err, val_err});
      vals.push_back(val_err);
      summary << size << "," << seed << "," << format_double(train_err) << ","
              << format_double(val_err) << "\n";
      if (!spec.out_dir.empty()) {
        std::ostringstream name;
        name << spec.out_dir << "/generalize_n" << size << "_s" << seed
             << (spec.format == "json" ? ".json" : ".csv");
        write_text_file(name.str(), spec.format == "json" ? history_json(result, true)
                                                          : history_csv(result, true));
      }
    }
    outcome.median_val[size] = median(vals);
  }
  if (!spec.out_dir.empty()) write_text_file(spec.out_dir + "/generalize_summary.csv", summary.str());
  return outcome;
}

}  // namespace qpgnn
