#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "qpgnn/corpus.hpp"
#include "qpgnn/graph.hpp"
#include "qpgnn/harness.hpp"
#include "qpgnn/instance_io.hpp"
#include "qpgnn/rng.hpp"
#include "qpgnn/tractability.hpp"
#include "qpgnn/wl.hpp"

namespace {

using nlohmann::json;
using namespace qpgnn;

constexpr double kInfinity = std::numeric_limits<double>::infinity();

struct GlobalOptions {
  std::uint64_t seed = 1;
  std::string out_dir;
  std::string format = "csv";
};

std::string labels_to_json(const TargetLabels& labels) {
  json doc;
  doc["feas"] = labels.feas;
  if (labels.obj == kInfinity)
    doc["obj"] = "+inf";
  else if (labels.obj == -kInfinity)
    doc["obj"] = "-inf";
  else
    doc["obj"] = labels.obj;
  if (labels.sol) doc["sol"] = *labels.sol;
  return doc.dump(2) + "\n";
}

GenConfig preset_config(const std::string& preset, std::uint64_t seed) {
  GenConfig config;
  config.seed = seed;
  if (preset == "paper-lcqp" || preset == "fixed-c") return config;
  if (preset == "paper-milcqp") {
    config.n = 20;
    config.nnz_a = 40;
    return config;
  }
  throw CLI::ValidationError("--preset", "unknown preset " + preset);
}

std::uint64_t config_hash(const GenConfig& c) {
  std::ostringstream os;
  os << c.m << "," << c.n << "," << c.alpha << "," << c.nnz_a << "," << c.c_sigma << ","
     << c.b_sigma << "," << c.bound_sigma << "," << c.eq_prob << "," << c.integer_prob << ","
     << c.mi_bound_range << "," << c.seed;
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char ch : os.str()) {
    hash ^= ch;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

int cmd_generate(const GlobalOptions& global, const std::string& preset, int count, bool label) {
  const std::string dir = global.out_dir.empty() ? "." : global.out_dir;
  std::filesystem::create_directories(dir);
  GenConfig config = preset_config(preset, global.seed);

  std::vector<std::string> files;
  auto emit = [&](const AnyInstance& inst, int index) {
    std::ostringstream name;
    name << "instance_" << std::setw(5) << std::setfill('0') << index << ".json";
    write_instance(inst, dir + "/" + name.str());
    files.push_back(name.str());
    if (label) {
      const TargetLabels labels = std::holds_alternative<MILCQPInstance>(inst)
                                      ? evaluate_targets(std::get<MILCQPInstance>(inst))
                                      : evaluate_targets(std::get<LCQPInstance>(inst));
      write_text_file(dir + "/" + name.str() + ".labels.json", labels_to_json(labels));
    }
  };

  if (preset == "fixed-c") {
    const std::vector<LCQPInstance> family = gen_fixed_structure(config, count);
    for (int k = 0; k < count; ++k) emit(family[k], k);
  } else if (preset == "paper-milcqp") {
    for (int k = 0; k < count; ++k) {
      GenConfig child = config;
      child.seed = derive_seed(config.seed, static_cast<std::uint64_t>(k));
      emit(gen_milcqp(child), k);
    }
  } else {
    for (int k = 0; k < count; ++k) {
      GenConfig child = config;
      child.seed = derive_seed(config.seed, static_cast<std::uint64_t>(k));
      emit(gen_lcqp(child), k);
    }
  }

  json manifest;
  manifest["preset"] = preset;
  manifest["count"] = count;
  manifest["seed"] = global.seed;
  manifest["config_hash"] = config_hash(config);
  manifest["labeled"] = label;
  manifest["files"] = files;
  write_text_file(dir + "/manifest.json", manifest.dump(2) + "\n");
  std::cout << "wrote " << count << " instances to " << dir << "\n";
  return 0;
}

std::string join_vector(const std::vector<double>& v) {
  std::ostringstream os;
  for (std::size_t k = 0; k < v.size(); ++k) os << (k ? ";" : "") << format_double(v[k]);
  return os.str();
}

int cmd_solve(const GlobalOptions& global, const std::vector<std::string>& paths, bool cache) {
  if (global.format == "csv") std::cout << "instance,status,value,kkt_residual,x_star\n";
  for (const std::string& path : paths) {
    const AnyInstance any = read_instance(path);
    SolveResult result;
    TargetLabels labels;
    if (std::holds_alternative<MILCQPInstance>(any)) {
      result = solve_milcqp(std::get<MILCQPInstance>(any));
      labels = evaluate_targets(std::get<MILCQPInstance>(any));
    } else {
      result = solve_lcqp(std::get<LCQPInstance>(any));
      labels = evaluate_targets(std::get<LCQPInstance>(any));
    }
    if (global.format == "json") {
      json row;
      row["instance"] = path;
      row["status"] = status_name(result.status);
      if (result.value) row["value"] = *result.value;
      row["kkt_residual"] = result.kkt_residual;
      if (result.x_star) row["x_star"] = *result.x_star;
      std::cout << row.dump() << "\n";
    } else {
      std::cout << path << "," << status_name(result.status) << ","
                << (result.value ? format_double(*result.value) : "") << ","
                << format_double(result.kkt_residual) << ","
                << (result.x_star ? join_vector(*result.x_star) : "") << "\n";
    }
    if (cache) write_text_file(path + ".labels.json", labels_to_json(labels));
  }
  return 0;
}

int cmd_encode(const GlobalOptions& global, const std::vector<std::string>& paths) {
  if (global.format == "csv") std::cout << "instance,m,n,a_edges,q_edges,mixed_integer\n";
  for (const std::string& path : paths) {
    const AnyInstance any = read_instance(path);
    const QPGraph graph = std::holds_alternative<MILCQPInstance>(any)
                              ? encode_milcqp(std::get<MILCQPInstance>(any))
                              : encode_lcqp(std::get<LCQPInstance>(any));
    if (global.format == "json") {
      json doc;
      doc["instance"] = path;
      doc["m"] = graph.m;
      doc["n"] = graph.n;
      doc["mixed_integer"] = graph.mixed_integer;
      json vf = json::array();
      for (const ConstraintFeature& f : graph.v_features)
        vf.push_back({{"b", f.b}, {"sense", sense_token(f.sense)}});
      doc["v_features"] = vf;
      json wf = json::array();
      for (const VariableFeature& f : graph.w_features) {
        json row{{"c", f.c}};
        row["l"] = std::isfinite(f.lower) ? json(f.lower) : json("-inf");
        row["u"] = std::isfinite(f.upper) ? json(f.upper) : json("+inf");
        if (graph.mixed_integer) row["integer"] = f.integer_flag;
        wf.push_back(row);
      }
      doc["w_features"] = wf;
      json ae = json::array(), qe = json::array();
      for (const Triplet& t : graph.a_edges) ae.push_back({t.row, t.col, t.value});
      for (const Triplet& t : graph.q_edges) qe.push_back({t.row, t.col, t.value});
      doc["a_edges"] = ae;
      doc["q_edges"] = qe;
      std::cout << doc.dump() << "\n";
    } else {
      std::cout << path << "," << graph.m << "," << graph.n << "," << graph.a_edges.size() << ","
                << graph.q_edges.size() << "," << (graph.mixed_integer ? 1 : 0) << "\n";
    }
  }
  return 0;
}

QPGraph load_graph(const std::string& path) {
  const AnyInstance any = read_instance(path);
  return std::holds_alternative<MILCQPInstance>(any) ? encode_milcqp(std::get<MILCQPInstance>(any))
                                                     : encode_lcqp(std::get<LCQPInstance>(any));
}

int cmd_wl_compare(const GlobalOptions& global, const std::vector<std::string>& paths,
                   const std::string& variant_name, bool node_wise) {
  const WLVariant variant =
      variant_name == "sum" ? WLVariant::LCQP_SUM : WLVariant::MILCQP_MULTISET;
  if (paths.size() == 1) {
    const QPGraph graph = load_graph(paths[0]);
    const StablePartition stable = stable_partition(graph, variant);
    const auto rounds = refine(graph, variant, stable.rounds_to_stabilize);
    if (global.format == "csv") std::cout << "round,num_V_classes,num_W_classes\n";
    for (const Coloring& c : rounds) {
      if (global.format == "json")
        std::cout << json{{"round", c.round},
                          {"num_V_classes", c.num_v_classes()},
                          {"num_W_classes", c.num_w_classes()}}
                         .dump()
                  << "\n";
      else
        std::cout << c.round << "," << c.num_v_classes() << "," << c.num_w_classes() << "\n";
    }
    return 0;
  }

  const QPGraph g1 = load_graph(paths[0]);
  const QPGraph g2 = load_graph(paths[1]);
  const bool equivalent = node_wise ? wl_equivalent_W(g1, g2, variant)
                                    : wl_equivalent(g1, g2, variant);
  RefineOptions options;
  options.variant = variant;
  const auto rounds = refine_union({&g1, &g2}, options, g1.m + g1.n + 1);
  if (global.format == "csv") std::cout << "graph,round,num_V_classes,num_W_classes\n";
  for (int g = 0; g < 2; ++g)
    for (const Coloring& c : rounds[g]) {
      if (global.format == "json")
        std::cout << json{{"graph", g},
                          {"round", c.round},
                          {"num_V_classes", c.num_v_classes()},
                          {"num_W_classes", c.num_w_classes()}}
                         .dump()
                  << "\n";
      else
        std::cout << g << "," << c.round << "," << c.num_v_classes() << "," << c.num_w_classes()
                  << "\n";
    }
  std::cout << (node_wise ? "node_wise_equivalent," : "equivalent,")
            << (equivalent ? "true" : "false") << "\n";
  return 0;
}

int cmd_check(const GlobalOptions& global, const std::vector<std::string>& paths) {
  if (global.format == "csv") std::cout << "instance,mp_tractable,unfoldable,rounds_to_stabilize\n";
  for (const std::string& path : paths) {
    const TractabilityReport report = classify(load_graph(path));
    if (global.format == "json")
      std::cout << json{{"instance", path},
                        {"mp_tractable", report.mp_tractable},
                        {"unfoldable", report.unfoldable},
                        {"rounds_to_stabilize", report.partition.rounds_to_stabilize}}
                       .dump()
                << "\n";
    else
      std::cout << path << "," << (report.mp_tractable ? "true" : "false") << ","
                << (report.unfoldable ? "true" : "false") << ","
                << report.partition.rounds_to_stabilize << "\n";
  }
  return 0;
}

int print_report(const Report& report) {
  for (const CheckResult& c : report.checks)
    std::cout << (c.passed ? "[PASS] " : "[FAIL] ") << c.name
              << (c.detail.empty() ? "" : "  (" + c.detail + ")") << "\n";
  std::cout << report.checks.size() - report.failures() << "/" << report.checks.size()
            << " checks passed\n";
  return report.all_passed() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"LCQP / MI-LCQP graphs, WL refinement, solvers, and GNN experiments"};
  app.require_subcommand(1);

  GlobalOptions global;
  app.add_option("--seed", global.seed, "global random seed")->capture_default_str();
  app.add_option("--out-dir", global.out_dir, "output directory");
  app.add_option("--format", global.format, "output format")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();

  auto* generate = app.add_subcommand("generate", "sample random instances");
  std::string preset = "paper-lcqp";
  int count = 10;
  bool label = false;
  generate->add_option("--preset", preset, "paper-lcqp | paper-milcqp | fixed-c")
      ->check(CLI::IsMember({"paper-lcqp", "paper-milcqp", "fixed-c"}))
      ->capture_default_str();
  generate->add_option("--count", count, "number of instances")->capture_default_str();
  generate->add_flag("--label", label, "also write oracle label sidecars");

  std::vector<std::string> paths;
  bool cache_labels = false;
  auto* solve = app.add_subcommand("solve", "solve instances with the oracle solvers");
  solve->add_option("files", paths, "instance files")->required()->expected(-1);
  solve->add_flag("--cache-labels", cache_labels, "write label sidecars next to the instances");

  auto* encode = app.add_subcommand("encode", "encode instances as graphs");
  encode->add_option("files", paths, "instance files")->required()->expected(-1);

  auto* wl = app.add_subcommand("wl-compare", "refinement rounds and WL equivalence");
  std::string variant_name = "multiset";
  bool node_wise = false;
  wl->add_option("files", paths, "one or two instance files")->required()->expected(1, 2);
  wl->add_option("--variant", variant_name, "sum | multiset")
      ->check(CLI::IsMember({"sum", "multiset"}))
      ->capture_default_str();
  wl->add_flag("--node-wise", node_wise, "require index-wise variable colors");

  auto* check = app.add_subcommand("check", "tractability classification");
  check->add_option("files", paths, "instance files")->required()->expected(-1);

  auto* counterexamples =
      app.add_subcommand("counterexamples", "verify the counter-example corpus");

  auto* train = app.add_subcommand("train", "fit targets over a width grid");
  FitSpec fit;
  std::string task = "fit-obj", problem = "lcqp";
  train->add_option("--task", task, "fit-obj | fit-sol")
      ->check(CLI::IsMember({"fit-obj", "fit-sol"}))
      ->capture_default_str();
  train->add_option("--problem", problem, "lcqp | milcqp")
      ->check(CLI::IsMember({"lcqp", "milcqp"}))
      ->capture_default_str();
  train->add_option("--count", fit.instance_count, "dataset size")->capture_default_str();
  train->add_option("--widths", fit.widths, "embedding widths")->capture_default_str();
  train->add_option("--layers", fit.layers, "message-passing layers")->capture_default_str();
  train->add_option("--epochs", fit.epochs, "training epochs")->capture_default_str();
  train->add_option("--lr", fit.learning_rate, "initial learning rate")->capture_default_str();
  train->add_option("--train-seeds", fit.seeds, "training seeds")->capture_default_str();
  train->add_option("--stop-below", fit.stop_below, "early stop once best error is below");

  auto* generalize = app.add_subcommand("generalize", "fixed-structure generalization trend");
  GeneralizationSpec gener;
  generalize->add_option("--sizes", gener.train_sizes, "training-set sizes")->capture_default_str();
  generalize->add_option("--val-count", gener.val_count, "validation size")->capture_default_str();
  generalize->add_option("--width", gener.width, "embedding width")->capture_default_str();
  generalize->add_option("--layers", gener.layers, "message-passing layers")->capture_default_str();
  generalize->add_option("--epochs", gener.epochs, "training epochs")->capture_default_str();
  generalize->add_option("--lr", gener.learning_rate, "initial learning rate")->capture_default_str();
  generalize->add_option("--train-seeds", gener.seeds, "training seeds")->capture_default_str();

  auto* suite = app.add_subcommand("suite", "run the consolidated property suite");

  CLI11_PARSE(app, argc, argv);

  try {
    if (generate->parsed()) return cmd_generate(global, preset, count, label);
    if (solve->parsed()) return cmd_solve(global, paths, cache_labels);
    if (encode->parsed()) return cmd_encode(global, paths);
    if (wl->parsed()) return cmd_wl_compare(global, paths, variant_name, node_wise);
    if (check->parsed()) return cmd_check(global, paths);
    if (counterexamples->parsed()) return print_report(verify_counterexamples(global.seed));
    if (train->parsed()) {
      fit.task = task == "fit-sol" ? FitSpec::Task::FIT_SOL : FitSpec::Task::FIT_OBJ;
      fit.problem = problem == "milcqp" ? FitSpec::Problem::MILCQP : FitSpec::Problem::LCQP;
      if (fit.problem == FitSpec::Problem::MILCQP) {
        fit.gen.n = 20;
        fit.gen.nnz_a = 40;
      }
      fit.gen.seed = global.seed;
      fit.out_dir = global.out_dir;
      fit.format = global.format;
      const FitOutcome outcome = run_fit(fit);
      std::cout << "width,median_best_rel_err\n";
      for (const auto& [width, err] : outcome.median_best)
        std::cout << width << "," << format_double(err) << "\n";
      return 0;
    }
    if (generalize->parsed()) {
      gener.gen.seed = global.seed;
      gener.out_dir = global.out_dir;
      gener.format = global.format;
      const GeneralizationOutcome outcome = run_generalization(gener);
      std::cout << "train_size,median_val_rel_err\n";
      for (const auto& [size, err] : outcome.median_val)
        std::cout << size << "," << format_double(err) << "\n";
      return 0;
    }
    if (suite->parsed()) {
      Report report = run_property_suite(global.seed);
      const Report cx = verify_counterexamples(global.seed);
      for (const CheckResult& c : cx.checks) report.checks.push_back(c);
      return print_report(report);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
