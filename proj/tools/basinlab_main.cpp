// basinlab CLI: dataset generators, basin solves, monotone paths, Monte
// Carlo bound experiments, and the full verification suite.
#include "basinlab/basins.hpp"
#include "basinlab/datasets.hpp"
#include "basinlab/init.hpp"
#include "basinlab/io.hpp"
#include "basinlab/montecarlo.hpp"
#include "basinlab/paths.hpp"
#include "basinlab/verify.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <iostream>
#include <thread>

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace basinlab;

namespace {

json load_json(const std::string& path) {
  if (path.empty()) return json::object();
  try {
    return json::parse(read_text_file(path));
  } catch (const nlohmann::json::parse_error& err) {
    throw ParseError(path + ": " + err.what(), static_cast<long>(err.byte));
  }
}

void ensure_out(const std::string& out) {
  if (!out.empty()) fs::create_directories(out);
}

std::string out_path(const std::string& out, const std::string& name) {
  return (fs::path(out.empty() ? "." : out) / name).string();
}

int default_workers() {
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

// --------------------------------------------------------------------------
// generate
// --------------------------------------------------------------------------

int run_generate(const std::string& kind, const json& params, std::uint64_t seed,
                 const std::string& out) {
  ensure_out(out);
  json sidecar;
  sidecar["kind"] = kind;
  sidecar["seed"] = seed;
  RngStream rng(seed, "dataset/" + kind);
  Dataset data;
  if (kind == "singleton") {
    SingletonHardnessSpec spec;
    spec.d = params.value("d", 1);
    spec.epsilon = params.value("epsilon", 0.1);
    data = gen_singleton_hardness(spec);
    sidecar["d"] = spec.d;
    sidecar["epsilon"] = spec.epsilon;
    sidecar["good_minimum"] = spec.epsilon;
    sidecar["bad_minimum"] = 0.5;
  } else if (kind == "fullrank") {
    FullRankSpec spec;
    spec.m = params.value("m", 5);
    spec.d = params.value("d", 8);
    if (params.contains("targets")) {
      Vector targets(params.at("targets").size());
      for (Index t = 0; t < targets.size(); ++t)
        targets(t) = params.at("targets")[static_cast<size_t>(t)].get<double>();
      spec.targets = targets;
    }
    data = gen_fullrank(spec, rng);
    sidecar["m"] = spec.m;
    sidecar["d"] = spec.d;
    sidecar["rank"] = spec.m;
  } else if (kind == "clustered") {
    ClusteredSpec spec;
    spec.d = params.value("d", 10);
    spec.k = params.value("k", 3);
    if (params.contains("points_per_cluster") && params.at("points_per_cluster").is_array()) {
      for (const auto& count : params.at("points_per_cluster"))
        spec.points_per_cluster.push_back(count.get<Index>());
    } else {
      spec.points_per_cluster.assign(static_cast<size_t>(spec.k),
                                     params.value("points_per_cluster", 4));
    }
    spec.radius_fraction = params.value("radius_fraction", 0.1);
    spec.gamma = params.value("gamma", 0.5);
    spec.center_norm_min = params.value("center_norm_min", 1.0);
    ClusteredInfo info;
    data = gen_clustered(spec, rng, &info);
    sidecar["B"] = info.B;
    sidecar["c"] = info.c;
    sidecar["gamma"] = info.gamma;
    sidecar["delta_max"] = info.delta_max;
    sidecar["radius_bound"] = clustered_radius_bound(spec.d);
    sidecar["sigma_max"] = info.sigma_max;
    sidecar["sigma_min"] = info.sigma_min;
    json radii = json::array();
    for (Index j = 0; j < info.radii.size(); ++j) radii.push_back(info.radii(j));
    sidecar["radii"] = std::move(radii);
    json targets = json::array();
    for (Index j = 0; j < info.cluster_targets.size(); ++j)
      targets.push_back(info.cluster_targets(j));
    sidecar["cluster_targets"] = std::move(targets);
    json ids = json::array();
    for (int id : data.cluster_ids) ids.push_back(id);
    sidecar["cluster_ids"] = std::move(ids);
  } else if (kind == "lowrank") {
    LowRankSpec spec;
    spec.d = params.value("d", 6);
    spec.m = params.value("m", 8);
    spec.rank = params.value("rank", 2);
    spec.teacher_width = params.value("teacher_width", 1);
    spec.B = params.value("B", 1.0);
    auto [generated, teacher] = gen_lowrank_realizable(spec, rng);
    data = std::move(generated);
    const std::string teacher_file = out_path(out, "teacher.json");
    write_params_json(NetParams(teacher), teacher_file);
    sidecar["rank"] = spec.rank;
    sidecar["B"] = spec.B;
    sidecar["teacher_width"] = spec.teacher_width;
    sidecar["teacher_file"] = teacher_file;
  } else {
    throw std::invalid_argument("unknown generator kind: " + kind);
  }
  write_dataset_csv(data, out_path(out, "dataset.csv"));
  write_text_file(out_path(out, "dataset_info.json"), sidecar.dump(2) + "\n");
  std::cout << "wrote " << out_path(out, "dataset.csv") << " (" << data.m() << " instances)\n";
  return 0;
}

// --------------------------------------------------------------------------
// solve-basin
// --------------------------------------------------------------------------

int run_solve_basin(const std::string& dataset_file, const std::string& params_file,
                    double tol, const std::string& out) {
  ensure_out(out);
  const Dataset data = read_dataset_csv(dataset_file);
  const NetParams params = read_params_json(params_file);
  if (!std::holds_alternative<TwoLayerParams>(params))
    throw std::invalid_argument("basin solves need two-layer parameters");
  const auto& net = std::get<TwoLayerParams>(params);
  const SignPattern pattern = extract_sign_pattern(net, data);
  SolveOptions options;
  options.tol = tol;
  const BasinSolveResult result = solve_basin_value(pattern, data, options);
  json report;
  report["value"] = result.value;
  report["lower_bound"] = result.lower_bound;
  report["feasibility_residual"] = result.feasibility_residual;
  report["grad_residual"] = result.grad_residual;
  report["iterations"] = result.iterations;
  report["converged"] = result.converged;
  report["pattern_hash"] = pattern_hash(pattern);
  report["boundary_pattern"] = pattern.boundary();
  write_text_file(out_path(out, "report.json"), report.dump(2) + "\n");
  std::cout << report.dump(2) << "\n";
  return 0;
}

// --------------------------------------------------------------------------
// path
// --------------------------------------------------------------------------

int run_path(const std::string& start_file, const std::string& end_file,
             const std::string& dataset_file, int grid_n, double epsilon,
             const std::string& out) {
  ensure_out(out);
  const Dataset data = read_dataset_csv(dataset_file);
  PathSpec spec;
  spec.start = read_params_json(start_file);
  spec.end = read_params_json(end_file);
  spec.grid_n = grid_n;
  spec.epsilon = epsilon;
  const MonotonePathResult result = build_monotone_path(spec, data);
  write_text_file(out_path(out, "path.csv"), path_result_to_csv(result));
  write_text_file(out_path(out, "report.json"), path_verdict_to_json(result));
  std::cout << path_verdict_to_json(result);
  return result.monotone ? 0 : 1;
}

// --------------------------------------------------------------------------
// mc
// --------------------------------------------------------------------------

ExperimentParams experiment_from_json(const json& doc) {
  ExperimentParams params;
  params.d = doc.value("d", params.d);
  params.m = doc.value("m", params.m);
  params.n = doc.value("n", params.n);
  if (doc.contains("widths"))
    for (const auto& w : doc.at("widths")) params.widths.push_back(w.get<Index>());
  params.classes = doc.value("classes", params.classes);
  if (doc.contains("loss")) params.loss = loss_from_name(doc.at("loss").get<std::string>());
  params.epsilon = doc.value("epsilon", params.epsilon);
  params.rank = doc.value("rank", params.rank);
  params.teacher_width = doc.value("teacher_width", params.teacher_width);
  params.B = doc.value("B", params.B);
  params.chernoff_c = doc.value("chernoff_c", params.chernoff_c);
  params.clusters = doc.value("clusters", params.clusters);
  params.points_per_cluster = doc.value("points_per_cluster", params.points_per_cluster);
  params.radius_fraction = doc.value("radius_fraction", params.radius_fraction);
  params.gamma = doc.value("gamma", params.gamma);
  params.delta = doc.value("delta", params.delta);
  params.center_norm = doc.value("center_norm", params.center_norm);
  if (doc.contains("init")) {
    const json& init = doc.at("init");
    if (init.is_string()) {
      params.init_kind = init_kind_from_name(init.get<std::string>());
    } else {
      // descriptor form {kind, scale|radius, seed}
      params.init_kind = init_kind_from_name(init.value("kind", "gaussian"));
      params.init_scale = init.value("scale", init.value("radius", 1.0));
    }
  }
  params.solver_tol = doc.value("solver_tol", params.solver_tol);
  params.cross_check_solver = doc.value("cross_check_solver", params.cross_check_solver);
  return params;
}

// per-bound defaults mirroring the verification suite's desk-scale setups
void apply_bound_defaults(BoundId id, ExperimentParams& params, const json& doc) {
  switch (id) {
    case BoundId::Prop1:
      if (params.widths.empty()) params.widths = {4, 6, 3};
      params.d = doc.value("d", Index{3});
      params.m = doc.value("m", Index{10});
      break;
    case BoundId::Thm3:
      params.d = doc.value("d", Index{5});
      params.n = doc.value("n", Index{20});
      break;
    case BoundId::Thm4:
      params.d = doc.value("d", Index{5});
      params.m = doc.value("m", Index{8});
      params.epsilon = doc.value("epsilon", 0.25);
      break;
    case BoundId::Thm5:
      params.m = doc.value("m", Index{5});
      params.d = doc.value("d", Index{8});
      params.n = doc.value("n", Index{15});
      break;
    case BoundId::Thm6:
      params.d = doc.value("d", Index{10});
      params.n = doc.value("n", Index{40});
      break;
    case BoundId::Thm7:
      params.d = doc.value("d", Index{16});
      break;
    case BoundId::CapLemma:
      params.d = doc.value("d", Index{3});
      params.delta = doc.value("delta", 0.5);
      break;
    case BoundId::NoisyRegionLemma:
      params.d = doc.value("d", Index{10});
      params.delta = doc.value("delta", clustered_radius_bound(doc.value("d", Index{10})) *
                                            doc.value("center_norm", 1.0));
      break;
  }
}

int run_mc(const std::string& bound, const std::string& params_file, long trials,
           std::uint64_t seed, int workers, const std::string& out) {
  ensure_out(out);
  const BoundId id = bound_from_name(bound);
  const json doc = load_json(params_file);
  ExperimentParams params = experiment_from_json(doc);
  apply_bound_defaults(id, params, doc);
  const MCRun run = run_bound_experiment(id, params, trials, seed, workers);
  write_text_file(out_path(out, "report.json"), report_to_json(run.report));
  write_text_file(out_path(out, "trials.csv"), trials_to_csv(run.trials));
  std::cout << report_to_json(run.report);
  return run.report.verdict == Verdict::Refuted ? 1 : 0;
}

// --------------------------------------------------------------------------
// verify-all
// --------------------------------------------------------------------------

int run_verify_all(bool quick, std::uint64_t seed, int workers, const std::string& out) {
  ensure_out(out);
  AcceptanceOptions options;
  options.quick = quick;
  options.seed = seed;
  options.workers = workers;
  const auto results = run_acceptance_suite(options, std::cout);
  json report;
  report["quick"] = quick;
  report["seed"] = seed;
  json criteria = json::array();
  for (const auto& result : results) {
    json entry;
    entry["id"] = result.id;
    entry["name"] = result.name;
    entry["passed"] = result.passed;
    entry["detail"] = result.detail;
    criteria.push_back(std::move(entry));
  }
  report["criteria"] = std::move(criteria);
  report["all_passed"] = all_passed(results);
  if (!out.empty()) write_text_file(out_path(out, "report.json"), report.dump(2) + "\n");
  return all_passed(results) ? 0 : 1;
}

int dispatch_config(const std::string& config_file) {
  const json config = load_json(config_file);
  const std::string command = config.at("command").get<std::string>();
  const std::uint64_t seed = config.value("seed", 0);
  const std::string out = config.value("out", "");
  const int workers = config.value("workers", default_workers());
  const json block = config.value(command, json::object());
  if (command == "generate")
    return run_generate(block.at("kind").get<std::string>(), block, seed, out);
  if (command == "solve-basin")
    return run_solve_basin(block.at("dataset").get<std::string>(),
                           block.at("params").get<std::string>(),
                           block.value("tol", 1e-8), out);
  if (command == "path")
    return run_path(block.at("start").get<std::string>(), block.at("end").get<std::string>(),
                    block.at("dataset").get<std::string>(), block.value("grid_n", 1000),
                    block.value("epsilon", 1e-3), out);
  if (command == "mc")
    return run_mc(block.at("bound").get<std::string>(), block.value("params_file", ""),
                  block.value("trials", 1000), seed, workers, out);
  if (command == "verify-all")
    return run_verify_all(block.value("quick", false), seed, workers, out);
  throw std::invalid_argument("unknown command in config: " + command);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ReLU-network objective landscapes: basin values, monotone descent "
               "paths, and Monte Carlo verification of the probability bounds"};
  app.require_subcommand(1);

  std::string kind, params_file, dataset_file, start_file, end_file, config_file;
  std::string out;
  std::uint64_t seed = 0;
  long trials = 1000;
  int workers = default_workers();
  int grid_n = 1000;
  double epsilon = 1e-3;
  double tol = 1e-8;
  std::string bound;
  bool quick = false;

  auto* generate = app.add_subcommand("generate", "generate a special dataset");
  generate->add_option("--kind", kind, "singleton|fullrank|clustered|lowrank")->required();
  generate->add_option("--params", params_file, "generator parameters (JSON)");
  generate->add_option("--seed", seed, "global seed");
  generate->add_option("--out", out, "output directory")->required();

  auto* solve = app.add_subcommand("solve-basin", "basin value of a parameter point");
  solve->add_option("--dataset", dataset_file, "dataset CSV")->required();
  solve->add_option("--params", params_file, "two-layer parameters JSON")->required();
  solve->add_option("--tol", tol, "solver gap tolerance");
  solve->add_option("--out", out, "output directory");

  auto* path = app.add_subcommand("path", "build the strictly monotone descent path");
  path->add_option("--start", start_file, "start parameters JSON")->required();
  path->add_option("--end", end_file, "end parameters JSON")->required();
  path->add_option("--dataset", dataset_file, "dataset CSV")->required();
  path->add_option("--grid-n", grid_n, "lambda grid resolution");
  path->add_option("--epsilon", epsilon, "condition-1 margin");
  path->add_option("--out", out, "output directory");

  auto* mc = app.add_subcommand("mc", "Monte Carlo bound experiment");
  mc->add_option("--bound", bound, "prop1|thm3|thm4|thm5|thm6|thm7|cap|noisy")->required();
  mc->add_option("--params", params_file, "experiment parameters (JSON)");
  mc->add_option("--trials", trials, "trial count");
  mc->add_option("--seed", seed, "global seed");
  mc->add_option("--workers", workers, "worker pool size");
  mc->add_option("--out", out, "output directory");

  auto* verify = app.add_subcommand("verify-all", "run the full verification suite");
  verify->add_flag("--quick", quick, "reduced trial counts");
  verify->add_option("--seed", seed, "global seed")->default_val(20160405);
  verify->add_option("--workers", workers, "worker pool size");
  verify->add_option("--out", out, "output directory");

  auto* from_config = app.add_subcommand("run", "dispatch from a config file");
  from_config->add_option("--config", config_file, "experiment config (JSON)")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (generate->parsed()) return run_generate(kind, load_json(params_file), seed, out);
    if (solve->parsed()) return run_solve_basin(dataset_file, params_file, tol, out);
    if (path->parsed()) return run_path(start_file, end_file, dataset_file, grid_n, epsilon, out);
    if (mc->parsed()) return run_mc(bound, params_file, trials, seed, workers, out);
    if (verify->parsed()) return run_verify_all(quick, seed, workers, out);
    if (from_config->parsed()) return dispatch_config(config_file);
  } catch (const ParseError& err) {
    std::cerr << "parse error: " << err.what() << "\n";
    return 2;
  } catch (const PathConditionError& err) {
    std::cerr << err.what() << "\n";
    return 3;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  }
  return 0;
}
