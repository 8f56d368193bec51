#include "gridstore/cli.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "gridstore/experiment.hpp"
#include "gridstore/robustness.hpp"
#include "gridstore/text_format.hpp"
#include "json.hpp"

namespace gridstore {

namespace {

class IoFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoFailure("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

template <typename Parse>
auto parse_file(const std::string& path, Parse&& parse) {
  const std::string text = read_file(path);
  try {
    return parse(text);
  } catch (const std::invalid_argument& e) {
    throw IoFailure(path + ": " + e.what());
  }
}

// Writes to `path`, or to `out` when the path is empty.
void emit(const std::string& path, std::ostream& out, const std::string& text) {
  if (path.empty()) {
    out << text;
    return;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw IoFailure("cannot write " + path);
  file << text;
  if (!file) throw IoFailure("write failed: " + path);
}

struct SolveArgs {
  int rows = 0, cols = 0, k = 0;
  std::string arrivals_path;
  std::optional<std::uint64_t> random_seed;
  std::string method = "enhanced";
  int offset = 0;
  long long budget = 1'000'000;
  std::string out_path;
};

struct SimulateArgs {
  std::string arrangement_path;
  std::string arrivals_path;
  int k = 0;
  std::uint64_t seed = 0;
  std::string policy = "ImpR";
  std::string log_path;
};

struct ExperimentArgs {
  std::string config_path;
  std::vector<int> sides;
  std::vector<double> fractions;
  int trials = 0;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> variants;
  std::string out_path;
  int workers = 0;
  bool no_timings = false;
};

struct AblationArgs {
  std::vector<int> sides;
  int k_min = 0, k_max = 0, trials = 100;
  std::uint64_t seed = 0;
  int workers = 0;
  std::string out_path;
};

struct VerifyArgs {
  std::string arrangement_path;
  std::string arrivals_path;
  int k = 0;
  bool exhaustive = false;
  int rows = 0, cols = 0;
};

struct LbArgs {
  int k = 0, rows = 0, cols = 0;
  std::uint64_t seed = 0;
  std::string out_path;
};

RetrievalPolicy parse_policy(const std::string& s) {
  if (s == "BaseR") return RetrievalPolicy::BaseR;
  if (s == "ImpR") return RetrievalPolicy::ImpR;
  throw std::invalid_argument("unknown policy: " + s);
}

int run_solve(const SolveArgs& a, std::ostream& out, std::ostream& err) {
  const GridSpec spec(a.rows, a.cols);
  const Sequence arrivals = a.random_seed ? random_arrivals(spec.capacity(), *a.random_seed)
                                          : parse_file(a.arrivals_path, parse_sequence);
  SolverConfig config;
  config.offset = a.offset;
  config.backtrack_budget = a.budget;
  std::optional<Arrangement> arr;
  std::string note;
  if (a.method == "base") {
    arr = base_storage(arrivals, spec, config);
    note = "k 0";
  } else if (a.method == "congruence") {
    arr = congruence_partition_storage(arrivals, spec, a.k, config);
    note = "k " + std::to_string(a.k);
  } else {
    SolveOutcome o;
    if (a.method == "pairs") o = find_robust_arrangement(arrivals, spec, a.k, config);
    else if (a.method == "enhanced") o = find_robust_enhanced(arrivals, spec, a.k, config);
    else if (a.method == "max-k") o = max_k_search(arrivals, spec, a.k, config);
    else throw std::invalid_argument("unknown method: " + a.method);
    if (!o.ok()) {
      err << "no arrangement found (" << to_string(o.status) << ")\n";
      return kExitRejected;
    }
    arr = std::move(o.arrangement);
    note = "k " + std::to_string(o.achieved_k) + " offset " + std::to_string(o.offset_used) +
           " method " + o.method;
  }
  if (a.random_seed) {
    err << "arrivals " << format_sequence(arrivals) << '\n';
  }
  err << note << '\n';
  emit(a.out_path, out, format_arrangement(*arr));
  return kExitOk;
}

int run_simulate(const SimulateArgs& a, std::ostream& out) {
  const Arrangement arr = parse_file(a.arrangement_path, parse_arrangement);
  if (!arr.is_complete()) throw std::invalid_argument("arrangement must place every load");
  const RetrievalPolicy policy = parse_policy(a.policy);
  std::vector<Action> storage;
  WorldState start = WorldState::from_arrangement(arr);
  std::optional<WorldState> empty_start;
  if (!a.arrivals_path.empty()) {
    const Sequence arrivals = parse_file(a.arrivals_path, parse_sequence);
    storage = plan_storage(arr, arrivals);
    empty_start.emplace(arr.spec(), arrivals);
  }
  OnlinePerturbationStream stream(arr.loads(), a.k, a.seed);
  const RetrievalResult result = run_retrieval(start, stream, policy);

  nlohmann::json j;
  j["policy"] = a.policy;
  j["k"] = a.k;
  j["seed"] = a.seed;
  j["departures"] = result.departures;
  j["relocations"] = result.metrics.relocations;
  j["ioUsage"] = result.metrics.io_usage;
  j["retrievalDistance"] = result.metrics.total_distance;
  j["actions"] = result.metrics.actions;
  if (empty_start) {
    std::vector<Action> full = storage;
    full.insert(full.end(), result.log.begin(), result.log.end());
    const MetricsRecord m = measure(full, *empty_start);
    j["totalDistance"] = m.total_distance;
    j["distanceSubopt"] = m.distance_subopt;
  }
  out << j.dump(2) << '\n';
  if (!a.log_path.empty()) {
    std::string text = format_actions(storage) + format_actions(result.log);
    emit(a.log_path, out, text);
  }
  return kExitOk;
}

int run_experiment_cmd(const ExperimentArgs& a, std::ostream& out, std::ostream& err) {
  ExperimentConfig config;
  if (!a.config_path.empty()) config = parse_file(a.config_path, config_from_json);
  if (!a.sides.empty()) config.grid_sides = a.sides;
  if (!a.fractions.empty()) config.k_fractions = a.fractions;
  if (a.trials > 0) config.trials = a.trials;
  if (a.seed) config.seed = *a.seed;
  if (!a.variants.empty()) {
    config.variants.clear();
    for (const std::string& v : a.variants) config.variants.push_back(parse_variant(v));
  }
  if (!a.out_path.empty()) config.output_path = a.out_path;
  if (a.workers > 0) config.workers = a.workers;
  if (a.no_timings) config.record_timings = false;
  validate(config);

  const std::vector<TrialRow> rows = run_experiment(config);
  std::ostringstream csv;
  write_csv(csv, rows);
  emit(config.output_path, out, csv.str());
  const auto failed = std::count_if(rows.begin(), rows.end(), [](const TrialRow& r) {
    return r.error.has_value();
  });
  if (failed > 0) {
    err << failed << " trials aborted\n";
    for (const TrialRow& r : rows) {
      if (r.error) err << "  trial " << r.trial_index << " side " << r.c << ": " << *r.error << '\n';
    }
  }
  return kExitOk;
}

int run_ablation_cmd(const AblationArgs& a, std::ostream& out) {
  const auto rows = run_ablation(a.sides, a.k_min, a.k_max, a.trials, a.seed, a.workers);
  std::ostringstream csv;
  write_ablation_csv(csv, rows);
  emit(a.out_path, out, csv.str());
  return kExitOk;
}

int run_verify(const VerifyArgs& a, std::ostream& out) {
  const Sequence arrivals = parse_file(a.arrivals_path, parse_sequence);
  if (a.exhaustive) {
    GridSpec spec = a.arrangement_path.empty()
                        ? GridSpec(a.rows, a.cols)
                        : parse_file(a.arrangement_path, parse_arrangement).spec();
    if (a.rows > 0 && a.cols > 0) spec = GridSpec(a.rows, a.cols);
    if (static_cast<int>(arrivals.size()) != spec.capacity()) {
      throw std::invalid_argument("exhaustive check needs one load per cell");
    }
    const bool feasible = brute_force_zero_reloc_exists(spec, arrivals, a.k);
    out << (feasible ? "feasible" : "infeasible") << '\n';
    if (!feasible) return kExitRejected;
    if (a.arrangement_path.empty()) return kExitOk;
  }
  if (a.arrangement_path.empty()) {
    throw std::invalid_argument("verify needs --arrangement or --exhaustive");
  }
  const Arrangement arr = parse_file(a.arrangement_path, parse_arrangement);
  const bool ok = is_valid_arrangement(arr, arrivals, a.k);
  out << (ok ? "valid" : "invalid") << '\n';
  return ok ? kExitOk : kExitRejected;
}

int run_lb(const LbArgs& a, std::ostream& out) {
  const Sequence s = lower_bound_instance(a.k, GridSpec(a.rows, a.cols), a.seed);
  emit(a.out_path, out, format_sequence(s) + "\n");
  return kExitOk;
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Robust storage and retrieval on high-density grids", "gridstore"};
  app.require_subcommand(1);

  SolveArgs solve;
  auto* s = app.add_subcommand("solve", "Compute an arrangement for an arrival order");
  s->add_option("--rows", solve.rows, "Storage rows")->required();
  s->add_option("--cols", solve.cols, "Columns")->required();
  s->add_option("--k", solve.k, "Perturbation bound")->default_val(0);
  auto* arr_opt = s->add_option("--arrivals", solve.arrivals_path, "Arrival order file");
  auto* rnd_opt = s->add_option("--random", solve.random_seed, "Random arrival order from seed");
  arr_opt->excludes(rnd_opt);
  s->add_option("--method", solve.method, "pairs | enhanced | max-k | base | congruence")
      ->check(CLI::IsMember({"pairs", "enhanced", "max-k", "base", "congruence"}));
  s->add_option("--offset", solve.offset, "First-pair offset for --method pairs");
  s->add_option("--budget", solve.budget, "Backtracking node budget");
  s->add_option("--out", solve.out_path, "Output file (default stdout)");

  SimulateArgs sim;
  auto* m = app.add_subcommand("simulate", "Retrieve a stored arrangement against a seeded stream");
  m->add_option("--arrangement", sim.arrangement_path, "Arrangement file")->required();
  m->add_option("--arrivals", sim.arrivals_path, "Arrival order, to include storage moves");
  m->add_option("--k", sim.k, "Perturbation bound")->default_val(0);
  m->add_option("--seed", sim.seed, "Stream seed")->default_val(0);
  m->add_option("--policy", sim.policy, "BaseR | ImpR")->check(CLI::IsMember({"BaseR", "ImpR"}));
  m->add_option("--log", sim.log_path, "Write the action log here");

  ExperimentArgs ex;
  auto* e = app.add_subcommand("experiment", "Run the seeded evaluation grid and write CSV");
  e->add_option("--config", ex.config_path, "JSON config file");
  e->add_option("--sides", ex.sides, "Grid sides")->delimiter(',');
  e->add_option("--fractions", ex.fractions, "k as fractions of c")->delimiter(',');
  e->add_option("--trials", ex.trials, "Trials per cell");
  e->add_option("--seed", ex.seed, "Master seed");
  e->add_option("--variants", ex.variants, "e.g. BaseS+BaseR,ImpS+ImpR")->delimiter(',');
  e->add_option("--out", ex.out_path, "CSV output (default stdout)");
  e->add_option("--workers", ex.workers, "Worker threads");
  e->add_flag("--no-timings", ex.no_timings, "Write zero timings for byte-stable output");

  AblationArgs ab;
  auto* b = app.add_subcommand("ablation", "Success rates with and without the offset sweep");
  b->add_option("--sides", ab.sides, "Grid sides")->delimiter(',')->required();
  b->add_option("--k-min", ab.k_min, "Smallest k")->default_val(0);
  b->add_option("--k-max", ab.k_max, "Largest k")->required();
  b->add_option("--trials", ab.trials, "Trials per k")->default_val(100);
  b->add_option("--seed", ab.seed, "Master seed")->default_val(0);
  b->add_option("--workers", ab.workers, "Worker threads");
  b->add_option("--out", ab.out_path, "CSV output (default stdout)");

  VerifyArgs ver;
  auto* v = app.add_subcommand("verify", "Check an arrangement, or search for one exhaustively");
  v->add_option("--arrangement", ver.arrangement_path, "Arrangement file");
  v->add_option("--arrivals", ver.arrivals_path, "Arrival order file")->required();
  v->add_option("--k", ver.k, "Perturbation bound")->default_val(0);
  v->add_flag("--exhaustive", ver.exhaustive, "Decide whether any valid arrangement exists");
  v->add_option("--rows", ver.rows, "Rows for --exhaustive");
  v->add_option("--cols", ver.cols, "Columns for --exhaustive");

  LbArgs lb;
  auto* l = app.add_subcommand("lb-instance", "Emit an adversarial arrival order");
  l->add_option("--k", lb.k, "Perturbation bound")->required();
  l->add_option("--rows", lb.rows, "Rows")->required();
  l->add_option("--cols", lb.cols, "Columns")->required();
  l->add_option("--seed", lb.seed, "Seed for the free part")->default_val(0);
  l->add_option("--out", lb.out_path, "Output file (default stdout)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& ex_help) {
    return app.exit(ex_help, out, err);
  } catch (const CLI::CallForAllHelp& ex_help) {
    return app.exit(ex_help, out, err);
  } catch (const CLI::ParseError& ex_parse) {
    app.exit(ex_parse, out, err);
    return kExitUsage;
  }

  try {
    if (*s) {
      if (solve.arrivals_path.empty() && !solve.random_seed) {
        throw std::invalid_argument("solve needs --arrivals or --random");
      }
      return run_solve(solve, out, err);
    }
    if (*m) return run_simulate(sim, out);
    if (*e) return run_experiment_cmd(ex, out, err);
    if (*b) return run_ablation_cmd(ab, out);
    if (*v) return run_verify(ver, out);
    if (*l) return run_lb(lb, out);
  } catch (const IoFailure& ex_io) {
    err << "error: " << ex_io.what() << '\n';
    return kExitIo;
  } catch (const BudgetExceeded& ex_budget) {
    err << "error: " << ex_budget.what() << '\n';
    return kExitRejected;
  } catch (const std::invalid_argument& ex_arg) {
    err << "error: " << ex_arg.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& ex_other) {
    err << "error: " << ex_other.what() << '\n';
    return kExitRejected;
  }
  return kExitUsage;
}

int cli_main(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return cli_main(args, std::cout, std::cerr);
}

}  // namespace gridstore
