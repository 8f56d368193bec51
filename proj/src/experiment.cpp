#include "gridstore/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "gridstore/robustness.hpp"
#include "json.hpp"

namespace gridstore {

namespace {

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t stream_seed_for(std::uint64_t trial) { return splitmix(trial ^ 0x5eed5eed5eed5eedULL); }

double ms_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

// Runs fn(i) for i in [0, count) on a small pool.
template <typename Fn>
void parallel_for(int count, int workers, Fn&& fn) {
  workers = std::max(1, std::min(workers, count));
  if (workers == 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::jthread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) fn(i);
    });
  }
}

}  // namespace

std::string_view to_string(StorageAlgo algo) {
  return algo == StorageAlgo::BaseS ? "BaseS" : "ImpS";
}

std::string to_string(const Variant& v) {
  return std::string(to_string(v.storage)) + "+" + std::string(to_string(v.retrieval));
}

Variant parse_variant(std::string_view text) {
  const auto sep = text.find_first_of("+:");
  if (sep == std::string_view::npos) {
    throw std::invalid_argument("variant must look like ImpS+ImpR: " + std::string(text));
  }
  const std::string_view s = text.substr(0, sep);
  const std::string_view r = text.substr(sep + 1);
  Variant v;
  if (s == "BaseS") v.storage = StorageAlgo::BaseS;
  else if (s == "ImpS") v.storage = StorageAlgo::ImpS;
  else throw std::invalid_argument("unknown storage algorithm: " + std::string(s));
  if (r == "BaseR") v.retrieval = RetrievalPolicy::BaseR;
  else if (r == "ImpR") v.retrieval = RetrievalPolicy::ImpR;
  else throw std::invalid_argument("unknown retrieval algorithm: " + std::string(r));
  return v;
}

void validate(const ExperimentConfig& config) {
  if (config.grid_sides.empty()) throw std::invalid_argument("no grid sides given");
  for (int s : config.grid_sides) {
    if (s < 1) throw std::invalid_argument("grid sides must be positive");
  }
  if (config.k_fractions.empty()) throw std::invalid_argument("no k fractions given");
  for (double f : config.k_fractions) {
    if (!(f > 0.0 && f <= 1.0)) throw std::invalid_argument("k fractions must lie in (0, 1]");
  }
  if (config.trials < 1) throw std::invalid_argument("trials must be at least 1");
  if (config.variants.empty()) throw std::invalid_argument("no variants given");
}

ExperimentConfig config_from_json(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  if (!j.is_object()) throw std::invalid_argument("config: expected a JSON object");
  static const std::set<std::string> known{"gridSides", "kFractions", "trials",
                                           "seed",      "variants",   "outputPath",
                                           "workers",   "recordTimings", "backtrackBudget"};
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) throw std::invalid_argument("config: unknown key '" + key + "'");
  }
  ExperimentConfig c;
  try {
    if (j.contains("gridSides")) c.grid_sides = j.at("gridSides").get<std::vector<int>>();
    if (j.contains("kFractions")) c.k_fractions = j.at("kFractions").get<std::vector<double>>();
    if (j.contains("trials")) c.trials = j.at("trials").get<int>();
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("variants")) {
      c.variants.clear();
      for (const auto& v : j.at("variants")) c.variants.push_back(parse_variant(v.get<std::string>()));
    }
    if (j.contains("outputPath")) c.output_path = j.at("outputPath").get<std::string>();
    if (j.contains("workers")) c.workers = j.at("workers").get<int>();
    if (j.contains("recordTimings")) c.record_timings = j.at("recordTimings").get<bool>();
    if (j.contains("backtrackBudget")) c.backtrack_budget = j.at("backtrackBudget").get<long long>();
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  validate(c);
  return c;
}

std::string config_to_json(const ExperimentConfig& config) {
  nlohmann::json j;
  j["gridSides"] = config.grid_sides;
  j["kFractions"] = config.k_fractions;
  j["trials"] = config.trials;
  j["seed"] = config.seed;
  std::vector<std::string> variants;
  for (const Variant& v : config.variants) variants.push_back(to_string(v));
  j["variants"] = variants;
  j["outputPath"] = config.output_path;
  j["workers"] = config.workers;
  j["recordTimings"] = config.record_timings;
  j["backtrackBudget"] = config.backtrack_budget;
  return j.dump(2);
}

void write_csv(std::ostream& out, const std::vector<TrialRow>& rows) {
  out << kCsvHeader << '\n';
  for (const TrialRow& row : rows) {
    out << row.r << ',' << row.c << ',' << row.k_requested << ',' << row.k_achieved << ','
        << row.trial_index << ',' << row.seed << ',' << to_string(row.storage) << ','
        << to_string(row.retrieval) << ',';
    if (row.error) {
      out << ",,,,,,false\n";
      continue;
    }
    out << row.relocations << ',' << row.io_usage << ',' << row.total_distance << ','
        << row.distance_subopt << ',' << std::fixed << std::setprecision(3)
        << row.storage_time_ms << ',' << row.retrieval_time_ms << std::defaultfloat << ','
        << (row.robust_found ? "true" : "false") << '\n';
  }
}

int k_for_fraction(double fraction, int cols) {
  return static_cast<int>(std::floor(fraction * cols + 1e-9));
}

std::uint64_t trial_seed(std::uint64_t master, int side, int fraction_index, int trial_index) {
  std::uint64_t h = splitmix(master);
  h = splitmix(h ^ static_cast<std::uint64_t>(side));
  h = splitmix(h ^ static_cast<std::uint64_t>(fraction_index));
  return splitmix(h ^ static_cast<std::uint64_t>(trial_index));
}

Sequence random_arrivals(int n, std::uint64_t seed) {
  Sequence s(static_cast<std::size_t>(n));
  std::iota(s.begin(), s.end(), 1);
  std::mt19937_64 rng(seed);
  std::shuffle(s.begin(), s.end(), rng);
  return s;
}

Episode run_episode(const GridSpec& spec, std::span<const Load> arrivals, int k,
                    std::uint64_t stream_seed, const Variant& variant,
                    const SolverConfig& solver) {
  const auto t0 = std::chrono::steady_clock::now();
  std::optional<Arrangement> arr;
  int achieved = 0;
  if (variant.storage == StorageAlgo::ImpS) {
    SolveOutcome outcome = max_k_search(arrivals, spec, k, solver);
    arr = std::move(outcome.arrangement);
    achieved = outcome.achieved_k;
  } else {
    arr = base_storage(arrivals, spec, solver);
  }
  Episode ep{std::move(*arr), achieved, false, ms_since(t0), 0.0, {}, {}};
  ep.robust_found = is_k_robust(ep.arrangement, k);

  ep.storage_log = plan_storage(ep.arrangement, arrivals);
  WorldState world(spec, Sequence(arrivals.begin(), arrivals.end()));
  for (const Action& a : ep.storage_log) world.apply(a);

  OnlinePerturbationStream stream(spec.capacity(), k, stream_seed);
  const auto t1 = std::chrono::steady_clock::now();
  ep.retrieval = run_retrieval(world, stream, variant.retrieval);
  ep.retrieval_ms = ms_since(t1);

  // Metrics over the whole episode: storage moves plus retrieval.
  std::vector<Action> full = ep.storage_log;
  full.insert(full.end(), ep.retrieval.log.begin(), ep.retrieval.log.end());
  ep.retrieval.metrics = measure(full, WorldState(spec, Sequence(arrivals.begin(), arrivals.end())));
  return ep;
}

std::vector<TrialRow> run_experiment(const ExperimentConfig& config) {
  validate(config);
  struct Task {
    int side, fraction_index, variant_index, trial;
  };
  std::vector<Task> tasks;
  for (int side : config.grid_sides) {
    for (int f = 0; f < static_cast<int>(config.k_fractions.size()); ++f) {
      for (int v = 0; v < static_cast<int>(config.variants.size()); ++v) {
        for (int t = 0; t < config.trials; ++t) tasks.push_back({side, f, v, t});
      }
    }
  }
  const int workers = resolve_workers(config.workers);
  SolverConfig solver;
  solver.backtrack_budget = config.backtrack_budget;
  solver.workers = workers > 1 ? 1 : 0;

  std::vector<TrialRow> rows(tasks.size());
  parallel_for(static_cast<int>(tasks.size()), workers, [&](int i) {
    const Task& task = tasks[static_cast<std::size_t>(i)];
    const GridSpec spec(task.side, task.side);
    const Variant& variant = config.variants[static_cast<std::size_t>(task.variant_index)];
    TrialRow& row = rows[static_cast<std::size_t>(i)];
    row.r = spec.rows();
    row.c = spec.cols();
    row.k_requested = k_for_fraction(config.k_fractions[static_cast<std::size_t>(task.fraction_index)],
                                     spec.cols());
    row.trial_index = task.trial;
    row.seed = trial_seed(config.seed, task.side, task.fraction_index, task.trial);
    row.storage = variant.storage;
    row.retrieval = variant.retrieval;
    try {
      const Sequence arrivals = random_arrivals(spec.capacity(), row.seed);
      const Episode ep =
          run_episode(spec, arrivals, row.k_requested, stream_seed_for(row.seed), variant, solver);
      const MetricsRecord& m = ep.retrieval.metrics;
      row.k_achieved = ep.k_achieved;
      row.relocations = m.relocations;
      row.io_usage = m.io_usage;
      row.total_distance = m.total_distance;
      row.distance_subopt = m.distance_subopt;
      row.robust_found = ep.robust_found;
      if (config.record_timings) {
        row.storage_time_ms = ep.storage_ms;
        row.retrieval_time_ms = ep.retrieval_ms;
        row.max_retrieve_ms = ep.retrieval.max_step_ms;
      }
    } catch (const std::exception& e) {
      row.error = e.what();
    }
  });
  return rows;
}

std::vector<AblationRow> run_ablation(const std::vector<int>& sides, int k_min, int k_max,
                                      int trials, std::uint64_t seed, int workers) {
  if (trials < 1) throw std::invalid_argument("trials must be at least 1");
  if (k_min < 0 || k_max < k_min) throw std::invalid_argument("invalid k range");
  std::vector<AblationRow> rows;
  for (int side : sides) {
    if (side < 1) throw std::invalid_argument("grid sides must be positive");
    for (int k = k_min; k <= k_max; ++k) {
      AblationRow row;
      row.side = side;
      row.k = k;
      row.trials = trials;
      row.limit_k = std::max(0, (side - 3) / 2);
      rows.push_back(row);
    }
  }
  const int pool = resolve_workers(workers);
  SolverConfig solver;
  solver.workers = pool > 1 ? 1 : 0;
  const int per_row = trials;
  std::vector<char> plain(rows.size() * static_cast<std::size_t>(per_row), 0);
  std::vector<char> enhanced(plain.size(), 0);
  parallel_for(static_cast<int>(plain.size()), pool, [&](int i) {
    const AblationRow& row = rows[static_cast<std::size_t>(i / per_row)];
    const int t = i % per_row;
    const GridSpec spec(row.side, row.side);
    const Sequence arrivals = random_arrivals(spec.capacity(), trial_seed(seed, row.side, row.k, t));
    plain[static_cast<std::size_t>(i)] = find_robust_arrangement(arrivals, spec, row.k, solver).ok();
    enhanced[static_cast<std::size_t>(i)] = find_robust_enhanced(arrivals, spec, row.k, solver).ok();
  });
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (int t = 0; t < per_row; ++t) {
      rows[r].plain_successes += plain[r * per_row + static_cast<std::size_t>(t)];
      rows[r].enhanced_successes += enhanced[r * per_row + static_cast<std::size_t>(t)];
    }
  }
  return rows;
}

void write_ablation_csv(std::ostream& out, const std::vector<AblationRow>& rows) {
  out << kAblationHeader << '\n';
  for (const AblationRow& row : rows) {
    out << row.side << ',' << row.k << ',' << row.trials << ',' << row.plain_successes << ','
        << row.enhanced_successes << ',' << std::fixed << std::setprecision(4) << row.plain_rate()
        << ',' << row.enhanced_rate() << std::defaultfloat << ',' << row.limit_k << '\n';
  }
}

}  // namespace gridstore
