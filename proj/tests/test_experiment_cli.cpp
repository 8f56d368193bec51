#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "doctest.h"
#include "gridstore/cli.hpp"
#include "gridstore/experiment.hpp"
#include "gridstore/robustness.hpp"

using namespace gridstore;
namespace fs = std::filesystem;

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, sep)) out.push_back(cell);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("gridstore-test-" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli_main(args, out, err);
  return {code, out.str(), err.str()};
}

ExperimentConfig small_config() {
  ExperimentConfig cfg;
  cfg.grid_sides = {5};
  cfg.trials = 4;
  cfg.seed = 11;
  cfg.workers = 2;
  cfg.record_timings = false;
  return cfg;
}

}  // namespace

TEST_CASE("k from fractions") {
  std::vector<int> ks;
  for (double f : ExperimentConfig{}.k_fractions) ks.push_back(k_for_fraction(f, 17));
  CHECK(ks == std::vector<int>{4, 8, 12, 17});
  CHECK(k_for_fraction(0.5, 9) == 4);
  CHECK(k_for_fraction(0.75, 13) == 9);
  CHECK(k_for_fraction(1.0, 9) == 9);
}

TEST_CASE("variant names") {
  const Variant v{StorageAlgo::BaseS, RetrievalPolicy::ImpR};
  CHECK(to_string(v) == "BaseS+ImpR");
  CHECK(parse_variant("BaseS+ImpR") == v);
  CHECK(parse_variant("BaseS:ImpR") == v);
  CHECK_THROWS_AS(parse_variant("ImpS"), std::invalid_argument);
  CHECK_THROWS_AS(parse_variant("Fast+ImpR"), std::invalid_argument);
}

TEST_CASE("trial seeds are shared across variants and differ across cells") {
  std::set<std::uint64_t> seen;
  for (int side : {9, 13}) {
    for (int f = 0; f < 4; ++f) {
      for (int t = 0; t < 50; ++t) seen.insert(trial_seed(7, side, f, t));
    }
  }
  CHECK(seen.size() == 400);
  CHECK(trial_seed(7, 9, 0, 0) == trial_seed(7, 9, 0, 0));
  CHECK(trial_seed(7, 9, 0, 0) != trial_seed(8, 9, 0, 0));
  const Sequence a = random_arrivals(30, 5);
  CHECK(is_permutation_of_labels(a));
  CHECK(a == random_arrivals(30, 5));
}

TEST_CASE("config validation and json round trip") {
  ExperimentConfig cfg = small_config();
  CHECK_NOTHROW(validate(cfg));
  cfg.output_path = "out.csv";
  cfg.variants = {{StorageAlgo::ImpS, RetrievalPolicy::ImpR}};
  const ExperimentConfig back = config_from_json(config_to_json(cfg));
  CHECK(back.grid_sides == cfg.grid_sides);
  CHECK(back.k_fractions == cfg.k_fractions);
  CHECK(back.trials == cfg.trials);
  CHECK(back.seed == cfg.seed);
  CHECK(back.variants == cfg.variants);
  CHECK(back.output_path == cfg.output_path);
  CHECK(back.workers == cfg.workers);
  CHECK(back.record_timings == cfg.record_timings);
  CHECK(back.backtrack_budget == cfg.backtrack_budget);

  const ExperimentConfig defaults = config_from_json(R"({"gridSides": [9, 13], "seed": 3})");
  CHECK(defaults.trials == 50);
  CHECK(defaults.k_fractions.size() == 4);
  CHECK(defaults.variants.size() == 4);

  auto bad = [](auto mutate) {
    ExperimentConfig c = small_config();
    mutate(c);
    return c;
  };
  CHECK_THROWS_AS(validate(bad([](auto& c) { c.trials = 0; })), std::invalid_argument);
  CHECK_THROWS_AS(validate(bad([](auto& c) { c.grid_sides.clear(); })), std::invalid_argument);
  CHECK_THROWS_AS(validate(bad([](auto& c) { c.k_fractions = {0.0}; })), std::invalid_argument);
  CHECK_THROWS_AS(validate(bad([](auto& c) { c.k_fractions = {1.5}; })), std::invalid_argument);
  CHECK_THROWS_AS(validate(bad([](auto& c) { c.variants.clear(); })), std::invalid_argument);
  CHECK_THROWS_AS(config_from_json("{"), std::invalid_argument);
  CHECK_THROWS_AS(config_from_json(R"({"gridSides": "nine"})"), std::invalid_argument);
  CHECK_THROWS_AS(config_from_json(R"({"gridSides": [9], "bogus": 1})"), std::invalid_argument);
}

TEST_CASE("experiment rows: schema, invariants and determinism") {
  const ExperimentConfig cfg = small_config();
  const std::vector<TrialRow> rows = run_experiment(cfg);
  REQUIRE(rows.size() == 4 * 4 * 4);

  std::ostringstream a, b;
  write_csv(a, rows);
  write_csv(b, run_experiment(cfg));
  CHECK(a.str() == b.str());
  ExperimentConfig serial = cfg;
  serial.workers = 1;
  std::ostringstream c;
  write_csv(c, run_experiment(serial));
  CHECK(a.str() == c.str());

  const auto lines = lines_of(a.str());
  REQUIRE(lines.size() == rows.size() + 1);
  CHECK(lines[0] == kCsvHeader);
  CHECK(split(lines[1], ',').size() == 15);

  std::size_t i = 0;
  for (int f = 0; f < 4; ++f) {
    for (const Variant& v : cfg.variants) {
      for (int t = 0; t < cfg.trials; ++t, ++i) {
        const TrialRow& row = rows[i];
        CHECK(row.trial_index == t);
        CHECK(row.storage == v.storage);
        CHECK(row.retrieval == v.retrieval);
        CHECK(row.k_requested == k_for_fraction(cfg.k_fractions[f], 5));
        CHECK(row.seed == trial_seed(cfg.seed, 5, f, t));
        CHECK_FALSE(row.error);
        CHECK(row.distance_subopt == row.total_distance - 5LL * 5 * 6);
        CHECK(row.distance_subopt >= 0);
        CHECK(row.relocations >= 0);
        CHECK(row.k_achieved <= row.k_requested);
        if (row.storage == StorageAlgo::BaseS) CHECK(row.k_achieved == 0);
        if (row.robust_found && row.k_achieved == row.k_requested) {
          CHECK(row.relocations == 0);
          CHECK(row.io_usage == 0);
        }
        CHECK(row.storage_time_ms == 0.0);
      }
    }
  }
}

TEST_CASE("matched variants share arrivals and streams") {
  const GridSpec spec(6, 6);
  const Sequence a = random_arrivals(36, 9);
  const Episode base = run_episode(spec, a, 3, 44, {StorageAlgo::BaseS, RetrievalPolicy::BaseR});
  const Episode imp = run_episode(spec, a, 3, 44, {StorageAlgo::BaseS, RetrievalPolicy::ImpR});
  CHECK(base.arrangement == imp.arrangement);
  CHECK(base.retrieval.departures == imp.retrieval.departures);
  CHECK(is_valid_arrangement(base.arrangement, a, 0));

  // The full episode log replays from an empty grid.
  WorldState w(spec, a);
  for (const Action& act : base.storage_log) w.apply(act);
  for (const Action& act : base.retrieval.log) w.apply(act);
  CHECK(w.departed_count() == 36);
}

TEST_CASE("ablation table") {
  const auto rows = run_ablation({9}, 1, 3, 10, 5, 1);
  REQUIRE(rows.size() == 3);
  for (const AblationRow& r : rows) {
    CHECK(r.side == 9);
    CHECK(r.trials == 10);
    CHECK(r.enhanced_successes >= r.plain_successes);
    CHECK(r.limit_k == 3);
  }
  CHECK(rows[0].k == 1);
  CHECK(rows[2].k == 3);
  CHECK(run_ablation({15}, 6, 6, 1, 0, 1)[0].limit_k == 6);
  std::ostringstream out;
  write_ablation_csv(out, rows);
  const auto lines = lines_of(out.str());
  CHECK(lines.size() == 4);
  CHECK(lines[0] == kAblationHeader);
}

TEST_CASE("cli: solve then verify") {
  TempDir dir;
  {
    std::ofstream f(dir / "a.txt");
    f << "7,3,11,1,9,4,6,12,2,10,8,5,13,14,15\n";
  }
  const Run solve = cli({"solve", "--rows", "3", "--cols", "5", "--k", "1", "--arrivals",
                         dir / "a.txt", "--out", dir / "arr.txt"});
  CHECK(solve.code == kExitOk);
  CHECK(fs::exists(dir / "arr.txt"));
  const Run verify =
      cli({"verify", "--arrangement", dir / "arr.txt", "--arrivals", dir / "a.txt", "--k", "1"});
  CHECK(verify.code == kExitOk);
  CHECK(verify.out == "valid\n");

  const Run simulate = cli({"simulate", "--arrangement", dir / "arr.txt", "--arrivals",
                            dir / "a.txt", "--k", "1", "--seed", "4"});
  CHECK(simulate.code == kExitOk);
  CHECK(simulate.out.find("\"relocations\": 0") != std::string::npos);
}

TEST_CASE("cli: lower bound instance is infeasible at 2k+2 columns") {
  TempDir dir;
  CHECK(cli({"lb-instance", "--k", "1", "--rows", "2", "--cols", "4", "--out", dir / "lb.txt"})
            .code == kExitOk);
  const Run v = cli({"verify", "--arrivals", dir / "lb.txt", "--k", "1", "--exhaustive", "--rows",
                     "2", "--cols", "4"});
  CHECK(v.code == kExitRejected);
  CHECK(v.out == "infeasible\n");

  CHECK(cli({"lb-instance", "--k", "1", "--rows", "2", "--cols", "5", "--out", dir / "lb5.txt"})
            .code == kExitOk);
  const Run v5 = cli({"verify", "--arrivals", dir / "lb5.txt", "--k", "1", "--exhaustive",
                      "--rows", "2", "--cols", "5"});
  CHECK(v5.code == kExitOk);
  CHECK(v5.out == "feasible\n");
}

TEST_CASE("cli: experiment and ablation write csv") {
  TempDir dir;
  const Run e = cli({"experiment", "--sides", "5", "--trials", "3", "--seed", "7", "--variants",
                     "BaseS+BaseR,ImpS+ImpR", "--no-timings", "--out", dir / "e.csv"});
  REQUIRE(e.code == kExitOk);
  const auto lines = lines_of(slurp(dir / "e.csv"));
  CHECK(lines.size() == 1 + 2 * 4 * 3);
  CHECK(lines[0] == kCsvHeader);

  {
    std::ofstream f(dir / "cfg.json");
    f << R"({"gridSides": [5], "trials": 2, "seed": 1, "recordTimings": false,
             "variants": ["ImpS+ImpR"], "outputPath": ")"
      << (dir / "c.csv") << "\"}";
  }
  CHECK(cli({"experiment", "--config", dir / "cfg.json"}).code == kExitOk);
  CHECK(lines_of(slurp(dir / "c.csv")).size() == 1 + 4 * 2);

  const Run a = cli({"ablation", "--sides", "7", "--k-min", "1", "--k-max", "2", "--trials", "5",
                     "--out", dir / "ab.csv"});
  CHECK(a.code == kExitOk);
  CHECK(lines_of(slurp(dir / "ab.csv")).size() == 3);
}

TEST_CASE("cli: error exits") {
  CHECK(cli({}).code == kExitUsage);
  CHECK(cli({"frobnicate"}).code == kExitUsage);
  CHECK(cli({"solve", "--rows", "3"}).code == kExitUsage);
  CHECK(cli({"solve", "--rows", "3", "--cols", "5", "--k", "-1", "--random", "1"}).code ==
        kExitUsage);
  const Run missing = cli({"verify", "--arrangement", "/nonexistent/arr.txt", "--arrivals",
                           "/nonexistent/a.txt"});
  CHECK(missing.code == kExitIo);
  CHECK_FALSE(missing.err.empty());
  CHECK(cli({"experiment", "--config", "/nonexistent/cfg.json"}).code == kExitIo);
}
