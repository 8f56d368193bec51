#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gridstore/retrieval.hpp"
#include "gridstore/solvers.hpp"
#include "gridstore/world.hpp"

namespace gridstore {

enum class StorageAlgo { BaseS, ImpS };

std::string_view to_string(StorageAlgo algo);

struct Variant {
  StorageAlgo storage = StorageAlgo::ImpS;
  RetrievalPolicy retrieval = RetrievalPolicy::ImpR;

  friend bool operator==(const Variant&, const Variant&) = default;
};

/// "ImpS+ImpR" and the like.
std::string to_string(const Variant& v);
/// Accepts "ImpS+ImpR" or "ImpS:ImpR". Throws std::invalid_argument.
Variant parse_variant(std::string_view text);

struct ExperimentConfig {
  std::vector<int> grid_sides;
  std::vector<double> k_fractions{0.25, 0.5, 0.75, 1.0};
  int trials = 50;
  std::uint64_t seed = 0;
  std::vector<Variant> variants{{StorageAlgo::BaseS, RetrievalPolicy::BaseR},
                                {StorageAlgo::ImpS, RetrievalPolicy::BaseR},
                                {StorageAlgo::BaseS, RetrievalPolicy::ImpR},
                                {StorageAlgo::ImpS, RetrievalPolicy::ImpR}};
  std::string output_path;
  /// Worker threads for the trial pool; 0 resolves like the solvers.
  int workers = 0;
  /// When false the timing columns are written as 0 so output is byte-stable.
  bool record_timings = true;
  long long backtrack_budget = 1'000'000;
};

/// Throws std::invalid_argument on an invalid config.
void validate(const ExperimentConfig& config);

/// JSON mirror of ExperimentConfig. Keys: gridSides, kFractions, trials,
/// seed, variants, outputPath, workers, recordTimings, backtrackBudget.
ExperimentConfig config_from_json(std::string_view text);
std::string config_to_json(const ExperimentConfig& config);

struct TrialRow {
  int r = 0;
  int c = 0;
  int k_requested = 0;
  int k_achieved = 0;
  int trial_index = 0;
  std::uint64_t seed = 0;
  StorageAlgo storage = StorageAlgo::BaseS;
  RetrievalPolicy retrieval = RetrievalPolicy::BaseR;
  long long relocations = 0;
  long long io_usage = 0;
  long long total_distance = 0;
  long long distance_subopt = 0;
  double storage_time_ms = 0.0;
  double retrieval_time_ms = 0.0;
  double max_retrieve_ms = 0.0;
  bool robust_found = false;
  /// Set when the trial aborted; metric columns are then left empty.
  std::optional<std::string> error;
};

inline constexpr std::string_view kCsvHeader =
    "r,c,kRequested,kAchieved,trialIndex,seed,storageAlgo,retrievalAlgo,relocations,ioUsage,"
    "totalDistance,distanceSubopt,storageTimeMs,retrievalTimeMs,robustFound";

void write_csv(std::ostream& out, const std::vector<TrialRow>& rows);

/// k = floor(fraction * c), guarding against representation error.
int k_for_fraction(double fraction, int cols);

/// Seed shared by every variant of one (side, fraction, trial) cell.
std::uint64_t trial_seed(std::uint64_t master, int side, int fraction_index, int trial_index);

/// Uniformly random arrival order of 1..n.
Sequence random_arrivals(int n, std::uint64_t seed);

struct Episode {
  Arrangement arrangement;
  int k_achieved = 0;
  bool robust_found = false;
  double storage_ms = 0.0;
  double retrieval_ms = 0.0;
  RetrievalResult retrieval;
  std::vector<Action> storage_log;
};

/// Storage of `arrivals` by `variant`, then retrieval against a stream at k.
Episode run_episode(const GridSpec& spec, std::span<const Load> arrivals, int k,
                    std::uint64_t stream_seed, const Variant& variant,
                    const SolverConfig& solver = {});

/// Rows in canonical (side, fraction, variant, trial) order.
std::vector<TrialRow> run_experiment(const ExperimentConfig& config);

struct AblationRow {
  int side = 0;
  int k = 0;
  int trials = 0;
  int plain_successes = 0;
  int enhanced_successes = 0;
  /// Largest k the column-count lower bound allows without relocations.
  int limit_k = 0;

  double plain_rate() const { return trials ? static_cast<double>(plain_successes) / trials : 0; }
  double enhanced_rate() const {
    return trials ? static_cast<double>(enhanced_successes) / trials : 0;
  }
};

inline constexpr std::string_view kAblationHeader =
    "side,k,trials,plainSuccess,enhancedSuccess,plainRate,enhancedRate,limitK";

std::vector<AblationRow> run_ablation(const std::vector<int>& sides, int k_min, int k_max,
                                      int trials, std::uint64_t seed, int workers = 0);

void write_ablation_csv(std::ostream& out, const std::vector<AblationRow>& rows);

}  // namespace gridstore
