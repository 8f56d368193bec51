#include "gridstore/solvers.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <climits>
#include <cstdlib>
#include <mutex>
#include <numeric>
#include <random>
#include <thread>

#include "gridstore/robustness.hpp"

namespace gridstore {
namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

void require_instance(std::span<const Load> arrivals, const GridSpec& spec, int k) {
  if (static_cast<int>(arrivals.size()) != spec.capacity()) {
    throw std::invalid_argument("solvers need full density: " + std::to_string(arrivals.size()) +
                                " loads for " + std::to_string(spec.capacity()) + " cells");
  }
  if (!is_permutation_of_labels(arrivals)) {
    throw std::invalid_argument("arrival order must be a permutation of 1..n");
  }
  if (k < 0) throw std::invalid_argument("k must be non-negative");
}

// Front-row grids: every placement is valid.
Arrangement single_row(const GridSpec& spec) {
  Arrangement arr(spec, spec.capacity());
  for (int col = 1; col <= spec.cols(); ++col) arr.place(col, Cell{1, col});
  return arr;
}

// Column-pair procedure state for one run at a fixed offset.
class PairBuilder {
 public:
  PairBuilder(std::span<const Load> arrivals, const GridSpec& spec, int k,
              const std::function<void(const TraceEvent&)>& trace)
      : spec_(spec),
        n_(spec.capacity()),
        k_(k),
        arr_(spec, spec.capacity()),
        reversed_(arrivals.rbegin(), arrivals.rend()),
        arank_(static_cast<std::size_t>(n_) + 1, 0),
        trace_(trace) {
    for (int i = 0; i < n_; ++i) arank_[reversed_[i]] = i;
  }

  std::optional<Arrangement> run(int offset) {
    const ColumnPlan plan = column_plan(spec_.cols());
    for (std::size_t p = 0; p < plan.pairs.size(); ++p) {
      const bool last = p + 1 == plan.pairs.size();
      const int y_start = p == 0 ? offset : 0;
      if (!fill_pair(plan.pairs[p].first, plan.pairs[p].second, y_start, last)) {
        return std::nullopt;
      }
    }
    if (plan.single) {
      // Remaining loads go bottom-up in departure order; checked as a whole below.
      int row = 1;
      for (Load l = 1; l <= n_; ++l) {
        if (!arr_.contains(l)) arr_.place(l, Cell{row++, *plan.single});
      }
    }
    if (!is_valid_arrangement(arr_, Sequence(reversed_.rbegin(), reversed_.rend()), k_)) {
      return std::nullopt;
    }
    return arr_;
  }

 private:
  void emit(TraceEvent::Kind kind, int x, int y, int row, int left, int right) const {
    if (trace_) trace_(TraceEvent{kind, x, y, row, left, right});
  }

  // Valid load `z` at `cell`, counting `other` at `other_cell` as placed.
  bool valid(Load z, Cell cell, Load other, Cell other_cell) const {
    if (cell.row == 1) return true;
    bool departs_ok = false;
    bool arrives_ok = false;
    auto consider = [&](Load u) {
      if (u <= z - k_ - 1) departs_ok = true;
      if (arank_[u] < arank_[z]) arrives_ok = true;
    };
    arr_.for_each_adjacent_load(cell, consider);
    if (adjacent(cell, other_cell)) consider(other);
    return departs_ok && arrives_ok;
  }

  std::optional<Load> first_unassigned_from(int start) const {
    for (int i = start; i < n_; ++i) {
      if (!arr_.contains(reversed_[i])) return reversed_[i];
    }
    return std::nullopt;
  }

  bool fill_pair(int left, int right, int y_start, bool last_pair) {
    const auto left_bottom = first_unassigned_from(y_start);
    if (!left_bottom) return false;
    arr_.place(*left_bottom, Cell{1, left});
    Load right_bottom = 1;
    while (right_bottom <= n_ && arr_.contains(right_bottom)) ++right_bottom;
    if (right_bottom > n_) return false;
    arr_.place(right_bottom, Cell{1, right});
    emit(TraceEvent::Kind::PairStarted, right_bottom, *left_bottom, 1, left, right);

    Load x = k_ + 2;
    for (int row = 2; row <= spec_.rows(); ++row) {
      const Cell rcell{row, right};
      const Cell lcell{row, left};
      bool placed = false;
      while (!placed) {
        while (x <= n_ && arr_.contains(x)) ++x;
        if (x > n_) {
          emit(TraceEvent::Kind::XExhausted, 0, 0, row, left, right);
          return false;
        }
        const Load cand = x++;
        bool quick = false;
        arr_.for_each_adjacent_load(rcell, [&](Load u) {
          if (u <= cand - k_ - 1) quick = true;
        });
        if (!quick) {
          emit(TraceEvent::Kind::XSkipped, cand, 0, row, left, right);
          continue;
        }
        for (int i = y_start; i < n_; ++i) {
          const Load y = reversed_[i];
          if (arr_.contains(y)) continue;
          if (y == cand) {
            emit(TraceEvent::Kind::YEqualsX, cand, y, row, left, right);
            if (last_pair) continue;
            break;
          }
          if (valid(cand, rcell, y, lcell) && valid(y, lcell, cand, rcell)) {
            arr_.place(cand, rcell);
            arr_.place(y, lcell);
            emit(TraceEvent::Kind::PairAccepted, cand, y, row, left, right);
            placed = true;
            break;
          }
          emit(TraceEvent::Kind::YRejected, cand, y, row, left, right);
        }
      }
    }
    return true;
  }

  GridSpec spec_;
  int n_;
  int k_;
  Arrangement arr_;
  Sequence reversed_;
  std::vector<int> arank_;
  const std::function<void(const TraceEvent&)>& trace_;
};

SolveOutcome backtrack(std::span<const Load> arrivals, const GridSpec& spec, int k,
                       long long budget) {
  SearchResult found = search_valid_arrangement(spec, arrivals, k, budget);
  SolveOutcome out;
  out.method = "backtrack";
  out.achieved_k = k;
  if (found.arrangement) {
    out.arrangement = std::move(found.arrangement);
    out.status = SolveStatus::Success;
  } else {
    out.status = found.complete ? SolveStatus::Failure : SolveStatus::BudgetExceeded;
  }
  return out;
}

SolveOutcome success(Arrangement arr, int k, int offset, std::string method) {
  SolveOutcome out;
  out.arrangement = std::move(arr);
  out.status = SolveStatus::Success;
  out.achieved_k = k;
  out.offset_used = offset;
  out.method = std::move(method);
  return out;
}

}  // namespace

std::string to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::Success:
      return "success";
    case SolveStatus::Failure:
      return "failure";
    case SolveStatus::BudgetExceeded:
      return "budget-exceeded";
  }
  return "?";
}

int resolve_workers(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("GRIDSTORE_WORKERS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

ColumnPlan column_plan(int cols) {
  ColumnPlan plan;
  if (cols < 5) return plan;
  plan.pairs.emplace_back(1, 2);
  if (cols % 2 == 0) {
    for (int c = 5; c < cols; c += 2) plan.pairs.emplace_back(c, c + 1);
    plan.pairs.emplace_back(3, 4);
  } else {
    for (int c = 4; c < cols; c += 2) plan.pairs.emplace_back(c, c + 1);
    plan.single = 3;
  }
  return plan;
}

SolveOutcome find_robust_arrangement(std::span<const Load> arrivals, const GridSpec& spec, int k,
                                     const SolverConfig& config) {
  require_instance(arrivals, spec, k);
  const auto start = Clock::now();
  SolveOutcome out;
  if (spec.rows() == 1) {
    out = success(single_row(spec), k, 0, "front-row");
  } else if (spec.cols() < 5) {
    out = backtrack(arrivals, spec, k, config.backtrack_budget);
  } else {
    const int n = spec.capacity();
    if (config.offset < 0 || config.offset > n - spec.rows()) {
      throw std::invalid_argument("offset must lie in 0..n-r");
    }
    PairBuilder builder(arrivals, spec, k, config.trace);
    if (auto arr = builder.run(config.offset)) {
      out = success(std::move(*arr), k, config.offset, "pairs");
    } else {
      out.status = SolveStatus::Failure;
      out.achieved_k = k;
      out.offset_used = config.offset;
      out.method = "pairs";
    }
  }
  out.wall_ms = elapsed_ms(start);
  return out;
}

SolveOutcome find_robust_enhanced(std::span<const Load> arrivals, const GridSpec& spec, int k,
                                  const SolverConfig& config) {
  require_instance(arrivals, spec, k);
  if (spec.rows() == 1 || spec.cols() < 5) {
    SolverConfig single = config;
    single.offset = 0;
    return find_robust_arrangement(arrivals, spec, k, single);
  }
  const auto start = Clock::now();
  const int max_offset = spec.capacity() - spec.rows();
  const int workers = std::min(resolve_workers(config.workers), max_offset + 1);

  std::atomic<int> next_offset{0};
  std::atomic<int> best{INT_MAX};
  std::mutex mu;
  std::optional<Arrangement> winner;

  auto work = [&] {
    while (true) {
      const int offset = next_offset.fetch_add(1);
      if (offset > max_offset || offset > best.load()) return;
      PairBuilder builder(arrivals, spec, k, config.trace);
      auto arr = builder.run(offset);
      if (!arr) continue;
      std::lock_guard lock(mu);
      if (offset < best.load()) {
        best.store(offset);
        winner = std::move(arr);
      }
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int i = 0; i < workers; ++i) pool.emplace_back(work);
  }

  SolveOutcome out;
  out.method = "pairs";
  out.achieved_k = k;
  if (winner) {
    out.arrangement = std::move(winner);
    out.status = SolveStatus::Success;
    out.offset_used = best.load();
  } else {
    out.status = SolveStatus::Failure;
    out.offset_used = max_offset;
  }
  out.wall_ms = elapsed_ms(start);
  return out;
}

Arrangement base_storage(std::span<const Load> arrivals, const GridSpec& spec,
                         const SolverConfig& config) {
  require_instance(arrivals, spec, 0);
  if (spec.rows() == 1) return single_row(spec);
  if (spec.cols() >= 5) {
    SolveOutcome sweep = find_robust_enhanced(arrivals, spec, 0, config);
    if (sweep.ok()) return std::move(*sweep.arrangement);
  }
  SolveOutcome bt = backtrack(arrivals, spec, 0, config.backtrack_budget);
  if (bt.ok()) return std::move(*bt.arrangement);
  if (bt.status == SolveStatus::BudgetExceeded) {
    throw BudgetExceeded("base storage: backtracking budget of " +
                         std::to_string(config.backtrack_budget) + " nodes exhausted");
  }
  throw std::runtime_error("base storage: no arrangement exists for this grid");
}

Arrangement congruence_partition_storage(std::span<const Load> arrivals, const GridSpec& spec,
                                         int k, const SolverConfig& config) {
  require_instance(arrivals, spec, k);
  const int classes = k + 1;
  if (spec.cols() < 3 * classes) {
    throw std::invalid_argument("congruence construction needs at least 3(k+1) columns");
  }
  if (spec.cols() % classes != 0) {
    throw std::invalid_argument("congruence construction needs k+1 to divide the column count");
  }
  const int width = spec.cols() / classes;
  const GridSpec block(spec.rows(), width);
  const int n = spec.capacity();

  Arrangement out(spec, n);
  for (int j = 0; j < classes; ++j) {
    // Class j holds loads j+1, j+1+(k+1), ...; local label = departure rank.
    Sequence local_arrivals;
    local_arrivals.reserve(static_cast<std::size_t>(block.capacity()));
    for (Load a : arrivals) {
      if ((a - 1) % classes == j) local_arrivals.push_back((a - 1) / classes + 1);
    }
    const Arrangement local = base_storage(local_arrivals, block, config);
    for (Load l = 1; l <= local.num_loads(); ++l) {
      const Cell c = *local.position(l);
      out.place((l - 1) * classes + j + 1, Cell{c.row, c.col + j * width});
    }
  }
  return out;
}

Sequence lower_bound_instance(int k, const GridSpec& spec, std::uint64_t seed) {
  const int n = spec.capacity();
  if (k < 0) throw std::invalid_argument("k must be non-negative");
  if (spec.rows() < 2) throw std::invalid_argument("lower-bound instance needs at least 2 rows");
  if (n < 2 * k + 3) throw std::invalid_argument("lower-bound instance needs n >= 2k+3");

  Sequence reversed;
  reversed.reserve(static_cast<std::size_t>(n));
  reversed.push_back(n);
  for (Load l = k + 2; l <= 2 * k + 2; ++l) reversed.push_back(l);
  Sequence rest;
  for (Load l = 1; l < n; ++l) {
    if (l < k + 2 || l > 2 * k + 2) rest.push_back(l);
  }
  std::mt19937_64 rng(seed);
  std::shuffle(rest.begin(), rest.end(), rng);
  reversed.insert(reversed.end(), rest.begin(), rest.end());
  return Sequence(reversed.rbegin(), reversed.rend());
}

SolveOutcome max_k_search(std::span<const Load> arrivals, const GridSpec& spec, int k_start,
                          const SolverConfig& config) {
  require_instance(arrivals, spec, k_start);
  const auto start = Clock::now();
  for (int k = k_start; k >= 1; --k) {
    SolveOutcome attempt = find_robust_enhanced(arrivals, spec, k, config);
    if (attempt.ok()) {
      attempt.wall_ms = elapsed_ms(start);
      return attempt;
    }
  }
  SolveOutcome out = success(base_storage(arrivals, spec, config), 0, 0, "base");
  out.wall_ms = elapsed_ms(start);
  return out;
}

}  // namespace gridstore
