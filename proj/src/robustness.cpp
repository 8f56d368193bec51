#include "gridstore/robustness.hpp"

#include <algorithm>
#include <stdexcept>

#include "gridstore/sequence.hpp"
#include "gridstore/world.hpp"

namespace gridstore {

bool satisfies_departure(const Arrangement& arr, std::span<const Load> order) {
  std::vector<int> rank(static_cast<std::size_t>(arr.num_loads()) + 1, -1);
  for (std::size_t i = 0; i < order.size(); ++i) {
    const Load l = order[i];
    if (l < 1 || l > arr.num_loads()) return false;
    rank[l] = static_cast<int>(i);
  }
  for (std::size_t i = 0; i < order.size(); ++i) {
    const auto pos = arr.position(order[i]);
    if (!pos) return false;
    if (pos->row == 1) continue;
    bool ok = false;
    arr.for_each_adjacent_load(*pos, [&](Load n) {
      if (rank[n] >= 0 && rank[n] < static_cast<int>(i)) ok = true;
    });
    if (!ok) return false;
  }
  return true;
}

bool simulate_satisfies(const Arrangement& arr, std::span<const Load> order) {
  WorldState world = WorldState::from_arrangement(arr);
  for (Load l : order) {
    const auto pos = world.position(l);
    if (!pos || pos->in_io()) return false;
    auto path = shortest_exit_path(world, *pos);
    if (!path) return false;
    world.apply(Action{ActionKind::Retrieve, l, std::move(*path)});
  }
  return true;
}

bool is_k_robust(const Arrangement& arr, int k) {
  if (k < 0) throw std::invalid_argument("is_k_robust: k must be non-negative");
  if (!arr.is_full_density()) {
    const std::vector<Load> loads = arr.loads();
    if (loads.size() > 10) {
      throw std::invalid_argument(
          "is_k_robust below full density is only supported for up to 10 loads");
    }
    for (const Sequence& order : enumerate_perturbations(loads, k)) {
      if (!simulate_satisfies(arr, order)) return false;
    }
    return true;
  }
  for (Load x = 1; x <= arr.num_loads(); ++x) {
    const Cell pos = *arr.position(x);
    if (pos.row == 1) continue;
    bool ok = false;
    arr.for_each_adjacent_load(pos, [&](Load y) {
      if (x - y >= k + 1) ok = true;
    });
    if (!ok) return false;
  }
  return true;
}

bool is_valid_arrangement(const Arrangement& arr, std::span<const Load> arrivals, int k) {
  if (!is_permutation_of_labels(arrivals) ||
      static_cast<int>(arrivals.size()) != arr.num_loads() || !arr.is_complete()) {
    return false;
  }
  const Sequence reversed(arrivals.rbegin(), arrivals.rend());
  if (arr.is_full_density()) {
    return satisfies_departure(arr, reversed) && is_k_robust(arr, k);
  }
  return simulate_satisfies(arr, reversed) && is_k_robust(arr, k);
}

namespace {

// Fills the grid one row at a time, front row first. A remaining load x with
// x <= min + k has no remaining load low enough to be its departure parent,
// and the earliest remaining load in reversed arrival order has no remaining
// arrival parent. Both can only be served by the cell directly below, so they
// are forced into the next row above a suitable cell. A cell is checked once
// all its neighbors are filled.
class ArrangementSearch {
 public:
  ArrangementSearch(const GridSpec& spec, std::span<const Load> arrivals, int k,
                    long long budget)
      : spec_(spec),
        rows_(spec.rows()),
        cols_(spec.cols()),
        n_(spec.capacity()),
        k_(k),
        budget_(budget),
        grid_(static_cast<std::size_t>(n_), kNoLoad),
        used_(static_cast<std::size_t>(n_) + 1, false),
        arank_(static_cast<std::size_t>(n_) + 1, 0) {
    // Rank in the reversed arrival order: the last arrival departs first.
    for (std::size_t i = 0; i < arrivals.size(); ++i) {
      arank_[arrivals[i]] = static_cast<int>(arrivals.size() - 1 - i);
    }
  }

  SearchResult run() {
    SearchResult out;
    const bool found = place_row(1);
    out.nodes = nodes_;
    out.complete = found || !aborted_;
    if (found) {
      Arrangement arr(spec_, n_);
      for (int row = 1; row <= rows_; ++row) {
        for (int col = 0; col < cols_; ++col) arr.place(at(row, col), Cell{row, col + 1});
      }
      out.arrangement = std::move(arr);
    }
    return out;
  }

 private:
  struct RowFrame {
    Load lowest = kNoLoad;
    Load first_out = kNoLoad;
    std::vector<Load> forced;
  };

  Load& at(int row, int col) { return grid_[static_cast<std::size_t>((row - 1) * cols_ + col)]; }
  Load at(int row, int col) const {
    return grid_[static_cast<std::size_t>((row - 1) * cols_ + col)];
  }

  // Cell (row, col) given that rows up to `known` are filled.
  bool satisfied(int row, int col, int known) const {
    if (row == 1) return true;
    const Load x = at(row, col);
    bool dep = false, arr = false;
    auto visit = [&](int rr, int cc) {
      if (rr < 1 || rr > known || cc < 0 || cc >= cols_) return;
      const Load y = at(rr, cc);
      if (y <= x - k_ - 1) dep = true;
      if (arank_[y] < arank_[x]) arr = true;
    };
    visit(row - 1, col);
    visit(row + 1, col);
    visit(row, col - 1);
    visit(row, col + 1);
    return dep && arr;
  }

  bool place_row(int row) {
    if (row > rows_) return true;
    RowFrame frame;
    for (Load l = 1; l <= n_; ++l) {
      if (used_[l]) continue;
      if (frame.lowest == kNoLoad) frame.lowest = l;
      if (frame.first_out == kNoLoad || arank_[l] < arank_[frame.first_out]) frame.first_out = l;
    }
    for (Load l = frame.lowest; l <= std::min(n_, frame.lowest + k_); ++l) {
      if (!used_[l]) frame.forced.push_back(l);
    }
    if (frame.first_out > frame.lowest + k_) frame.forced.push_back(frame.first_out);
    if (static_cast<int>(frame.forced.size()) > cols_) return false;
    return fill(row, 0, frame);
  }

  bool fits_below(int row, int col, Load l, const RowFrame& frame) const {
    if (row == 1) return true;
    const Load below = at(row - 1, col);
    if (l <= frame.lowest + k_ && below > l - k_ - 1) return false;
    if (l == frame.first_out && arank_[below] > arank_[l]) return false;
    return true;
  }

  bool fill(int row, int col, RowFrame& frame) {
    if (col == cols_) {
      if (row > 1 && !satisfied(row - 1, cols_ - 1, row)) return false;
      if (row == rows_) {
        for (int cc = 0; cc < cols_; ++cc) {
          if (!satisfied(row, cc, row)) return false;
        }
      }
      return place_row(row + 1);
    }
    const bool only_forced = static_cast<int>(frame.forced.size()) == cols_ - col;
    for (Load l = 1; l <= n_; ++l) {
      if (used_[l]) continue;
      const auto it = std::find(frame.forced.begin(), frame.forced.end(), l);
      const bool forced = it != frame.forced.end();
      if (only_forced && !forced) continue;
      if (forced && !fits_below(row, col, l, frame)) continue;
      if (budget_ >= 0 && nodes_ >= budget_) {
        aborted_ = true;
        return false;
      }
      ++nodes_;
      at(row, col) = l;
      used_[l] = true;
      const auto slot = it - frame.forced.begin();
      if (forced) frame.forced.erase(it);
      const bool ok = row == 1 || col == 0 || satisfied(row - 1, col - 1, row);
      if (ok && fill(row, col + 1, frame)) return true;
      if (forced) frame.forced.insert(frame.forced.begin() + slot, l);
      at(row, col) = kNoLoad;
      used_[l] = false;
      if (aborted_) return false;
    }
    return false;
  }

  GridSpec spec_;
  int rows_;
  int cols_;
  int n_;
  int k_;
  long long budget_;
  long long nodes_ = 0;
  bool aborted_ = false;
  std::vector<Load> grid_;
  std::vector<bool> used_;
  std::vector<int> arank_;
};

}  // namespace

SearchResult search_valid_arrangement(const GridSpec& spec, std::span<const Load> arrivals, int k,
                                      long long node_budget) {
  if (static_cast<int>(arrivals.size()) != spec.capacity() || !is_permutation_of_labels(arrivals)) {
    throw std::invalid_argument("search needs a full-density arrival permutation");
  }
  if (k < 0) throw std::invalid_argument("k must be non-negative");
  return ArrangementSearch(spec, arrivals, k, node_budget).run();
}

bool brute_force_zero_reloc_exists(const GridSpec& spec, std::span<const Load> arrivals, int k) {
  if (spec.capacity() > 12) {
    throw std::invalid_argument("exhaustive search is limited to 12 cells");
  }
  return search_valid_arrangement(spec, arrivals, k, -1).arrangement.has_value();
}

}  // namespace gridstore
