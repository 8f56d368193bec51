#pragma once

#include <algorithm>
#include <cstdint>
#include <initializer_list>
#include <numeric>
#include <random>
#include <vector>

#include "gridstore/arrangement.hpp"
#include "gridstore/grid.hpp"

namespace fixtures {

using gridstore::Arrangement;
using gridstore::Cell;
using gridstore::GridSpec;
using gridstore::Load;
using gridstore::Sequence;

/// Builds an arrangement from rows listed top row first; 0 is an empty cell.
inline Arrangement from_rows(std::initializer_list<std::initializer_list<Load>> rows,
                             int num_loads = -1) {
  const int r = static_cast<int>(rows.size());
  const int c = static_cast<int>(rows.begin()->size());
  int max_label = 0;
  for (const auto& row : rows) {
    for (Load l : row) max_label = std::max(max_label, l);
  }
  Arrangement arr(GridSpec(r, c), num_loads < 0 ? max_label : num_loads);
  int row_no = r;
  for (const auto& row : rows) {
    int col = 1;
    for (Load l : row) {
      if (l != gridstore::kNoLoad) arr.place(l, Cell{row_no, col});
      ++col;
    }
    --row_no;
  }
  return arr;
}

inline Sequence random_permutation(int n, std::uint64_t seed) {
  Sequence s(static_cast<std::size_t>(n));
  std::iota(s.begin(), s.end(), 1);
  std::mt19937_64 rng(seed);
  std::shuffle(s.begin(), s.end(), rng);
  return s;
}

/// Places loads per `order[i]` into storage cell i (row-major from the front row).
inline Arrangement arrangement_from_cells(const GridSpec& spec, const Sequence& order) {
  Arrangement arr(spec, static_cast<int>(order.size()));
  for (std::size_t i = 0; i < order.size(); ++i) {
    const int idx = static_cast<int>(i);
    arr.place(order[i], Cell{idx / spec.cols() + 1, idx % spec.cols() + 1});
  }
  return arr;
}

// The 3x3 instance with arrivals (4,1,7,6,3,2,9,8,5).
inline const Sequence kFig1Arrivals{4, 1, 7, 6, 3, 2, 9, 8, 5};
// A realized departure order that is a 1-bounded perturbation of (1..9).
inline const Sequence kFig1Realized{2, 1, 3, 5, 4, 7, 6, 9, 8};

// Zero-relocation arrangement for the unperturbed order: 2 sits on 1 and
// next to 8, and 7 sits on 6.
inline Arrangement fig1_plain() {
  return from_rows({{4, 9, 7},
                    {2, 8, 6},
                    {1, 5, 3}});
}

// Arrangement that is 1-robust and satisfies the same arrivals.
inline Arrangement fig1_robust() {
  return from_rows({{6, 9, 7},
                    {3, 8, 4},
                    {1, 5, 2}});
}

}  // namespace fixtures
