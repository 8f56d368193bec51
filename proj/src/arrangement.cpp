#include "gridstore/arrangement.hpp"

#include <stdexcept>
#include <string>

namespace gridstore {

Arrangement::Arrangement(GridSpec spec, int num_loads)
    : spec_(spec),
      num_loads_(num_loads),
      cells_(static_cast<std::size_t>(spec.capacity()), kNoLoad),
      positions_(static_cast<std::size_t>(num_loads) + 1, -1) {
  if (num_loads < 0 || num_loads > spec.capacity()) {
    throw std::invalid_argument("arrangement of " + std::to_string(num_loads) +
                                " loads does not fit a grid of capacity " +
                                std::to_string(spec.capacity()));
  }
}

Load Arrangement::at(Cell cell) const {
  if (!spec_.in_storage(cell)) return kNoLoad;
  return cells_[storage_index(cell)];
}

std::optional<Cell> Arrangement::position(Load load) const {
  if (load < 1 || load > num_loads_) return std::nullopt;
  const int idx = positions_[load];
  if (idx < 0) return std::nullopt;
  return Cell{idx / spec_.cols() + 1, idx % spec_.cols() + 1};
}

void Arrangement::place(Load load, Cell cell) {
  if (load < 1 || load > num_loads_) {
    throw std::invalid_argument("load " + std::to_string(load) + " outside 1.." +
                                std::to_string(num_loads_));
  }
  if (!spec_.in_storage(cell)) {
    throw std::invalid_argument("cell " + std::to_string(cell.row) + ":" +
                                std::to_string(cell.col) + " is not a storage cell");
  }
  if (positions_[load] >= 0) {
    throw std::invalid_argument("load " + std::to_string(load) + " placed twice");
  }
  const std::size_t idx = storage_index(cell);
  if (cells_[idx] != kNoLoad) {
    throw std::invalid_argument("cell " + std::to_string(cell.row) + ":" +
                                std::to_string(cell.col) + " already holds load " +
                                std::to_string(cells_[idx]));
  }
  cells_[idx] = load;
  positions_[load] = static_cast<int>(idx);
  ++placed_;
}

void Arrangement::remove(Load load) {
  if (load < 1 || load > num_loads_ || positions_[load] < 0) return;
  cells_[static_cast<std::size_t>(positions_[load])] = kNoLoad;
  positions_[load] = -1;
  --placed_;
}

std::vector<Load> Arrangement::loads() const {
  std::vector<Load> out;
  out.reserve(static_cast<std::size_t>(placed_));
  for (Load l = 1; l <= num_loads_; ++l) {
    if (positions_[l] >= 0) out.push_back(l);
  }
  return out;
}

}  // namespace gridstore
