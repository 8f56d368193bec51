#include "gridstore/world.hpp"

#include <algorithm>
#include <deque>
#include <limits>
#include <sstream>

namespace gridstore {
namespace {

std::string describe(Cell c) {
  return std::to_string(c.row) + ":" + std::to_string(c.col);
}

}  // namespace

std::string_view to_string(ActionKind kind) {
  switch (kind) {
    case ActionKind::Store:
      return "store";
    case ActionKind::Retrieve:
      return "retrieve";
    case ActionKind::Relocate:
      return "relocate";
  }
  return "?";
}

WorldState::WorldState(GridSpec spec, Sequence arrivals)
    : spec_(spec),
      num_loads_(static_cast<int>(arrivals.size())),
      occupancy_(spec.extended_size(), kNoLoad),
      positions_(arrivals.size() + 1, -1),
      departed_(arrivals.size() + 1, 0),
      arrivals_(std::move(arrivals)) {
  if (!is_permutation_of_labels(arrivals_)) {
    throw std::invalid_argument("arrival order must be a permutation of 1..n");
  }
  if (num_loads_ > spec.capacity()) {
    throw std::invalid_argument("more loads than storage cells");
  }
}

WorldState WorldState::from_arrangement(const Arrangement& arr) {
  Sequence labels(static_cast<std::size_t>(arr.num_loads()));
  for (int i = 0; i < arr.num_loads(); ++i) labels[i] = i + 1;
  WorldState w(arr.spec(), std::move(labels));
  w.next_arrival_ = w.arrivals_.size();
  for (Load l = 1; l <= arr.num_loads(); ++l) {
    if (const auto pos = arr.position(l)) {
      const std::size_t idx = w.spec_.index(*pos);
      w.occupancy_[idx] = l;
      w.positions_[l] = static_cast<int>(idx);
      ++w.placed_count_;
    } else {
      w.departed_[l] = 1;
      ++w.departed_count_;
    }
  }
  return w;
}

std::optional<Cell> WorldState::position(Load load) const {
  if (load < 1 || load > num_loads_ || positions_[load] < 0) return std::nullopt;
  return spec_.cell_at(static_cast<std::size_t>(positions_[load]));
}

bool WorldState::departed(Load load) const {
  return load >= 1 && load <= num_loads_ && departed_[load] != 0;
}

void WorldState::check_path(const Action& action) const {
  const Path& p = action.path;
  if (!is_well_formed(p, spec_) || p.size() < 2) {
    throw ActionError(ActionErrorKind::IllegalPath,
                      std::string(to_string(action.kind)) + " of load " +
                          std::to_string(action.load) + ": malformed path");
  }
  const bool start_is_load = action.kind != ActionKind::Store;
  for (std::size_t i = start_is_load ? 1 : 0; i < p.cells.size(); ++i) {
    const Load occ = at(p.cells[i]);
    if (occ != kNoLoad) {
      throw ActionError(ActionErrorKind::IllegalPath,
                        std::string(to_string(action.kind)) + " of load " +
                            std::to_string(action.load) + ": cell " +
                            describe(p.cells[i]) + " holds load " + std::to_string(occ));
    }
  }
  switch (action.kind) {
    case ActionKind::Store:
      if (!p.front().in_io() || !p.back().in_storage()) {
        throw ActionError(ActionErrorKind::IllegalPath,
                          "store must go from the I/O row into storage");
      }
      break;
    case ActionKind::Retrieve:
      if (!p.front().in_storage() || !p.back().in_io()) {
        throw ActionError(ActionErrorKind::IllegalPath,
                          "retrieve must go from storage to the I/O row");
      }
      break;
    case ActionKind::Relocate:
      break;
  }
}

void WorldState::apply(const Action& action) {
  const Load load = action.load;
  if (load < 1 || load > num_loads_) {
    throw ActionError(ActionErrorKind::LoadAbsent,
                      "unknown load " + std::to_string(load));
  }
  if (action.kind == ActionKind::Store) {
    if (next_arrival_ >= arrivals_.size() || arrivals_[next_arrival_] != load) {
      throw ActionError(ActionErrorKind::WrongArrivalOrder,
                        "load " + std::to_string(load) + " is not the next arrival");
    }
  } else {
    if (action.path.empty() || positions_[load] < 0 || !spec_.contains(action.path.front()) ||
        at(action.path.front()) != load) {
      throw ActionError(ActionErrorKind::LoadAbsent,
                        "load " + std::to_string(load) + " is not at the path start");
    }
  }
  check_path(action);

  const Cell from = action.path.front();
  const Cell to = action.path.back();
  switch (action.kind) {
    case ActionKind::Store:
      ++next_arrival_;
      ++placed_count_;
      break;
    case ActionKind::Retrieve:
      occupancy_[spec_.index(from)] = kNoLoad;
      departed_[load] = 1;
      ++departed_count_;
      --placed_count_;
      positions_[load] = -1;
      return;
    case ActionKind::Relocate:
      occupancy_[spec_.index(from)] = kNoLoad;
      if (from.in_io()) --io_count_;
      break;
  }
  occupancy_[spec_.index(to)] = load;
  positions_[load] = static_cast<int>(spec_.index(to));
  if (to.in_io()) ++io_count_;
}

Arrangement WorldState::arrangement() const {
  if (io_count_ > 0) throw std::logic_error("I/O row is not empty");
  Arrangement arr(spec_, num_loads_);
  for (Load l = 1; l <= num_loads_; ++l) {
    if (positions_[l] >= 0) arr.place(l, spec_.cell_at(static_cast<std::size_t>(positions_[l])));
  }
  return arr;
}

WorldState apply_action(WorldState state, const Action& action) {
  state.apply(action);
  return state;
}

MetricsRecord measure(std::span<const Action> log, const WorldState& start) {
  MetricsRecord m;
  WorldState w = start;
  for (const Action& a : log) {
    if (w.io_occupied()) ++m.io_usage;
    w.apply(a);
    if (a.kind == ActionKind::Relocate) ++m.relocations;
    m.total_distance += a.path.steps();
    ++m.actions;
  }
  m.distance_subopt = m.total_distance - start.spec().full_distance_bound();
  return m;
}

MetricsRecord measure(std::span<const Action> log, const GridSpec& spec) {
  Sequence arrivals;
  for (const Action& a : log) {
    if (a.kind == ActionKind::Store) arrivals.push_back(a.load);
  }
  return measure(log, WorldState(spec, std::move(arrivals)));
}

std::optional<Path> shortest_exit_path(const WorldState& state, Cell from) {
  const GridSpec& spec = state.spec();
  constexpr int kInf = std::numeric_limits<int>::max();
  // Distance to the I/O row through empty cells, from every empty cell.
  std::vector<int> dist(spec.extended_size(), kInf);
  std::deque<Cell> queue;
  for (int col = 1; col <= spec.cols(); ++col) {
    const Cell io{0, col};
    if (state.empty(io)) {
      dist[spec.index(io)] = 0;
      queue.push_back(io);
    }
  }
  while (!queue.empty()) {
    const Cell u = queue.front();
    queue.pop_front();
    const int du = dist[spec.index(u)];
    for_each_neighbor(u, spec, [&](Cell v) {
      if (v == from || !state.empty(v)) return;
      int& dv = dist[spec.index(v)];
      if (dv == kInf) {
        dv = du + 1;
        queue.push_back(v);
      }
    });
  }
  // Walk downhill from `from`, smallest cell first among equal steps.
  int want = kInf;
  for_each_neighbor(from, spec, [&](Cell v) { want = std::min(want, dist[spec.index(v)]); });
  if (want == kInf) return std::nullopt;
  Path path;
  path.cells.push_back(from);
  Cell cur = from;
  while (true) {
    std::optional<Cell> next;
    for_each_neighbor(cur, spec, [&](Cell v) {
      if (dist[spec.index(v)] == want && (!next || v < *next)) next = v;
    });
    cur = *next;
    path.cells.push_back(cur);
    if (want == 0) break;
    --want;
  }
  return path;
}

std::vector<Action> plan_storage(const Arrangement& arr, std::span<const Load> arrivals) {
  WorldState w(arr.spec(), Sequence(arrivals.begin(), arrivals.end()));
  std::vector<Action> out;
  out.reserve(arrivals.size());
  for (Load l : arrivals) {
    const auto target = arr.position(l);
    if (!target) throw std::invalid_argument("load " + std::to_string(l) + " is not placed");
    auto exit = shortest_exit_path(w, *target);
    if (!exit) {
      throw std::invalid_argument("cell of load " + std::to_string(l) +
                                  " is unreachable when it arrives");
    }
    std::reverse(exit->cells.begin(), exit->cells.end());
    Action a{ActionKind::Store, l, std::move(*exit)};
    w.apply(a);
    out.push_back(std::move(a));
  }
  return out;
}

}  // namespace gridstore
