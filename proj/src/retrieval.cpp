#include "gridstore/retrieval.hpp"

#include <algorithm>
#include <chrono>
#include <deque>
#include <limits>
#include <string>

namespace gridstore {

std::string_view to_string(RetrievalPolicy policy) {
  return policy == RetrievalPolicy::BaseR ? "BaseR" : "ImpR";
}

namespace {

constexpr int kUnreached = std::numeric_limits<int>::max();

// Occupancy snapshot over W+, indexed like GridSpec::index.
std::vector<Load> snapshot(const WorldState& state) {
  const GridSpec& spec = state.spec();
  std::vector<Load> occ(spec.extended_size(), kNoLoad);
  for (std::size_t i = 0; i < occ.size(); ++i) occ[i] = state.at(spec.cell_at(i));
  return occ;
}

// Cells reachable from the empty I/O cells through empty cells.
std::vector<char> reach_from_io(const GridSpec& spec, const std::vector<Load>& occ) {
  std::vector<char> seen(spec.extended_size(), 0);
  std::deque<Cell> queue;
  for (int col = 1; col <= spec.cols(); ++col) {
    const Cell io{0, col};
    if (occ[spec.index(io)] == kNoLoad) {
      seen[spec.index(io)] = 1;
      queue.push_back(io);
    }
  }
  while (!queue.empty()) {
    const Cell u = queue.front();
    queue.pop_front();
    for_each_neighbor(u, spec, [&](Cell v) {
      const std::size_t i = spec.index(v);
      if (!seen[i] && occ[i] == kNoLoad) {
        seen[i] = 1;
        queue.push_back(v);
      }
    });
  }
  return seen;
}

bool has_exit(const GridSpec& spec, const std::vector<char>& seen, Cell cell) {
  bool ok = false;
  for_each_neighbor(cell, spec, [&](Cell v) {
    if (seen[spec.index(v)]) ok = true;
  });
  return ok;
}

// BFS from `from` through empty cells. Neighbors are
// visited in ascending cell order so parents are deterministic.
struct Bfs {
  std::vector<int> dist;
  std::vector<int> parent;
};

Bfs bfs_from(const GridSpec& spec, const std::vector<Load>& occ, Cell from) {
  Bfs out{std::vector<int>(spec.extended_size(), kUnreached),
          std::vector<int>(spec.extended_size(), -1)};
  std::deque<Cell> queue{from};
  out.dist[spec.index(from)] = 0;
  while (!queue.empty()) {
    const Cell u = queue.front();
    queue.pop_front();
    std::vector<Cell> next = neighbors(u, spec);
    std::sort(next.begin(), next.end());
    for (Cell v : next) {
      const std::size_t i = spec.index(v);
      if (out.dist[i] != kUnreached || occ[i] != kNoLoad) continue;
      out.dist[i] = out.dist[spec.index(u)] + 1;
      out.parent[i] = static_cast<int>(spec.index(u));
      queue.push_back(v);
    }
  }
  return out;
}

Path trace_back(const GridSpec& spec, const Bfs& bfs, Cell to) {
  Path p;
  for (int i = static_cast<int>(spec.index(to)); i >= 0; i = bfs.parent[i]) {
    p.cells.push_back(spec.cell_at(static_cast<std::size_t>(i)));
  }
  std::reverse(p.cells.begin(), p.cells.end());
  return p;
}

std::vector<char> path_mask(const GridSpec& spec, const Path& pi) {
  std::vector<char> mask(spec.extended_size(), 0);
  for (Cell c : pi.cells) mask[spec.index(c)] = 1;
  return mask;
}

// Empty storage cells off the path that a load at `from` can reach.
int count_reachable_off_path(const GridSpec& spec, const std::vector<Load>& occ,
                             const std::vector<char>& on_pi, Cell from) {
  const Bfs bfs = bfs_from(spec, occ, from);
  int count = 0;
  for (std::size_t i = 0; i < bfs.dist.size(); ++i) {
    if (bfs.dist[i] != kUnreached && !on_pi[i] && spec.cell_at(i).in_storage()) ++count;
  }
  return count;
}

// True iff placing `blocker` leaves some y of `unblocked` with no exit while
// y departs before the blocker and before all of its neighbors.
bool blocks_unblocked(const GridSpec& spec, const std::vector<Load>& occ, Load blocker,
                      const std::vector<Load>& unblocked) {
  const std::vector<char> seen = reach_from_io(spec, occ);
  for (Load y : unblocked) {
    if (y > blocker) continue;
    Cell at{};
    for (std::size_t i = 0; i < occ.size(); ++i) {
      if (occ[i] == y) {
        at = spec.cell_at(i);
        break;
      }
    }
    if (has_exit(spec, seen, at)) continue;
    bool first = true;
    for_each_storage_neighbor(at, spec, [&](Cell v) {
      const Load l = occ[spec.index(v)];
      if (l != kNoLoad && l < y) first = false;
    });
    if (first) return true;
  }
  return false;
}

std::vector<Load> unblocked_excluding(const WorldState& state, const Path& pi) {
  std::vector<Load> out;
  for (Load l : unblocked_set(state)) {
    if (!pi.contains(*state.position(l))) out.push_back(l);
  }
  return out;
}

// Path from cell `from` along pi towards the I/O row (pi runs target -> I/O).
std::vector<Cell> pi_outward(const Path& pi, Cell from) {
  auto it = std::find(pi.cells.begin(), pi.cells.end(), from);
  return {it, pi.cells.end()};
}

std::vector<Cell> io_walk(Cell from, Cell to) {
  std::vector<Cell> cells;
  const int step = to.col > from.col ? 1 : -1;
  for (int col = from.col; col != to.col; col += step) cells.push_back(Cell{0, col + step});
  return cells;
}

Action apply_logged(WorldState& state, std::vector<Action>& log, ActionKind kind, Load load,
                    std::vector<Cell> cells) {
  Action a{kind, load, Path{std::move(cells)}};
  state.apply(a);
  log.push_back(a);
  return a;
}

}  // namespace

Path min_blocker_path(const WorldState& state, Load target) {
  const auto start = state.position(target);
  if (!start || !start->in_storage()) {
    throw std::invalid_argument("load " + std::to_string(target) + " is not in storage");
  }
  const GridSpec& spec = state.spec();
  // Composite weight: blockers dominate, then steps.
  const long long big = static_cast<long long>(spec.extended_size()) + 1;
  const long long inf = std::numeric_limits<long long>::max();
  auto weight = [&](Cell v) {
    const bool blocker = v.in_storage() && v != *start && !state.empty(v);
    return (blocker ? big : 0) + 1;
  };
  // Reverse Dijkstra: cost from each cell to the I/O row, the cell itself excluded.
  std::vector<long long> cost(spec.extended_size(), inf);
  using Entry = std::pair<long long, std::size_t>;
  std::vector<Entry> heap;
  auto cmp = [](const Entry& a, const Entry& b) { return a > b; };
  for (int col = 1; col <= spec.cols(); ++col) {
    const std::size_t i = spec.index(Cell{0, col});
    cost[i] = 0;
    heap.emplace_back(0, i);
  }
  std::make_heap(heap.begin(), heap.end(), cmp);
  while (!heap.empty()) {
    std::pop_heap(heap.begin(), heap.end(), cmp);
    const auto [cu, iu] = heap.back();
    heap.pop_back();
    if (cu != cost[iu]) continue;
    const Cell u = spec.cell_at(iu);
    const long long through = cu + weight(u);
    for_each_neighbor(u, spec, [&](Cell v) {
      if (v.in_io()) return;
      const std::size_t iv = spec.index(v);
      if (through < cost[iv]) {
        cost[iv] = through;
        heap.emplace_back(through, iv);
        std::push_heap(heap.begin(), heap.end(), cmp);
      }
    });
  }
  Path path;
  Cell cur = *start;
  path.cells.push_back(cur);
  while (cur.in_storage()) {
    std::optional<Cell> best;
    long long best_cost = inf;
    std::vector<Cell> next = neighbors(cur, spec);
    std::sort(next.begin(), next.end());
    for (Cell v : next) {
      if (cost[spec.index(v)] == inf) continue;
      const long long c = weight(v) + cost[spec.index(v)];
      if (c < best_cost) {
        best_cost = c;
        best = v;
      }
    }
    cur = *best;
    path.cells.push_back(cur);
  }
  return path;
}

std::vector<Load> unblocked_set(const WorldState& state) {
  const GridSpec& spec = state.spec();
  const std::vector<Load> occ = snapshot(state);
  const std::vector<char> seen = reach_from_io(spec, occ);
  std::vector<Load> out;
  for (int row = 1; row <= spec.rows(); ++row) {
    for (int col = 1; col <= spec.cols(); ++col) {
      const Cell cell{row, col};
      const Load l = occ[spec.index(cell)];
      if (l != kNoLoad && has_exit(spec, seen, cell)) out.push_back(l);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::optional<Path> choose_destination(const WorldState& state, Load blocker, const Path& pi,
                                       int remaining_blockers) {
  const GridSpec& spec = state.spec();
  const auto from = state.position(blocker);
  if (!from || !pi.contains(*from)) {
    throw std::invalid_argument("load " + std::to_string(blocker) + " is not on the path");
  }
  std::vector<Load> occ = snapshot(state);
  const std::vector<char> on_pi = path_mask(spec, pi);
  const Bfs bfs = bfs_from(spec, occ, *from);

  std::vector<std::pair<int, Cell>> candidates;
  for (std::size_t i = 0; i < bfs.dist.size(); ++i) {
    const Cell c = spec.cell_at(i);
    if (bfs.dist[i] != kUnreached && !on_pi[i] && c.in_storage()) {
      candidates.emplace_back(bfs.dist[i], c);
    }
  }
  if (candidates.empty()) return std::nullopt;
  std::sort(candidates.begin(), candidates.end());

  // Blockers still waiting on pi, inward of this one.
  std::vector<Cell> inner;
  {
    auto it = std::find(pi.cells.begin(), pi.cells.end(), *from);
    for (auto j = pi.cells.begin() + 1; j != it; ++j) {
      if (occ[spec.index(*j)] != kNoLoad) inner.push_back(*j);
    }
  }
  const std::vector<Load> unblocked = unblocked_excluding(state, pi);

  std::optional<Cell> safe_guarded, guarded, safe;
  const std::size_t src = spec.index(*from);
  for (const auto& [d, cell] : candidates) {
    const std::size_t dst = spec.index(cell);
    occ[src] = kNoLoad;
    occ[dst] = blocker;
    bool guard = true;
    for (Cell q : inner) {
      if (count_reachable_off_path(spec, occ, on_pi, q) < remaining_blockers) {
        guard = false;
        break;
      }
    }
    const bool u_safe = !blocks_unblocked(spec, occ, blocker, unblocked);
    occ[dst] = kNoLoad;
    occ[src] = blocker;
    if (u_safe && guard) {
      safe_guarded = cell;
      break;
    }
    if (guard && !guarded) guarded = cell;
    if (u_safe && !safe) safe = cell;
  }
  const Cell pick = safe_guarded ? *safe_guarded
                    : guarded    ? *guarded
                    : safe       ? *safe
                                 : candidates.front().second;
  return trace_back(spec, bfs, pick);
}

RetrievalStep retrieve_step(WorldState& state, Load target, RetrievalPolicy policy) {
  if (state.io_occupied()) throw std::logic_error("retrieval needs an empty I/O row");
  const GridSpec& spec = state.spec();
  RetrievalStep step;
  BlockerPlan& plan = step.plan;
  plan.target = target;
  plan.path = min_blocker_path(state, target);
  const Path& pi = plan.path;
  for (auto it = pi.cells.rbegin(); it != pi.cells.rend(); ++it) {
    const Load l = state.at(*it);
    if (l != kNoLoad && l != target) plan.blockers.push_back(l);
  }

  std::size_t first_parked = plan.blockers.size();
  if (policy == RetrievalPolicy::BaseR) first_parked = 0;
  for (std::size_t i = 0; i < first_parked; ++i) {
    const Load b = plan.blockers[i];
    const int remaining = static_cast<int>(plan.blockers.size() - i - 1);
    auto move = choose_destination(state, b, pi, remaining);
    if (!move) {
      first_parked = i;
      break;
    }
    plan.assignments.push_back({b, move->back(), false});
    apply_logged(state, step.actions, ActionKind::Relocate, b, std::move(move->cells));
  }

  // Park the rest on the I/O row, outermost farthest from pi's exit.
  const Cell exit = pi.back();
  const std::size_t parked = plan.blockers.size() - first_parked;
  std::vector<Cell> spots;
  for (int col = 1; col <= spec.cols(); ++col) {
    if (col != exit.col) spots.push_back(Cell{0, col});
  }
  if (parked > spots.size()) {
    throw InfeasibleRelocation("cannot park " + std::to_string(parked) + " blockers on " +
                               std::to_string(spots.size()) + " free I/O cells");
  }
  std::stable_sort(spots.begin(), spots.end(), [&](Cell a, Cell b) {
    return std::abs(a.col - exit.col) < std::abs(b.col - exit.col);
  });
  std::vector<std::pair<Load, Cell>> origin;
  for (std::size_t j = 0; j < parked; ++j) {
    const Load b = plan.blockers[first_parked + j];
    const Cell at = *state.position(b);
    const Cell spot = spots[parked - 1 - j];
    std::vector<Cell> cells = pi_outward(pi, at);
    for (Cell c : io_walk(exit, spot)) cells.push_back(c);
    plan.assignments.push_back({b, spot, true});
    origin.emplace_back(b, at);
    apply_logged(state, step.actions, ActionKind::Relocate, b, std::move(cells));
  }

  apply_logged(state, step.actions, ActionKind::Retrieve, target, pi.cells);

  for (auto it = origin.rbegin(); it != origin.rend(); ++it) {
    const auto [b, home] = *it;
    std::vector<Cell> cells{*state.position(b)};
    for (Cell c : io_walk(cells.front(), exit)) cells.push_back(c);
    std::vector<Cell> down = pi_outward(pi, home);
    std::reverse(down.begin(), down.end());
    cells.insert(cells.end(), down.begin() + 1, down.end());
    apply_logged(state, step.actions, ActionKind::Relocate, b, std::move(cells));
  }
  return step;
}

RetrievalResult run_retrieval(const WorldState& start, OnlinePerturbationStream& stream,
                              RetrievalPolicy policy) {
  if (!start.pending_arrivals().empty()) {
    throw std::invalid_argument("retrieval starts after every load is stored");
  }
  RetrievalResult out;
  WorldState state = start;
  while (!stream.empty()) {
    const Load target = stream.next();
    const auto where = state.position(target);
    if (!where || !where->in_storage()) {
      throw std::invalid_argument("stream revealed load " + std::to_string(target) +
                                  " which is not stored");
    }
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<Action> actions = retrieve_one(state, target, policy);
    const double ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    out.max_step_ms = std::max(out.max_step_ms, ms);
    out.departures.push_back(target);
    out.log.insert(out.log.end(), std::make_move_iterator(actions.begin()),
                   std::make_move_iterator(actions.end()));
  }
  if (state.placed_count() != 0) {
    throw std::invalid_argument("stream ended with loads still stored");
  }
  out.metrics = measure(out.log, start);
  return out;
}

}  // namespace gridstore
