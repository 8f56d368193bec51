#include <algorithm>
#include <functional>
#include <numeric>
#include <random>
#include <tuple>

#include "doctest.h"
#include "fixtures.hpp"
#include "gridstore/retrieval.hpp"
#include "gridstore/robustness.hpp"
#include "gridstore/solvers.hpp"

using namespace gridstore;

namespace {

WorldState world(const Arrangement& arr) { return WorldState::from_arrangement(arr); }

long long relocations(const std::vector<Action>& actions) {
  return std::count_if(actions.begin(), actions.end(),
                       [](const Action& a) { return a.kind == ActionKind::Relocate; });
}

int blockers_on(const WorldState& w, const Path& p) {
  int count = 0;
  for (std::size_t i = 1; i < p.cells.size(); ++i) {
    if (p.cells[i].in_storage() && !w.empty(p.cells[i])) ++count;
  }
  return count;
}

// Exhaustive simple-path enumeration: lexicographic minimum of
// (blockers, steps, cell sequence) over storage paths ending on the I/O row.
Path best_path_oracle(const WorldState& w, Cell start) {
  const GridSpec& spec = w.spec();
  std::optional<std::tuple<int, int, std::vector<Cell>>> best;
  std::vector<Cell> stack{start};
  std::vector<char> on(spec.extended_size(), 0);
  on[spec.index(start)] = 1;
  std::function<void(int)> dfs = [&](int blockers) {
    const Cell u = stack.back();
    for (Cell v : neighbors(u, spec)) {
      if (on[spec.index(v)]) continue;
      stack.push_back(v);
      if (v.in_io()) {
        std::tuple<int, int, std::vector<Cell>> cand{blockers, static_cast<int>(stack.size()) - 1,
                                                     stack};
        if (!best || cand < *best) best = cand;
      } else {
        on[spec.index(v)] = 1;
        dfs(blockers + (w.empty(v) ? 0 : 1));
        on[spec.index(v)] = 0;
      }
      stack.pop_back();
    }
  };
  dfs(0);
  return Path{std::get<2>(*best)};
}

// Three rows, four columns; 11 sits on 10 on 9 in column 1. Cells (1,2) and
// (1,3) are empty.
Arrangement blocked_column() {
  return fixtures::from_rows({{11, 12, 7, 3},
                              {10, 5, 6, 4},
                              {9, 0, 0, 8}});
}

std::vector<std::uint64_t> seeds(int n) {
  std::vector<std::uint64_t> s(static_cast<std::size_t>(n));
  std::iota(s.begin(), s.end(), 100);
  return s;
}

}  // namespace

TEST_CASE("min blocker path: simple cases") {
  WorldState full = world(fixtures::arrangement_from_cells(GridSpec(3, 3), fixtures::random_permutation(9, 2)));
  const Load front = full.at({1, 2});
  const Path p = min_blocker_path(full, front);
  CHECK(p.cells == std::vector<Cell>{{1, 2}, {0, 2}});

  const Load top = full.at({3, 1});
  const Path deep = min_blocker_path(full, top);
  CHECK(deep.steps() == 3);
  CHECK(blockers_on(full, deep) == 2);
  CHECK(deep.cells == std::vector<Cell>{{3, 1}, {2, 1}, {1, 1}, {0, 1}});
  CHECK(is_well_formed(deep, full.spec()));

  const WorldState w = world(blocked_column());
  CHECK(min_blocker_path(w, 11).cells == std::vector<Cell>{{3, 1}, {2, 1}, {1, 1}, {0, 1}});
  CHECK_THROWS_AS(min_blocker_path(w, 1), std::invalid_argument);
}

TEST_CASE("min blocker path agrees with exhaustive enumeration") {
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    std::mt19937_64 rng(seed);
    const int rows = 2 + static_cast<int>(seed % 2);
    const GridSpec spec(rows, 3);
    const Sequence perm = fixtures::random_permutation(spec.capacity(), seed);
    Arrangement arr(spec, spec.capacity());
    for (int i = 0; i < spec.capacity(); ++i) {
      if (perm[i] == 1 || rng() % 3 != 0) arr.place(perm[i], Cell{i / 3 + 1, i % 3 + 1});
    }
    const WorldState w = world(arr);
    for (Load l : arr.loads()) {
      const Path got = min_blocker_path(w, l);
      const Path want = best_path_oracle(w, *w.position(l));
      CAPTURE(seed);
      CAPTURE(l);
      CHECK(blockers_on(w, got) == blockers_on(w, want));
      CHECK(got.steps() == want.steps());
      CHECK(got == want);
    }
  }
}

TEST_CASE("unblocked set") {
  const WorldState empty(GridSpec(3, 3), {});
  CHECK(unblocked_set(empty).empty());
  const Arrangement full = fixtures::fig1_plain();
  CHECK(unblocked_set(world(full)) == std::vector<Load>{1, 3, 5});
  CHECK(unblocked_set(world(blocked_column())) == std::vector<Load>{5, 6, 8, 9});
}

TEST_CASE("destination choice on a blocked column") {
  WorldState w = world(blocked_column());
  const Path pi = min_blocker_path(w, 11);

  // (1,2) is nearest but would cut 5 off; (1,3) cuts 6 off, which is fine
  // because 6 sits next to 5.
  const auto first = choose_destination(w, 9, pi, 1);
  REQUIRE(first);
  CHECK(first->cells == std::vector<Cell>{{1, 1}, {1, 2}, {1, 3}});
  w.apply(Action{ActionKind::Relocate, 9, *first});

  CHECK(unblocked_set(w) == std::vector<Load>{5, 8, 9, 10});
  const auto second = choose_destination(w, 10, pi, 0);
  REQUIRE(second);
  CHECK(second->back() == Cell{1, 2});
  CHECK(second->cells.front() == Cell{2, 1});

  CHECK_THROWS_AS(choose_destination(w, 5, pi, 0), std::invalid_argument);
}

TEST_CASE("destination choice on a packed grid parks") {
  const WorldState w = world(fixtures::fig1_plain());
  const Path pi = min_blocker_path(w, 2);
  CHECK_FALSE(choose_destination(w, 1, pi, 0));
}

TEST_CASE("retrieve one: unblocked target") {
  WorldState w = world(fixtures::fig1_plain());
  const auto actions = retrieve_one(w, 3, RetrievalPolicy::ImpR);
  REQUIRE(actions.size() == 1);
  CHECK(actions[0].kind == ActionKind::Retrieve);
  CHECK(actions[0].path.cells == std::vector<Cell>{{1, 3}, {0, 3}});
  CHECK(w.departed(3));
}

TEST_CASE("retrieve one: perturbed order on the plain 3x3 arrangement") {
  for (RetrievalPolicy policy : {RetrievalPolicy::BaseR, RetrievalPolicy::ImpR}) {
    CAPTURE(to_string(policy));
    WorldState w = world(fixtures::fig1_plain());
    // 2 is blocked by 1, which goes out to the I/O row and comes back.
    const auto first = retrieve_one(w, 2, policy);
    REQUIRE(first.size() == 3);
    CHECK(first[0] == Action{ActionKind::Relocate, 1, Path{{{1, 1}, {0, 1}, {0, 2}}}});
    CHECK(first[1] == Action{ActionKind::Retrieve, 2, Path{{{2, 1}, {1, 1}, {0, 1}}}});
    CHECK(first[2] == Action{ActionKind::Relocate, 1, Path{{{0, 2}, {0, 1}, {1, 1}}}});
    CHECK(w.position(1) == Cell{1, 1});
    for (Load l : {1, 3, 5, 4}) CHECK(retrieve_one(w, l, policy).size() == 1);
    // 7 is blocked by 6.
    const auto seventh = retrieve_one(w, 7, policy);
    if (policy == RetrievalPolicy::ImpR) {
      REQUIRE(seventh.size() == 2);
      CHECK(seventh[0] == Action{ActionKind::Relocate, 6, Path{{{2, 3}, {1, 3}, {1, 2}}}});
      CHECK(w.position(6) == Cell{1, 2});
    } else {
      CHECK(relocations(seventh) == 2);
      CHECK(w.position(6) == Cell{2, 3});
    }
    for (Load l : {6, 9, 8}) CHECK(retrieve_one(w, l, policy).size() == 1);
    CHECK(w.placed_count() == 0);
  }
}

TEST_CASE("baseline parking costs two moves per blocker on full grids") {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const GridSpec spec(4, 5);
    WorldState w = world(fixtures::arrangement_from_cells(spec, fixtures::random_permutation(20, seed)));
    std::mt19937_64 rng(seed);
    const Load target = static_cast<Load>(rng() % 20 + 1);
    const WorldState before = w;
    const RetrievalStep step = retrieve_step(w, target, RetrievalPolicy::BaseR);
    CHECK(relocations(step.actions) == 2 * static_cast<long long>(step.plan.blockers.size()));
    CHECK(static_cast<int>(step.plan.blockers.size()) == blockers_on(before, step.plan.path));
    for (Load b : step.plan.blockers) CHECK(w.position(b) == before.position(b));
  }
}

TEST_CASE("retrieval step invariants over random episodes") {
  for (RetrievalPolicy policy : {RetrievalPolicy::BaseR, RetrievalPolicy::ImpR}) {
    for (std::uint64_t seed : seeds(40)) {
      const GridSpec spec(4 + static_cast<int>(seed % 3), 6);
      const Sequence order = fixtures::random_permutation(spec.capacity(), seed);
      const WorldState start = world(fixtures::arrangement_from_cells(spec, order));
      WorldState w = start;
      WorldState replay = start;
      OnlinePerturbationStream stream(spec.capacity(), 3, seed);
      while (!stream.empty()) {
        const Load target = stream.next();
        const WorldState before = w;
        const RetrievalStep step = retrieve_step(w, target, policy);
        CHECK_FALSE(w.io_occupied());
        CHECK(w.departed(target));

        std::vector<Load> on_pi;
        for (Cell c : step.plan.path.cells) {
          if (c.in_storage() && before.at(c) != kNoLoad && before.at(c) != target) {
            on_pi.push_back(before.at(c));
          }
        }
        std::vector<Load> sorted_blockers = step.plan.blockers;
        std::sort(sorted_blockers.begin(), sorted_blockers.end());
        std::sort(on_pi.begin(), on_pi.end());
        CHECK(sorted_blockers == on_pi);

        for (const Assignment& a : step.plan.assignments) {
          if (a.io_park) {
            CHECK(w.position(a.load) == before.position(a.load));
          } else {
            CHECK(policy == RetrievalPolicy::ImpR);
            CHECK_FALSE(step.plan.path.contains(a.destination));
            CHECK(w.position(a.load) == a.destination);
          }
        }
        for (const Action& a : step.actions) {
          if (a.kind == ActionKind::Relocate && a.path.back().in_storage() &&
              a.path.back() != *before.position(a.load)) {
            CHECK_FALSE(step.plan.path.contains(a.path.back()));
          }
          REQUIRE_NOTHROW(replay = apply_action(replay, a));
        }
      }
      CHECK(replay.placed_count() == 0);
      CHECK(w.departed_count() == spec.capacity());
    }
  }
}

TEST_CASE("retrieval needs an empty I/O row and enough parking") {
  WorldState w = world(fixtures::fig1_plain());
  w.apply(Action{ActionKind::Relocate, 1, Path{{{1, 1}, {0, 1}}}});
  CHECK_THROWS_AS(retrieve_one(w, 3, RetrievalPolicy::BaseR), std::logic_error);

  const Sequence tall = fixtures::random_permutation(10, 1);
  for (RetrievalPolicy policy : {RetrievalPolicy::BaseR, RetrievalPolicy::ImpR}) {
    WorldState deep = world(fixtures::arrangement_from_cells(GridSpec(5, 2), tall));
    const Load top = deep.at(Cell{5, 1});
    CHECK_THROWS_AS(retrieve_one(deep, top, policy), InfeasibleRelocation);
  }
}

TEST_CASE("robust arrangements retrieve without relocations") {
  const GridSpec spec(6, 6);
  int checked = 0;
  for (std::uint64_t seed : seeds(30)) {
    const Sequence a = fixtures::random_permutation(36, seed);
    const SolveOutcome out = find_robust_enhanced(a, spec, 2);
    if (!out.ok()) continue;
    ++checked;
    for (RetrievalPolicy policy : {RetrievalPolicy::BaseR, RetrievalPolicy::ImpR}) {
      OnlinePerturbationStream stream(36, 2, seed);
      const RetrievalResult res = run_retrieval(world(*out.arrangement), stream, policy);
      CHECK(res.metrics.relocations == 0);
      CHECK(res.metrics.io_usage == 0);
      CHECK(res.departures.size() == 36);
      CHECK(res.log.size() == 36);
    }
  }
  CHECK(checked >= 20);
}

TEST_CASE("unperturbed retrieval over base storage") {
  for (std::uint64_t seed : seeds(20)) {
    const Sequence a = fixtures::random_permutation(25, seed);
    const Arrangement arr = base_storage(a, GridSpec(5, 5));
    OnlinePerturbationStream stream(25, 0, seed);
    const RetrievalResult res = run_retrieval(world(arr), stream, RetrievalPolicy::BaseR);
    CHECK(res.metrics.relocations == 0);
    Sequence ascending(25);
    std::iota(ascending.begin(), ascending.end(), 1);
    CHECK(res.departures == ascending);
  }
}

TEST_CASE("greedy relocation beats parking on matched episodes") {
  long long base = 0, imp = 0;
  for (std::uint64_t seed : seeds(30)) {
    const GridSpec spec(7, 7);
    const Sequence a = fixtures::random_permutation(49, seed);
    const WorldState start = world(base_storage(a, spec));
    OnlinePerturbationStream s1(49, 7, seed), s2(49, 7, seed);
    const RetrievalResult rb = run_retrieval(start, s1, RetrievalPolicy::BaseR);
    const RetrievalResult ri = run_retrieval(start, s2, RetrievalPolicy::ImpR);
    CHECK(rb.departures == ri.departures);
    CHECK(rb.metrics.relocations == relocations(rb.log));
    base += rb.metrics.relocations;
    imp += ri.metrics.relocations;
  }
  CHECK(imp <= base);
  CHECK(base > 0);
}

TEST_CASE("run retrieval input checks") {
  WorldState pending(GridSpec(2, 3), fixtures::random_permutation(6, 0));
  OnlinePerturbationStream s(6, 1, 0);
  CHECK_THROWS_AS(run_retrieval(pending, s, RetrievalPolicy::ImpR), std::invalid_argument);

  const WorldState w = world(fixtures::fig1_plain());
  OnlinePerturbationStream wrong(std::vector<Load>{1, 2, 10}, 0, 0);
  CHECK_THROWS_AS(run_retrieval(w, wrong, RetrievalPolicy::ImpR), std::invalid_argument);
  OnlinePerturbationStream partial(std::vector<Load>{1, 2}, 0, 0);
  CHECK_THROWS_AS(run_retrieval(w, partial, RetrievalPolicy::ImpR), std::invalid_argument);
}
