#pragma once

#include <cstdint>
#include <random>
#include <set>
#include <span>
#include <vector>

#include "gridstore/grid.hpp"

namespace gridstore {

/// Reverse of a permutation of 1..n. Throws std::invalid_argument otherwise.
Sequence reverse_sequence(std::span<const Load> seq);

/// True iff `realized` is a k-bounded perturbation of `original`: every pair
/// that appears inverted in `realized` lies at most k positions apart in
/// `original`. Pairwise check, O(n^2). Throws std::invalid_argument when
/// the two sequences do not hold the same distinct elements.
bool validate_perturbation(std::span<const Load> original, std::span<const Load> realized, int k);

/// Every k-bounded perturbation of `original`, each once, in lexicographic
/// order of the choice sequence. Exponential; intended for n <= 10.
std::vector<Sequence> enumerate_perturbations(std::span<const Load> original, int k);

/// Reveals a k-bounded perturbation of the ascending order of a set of
/// loads, one load at a time. Each step draws uniformly among the remaining
/// loads x with x <= min(remaining) + k.
class OnlinePerturbationStream {
 public:
  /// Stream over loads 1..n.
  OnlinePerturbationStream(int n, int k, std::uint64_t seed);
  OnlinePerturbationStream(std::span<const Load> loads, int k, std::uint64_t seed);

  bool empty() const noexcept { return remaining_.empty(); }
  std::size_t remaining() const noexcept { return remaining_.size(); }
  int k() const noexcept { return k_; }

  /// Throws std::logic_error when empty.
  Load next();

  /// Drains the stream.
  Sequence drain();

 private:
  std::set<Load> remaining_;
  int k_;
  std::mt19937_64 rng_;
};

}  // namespace gridstore
