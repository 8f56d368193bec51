#include "gridstore/sequence.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_map>

namespace gridstore {

Sequence reverse_sequence(std::span<const Load> seq) {
  if (!is_permutation_of_labels(seq)) {
    throw std::invalid_argument("reverse_sequence: input is not a permutation of 1..n");
  }
  return Sequence(seq.rbegin(), seq.rend());
}

bool validate_perturbation(std::span<const Load> original, std::span<const Load> realized, int k) {
  if (original.size() != realized.size()) {
    throw std::invalid_argument("validate_perturbation: length mismatch");
  }
  std::unordered_map<Load, std::size_t> rank;
  rank.reserve(original.size());
  for (std::size_t i = 0; i < original.size(); ++i) {
    if (!rank.emplace(original[i], i).second) {
      throw std::invalid_argument("validate_perturbation: repeated element in original");
    }
  }
  std::vector<std::size_t> pos(realized.size());
  std::vector<char> seen(original.size(), 0);
  for (std::size_t i = 0; i < realized.size(); ++i) {
    const auto it = rank.find(realized[i]);
    if (it == rank.end() || seen[it->second]) {
      throw std::invalid_argument("validate_perturbation: content mismatch");
    }
    seen[it->second] = 1;
    pos[i] = it->second;
  }
  for (std::size_t a = 0; a < pos.size(); ++a) {
    for (std::size_t b = a + 1; b < pos.size(); ++b) {
      if (pos[a] > pos[b] && pos[a] - pos[b] > static_cast<std::size_t>(k)) return false;
    }
  }
  return true;
}

namespace {

void extend(std::span<const Load> original, int k, std::vector<char>& used, std::size_t lowest,
            Sequence& prefix, std::vector<Sequence>& out) {
  const std::size_t n = original.size();
  if (prefix.size() == n) {
    out.push_back(prefix);
    return;
  }
  while (lowest < n && used[lowest]) ++lowest;
  const std::size_t limit = std::min(n - 1, lowest + static_cast<std::size_t>(k));
  for (std::size_t p = lowest; p <= limit; ++p) {
    if (used[p]) continue;
    used[p] = 1;
    prefix.push_back(original[p]);
    extend(original, k, used, lowest, prefix, out);
    prefix.pop_back();
    used[p] = 0;
  }
}

}  // namespace

std::vector<Sequence> enumerate_perturbations(std::span<const Load> original, int k) {
  std::vector<Sequence> out;
  if (original.empty()) {
    out.emplace_back();
    return out;
  }
  std::vector<char> used(original.size(), 0);
  Sequence prefix;
  prefix.reserve(original.size());
  extend(original, std::max(k, 0), used, 0, prefix, out);
  return out;
}

OnlinePerturbationStream::OnlinePerturbationStream(int n, int k, std::uint64_t seed)
    : k_(k), rng_(seed) {
  if (k < 0) throw std::invalid_argument("perturbation bound must be non-negative");
  for (Load l = 1; l <= n; ++l) remaining_.insert(remaining_.end(), l);
}

OnlinePerturbationStream::OnlinePerturbationStream(std::span<const Load> loads, int k,
                                                   std::uint64_t seed)
    : remaining_(loads.begin(), loads.end()), k_(k), rng_(seed) {
  if (k < 0) throw std::invalid_argument("perturbation bound must be non-negative");
}

Load OnlinePerturbationStream::next() {
  if (remaining_.empty()) throw std::logic_error("perturbation stream is exhausted");
  const Load bound = *remaining_.begin() + k_;
  const auto last = remaining_.upper_bound(bound);
  const auto eligible = static_cast<std::size_t>(std::distance(remaining_.begin(), last));
  std::uniform_int_distribution<std::size_t> pick(0, eligible - 1);
  auto it = std::next(remaining_.begin(), static_cast<std::ptrdiff_t>(pick(rng_)));
  const Load out = *it;
  remaining_.erase(it);
  return out;
}

Sequence OnlinePerturbationStream::drain() {
  Sequence out;
  out.reserve(remaining_.size());
  while (!remaining_.empty()) out.push_back(next());
  return out;
}

}  // namespace gridstore
