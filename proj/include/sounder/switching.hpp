// switching.hpp
// Switching sequences: which antenna is active in which time slot.
//
// Slots are the canonical representation; `delta_t` converts slots to seconds
// only when activation instants are requested. order[k] is the antenna active
// in slot k, so slot(m) = order^-1[m].

#pragma once

#include <algorithm>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "core.hpp"
#include "rng.hpp"

namespace sounder {

using Partition = std::vector<IndexSet>;

// Subsets must be non-empty contiguous index ranges that tile {0..M-1}. Their
// list order is the order in which they are switched.
inline void validate_partition(const Partition& partition, std::size_t count) {
  require(!partition.empty(), "partition must contain at least one subset");
  std::vector<bool> seen(count, false);
  std::size_t total = 0;
  for (std::size_t s = 0; s < partition.size(); ++s) {
    const auto& subset = partition[s];
    require(!subset.empty(), "partition subset " + std::to_string(s) + " is empty");
    auto sorted = subset;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < sorted.size(); ++i) {
      require(sorted[i] < count, "partition subset " + std::to_string(s) + " references antenna outside array");
      require(i == 0 || sorted[i] == sorted[i - 1] + 1,
              "partition subset " + std::to_string(s) + " is not a contiguous index range");
      require(!seen[sorted[i]], "partition subsets overlap at antenna " + std::to_string(sorted[i]));
      seen[sorted[i]] = true;
    }
    total += sorted.size();
  }
  require(total == count, "partition does not cover every antenna");
}

/// Splits {0..M-1} into equal contiguous groups of `group_size`.
inline Partition uniform_partition(std::size_t count, std::size_t group_size) {
  require(group_size >= 1 && count % group_size == 0, "array size must be a multiple of the group size");
  Partition out;
  for (std::size_t start = 0; start < count; start += group_size) {
    IndexSet g(group_size);
    std::iota(g.begin(), g.end(), start);
    out.push_back(std::move(g));
  }
  return out;
}

class SwitchingSequence {
 public:
  SwitchingSequence(std::vector<std::size_t> order, double delta_t, std::size_t snapshots = 1,
                    std::optional<Partition> partition = std::nullopt)
      : order_(std::move(order)), delta_t_(delta_t), snapshots_(snapshots), partition_(std::move(partition)) {
    require(!order_.empty(), "switching sequence needs at least one antenna");
    require(delta_t_ > 0.0 && std::isfinite(delta_t_), "slot duration delta_t must be positive");
    require(snapshots_ >= 1, "snapshot count must be >= 1");
    slot_.assign(order_.size(), order_.size());
    for (std::size_t k = 0; k < order_.size(); ++k) {
      require(order_[k] < order_.size(), "switching order references antenna outside array");
      require(slot_[order_[k]] == order_.size(), "switching order is not a permutation");
      slot_[order_[k]] = k;
    }
    if (partition_) validate_partition(*partition_, order_.size());
  }

  std::size_t size() const { return order_.size(); }
  double delta_t() const { return delta_t_; }
  std::size_t snapshots() const { return snapshots_; }
  const std::vector<std::size_t>& order() const { return order_; }
  const std::optional<Partition>& partition() const { return partition_; }
  std::size_t slot_of(std::size_t antenna) const { return slot_[antenna]; }
  const std::vector<std::size_t>& slots() const { return slot_; }

  /// First slot of each partition subset, plus a final sentinel equal to M.
  std::vector<std::size_t> subset_slot_starts() const {
    require(partition_.has_value(), "sequence has no partition");
    std::vector<std::size_t> starts{0};
    for (const auto& s : *partition_) starts.push_back(starts.back() + s.size());
    return starts;
  }

  /// True when every subset's antennas occupy exactly that subset's slot range.
  bool satisfies_hybrid() const {
    if (!partition_) return false;
    const auto starts = subset_slot_starts();
    for (std::size_t s = 0; s < partition_->size(); ++s)
      for (std::size_t m : (*partition_)[s])
        if (slot_[m] < starts[s] || slot_[m] >= starts[s + 1]) return false;
    return true;
  }

  SwitchingSequence with_order(std::vector<std::size_t> order) const {
    return SwitchingSequence(std::move(order), delta_t_, snapshots_, partition_);
  }

  friend bool operator==(const SwitchingSequence& a, const SwitchingSequence& b) {
    return a.order_ == b.order_ && a.delta_t_ == b.delta_t_ && a.snapshots_ == b.snapshots_ &&
           a.partition_ == b.partition_;
  }

 private:
  std::vector<std::size_t> order_;
  std::vector<std::size_t> slot_;
  double delta_t_;
  std::size_t snapshots_;
  std::optional<Partition> partition_;
};

inline SwitchingSequence sequential(std::size_t count, double delta_t, std::size_t snapshots = 1,
                                    std::optional<Partition> partition = std::nullopt) {
  require(count >= 1, "sequence needs at least one antenna");
  std::vector<std::size_t> order(count);
  std::iota(order.begin(), order.end(), 0);
  return SwitchingSequence(std::move(order), delta_t, snapshots, std::move(partition));
}

inline SwitchingSequence random_init(std::size_t count, double delta_t, std::size_t snapshots, Rng& rng) {
  require(count >= 1, "sequence needs at least one antenna");
  std::vector<std::size_t> order(count);
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order);
  return SwitchingSequence(std::move(order), delta_t, snapshots);
}

/// Subsets switched one after another in list order, random order inside each subset.
inline SwitchingSequence hybrid_init(std::size_t count, double delta_t, std::size_t snapshots, Partition partition,
                                     Rng& rng) {
  validate_partition(partition, count);
  std::vector<std::size_t> order;
  order.reserve(count);
  for (const auto& subset : partition) {
    auto members = subset;
    std::sort(members.begin(), members.end());
    rng.shuffle(members);
    order.insert(order.end(), members.begin(), members.end());
  }
  return SwitchingSequence(std::move(order), delta_t, snapshots, std::move(partition));
}

/// Exchanges the antennas in two distinct uniformly chosen slots.
inline SwitchingSequence swap_random(const SwitchingSequence& seq, Rng& rng) {
  require(seq.size() >= 2, "swap needs at least two antennas");
  const auto [a, b] = rng.distinct_pair(seq.size());
  auto order = seq.order();
  std::swap(order[a], order[b]);
  return seq.with_order(std::move(order));
}

/// Swap inside the slot range of subset (iteration mod #subsets).
inline SwitchingSequence swap_hybrid(const SwitchingSequence& seq, std::size_t iteration, Rng& rng) {
  require(seq.partition().has_value(), "hybrid swap requires a partitioned sequence");
  const auto& partition = *seq.partition();
  for (std::size_t s = 0; s < partition.size(); ++s)
    require(partition[s].size() >= 2, "hybrid swap needs subsets of at least two antennas (subset " +
                                          std::to_string(s) + " is a singleton)");
  const auto starts = seq.subset_slot_starts();
  const std::size_t s = iteration % partition.size();
  const auto [a, b] = rng.distinct_pair(partition[s].size());
  auto order = seq.order();
  std::swap(order[starts[s] + a], order[starts[s] + b]);
  return seq.with_order(std::move(order));
}

// Activation instants, entry m + t*M for antenna m in snapshot t, with snapshot
// period M*delta_t. `centered` removes the mean over all entries.
inline RVector eta_vector(const SwitchingSequence& seq, bool centered) {
  const std::size_t count = seq.size();
  const std::size_t total = count * seq.snapshots();
  RVector eta(total);
  const double mean_slot = centered ? (static_cast<double>(total) - 1.0) / 2.0 : 0.0;
  for (std::size_t t = 0; t < seq.snapshots(); ++t)
    for (std::size_t m = 0; m < count; ++m)
      eta[m + t * count] = (static_cast<double>(seq.slot_of(m) + t * count) - mean_slot) * seq.delta_t();
  return eta;
}

/// Activation instants of the antennas in `subset` only, centered over those entries.
inline RVector eta_subset_centered(const SwitchingSequence& seq, const IndexSet& subset) {
  require(!subset.empty(), "subset must not be empty");
  const RVector full = eta_vector(seq, false);
  RVector out;
  out.reserve(subset.size() * seq.snapshots());
  for (std::size_t t = 0; t < seq.snapshots(); ++t)
    for (std::size_t m : subset) {
      require(m < seq.size(), "subset references antenna outside sequence");
      out.push_back(full[m + t * seq.size()]);
    }
  double mean = 0.0;
  for (double v : out) mean += v;
  mean /= static_cast<double>(out.size());
  for (double& v : out) v -= mean;
  return out;
}

}  // namespace sounder
