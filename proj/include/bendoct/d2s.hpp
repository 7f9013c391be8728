#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

#include "bendoct/dataset.hpp"
#include "bendoct/tree.hpp"

namespace bendoct {

/// Class/feature frequency counts over a sample subset, stored densely.
/// Counts for negated features are derived from the stored ones.
class FrequencyCounters {
 public:
  FrequencyCounters(const BinaryDataset& data, std::span<const int> subset);

  int n_classes() const { return n_classes_; }
  int n_features() const { return n_features_; }
  int subset_size() const { return size_; }

  int total(int k) const { return totals_[k]; }
  /// FQ(k, fa): samples of class k with x_fa = 1.
  int fq(int k, int fa) const { return fq1_[static_cast<std::size_t>(k) * n_features_ + fa]; }
  /// FQ(k, fa, fb): samples of class k with x_fa = x_fb = 1.
  int fq(int k, int fa, int fb) const {
    return fq2_[(static_cast<std::size_t>(k) * n_features_ + fa) * n_features_ + fb];
  }
  /// FQ(k, fa) with fa negated when `va` is 0.
  int count(int k, int fa, bool va) const { return va ? fq(k, fa) : total(k) - fq(k, fa); }
  /// FQ(k, ±fa, ±fb) with the signs given by `va`, `vb`.
  int count(int k, int fa, bool va, int fb, bool vb) const;

 private:
  int n_classes_;
  int n_features_;
  int size_;
  std::vector<int> totals_;
  std::vector<int> fq1_;
  std::vector<int> fq2_;
};

/// Optimal subtree of depth at most two. Node ids are relative: 1 is the
/// subtree root, 2/3 its children, 4..7 the grandchildren.
struct SubtreeSolution {
  std::vector<int> correct;    // sorted sample ids
  std::vector<int> incorrect;  // sorted sample ids
  std::vector<std::pair<int, int>> branches;  // (relative node, feature)
  std::vector<std::pair<int, int>> leaves;    // (relative node, class)
  int leaf_count = 0;
  int raw_score = 0;
  double penalized_score = 0.0;

  bool operator==(const SubtreeSolution&) const = default;
};

/// Maps a relative subtree id to the absolute id when the subtree is rooted at `root`.
int absolute_node(int root, int relative);

/// Node assignments of `sol` grafted at absolute node `root`.
std::vector<std::pair<int, NodeAssignment>> graft(const SubtreeSolution& sol, int root);

/// Maximises correct - lambda_bar * leaves over subtrees of depth <= max_depth
/// (0, 1 or 2). Ties go to fewer leaves, then to the lexicographically
/// smallest (root feature, left child feature, right child feature) with -1
/// for a child that is a leaf. Leaves predict the smallest majority class.
SubtreeSolution optimal_depth2(const BinaryDataset& data, std::span<const int> subset,
                               double lambda_bar, int max_depth = 2);

/// Unordered set of (feature, direction) conditions; direction 1 means x_f = 1.
class PathKey {
 public:
  PathKey() = default;
  explicit PathKey(std::vector<std::pair<int, int>> conditions);

  const std::vector<std::pair<int, int>>& conditions() const { return conditions_; }
  /// True when some feature is required to be both 0 and 1.
  bool contradictory() const;
  bool matches(std::span<const std::uint8_t> sample) const;

  bool operator==(const PathKey&) const = default;

 private:
  std::vector<std::pair<int, int>> conditions_;  // sorted, unique
};

struct PathKeyHash {
  std::size_t operator()(const PathKey& key) const;
};

/// Memoised D2S results keyed on the path conditions that define a subset.
/// Shared between polishing and path-bound separation within one solve.
class D2SCache {
 public:
  D2SCache(const BinaryDataset& data, double lambda_bar) : data_(&data), lambda_bar_(lambda_bar) {}

  /// nullptr when the key selects no samples.
  const SubtreeSolution* get_or_compute(const PathKey& key, int max_depth = 2);
  std::vector<int> subset(const PathKey& key) const;

  double lambda_bar() const { return lambda_bar_; }
  long calls() const { return calls_; }
  long hits() const { return hits_; }
  long computations() const { return calls_ - hits_; }

 private:
  struct Key {
    PathKey path;
    int max_depth;
    bool operator==(const Key&) const = default;
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const { return PathKeyHash{}(k.path) * 31 + k.max_depth; }
  };

  const BinaryDataset* data_;
  double lambda_bar_;
  std::unordered_map<Key, std::unique_ptr<SubtreeSolution>, KeyHash> entries_;
  long calls_ = 0;
  long hits_ = 0;
};

}  // namespace bendoct
