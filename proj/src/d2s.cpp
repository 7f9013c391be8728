#include "bendoct/d2s.hpp"

#include <algorithm>
#include <array>
#include <stdexcept>

namespace bendoct {

FrequencyCounters::FrequencyCounters(const BinaryDataset& data, std::span<const int> subset)
    : n_classes_(data.n_classes()),
      n_features_(data.n_features()),
      size_(static_cast<int>(subset.size())),
      totals_(n_classes_, 0),
      fq1_(static_cast<std::size_t>(n_classes_) * n_features_, 0),
      fq2_(static_cast<std::size_t>(n_classes_) * n_features_ * n_features_, 0) {
  if (subset.empty()) throw std::invalid_argument("frequency counters need a nonempty subset");
  std::vector<int> ones;
  ones.reserve(n_features_);
  for (int i : subset) {
    const int k = data.y(i);
    ++totals_[k];
    ones.clear();
    const auto row = data.row(i);
    for (int f = 0; f < n_features_; ++f) {
      if (row[f]) ones.push_back(f);
    }
    int* c1 = fq1_.data() + static_cast<std::size_t>(k) * n_features_;
    int* c2 = fq2_.data() + static_cast<std::size_t>(k) * n_features_ * n_features_;
    for (std::size_t a = 0; a < ones.size(); ++a) {
      const int fa = ones[a];
      ++c1[fa];
      int* r = c2 + static_cast<std::size_t>(fa) * n_features_;
      ++r[fa];
      for (std::size_t b = a + 1; b < ones.size(); ++b) {
        ++r[ones[b]];
        ++c2[static_cast<std::size_t>(ones[b]) * n_features_ + fa];
      }
    }
  }
}

int FrequencyCounters::count(int k, int fa, bool va, int fb, bool vb) const {
  const int both = fq(k, fa, fb);
  if (va && vb) return both;
  if (va) return fq(k, fa) - both;
  if (vb) return fq(k, fb) - both;
  return count(k, fa, false) - (fq(k, fb) - both);
}

int absolute_node(int root, int relative) {
  const int d = TreeTopology::depth_of(relative);
  return (root << d) + (relative - (1 << d));
}

std::vector<std::pair<int, NodeAssignment>> graft(const SubtreeSolution& sol, int root) {
  std::vector<std::pair<int, NodeAssignment>> out;
  for (const auto& [n, f] : sol.branches) {
    out.emplace_back(absolute_node(root, n), NodeAssignment::branch(f));
  }
  for (const auto& [n, k] : sol.leaves) out.emplace_back(absolute_node(root, n), NodeAssignment::leaf(k));
  return out;
}

namespace {

struct Leaf {
  int score = 0;
  int k = 0;
};

template <class Count>
Leaf best_leaf(int n_classes, Count count) {
  Leaf best{count(0), 0};
  for (int k = 1; k < n_classes; ++k) {
    const int c = count(k);
    if (c > best.score) best = {c, k};
  }
  return best;
}

struct Choice {
  int score = -1;  // -1: topology unavailable
  int fa = -1;
  int left_fb = -1;
  int right_fb = -1;
};

}  // namespace

SubtreeSolution optimal_depth2(const BinaryDataset& data, std::span<const int> subset,
                               double lambda_bar, int max_depth) {
  if (subset.empty()) throw std::invalid_argument("optimal_depth2 needs a nonempty subset");
  if (lambda_bar < 0) throw std::invalid_argument("lambda_bar must be nonnegative");
  if (max_depth < 0 || max_depth > 2) throw std::invalid_argument("max_depth must be 0, 1 or 2");

  const FrequencyCounters c(data, subset);
  const int K = c.n_classes();
  const int F = max_depth >= 1 ? c.n_features() : 0;

  std::array<Choice, 5> best;  // indexed by leaf count
  best[1].score = best_leaf(K, [&](int k) { return c.total(k); }).score;

  for (int fa = 0; fa < F; ++fa) {
    const Leaf left = best_leaf(K, [&](int k) { return c.count(k, fa, false); });
    const Leaf right = best_leaf(K, [&](int k) { return c.count(k, fa, true); });
    if (left.score + right.score > best[2].score) best[2] = {left.score + right.score, fa};
    if (max_depth < 2) continue;

    int sub_l = -1, fb_l = -1, sub_r = -1, fb_r = -1;
    for (int fb = 0; fb < F; ++fb) {
      const int l = best_leaf(K, [&](int k) { return c.count(k, fa, false, fb, false); }).score +
                    best_leaf(K, [&](int k) { return c.count(k, fa, false, fb, true); }).score;
      if (l > sub_l) sub_l = l, fb_l = fb;
      const int r = best_leaf(K, [&](int k) { return c.count(k, fa, true, fb, false); }).score +
                    best_leaf(K, [&](int k) { return c.count(k, fa, true, fb, true); }).score;
      if (r > sub_r) sub_r = r, fb_r = fb;
    }
    // (fa, -1, fb) sorts before (fa, fb, -1).
    if (left.score + sub_r > best[3].score) best[3] = {left.score + sub_r, fa, -1, fb_r};
    if (sub_l + right.score > best[3].score) best[3] = {sub_l + right.score, fa, fb_l, -1};
    if (sub_l + sub_r > best[4].score) best[4] = {sub_l + sub_r, fa, fb_l, fb_r};
  }

  int h = 1;
  for (int cand = 2; cand <= 4; ++cand) {
    if (best[cand].score < 0) continue;
    if (best[cand].score - lambda_bar * cand > best[h].score - lambda_bar * h + 1e-9) h = cand;
  }

  // Relative-node layout of the chosen subtree.
  std::array<NodeAssignment, 8> nodes{};
  const Choice& ch = best[h];
  if (h == 1) {
    nodes[1] = NodeAssignment::leaf(0);
  } else {
    nodes[1] = NodeAssignment::branch(ch.fa);
    nodes[2] = ch.left_fb >= 0 ? NodeAssignment::branch(ch.left_fb) : NodeAssignment::leaf(0);
    nodes[3] = ch.right_fb >= 0 ? NodeAssignment::branch(ch.right_fb) : NodeAssignment::leaf(0);
    for (int n = 2; n <= 3; ++n) {
      if (nodes[n].is_branch()) {
        nodes[2 * n] = NodeAssignment::leaf(0);
        nodes[2 * n + 1] = NodeAssignment::leaf(0);
      }
    }
  }

  const auto reach = [&](int i) {
    int n = 1;
    while (nodes[n].is_branch()) n = 2 * n + (data.x(i, nodes[n].value) ? 1 : 0);
    return n;
  };
  std::array<std::vector<int>, 8> counts;
  for (auto& v : counts) v.assign(K, 0);
  for (int i : subset) ++counts[reach(i)][data.y(i)];
  for (int n = 1; n < 8; ++n) {
    if (nodes[n].is_leaf()) nodes[n].value = best_leaf(K, [&](int k) { return counts[n][k]; }).k;
  }

  SubtreeSolution sol;
  for (int n = 1; n < 8; ++n) {
    if (nodes[n].is_branch()) sol.branches.emplace_back(n, nodes[n].value);
    if (nodes[n].is_leaf()) sol.leaves.emplace_back(n, nodes[n].value);
  }
  for (int i : subset) {
    (nodes[reach(i)].value == data.y(i) ? sol.correct : sol.incorrect).push_back(i);
  }
  std::sort(sol.correct.begin(), sol.correct.end());
  std::sort(sol.incorrect.begin(), sol.incorrect.end());
  sol.leaf_count = h;
  sol.raw_score = static_cast<int>(sol.correct.size());
  sol.penalized_score = sol.raw_score - lambda_bar * h;
  if (sol.raw_score != ch.score) throw std::logic_error("optimal_depth2: routed score mismatch");
  return sol;
}

PathKey::PathKey(std::vector<std::pair<int, int>> conditions) : conditions_(std::move(conditions)) {
  std::sort(conditions_.begin(), conditions_.end());
  conditions_.erase(std::unique(conditions_.begin(), conditions_.end()), conditions_.end());
}

bool PathKey::contradictory() const {
  for (std::size_t j = 1; j < conditions_.size(); ++j) {
    if (conditions_[j].first == conditions_[j - 1].first) return true;
  }
  return false;
}

bool PathKey::matches(std::span<const std::uint8_t> sample) const {
  return std::all_of(conditions_.begin(), conditions_.end(),
                     [&](const auto& c) { return sample[c.first] == c.second; });
}

std::size_t PathKeyHash::operator()(const PathKey& key) const {
  std::size_t h = 1469598103934665603ull;
  for (const auto& [f, d] : key.conditions()) {
    h ^= static_cast<std::size_t>(2 * f + d) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
  }
  return h;
}

std::vector<int> D2SCache::subset(const PathKey& key) const {
  std::vector<int> out;
  if (key.contradictory()) return out;
  for (int i = 0; i < data_->n_samples(); ++i) {
    if (key.matches(data_->row(i))) out.push_back(i);
  }
  return out;
}

const SubtreeSolution* D2SCache::get_or_compute(const PathKey& key, int max_depth) {
  ++calls_;
  Key k{key, max_depth};
  if (auto it = entries_.find(k); it != entries_.end()) {
    ++hits_;
    return it->second.get();
  }
  const auto ids = subset(key);
  std::unique_ptr<SubtreeSolution> sol;
  if (!ids.empty()) {
    sol = std::make_unique<SubtreeSolution>(optimal_depth2(*data_, ids, lambda_bar_, max_depth));
  }
  return entries_.emplace(std::move(k), std::move(sol)).first->second.get();
}

}  // namespace bendoct
