#include "bendoct/pbcp.hpp"

#include <stdexcept>

namespace bendoct {

PathKey Path::key() const {
  std::vector<std::pair<int, int>> c;
  c.reserve(elements.size());
  for (const auto& e : elements) c.emplace_back(e.feature, e.dir);
  return PathKey(std::move(c));
}

std::vector<Path> find_integral_paths(const MpSolution& sol, const TreeTopology& topology,
                                      double eps_int) {
  std::vector<Path> out;
  std::vector<Path> stack{Path{}};
  while (!stack.empty()) {
    Path partial = std::move(stack.back());
    stack.pop_back();
    const int n = partial.n_sub;
    if (topology.height(n) <= 2) continue;
    for (int f = 0; f < sol.layout.n_features(); ++f) {
      if (sol.b(n, f) < 1.0 - eps_int) continue;
      for (int dir = 0; dir <= 1; ++dir) {
        Path ext = partial;
        ext.elements.push_back({n, f, dir});
        ext.n_sub = dir ? TreeTopology::right(n) : TreeTopology::left(n);
        out.push_back(ext);
        stack.push_back(std::move(ext));
      }
      break;
    }
  }
  return out;
}

PbcpConfig PbcpConfig::parse(const std::string& s) {
  if (s == "off") return {false, false, false};
  if (s == "basic") return {true, false, false};
  if (s == "bns") return {true, true, false};
  if (s == "bst") return {true, false, true};
  if (s == "bns-bst") return {true, true, true};
  throw std::invalid_argument("unknown path-bound variant '" + s + "'");
}

std::string PbcpConfig::name() const {
  if (!enabled) return "off";
  if (negative_samples && tree_structure) return "bns-bst";
  if (negative_samples) return "bns";
  if (tree_structure) return "bst";
  return "basic";
}

const char* to_string(PbcpCutKind kind) {
  switch (kind) {
    case PbcpCutKind::basic:
      return "basic";
    case PbcpCutKind::negative_samples:
      return "bns";
    case PbcpCutKind::tree_structure:
      return "bst";
  }
  return "?";
}

std::vector<CutTerm> relax_terms(const Path& path, const TreeTopology& topology, int n_features) {
  std::vector<CutTerm> out;
  for (const auto& e : path.elements) {
    out.push_back(CutTerm::p(e.node));
    for (int f = 0; f < n_features; ++f) {
      if (f != e.feature) out.push_back(CutTerm::b(e.node, f));
    }
  }
  for (int d : topology.descendants(path.n_sub)) {
    if (TreeTopology::dist(path.n_sub, d) > 2) out.push_back(CutTerm::p(d));
  }
  return out;
}

namespace {

void append_scaled(std::vector<CutTerm>& out, const std::vector<CutTerm>& terms, double scale) {
  for (auto t : terms) {
    t.coef *= scale;
    out.push_back(t);
  }
}

}  // namespace

std::vector<PbcpCut> path_cuts(const Path& path, const SubtreeSolution& sub, const BinaryDataset& data,
                               const TreeTopology& topology, const PbcpConfig& config,
                               const std::vector<int>& path_samples) {
  std::vector<PbcpCut> cuts;
  if (!config.enabled) return cuts;
  const int F = data.n_features();
  const auto relax = relax_terms(path, topology, F);

  if (!config.negative_samples) {
    PbcpCut c{PbcpCutKind::basic, path, {}, static_cast<double>(sub.raw_score)};
    for (int i : path_samples) c.terms.push_back(CutTerm::theta(i));
    append_scaled(c.terms, relax, -static_cast<double>(path_samples.size() - sub.correct.size()));
    cuts.push_back(std::move(c));
  } else if (!sub.incorrect.empty()) {
    PbcpCut c{PbcpCutKind::negative_samples, path, {}, 0.0};
    for (int i : sub.incorrect) c.terms.push_back(CutTerm::theta(i));
    append_scaled(c.terms, relax, -static_cast<double>(sub.incorrect.size()));
    cuts.push_back(std::move(c));
  }

  if (config.tree_structure) {
    PbcpCut c{PbcpCutKind::tree_structure, path, {}, 0.0};
    for (const auto& [rel, fstar] : sub.branches) {
      const int n = absolute_node(path.n_sub, rel);
      c.terms.push_back(CutTerm::p(n));
      for (int f = 0; f < F; ++f) {
        if (f != fstar) c.terms.push_back(CutTerm::b(n, f));
      }
    }
    for (const auto& [rel, kstar] : sub.leaves) {
      const int n = absolute_node(path.n_sub, rel);
      if (topology.is_internal(n)) {
        for (int f = 0; f < F; ++f) c.terms.push_back(CutTerm::b(n, f));
      }
      for (int k = 0; k < data.n_classes(); ++k) {
        if (k != kstar) c.terms.push_back(CutTerm::w(n, k));
      }
    }
    append_scaled(c.terms, relax, -static_cast<double>(sub.branches.size() + sub.leaves.size()));
    cuts.push_back(std::move(c));
  }
  return cuts;
}

std::vector<PbcpCut> separate_pbcp(const MpSolution& sol, const BinaryDataset& data,
                                   const PbcpConfig& config, D2SCache& cache, double eps_int,
                                   PbcpStats* stats) {
  std::vector<PbcpCut> out;
  if (!config.enabled) return out;
  const TreeTopology topology(sol.layout.depth());
  const double lambda_bar = cache.lambda_bar();
  for (const auto& path : find_integral_paths(sol, topology, eps_int)) {
    if (stats) ++stats->paths;
    const PathKey key = path.key();
    const SubtreeSolution* sub = cache.get_or_compute(key, 2);
    if (!sub) continue;
    const auto samples = cache.subset(key);
    double relaxed = 0.0;
    for (int i : samples) relaxed += sol.theta(i);
    relaxed -= lambda_bar * sol.p(path.n_sub);
    for (int d : topology.descendants(path.n_sub)) relaxed -= lambda_bar * sol.p(d);
    if (relaxed <= sub->penalized_score + 1e-6) continue;
    if (stats) ++stats->triggered;
    for (auto& c : path_cuts(path, *sub, data, topology, config, samples)) out.push_back(std::move(c));
  }
  return out;
}

}  // namespace bendoct
