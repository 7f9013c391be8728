#include "bendoct/driver.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <tuple>

#include "json.hpp"

#include "bendoct/backend.hpp"
#include "bendoct/benders.hpp"
#include "bendoct/d2s.hpp"
#include "bendoct/heuristics.hpp"

namespace bendoct {

const char* to_string(Encoding e) {
  switch (e) {
    case Encoding::onehot: return "onehot";
    case Encoding::qb5: return "qb5";
    case Encoding::qt5: return "qt5";
  }
  return "?";
}

Encoding parse_encoding(const std::string& s) {
  if (s == "onehot") return Encoding::onehot;
  if (s == "qb5") return Encoding::qb5;
  if (s == "qt5") return Encoding::qt5;
  throw std::invalid_argument("unknown encoding '" + s + "' (onehot|qb5|qt5)");
}

CutMode parse_cut_mode(const std::string& s) {
  if (s == "benders") return CutMode::benders;
  if (s == "benders-strong") return CutMode::benders_strong;
  throw std::invalid_argument("unknown cut mode '" + s + "' (benders|benders-strong)");
}

const char* to_string(SolveStatusKind s) {
  switch (s) {
    case SolveStatusKind::optimal: return "optimal";
    case SolveStatusKind::time_limit: return "time-limit";
    case SolveStatusKind::error: return "error";
  }
  return "?";
}

BinaryDataset encode(const RawDataset& raw, Encoding encoding) {
  if (encoding == Encoding::onehot) {
    RawDataset cat = raw;
    for (auto& c : cat.columns) {
      if (c.kind == ColumnKind::continuous) c.kind = ColumnKind::categorical;
    }
    return binarize(cat, EncodingSpec::uniform(cat, ContinuousScheme::threshold));
  }
  const bool any_continuous = std::any_of(raw.columns.begin(), raw.columns.end(),
                                          [](const Column& c) { return c.kind == ColumnKind::continuous; });
  if (!any_continuous) {
    throw DataError(std::string("encoding ") + to_string(encoding) + " needs a continuous column");
  }
  const auto scheme = encoding == Encoding::qb5 ? ContinuousScheme::bucket : ContinuousScheme::threshold;
  return binarize(raw, EncodingSpec::uniform(raw, scheme, 5));
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

using PathId = std::tuple<int, std::vector<std::tuple<int, int, int>>>;

PathId path_id(const PbcpCut& c) {
  std::vector<std::tuple<int, int, int>> e;
  for (const auto& x : c.path.elements) e.emplace_back(x.node, x.feature, x.dir);
  return {static_cast<int>(c.kind), std::move(e)};
}

class Run {
 public:
  Run(const BinaryDataset& data, const SolverConfig& cfg)
      : data_(data),
        cfg_(cfg),
        topo_(cfg.depth),
        backend_(make_highs_backend()),
        model_(topo_, data, cfg.lambda, cfg.cuts, *backend_),
        cache_(data, cfg.lambda * data.n_samples()),
        best_(DecisionTree::single_leaf(cfg.depth, data.majority_class())),
        tol_(std::max(kGapTol, 0.999 * objective_step(data.n_samples(), cfg.lambda, cfg.depth))) {
    best_score_ = score(best_, data_, cfg_.lambda).objective;
  }

  SolveReport go(const std::string& instance) {
    const auto t0 = Clock::now();
    SolveReport r;
    r.instance = instance;
    r.config = cfg_;
    r.backend = backend_->name();
    r.mode = backend_->supports_lazy_constraints() ? "callback" : "iterative";

    if (cfg_.eqp) {
      for (const auto& set : generate_eqp_sets(data_, cfg_.eqp_config.max_split)) {
        emit_eqp_constraints(model_, set, cfg_.eqp_config);
        ++r.eqp_sets;
      }
    }
    if (cfg_.warm_start) consider(cart_warmstart(data_, cfg_.depth, cfg_.lambda));
    cuts_from_tree(best_);

    // Relaxation rounds: min-cut Benders cuts at the LP optimum, plus path
    // bounds when enabled. Every LP value bounds the optimum from above.
    for (int round = 0; round < cfg_.lp_rounds; ++round) {
      if (seconds_since(t0) >= cfg_.time_limit) break;
      SolveOptions opt;
      opt.relax_integrality = true;
      opt.seed = cfg_.seed;
      opt.time_limit = std::max(0.0, cfg_.time_limit - seconds_since(t0));
      const auto lp = backend_->solve(opt);
      if (!lp.has_solution || lp.status != SolveStatus::optimal) break;
      ub_ = std::min(ub_, lp.objective);
      const auto sol = model_.snapshot(lp.values, lp.objective, lp.objective);
      long added = add_fractional_benders(sol);
      if (cfg_.pbcp.enabled) added += add_pbcp(sol);
      if (added == 0) break;
    }

    SolveStatusKind status = SolveStatusKind::time_limit;
    while (true) {
      if (best_score_ >= ub_ - tol_) {
        status = SolveStatusKind::optimal;
        break;
      }
      const double remaining = cfg_.time_limit - seconds_since(t0);
      if (remaining <= 0) break;
      ++r.rounds;

      backend_->set_warm_start(model_.assignment(best_, score(best_, data_, cfg_.lambda).correct));
      // Incumbents are separated as they appear; one that claims to beat the
      // best tree but is cut off ends the solve early.
      long added = 0;
      SolveOptions opt;
      opt.time_limit = remaining;
      opt.seed = cfg_.seed;
      opt.abs_gap = tol_;
      opt.on_incumbent = [&](std::span<const double> v, double objective) {
        const long a = process_incumbent({v.begin(), v.end()});
        added += a;
        return a > 0 && objective > best_score_ + kGapTol;
      };
      const auto res = backend_->solve(opt);
      if (res.status == SolveStatus::infeasible || res.status == SolveStatus::error) {
        throw BackendError("master problem solve failed");
      }
      if (std::isfinite(res.bound)) ub_ = std::min(ub_, res.bound);
      if (res.has_solution) added += process_incumbent(res.values);
      if (res.status == SolveStatus::time_limit) break;
      if (res.status == SolveStatus::optimal && added == 0) {
        // Nothing separates the master optimum, so its value is attained.
        ub_ = std::min(ub_, std::max(best_score_, res.objective));
        status = best_score_ >= ub_ - tol_ ? SolveStatusKind::optimal : SolveStatusKind::time_limit;
        if (status != SolveStatusKind::optimal) {
          r.message = "master optimum not separated but not attained";
        }
        break;
      }
    }

    const auto s = score(best_, data_, cfg_.lambda);
    r.status = status;
    r.tree = best_;
    r.objective = s.objective;
    r.correct_count = s.correct_count;
    r.leaf_count = s.leaf_count;
    r.bound = status == SolveStatusKind::optimal ? s.objective : ub_;
    r.gap_percent = status == SolveStatusKind::optimal
                        ? 0.0
                        : 100.0 * (ub_ - s.objective) / std::max(std::abs(s.objective), 1e-9);
    r.wall_time = seconds_since(t0);
    const auto& counts = model_.row_counts();
    r.cuts["structural"] = counts[RowOrigin::structural];
    r.cuts["benders"] = counts[RowOrigin::benders];
    r.cuts["eqp"] = counts[RowOrigin::eqp];
    r.cuts["pbcp"] = counts[RowOrigin::pbcp];
    r.cuts["benders_strengthened"] = strengthened_;
    for (const auto& [kind, n] : pbcp_kinds_) r.cuts[std::string("pbcp_") + kind] = n;
    r.d2s_calls = cache_.calls();
    r.d2s_hits = cache_.hits();
    r.pbcp_paths = pbcp_stats_.paths;
    r.polish_improvements = polish_improvements_;
    return r;
  }

 private:
  static constexpr double kGapTol = 1e-7;

  void consider_one(const DecisionTree& t) {
    const double s = score(t, data_, cfg_.lambda).objective;
    if (s > best_score_ + 1e-12) {
      best_ = t;
      best_score_ = s;
    }
  }

  void consider(const DecisionTree& t) {
    consider_one(t);
    if (!cfg_.polish) return;
    const DecisionTree p = polish(t, data_, cfg_.lambda, cache_);
    if (!(p == t)) {
      ++polish_improvements_;
      consider_one(p);
      cuts_from_tree(p);
    }
  }

  // Cuts for a tree proposed with every sample counted as correct.
  long cuts_from_tree(const DecisionTree& t) {
    std::vector<std::uint8_t> all(data_.n_samples(), 1);
    auto values = model_.assignment(t, all);
    for (auto& v : values) {
      if (std::isnan(v)) v = 0.0;
    }
    return add_cuts(model_.snapshot(std::move(values), 0.0, kInf));
  }

  long add_cuts(const MpSolution& sol) {
    long added = 0;
    for (const auto& c : separate_benders(sol, data_, cfg_.cuts, {cfg_.eps_int, cfg_.eps_cut})) {
      if (!benders_seen_.insert({c.sample, c.leaf, c.strengthened}).second) continue;
      const auto row = c.row();
      model_.add_cut(row, -kInf, 0.0, RowOrigin::benders);
      strengthened_ += c.strengthened;
      ++added;
    }
    if (cfg_.pbcp.enabled && sol.structurally_integral(cfg_.eps_int)) added += add_pbcp(sol);
    return added;
  }

  long add_fractional_benders(const MpSolution& sol) {
    long added = 0;
    for (const auto& c : separate_benders_fractional(sol, data_, cfg_.eps_cut)) {
      model_.add_cut(c.row(), -kInf, 0.0, RowOrigin::benders);
      ++added;
    }
    return added;
  }

  long add_pbcp(const MpSolution& sol) {
    long added = 0;
    for (const auto& c : separate_pbcp(sol, data_, cfg_.pbcp, cache_, cfg_.eps_int, &pbcp_stats_)) {
      if (!pbcp_seen_.insert(path_id(c)).second) continue;
      model_.add_cut(c.terms, -kInf, c.ub, RowOrigin::pbcp);
      ++pbcp_kinds_[to_string(c.kind)];
      ++added;
    }
    return added;
  }

  long process_incumbent(const std::vector<double>& v) {
    const auto sol = model_.snapshot(v, 0.0, kInf);
    DecisionTree t;
    try {
      t = extract_tree(sol, cfg_.eps_int);
    } catch (const std::exception&) {
      return 0;
    }
    consider(relabel_majority(t, data_));
    return add_cuts(sol);
  }

  const BinaryDataset& data_;
  SolverConfig cfg_;
  TreeTopology topo_;
  std::unique_ptr<IpBackend> backend_;
  MasterModel model_;
  D2SCache cache_;
  DecisionTree best_;
  double best_score_ = 0.0;
  double ub_ = kInf;
  // A bound closer than this to the best tree rules out any better tree.
  double tol_;
  std::set<std::tuple<int, int, bool>> benders_seen_;
  std::set<PathId> pbcp_seen_;
  std::map<std::string, long> pbcp_kinds_;
  PbcpStats pbcp_stats_;
  long strengthened_ = 0;
  long polish_improvements_ = 0;
};

}  // namespace

double objective_step(int n_samples, double lambda, int depth) {
  const double lb = lambda * n_samples;
  const int max_dl = (1 << depth) - 1;
  double step = 1.0 / n_samples;
  for (int dl = -max_dl; dl <= max_dl; ++dl) {
    // Smallest dc with dc - lb * dl clearly positive.
    const double x = lb * dl;
    for (double dc = std::floor(x) - 1; dc <= std::floor(x) + 2; ++dc) {
      if (std::abs(dc) > n_samples) continue;
      const double diff = dc - x;
      if (diff > 1e-9) step = std::min(step, diff / n_samples);
    }
  }
  return step;
}

SolveReport solve(const BinaryDataset& data, const SolverConfig& config, const std::string& instance) {
  if (config.lambda < 0) throw std::invalid_argument("lambda must be nonnegative");
  if (config.depth < 1) throw std::invalid_argument("depth must be at least 1");
  if (config.time_limit <= 0) throw std::invalid_argument("time limit must be positive");
  if (data.n_samples() == 0) throw std::invalid_argument("dataset has no samples");
  Run run(data, config);
  return run.go(instance);
}

std::string InstanceSpec::id() const {
  const std::string stem = std::filesystem::path(dataset).stem().string();
  char buf[160];
  std::snprintf(buf, sizeof buf, "%s/%s/D%d/l%g/%s/%s/%s", stem.c_str(), to_string(encoding), config.depth,
                config.lambda, to_string(config.cuts), config.eqp ? "eqp" : "noeqp",
                config.pbcp.name().c_str());
  return buf;
}

SolveReport solve_instance(const InstanceSpec& spec) {
  const auto t0 = Clock::now();
  try {
    const auto data = encode(load_csv(spec.dataset, spec.label), spec.encoding);
    return solve(data, spec.config, spec.id());
  } catch (const std::exception& e) {
    SolveReport r;
    r.instance = spec.id();
    r.status = SolveStatusKind::error;
    r.message = e.what();
    r.config = spec.config;
    r.wall_time = seconds_since(t0);
    return r;
  }
}

std::vector<AggregateRow> aggregate(const std::vector<SolveReport>& reports,
                                    const std::vector<std::string>& dataset_of_report) {
  if (reports.size() != dataset_of_report.size()) throw std::invalid_argument("aggregate: size mismatch");
  std::vector<AggregateRow> rows;
  std::map<std::string, std::size_t> index;
  std::vector<int> unsolved;
  for (std::size_t i = 0; i < reports.size(); ++i) {
    auto [it, fresh] = index.emplace(dataset_of_report[i], rows.size());
    if (fresh) {
      rows.push_back({dataset_of_report[i]});
      unsolved.push_back(0);
    }
    auto& row = rows[it->second];
    ++row.instances;
    const auto& r = reports[i];
    if (r.status == SolveStatusKind::optimal) {
      ++row.solved;
      row.mean_time_solved += r.wall_time;
    } else if (r.status == SolveStatusKind::time_limit) {
      ++unsolved[it->second];
      row.mean_gap_unsolved += r.gap_percent;
    }
  }
  for (std::size_t j = 0; j < rows.size(); ++j) {
    if (rows[j].solved) rows[j].mean_time_solved /= rows[j].solved;
    if (unsolved[j]) rows[j].mean_gap_unsolved /= unsolved[j];
  }
  return rows;
}

GridResult run_grid(const std::vector<InstanceSpec>& specs, int parallelism) {
  GridResult out;
  out.reports.resize(specs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < specs.size();) out.reports[i] = solve_instance(specs[i]);
  };
  const int n = std::max(1, std::min<int>(parallelism, static_cast<int>(specs.size())));
  std::vector<std::thread> pool;
  for (int t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  std::vector<std::string> names;
  for (const auto& s : specs) names.push_back(std::filesystem::path(s.dataset).stem().string());
  out.table = aggregate(out.reports, names);
  return out;
}

std::string to_json_line(const SolveReport& r) {
  using nlohmann::json;
  json j;
  j["instance"] = r.instance;
  j["status"] = to_string(r.status);
  if (!r.message.empty()) j["message"] = r.message;
  j["objective"] = r.objective;
  j["bound"] = std::isfinite(r.bound) ? json(r.bound) : json(nullptr);
  j["gap_percent"] = std::isfinite(r.gap_percent) ? json(r.gap_percent) : json(nullptr);
  j["wall_time"] = r.wall_time;
  j["backend"] = r.backend;
  j["mode"] = r.mode;
  j["rounds"] = r.rounds;
  j["correct"] = r.correct_count;
  j["leaves"] = r.leaf_count;
  j["cuts"] = r.cuts;
  j["eqp_sets"] = r.eqp_sets;
  j["d2s"] = {{"calls", r.d2s_calls}, {"hits", r.d2s_hits}};
  j["pbcp_paths"] = r.pbcp_paths;
  j["polish_improvements"] = r.polish_improvements;
  const auto& c = r.config;
  j["config"] = {{"depth", c.depth},
                 {"lambda", c.lambda},
                 {"cuts", to_string(c.cuts)},
                 {"eqp", c.eqp ? to_string(c.eqp_config.linking) : "off"},
                 {"eqp_bound", to_string(c.eqp_config.bound)},
                 {"pbcp", c.pbcp.name()},
                 {"polish", c.polish},
                 {"time_limit", c.time_limit},
                 {"seed", c.seed}};
  if (r.status != SolveStatusKind::error) j["tree"] = to_text(r.tree);
  return j.dump();
}

std::string render_table(const std::vector<AggregateRow>& rows) {
  std::ostringstream os;
  char buf[200];
  std::snprintf(buf, sizeof buf, "%-16s %9s %7s %12s %12s\n", "dataset", "instances", "solved", "time(s)",
                "gap(%)");
  os << buf;
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%-16s %9d %7d %12.2f %12.2f\n", r.dataset.c_str(), r.instances, r.solved,
                  r.mean_time_solved, r.mean_gap_unsolved);
    os << buf;
  }
  return os.str();
}

}  // namespace bendoct
