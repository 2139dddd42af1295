#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "sps/data_io.hpp"
#include "sps/oracles.hpp"
#include "sps/problems.hpp"
#include "sps/random.hpp"
#include "sps/steppers.hpp"

#ifndef SPS_VERSION
#define SPS_VERSION "unknown"
#endif

namespace sps {

/// What the runner does when a step signals "resample" (vanishing
/// direction or non-positive gap).
enum class ZeroGradientPolicy { resample, hold };

inline std::string_view to_string(ZeroGradientPolicy p) {
  return p == ZeroGradientPolicy::resample ? "resample" : "hold";
}

inline ZeroGradientPolicy parse_zero_gradient_policy(std::string_view s) {
  if (s == "resample") return ZeroGradientPolicy::resample;
  if (s == "hold") return ZeroGradientPolicy::hold;
  throw Error(ErrorCode::configuration, "unknown zero-gradient policy '" + std::string(s) + "'");
}

struct RunConfig {
  ProblemSpec problem;
  StepperConfig optimizer;
  std::string label;  // empty: derived from the optimizer
  std::size_t batch_size = 1;
  std::size_t iters = 1000;
  std::vector<std::uint64_t> seeds{0};
  double reference_tol = 1e-10;
  std::string out_dir;  // empty: nothing is written
  TraceFormat format = TraceFormat::csv;
  std::size_t record_every = 1;
  double x0_scale = 1.0;
  unsigned threads = 1;
  ZeroGradientPolicy zero_gradient = ZeroGradientPolicy::resample;
};

/// Short, filename-safe description of the optimizer and its knobs.
inline std::string default_label(const StepperConfig& c) {
  std::ostringstream os;
  os << to_string(c.method);
  auto num = [](double v) {
    std::ostringstream s;
    s << v;
    return s.str();
  };
  switch (c.method) {
    case Method::sps_max:
      os << "_c" << num(c.c_sps) << "_gb" << num(c.gamma_b) << "_lb-" << to_string(c.lower_bound);
      break;
    case Method::decsps:
      os << "_c0" << num(c.c0) << "_gb" << num(c.gamma_b) << "_lb-" << to_string(c.lower_bound);
      break;
    case Method::decsps_ns:
      os << "_c0" << num(c.c0) << "_gb" << num(c.gamma_b) << "_gl" << num(c.gamma_ell);
      break;
    case Method::adagrad_norm: os << "_eta" << num(c.eta) << "_b0" << num(c.b0); break;
    case Method::adam:
    case Method::amsgrad: os << "_eta" << num(c.eta) << "_beta2" << num(c.beta2); break;
    default: os << "_eta" << num(c.eta); break;
  }
  if (c.c_schedule) os << "_" << to_string(*c.c_schedule);
  return os.str();
}

inline std::string run_label(const RunConfig& cfg) {
  return cfg.label.empty() ? default_label(cfg.optimizer) : cfg.label;
}

struct TrajectoryOutcome {
  Vector x_final;
  std::size_t steps = 0;
  bool halted = false;
  std::string diagnostic;
};

/// Runs K steps from x0. `observer(k, x_k, result)` sees every iterate
/// together with the step taken from it. Under `resample`, a batch whose
/// step signals "resample" is replaced by a different batch, at most n
/// distinct batches in all, before the run halts; under `hold` the
/// iteration is spent with x unchanged.
template <FiniteSumObjective Obj, typename Observer>
TrajectoryOutcome run_trajectory(const Obj& obj, const StepperConfig& cfg, std::size_t batch_size,
                                 std::size_t iters, Vector x0, RngStream& batch_rng,
                                 Observer&& observer,
                                 ZeroGradientPolicy policy = ZeroGradientPolicy::resample) {
  check_compatible(cfg, obj, batch_size);
  StepperState state = make_state(cfg, obj.dim());
  TrajectoryOutcome out;
  const std::size_t max_attempts = std::min(obj.size(), binomial(obj.size(), batch_size));
  Vector x = std::move(x0);
  for (std::size_t k = 0; k < iters; ++k) {
    std::optional<StepResult> res;
    if (policy == ZeroGradientPolicy::hold) {
      res = step(state, obj, sample_batch(batch_rng, obj.size(), batch_size), x);
      if (!res) res = hold_step(state, x);
    }
    std::vector<MiniBatch> tried;
    while (!res && tried.size() < max_attempts) {
      MiniBatch s = sample_batch(batch_rng, obj.size(), batch_size);
      if (std::find(tried.begin(), tried.end(), s) != tried.end()) continue;
      res = step(state, obj, s, x);
      tried.push_back(std::move(s));
    }
    if (!res) {
      out.halted = true;
      out.diagnostic = "zero gradient (or zero gap) on " + std::to_string(tried.size()) +
                       " distinct batches at k=" + std::to_string(k);
      break;
    }
    observer(k, static_cast<const Vector&>(x), static_cast<const StepResult&>(*res));
    x = std::move(res->x_next);
    state = std::move(res->state);
    out.steps = k + 1;
  }
  out.x_final = std::move(x);
  return out;
}

/// x^0 for a seed: standard normal entries times `scale`, drawn from a
/// stream shared by every optimizer so runs are comparable.
inline Vector initial_point(std::uint64_t seed, std::size_t dim, double scale) {
  RngStream rng(seed, 0);
  return rng.normal_vector(static_cast<Eigen::Index>(dim), scale);
}

inline RngStream batch_stream(std::uint64_t seed) { return RngStream(seed, 1); }

struct SeedResult {
  std::uint64_t seed = 0;
  std::vector<IterationRecord> records;
  TrajectoryOutcome outcome;
};

template <FiniteSumObjective Obj>
SeedResult run_seed(const Obj& obj, const ReferenceSolution& ref, const RunConfig& cfg,
                    std::uint64_t seed) {
  require(cfg.record_every >= 1, ErrorCode::configuration, "record_every must be >= 1");
  SeedResult res;
  res.seed = seed;
  RngStream rng = batch_stream(seed);
  Vector x_sum = Vector::Zero(static_cast<Eigen::Index>(obj.dim()));
  res.outcome = run_trajectory(
      obj, cfg.optimizer, cfg.batch_size, cfg.iters,
      initial_point(seed, obj.dim(), cfg.x0_scale), rng,
      [&](std::size_t k, const Vector& x, const StepResult& step) {
        x_sum += x;
        if (k % cfg.record_every != 0 && k + 1 != cfg.iters) return;
        const Vector avg = x_sum / static_cast<double>(k + 1);
        res.records.push_back(IterationRecord{seed, k, obj.full_value(x) - ref.f_star,
                                              obj.full_value(avg) - ref.f_star,
                                              (x - ref.x_star).squaredNorm(), step.gamma});
      },
      cfg.zero_gradient);
  return res;
}

struct AggregateRow {
  std::size_t k = 0;
  std::size_t count = 0;
  double f_sub_mean = 0, f_sub_std = 0;
  double f_avg_mean = 0, f_avg_std = 0;
  double dist_mean = 0, dist_std = 0;
  double gamma_mean = 0, gamma_std = 0;
};

struct Aggregate {
  std::string label;
  std::vector<AggregateRow> rows;
};

/// Per-k mean and sample standard deviation across seeds, restricted to the
/// k that every seed reached.
inline Aggregate aggregate(const std::string& label, const std::vector<SeedResult>& seeds) {
  Aggregate agg;
  agg.label = label;
  if (seeds.empty()) return agg;
  std::map<std::size_t, std::vector<const IterationRecord*>> by_k;
  for (const auto& s : seeds)
    for (const auto& r : s.records) by_k[r.k].push_back(&r);
  auto stats = [](const std::vector<double>& v) {
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    const double sd = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
    return std::pair{mean, sd};
  };
  for (const auto& [k, recs] : by_k) {
    if (recs.size() != seeds.size()) continue;
    std::vector<double> a, b, c, d;
    for (const auto* r : recs) {
      a.push_back(r->f_sub);
      b.push_back(r->f_sub_avg_iterate);
      c.push_back(r->dist_sq);
      d.push_back(r->gamma);
    }
    AggregateRow row;
    row.k = k;
    row.count = recs.size();
    std::tie(row.f_sub_mean, row.f_sub_std) = stats(a);
    std::tie(row.f_avg_mean, row.f_avg_std) = stats(b);
    std::tie(row.dist_mean, row.dist_std) = stats(c);
    std::tie(row.gamma_mean, row.gamma_std) = stats(d);
    agg.rows.push_back(row);
  }
  return agg;
}

inline constexpr std::string_view kAggregateHeader =
    "k,count,f_sub_mean,f_sub_std,f_sub_avg_iterate_mean,f_sub_avg_iterate_std,dist_sq_mean,"
    "dist_sq_std,gamma_mean,gamma_std";

inline void write_aggregate_rows(std::ostream& out, const Aggregate& agg, bool with_label) {
  for (const auto& r : agg.rows) {
    if (with_label) out << agg.label << ',';
    out << r.k << ',' << r.count << ',' << format_double(r.f_sub_mean) << ','
        << format_double(r.f_sub_std) << ',' << format_double(r.f_avg_mean) << ','
        << format_double(r.f_avg_std) << ',' << format_double(r.dist_mean) << ','
        << format_double(r.dist_std) << ',' << format_double(r.gamma_mean) << ','
        << format_double(r.gamma_std) << '\n';
  }
}

inline void write_aggregate(const Aggregate& agg, const std::string& path) {
  auto out = open_output(path);
  out << kAggregateHeader << '\n';
  write_aggregate_rows(out, agg, false);
  if (!out) throw Error(ErrorCode::io, "write failed for '" + path + "'");
}

struct ExperimentResult {
  std::string label;
  std::string problem_hash;
  std::size_t n = 0, d = 0;
  ReferenceSolution reference;
  std::vector<SeedResult> seeds;
  Aggregate aggregate;
  std::vector<std::string> written;  // output files

  std::vector<IterationRecord> records() const {
    std::vector<IterationRecord> all;
    for (const auto& s : seeds) all.insert(all.end(), s.records.begin(), s.records.end());
    return all;
  }
};

// ---- reference cache ----------------------------------------------------

inline nlohmann::json reference_to_json(const ReferenceSolution& ref, const std::string& hash) {
  nlohmann::json j;
  j["problem_hash"] = hash;
  j["f_star"] = ref.f_star;
  j["grad_norm"] = ref.grad_norm;
  j["tolerance"] = ref.tolerance;
  j["method"] = ref.method;
  j["x_star"] = std::vector<double>(ref.x_star.data(), ref.x_star.data() + ref.x_star.size());
  if (ref.component_minima) j["component_minima"] = *ref.component_minima;
  return j;
}

inline ReferenceSolution reference_from_json(const nlohmann::json& j) {
  ReferenceSolution ref;
  const auto xs = j.at("x_star").get<std::vector<double>>();
  ref.x_star = Eigen::Map<const Vector>(xs.data(), static_cast<Eigen::Index>(xs.size()));
  ref.f_star = j.at("f_star").get<double>();
  ref.grad_norm = j.at("grad_norm").get<double>();
  ref.tolerance = j.at("tolerance").get<double>();
  ref.method = j.at("method").get<std::string>();
  if (j.contains("component_minima")) ref.component_minima = j["component_minima"].get<std::vector<double>>();
  return ref;
}

inline std::string reference_cache_path(const std::string& out_dir, const std::string& hash) {
  return (std::filesystem::path(out_dir) / ("reference_" + hash + ".json")).string();
}

inline void write_json(const nlohmann::json& j, const std::string& path) {
  auto out = open_output(path);
  out << j.dump(2) << '\n';
  if (!out) throw Error(ErrorCode::io, "write failed for '" + path + "'");
}

/// Loads the cached reference for this problem if present and consistent,
/// otherwise solves and (when out_dir is set) caches it.
inline ReferenceSolution obtain_reference(const AnyObjective& obj, const ProblemSpec& spec,
                                          double tol, const std::string& out_dir) {
  const std::string hash = problem_hash(spec);
  if (!out_dir.empty()) {
    const auto path = reference_cache_path(out_dir, hash);
    if (std::filesystem::exists(path)) {
      std::ifstream in(path);
      try {
        const auto j = nlohmann::json::parse(in);
        if (j.at("problem_hash") == hash && j.at("tolerance").get<double>() <= tol) {
          auto ref = reference_from_json(j);
          if (static_cast<std::size_t>(ref.x_star.size()) == objective_dim(obj)) return ref;
        }
      } catch (const nlohmann::json::exception&) {
        // Unreadable cache: fall through and recompute.
      }
    }
  }
  auto ref = solve_reference(obj, tol);
  if (!out_dir.empty()) write_json(reference_to_json(ref, hash), reference_cache_path(out_dir, hash));
  return ref;
}

inline nlohmann::json config_to_json(const RunConfig& cfg);

/// Runs every seed of `cfg`, aggregates, and writes traces, aggregate and
/// manifest into cfg.out_dir (when set).
inline ExperimentResult run_experiment(const RunConfig& cfg, const AnyObjective& obj,
                                       const ReferenceSolution& ref) {
  require(!cfg.seeds.empty(), ErrorCode::configuration, "at least one seed is required");
  require(cfg.batch_size >= 1 && cfg.batch_size <= objective_size(obj), ErrorCode::configuration,
          "batch size must satisfy 1 <= B <= n = " + std::to_string(objective_size(obj)));
  require(cfg.iters >= 1, ErrorCode::configuration, "iteration budget must be positive");
  std::visit([&](const auto& o) { check_compatible(cfg.optimizer, o, cfg.batch_size); }, obj);

  ExperimentResult res;
  res.label = run_label(cfg);
  res.problem_hash = problem_hash(cfg.problem);
  res.n = objective_size(obj);
  res.d = objective_dim(obj);
  res.reference = ref;
  res.seeds.resize(cfg.seeds.size());

  auto work = [&](std::size_t idx) {
    res.seeds[idx] = std::visit([&](const auto& o) { return run_seed(o, ref, cfg, cfg.seeds[idx]); }, obj);
  };
  const unsigned threads = std::max(1u, std::min<unsigned>(cfg.threads, static_cast<unsigned>(cfg.seeds.size())));
  if (threads == 1) {
    for (std::size_t i = 0; i < cfg.seeds.size(); ++i) work(i);
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back([&, t] {
        for (std::size_t i = t; i < cfg.seeds.size(); i += threads) work(i);
      });
    }
    for (auto& th : pool) th.join();
  }
  res.aggregate = aggregate(res.label, res.seeds);

  if (!cfg.out_dir.empty()) {
    const std::filesystem::path dir(cfg.out_dir);
    const auto trace_path = (dir / (res.label + trace_extension(cfg.format))).string();
    write_trace(res.records(), trace_path, cfg.format);
    const auto agg_path = (dir / (res.label + ".aggregate.csv")).string();
    write_aggregate(res.aggregate, agg_path);
    nlohmann::json manifest;
    manifest["label"] = res.label;
    manifest["version"] = SPS_VERSION;
    manifest["problem_hash"] = res.problem_hash;
    manifest["n"] = res.n;
    manifest["d"] = res.d;
    manifest["f_star"] = ref.f_star;
    manifest["reference_method"] = ref.method;
    manifest["reference_grad_norm"] = ref.grad_norm;
    manifest["seeds"] = cfg.seeds;
    manifest["config"] = config_to_json(cfg);
    nlohmann::json halted = nlohmann::json::array();
    for (const auto& s : res.seeds) {
      if (s.outcome.halted) halted.push_back({{"seed", s.seed}, {"diagnostic", s.outcome.diagnostic}});
    }
    manifest["halted"] = halted;
    const auto manifest_path = (dir / (res.label + ".manifest.json")).string();
    write_json(manifest, manifest_path);
    res.written = {trace_path, agg_path, manifest_path};
  }
  return res;
}

inline ExperimentResult run_experiment(const RunConfig& cfg) {
  const AnyObjective obj = build_problem(cfg.problem);
  const auto ref = obtain_reference(obj, cfg.problem, cfg.reference_tol, cfg.out_dir);
  return run_experiment(cfg, obj, ref);
}

struct SummaryRow {
  std::string label;
  double final_f_sub_mean = 0, final_f_sub_2std = 0;
  double final_f_avg_mean = 0, final_f_avg_2std = 0;
  std::size_t final_k = 0;
};

struct GridResult {
  std::vector<ExperimentResult> cells;
  std::vector<SummaryRow> summary;  // ascending by final f(x^K) - f^*
  std::vector<std::string> written;
};

/// Runs every configuration on one shared problem and seed set and reports
/// aligned aggregates plus a final-suboptimality table (mean +- 2 std).
inline GridResult compare_grid(const std::vector<RunConfig>& cfgs, const std::string& out_dir = "") {
  require(!cfgs.empty(), ErrorCode::configuration, "compare_grid needs at least one configuration");
  const auto& first = cfgs.front();
  const std::string hash = problem_hash(first.problem);
  for (const auto& c : cfgs) {
    if (c.iters != first.iters) throw Error(ErrorCode::configuration, "mismatched iteration budgets across grid cells");
    if (c.seeds != first.seeds) throw Error(ErrorCode::configuration, "grid cells must share seeds");
    if (problem_hash(c.problem) != hash) throw Error(ErrorCode::configuration, "grid cells must share the problem");
    if (c.record_every != first.record_every) throw Error(ErrorCode::configuration, "grid cells must share record_every");
  }
  const AnyObjective obj = build_problem(first.problem);
  const auto ref = obtain_reference(obj, first.problem, first.reference_tol, out_dir.empty() ? first.out_dir : out_dir);

  GridResult grid;
  std::map<std::string, int> seen;
  for (auto c : cfgs) {
    if (!out_dir.empty()) c.out_dir = out_dir;
    std::string label = run_label(c);
    if (int dup = seen[label]++; dup > 0) label += "_" + std::to_string(dup);
    c.label = label;
    grid.cells.push_back(run_experiment(c, obj, ref));
    for (auto& w : grid.cells.back().written) grid.written.push_back(w);
  }
  for (const auto& cell : grid.cells) {
    SummaryRow row;
    row.label = cell.label;
    if (!cell.aggregate.rows.empty()) {
      const auto& last = cell.aggregate.rows.back();
      row.final_k = last.k;
      row.final_f_sub_mean = last.f_sub_mean;
      row.final_f_sub_2std = 2.0 * last.f_sub_std;
      row.final_f_avg_mean = last.f_avg_mean;
      row.final_f_avg_2std = 2.0 * last.f_avg_std;
    }
    grid.summary.push_back(row);
  }
  std::stable_sort(grid.summary.begin(), grid.summary.end(),
                   [](const SummaryRow& a, const SummaryRow& b) { return a.final_f_sub_mean < b.final_f_sub_mean; });

  const std::string dir = out_dir.empty() ? first.out_dir : out_dir;
  if (!dir.empty()) {
    const auto grid_path = (std::filesystem::path(dir) / "grid.csv").string();
    auto out = open_output(grid_path);
    out << "label," << kAggregateHeader << '\n';
    for (const auto& cell : grid.cells) write_aggregate_rows(out, cell.aggregate, true);
    const auto summary_path = (std::filesystem::path(dir) / "summary.csv").string();
    auto sum = open_output(summary_path);
    sum << "rank,label,final_k,f_sub_mean,f_sub_2std,f_sub_avg_iterate_mean,f_sub_avg_iterate_2std\n";
    for (std::size_t i = 0; i < grid.summary.size(); ++i) {
      const auto& r = grid.summary[i];
      sum << i + 1 << ',' << r.label << ',' << r.final_k << ',' << format_double(r.final_f_sub_mean) << ','
          << format_double(r.final_f_sub_2std) << ',' << format_double(r.final_f_avg_mean) << ','
          << format_double(r.final_f_avg_2std) << '\n';
    }
    grid.written.push_back(grid_path);
    grid.written.push_back(summary_path);
  }
  return grid;
}

}  // namespace sps

#include "sps/config.hpp"
