#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "sps/runner.hpp"

namespace sps {

inline std::string to_string(LabelSign s) { return s == LabelSign::standard ? "standard" : "as_printed"; }

inline LabelSign parse_label_sign(const std::string& s) {
  if (s == "standard") return LabelSign::standard;
  if (s == "as_printed") return LabelSign::as_printed;
  throw Error(ErrorCode::configuration, "unknown label sign '" + s + "'");
}

inline LowerBoundPolicy parse_lower_bound(const std::string& s) {
  if (s == "zero") return LowerBoundPolicy::zero();
  if (s == "exact") return LowerBoundPolicy::exact();
  double v = 0.0;
  if (detail::parse_double(s, v)) return LowerBoundPolicy::constant(v);
  throw Error(ErrorCode::configuration, "lower bound must be 'zero', 'exact' or a number, got '" + s + "'");
}

/// "5" means seeds 0..4; "3,7,11" lists them.
inline std::vector<std::uint64_t> parse_seeds(const std::string& s) {
  std::vector<std::uint64_t> out;
  try {
    if (s.find(',') == std::string::npos) {
      const auto count = std::stoull(s);
      require(count >= 1, ErrorCode::configuration, "seed count must be positive");
      for (std::uint64_t i = 0; i < count; ++i) out.push_back(i);
      return out;
    }
    std::size_t pos = 0;
    while (pos <= s.size()) {
      const auto comma = std::min(s.find(',', pos), s.size());
      out.push_back(std::stoull(s.substr(pos, comma - pos)));
      pos = comma + 1;
    }
  } catch (const std::logic_error&) {
    throw Error(ErrorCode::configuration, "malformed seed list '" + s + "'");
  }
  return out;
}

inline nlohmann::json config_to_json(const RunConfig& cfg) {
  const auto& p = cfg.problem;
  const auto& o = cfg.optimizer;
  nlohmann::json j;
  j["problem"] = to_string(p.kind);
  j["n"] = p.n;
  j["d"] = p.d;
  j["lambda"] = p.lambda;
  j["label_sign"] = to_string(p.label_sign);
  j["interpolated"] = p.interpolated;
  j["floor"] = p.floor;
  j["spread"] = p.spread;
  j["problem_seed"] = p.seed;
  j["dataset"] = p.dataset;
  j["dataset_format"] = p.format;
  j["label_column"] = p.label_column;
  j["standardize"] = p.standardize;
  j["optimizer"] = to_string(o.method);
  j["gamma_b"] = o.gamma_b;
  j["gamma_ell"] = o.gamma_ell;
  j["c0"] = o.c0;
  j["c"] = o.c_sps;
  j["c_schedule"] = to_string(effective_schedule(o));
  j["eta"] = o.eta;
  j["b0"] = o.b0;
  j["beta2"] = o.beta2;
  j["epsilon"] = o.epsilon;
  j["lower_bound"] = o.lower_bound.kind == LowerBoundPolicy::Kind::constant
                         ? format_double(o.lower_bound.value)
                         : to_string(o.lower_bound);
  j["label"] = run_label(cfg);
  j["batch_size"] = cfg.batch_size;
  j["iters"] = cfg.iters;
  j["seeds"] = cfg.seeds;
  j["reference_tol"] = cfg.reference_tol;
  j["out"] = cfg.out_dir;
  j["format"] = cfg.format == TraceFormat::csv ? "csv" : "jsonl";
  j["record_every"] = cfg.record_every;
  j["x0_scale"] = cfg.x0_scale;
  j["threads"] = cfg.threads;
  j["zero_gradient"] = to_string(cfg.zero_gradient);
  return j;
}

/// Applies the keys present in `j` on top of `cfg`. Keys use the CLI flag
/// names with either '-' or '_'.
inline void apply_json(RunConfig& cfg, const nlohmann::json& j) {
  require(j.is_object(), ErrorCode::configuration, "config must be a JSON object");
  auto& p = cfg.problem;
  auto& o = cfg.optimizer;
  for (const auto& [raw_key, v] : j.items()) {
    std::string key = raw_key;
    std::replace(key.begin(), key.end(), '-', '_');
    auto str = [&] { return v.is_string() ? v.get<std::string>() : v.dump(); };
    try {
      if (key == "problem") p.kind = parse_problem_kind(v.get<std::string>());
      else if (key == "n") p.n = v.get<std::size_t>();
      else if (key == "d") p.d = v.get<std::size_t>();
      else if (key == "lambda") p.lambda = v.get<double>();
      else if (key == "label_sign") p.label_sign = parse_label_sign(v.get<std::string>());
      else if (key == "interpolated") p.interpolated = v.get<bool>();
      else if (key == "floor") p.floor = v.get<double>();
      else if (key == "spread") p.spread = v.get<double>();
      else if (key == "problem_seed") p.seed = v.get<std::uint64_t>();
      else if (key == "dataset") p.dataset = v.get<std::string>();
      else if (key == "dataset_format") p.format = v.get<std::string>();
      else if (key == "label_column") p.label_column = v.get<int>();
      else if (key == "standardize") p.standardize = v.get<bool>();
      else if (key == "optimizer") o.method = parse_method(v.get<std::string>());
      else if (key == "gamma_b") o.gamma_b = v.get<double>();
      else if (key == "gamma_ell") o.gamma_ell = v.get<double>();
      else if (key == "c0") o.c0 = v.get<double>();
      else if (key == "c") o.c_sps = v.get<double>();
      else if (key == "c_schedule") o.c_schedule = parse_schedule(v.get<std::string>());
      else if (key == "eta") o.eta = v.get<double>();
      else if (key == "b0") o.b0 = v.get<double>();
      else if (key == "beta2") o.beta2 = v.get<double>();
      else if (key == "epsilon") o.epsilon = v.get<double>();
      else if (key == "lower_bound") o.lower_bound = parse_lower_bound(str());
      else if (key == "label") cfg.label = v.get<std::string>();
      else if (key == "batch_size") cfg.batch_size = v.get<std::size_t>();
      else if (key == "iters") cfg.iters = v.get<std::size_t>();
      else if (key == "seeds") {
        if (v.is_array()) cfg.seeds = v.get<std::vector<std::uint64_t>>();
        else cfg.seeds = parse_seeds(str());
      }
      else if (key == "reference_tol") cfg.reference_tol = v.get<double>();
      else if (key == "out") cfg.out_dir = v.get<std::string>();
      else if (key == "format") cfg.format = parse_trace_format(v.get<std::string>());
      else if (key == "record_every") cfg.record_every = v.get<std::size_t>();
      else if (key == "x0_scale") cfg.x0_scale = v.get<double>();
      else if (key == "threads") cfg.threads = v.get<unsigned>();
      else if (key == "zero_gradient") cfg.zero_gradient = parse_zero_gradient_policy(v.get<std::string>());
      else throw Error(ErrorCode::configuration, "unknown config key '" + raw_key + "'");
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::configuration, "bad value for config key '" + raw_key + "': " + e.what());
    }
  }
}

inline RunConfig config_from_json(const nlohmann::json& j) {
  RunConfig cfg;
  apply_json(cfg, j);
  return cfg;
}

inline nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot open '" + path + "'");
  try {
    return nlohmann::json::parse(in, nullptr, true, true);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::parse, path + ": " + e.what());
  }
}

}  // namespace sps
