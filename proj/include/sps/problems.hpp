#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <string_view>
#include <variant>

#include "sps/data_io.hpp"
#include "sps/objectives/absolute.hpp"
#include "sps/objectives/generators.hpp"
#include "sps/objectives/logistic.hpp"
#include "sps/objectives/quadratic.hpp"
#include "sps/objectives/reference.hpp"

namespace sps {

using AnyObjective = std::variant<LogisticObjective, QuadraticObjective, AbsoluteObjective>;

enum class ProblemKind {
  counterexample,  // the two-component 1-d quadratic
  quadratic,       // random quadratics H_i = A_i A_i^T / 3d
  synthetic,       // logistic regression on Gaussian features, random labels
  dataset,         // logistic regression on a LIBSVM or delimited file
  absolute,        // mean of shifted absolute values (non-smooth)
};

inline std::string_view to_string(ProblemKind k) {
  switch (k) {
    case ProblemKind::counterexample: return "counterexample";
    case ProblemKind::quadratic: return "quadratic";
    case ProblemKind::synthetic: return "synthetic";
    case ProblemKind::dataset: return "dataset";
    case ProblemKind::absolute: return "absolute";
  }
  return "unknown";
}

inline ProblemKind parse_problem_kind(std::string_view s) {
  for (ProblemKind k : {ProblemKind::counterexample, ProblemKind::quadratic, ProblemKind::synthetic,
                        ProblemKind::dataset, ProblemKind::absolute}) {
    if (s == to_string(k)) return k;
  }
  if (s == "logistic") return ProblemKind::dataset;
  throw Error(ErrorCode::configuration, "unknown problem '" + std::string(s) + "'");
}

struct ProblemSpec {
  ProblemKind kind = ProblemKind::counterexample;
  std::size_t n = 100;
  std::size_t d = 100;
  double lambda = 0.0;
  LabelSign label_sign = LabelSign::standard;
  bool interpolated = false;
  double floor = 1.0;  // quadratic f_i^*
  double spread = 1.0;  // absolute: shifts uniform on [-spread, spread]
  std::uint64_t seed = 0;  // generator seed, independent of run seeds
  std::string dataset;
  std::string format = "auto";  // libsvm | delimited | auto (by extension)
  int label_column = -1;
  bool standardize = true;
};

inline Dataset load_dataset(const ProblemSpec& spec) {
  require(!spec.dataset.empty(), ErrorCode::configuration, "problem 'dataset' needs a dataset path");
  std::string fmt = spec.format;
  if (fmt == "auto") {
    const auto ext = std::filesystem::path(spec.dataset).extension().string();
    fmt = (ext == ".csv" || ext == ".tsv" || ext == ".txt" || ext == ".data") ? "delimited" : "libsvm";
  }
  Dataset ds;
  if (fmt == "libsvm") ds = load_libsvm(spec.dataset);
  else if (fmt == "delimited" || fmt == "csv") ds = load_delimited(spec.dataset, spec.label_column);
  else throw Error(ErrorCode::configuration, "unknown dataset format '" + fmt + "'");
  return spec.standardize ? standardize(ds) : ds;
}

inline AnyObjective build_problem(const ProblemSpec& spec) {
  RngStream rng(spec.seed, 0xda7a);
  switch (spec.kind) {
    case ProblemKind::counterexample: return make_counterexample_1d();
    case ProblemKind::quadratic: return make_random_quadratics(rng, spec.d, spec.n, spec.interpolated, spec.floor);
    case ProblemKind::synthetic: {
      require(spec.lambda >= 0.0, ErrorCode::configuration, "lambda must be non-negative");
      return make_logistic(make_synthetic(rng, spec.n, spec.d), spec.lambda, spec.label_sign);
    }
    case ProblemKind::dataset: {
      require(spec.lambda >= 0.0, ErrorCode::configuration, "lambda must be non-negative");
      return make_logistic(load_dataset(spec), spec.lambda, spec.label_sign);
    }
    case ProblemKind::absolute: return make_shifted_absolute(rng, spec.n, spec.spread);
  }
  throw Error(ErrorCode::configuration, "unhandled problem kind");
}

inline ReferenceSolution solve_reference(const AnyObjective& obj, double tol) {
  return std::visit([&](const auto& o) { return solve_reference(o, tol); }, obj);
}

inline std::size_t objective_size(const AnyObjective& obj) {
  return std::visit([](const auto& o) { return o.size(); }, obj);
}

inline std::size_t objective_dim(const AnyObjective& obj) {
  return std::visit([](const auto& o) { return o.dim(); }, obj);
}

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

/// Stable identity of the problem: the fields that influence it plus, for
/// file-backed problems, the file contents.
inline std::string problem_hash(const ProblemSpec& spec) {
  std::string key;
  key += std::string(to_string(spec.kind));
  auto add = [&](const std::string& s) { key += '|'; key += s; };
  switch (spec.kind) {
    case ProblemKind::counterexample: break;
    case ProblemKind::quadratic:
      add(std::to_string(spec.n)); add(std::to_string(spec.d));
      add(spec.interpolated ? "interp" : "nointerp"); add(format_double(spec.floor));
      add(std::to_string(spec.seed));
      break;
    case ProblemKind::synthetic:
      add(std::to_string(spec.n)); add(std::to_string(spec.d)); add(format_double(spec.lambda));
      add(spec.label_sign == LabelSign::standard ? "standard" : "as_printed");
      add(std::to_string(spec.seed));
      break;
    case ProblemKind::dataset: {
      add(format_double(spec.lambda));
      add(spec.label_sign == LabelSign::standard ? "standard" : "as_printed");
      add(spec.format); add(std::to_string(spec.label_column)); add(spec.standardize ? "std" : "raw");
      std::ifstream in(spec.dataset, std::ios::binary);
      const std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
      add(hex64(fnv1a(content)));
      break;
    }
    case ProblemKind::absolute:
      add(std::to_string(spec.n)); add(format_double(spec.spread)); add(std::to_string(spec.seed));
      break;
  }
  return hex64(fnv1a(key));
}

}  // namespace sps
