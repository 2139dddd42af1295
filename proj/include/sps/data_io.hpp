#pragma once

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "sps/error.hpp"
#include "sps/objectives/logistic.hpp"
#include "sps/random.hpp"
#include "sps/vector.hpp"

namespace sps {

struct Dataset {
  Matrix features;  // n x d
  Vector labels;    // entries in {-1, +1}
  std::string name;
  bool standardized = false;
  std::vector<std::size_t> constant_columns;  // zero-variance columns left untouched

  std::size_t size() const noexcept { return static_cast<std::size_t>(features.rows()); }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(features.cols()); }
};

inline LogisticObjective make_logistic(const Dataset& ds, double lambda,
                                       LabelSign sign = LabelSign::standard) {
  return LogisticObjective(ds.features, ds.labels, lambda, sign);
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

inline bool parse_double(std::string_view token, double& out) {
  if (token.empty()) return false;
  std::string tmp(token);
  char* end = nullptr;
  errno = 0;
  out = std::strtod(tmp.c_str(), &end);
  return end == tmp.c_str() + tmp.size() && errno != ERANGE && std::isfinite(out);
}

inline std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    const std::size_t start = i;
    while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    if (i > start) out.push_back(s.substr(start, i - start));
  }
  return out;
}

/// Maps raw labels onto {-1, +1}: {-1,+1} kept, {0,1} sends 0 -> -1,
/// {1,2} sends 2 -> -1.
inline Vector remap_labels(const std::vector<double>& raw, const std::string& source) {
  std::set<double> distinct(raw.begin(), raw.end());
  auto subset_of = [&](std::initializer_list<double> allowed) {
    return std::all_of(distinct.begin(), distinct.end(), [&](double v) {
      return std::find(allowed.begin(), allowed.end(), v) != allowed.end();
    });
  };
  Vector out(static_cast<Eigen::Index>(raw.size()));
  if (subset_of({-1.0, 1.0})) {
    for (std::size_t i = 0; i < raw.size(); ++i) out[static_cast<Eigen::Index>(i)] = raw[i];
  } else if (subset_of({0.0, 1.0})) {
    for (std::size_t i = 0; i < raw.size(); ++i) out[static_cast<Eigen::Index>(i)] = raw[i] == 0.0 ? -1.0 : 1.0;
  } else if (subset_of({1.0, 2.0})) {
    for (std::size_t i = 0; i < raw.size(); ++i) out[static_cast<Eigen::Index>(i)] = raw[i] == 2.0 ? -1.0 : 1.0;
  } else {
    throw Error(ErrorCode::parse, source + ": labels are not mappable to {-1, +1}");
  }
  return out;
}

inline std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot open '" + path + "' for reading");
  return in;
}

}  // namespace detail

/// Parses `label idx:val ...` lines (1-based indices); d is the largest index seen.
inline Dataset load_libsvm(const std::string& path) {
  auto in = detail::open_input(path);
  std::vector<double> labels;
  std::vector<std::vector<std::pair<std::size_t, double>>> rows;
  std::size_t d = 0;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view view(line);
    if (auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    view = detail::trim(view);
    if (view.empty()) continue;
    const auto tokens = detail::split_ws(view);
    const std::string where = path + ":" + std::to_string(lineno);
    double label = 0.0;
    if (!detail::parse_double(tokens[0], label)) {
      throw Error(ErrorCode::parse, where + ": malformed label '" + std::string(tokens[0]) + "'");
    }
    std::vector<std::pair<std::size_t, double>> entries;
    for (std::size_t t = 1; t < tokens.size(); ++t) {
      const auto colon = tokens[t].find(':');
      if (colon == std::string_view::npos) {
        throw Error(ErrorCode::parse, where + ": expected idx:val, got '" + std::string(tokens[t]) + "'");
      }
      double idx_val = 0.0, value = 0.0;
      const auto idx_tok = tokens[t].substr(0, colon);
      if (!detail::parse_double(idx_tok, idx_val) || idx_val < 1.0 || idx_val != std::floor(idx_val) ||
          idx_tok.find_first_not_of("0123456789") != std::string_view::npos) {
        throw Error(ErrorCode::parse, where + ": invalid feature index '" + std::string(idx_tok) + "'");
      }
      if (!detail::parse_double(tokens[t].substr(colon + 1), value)) {
        throw Error(ErrorCode::parse, where + ": invalid feature value in '" + std::string(tokens[t]) + "'");
      }
      const auto idx = static_cast<std::size_t>(idx_val);
      d = std::max(d, idx);
      entries.emplace_back(idx - 1, value);
    }
    labels.push_back(label);
    rows.push_back(std::move(entries));
  }
  if (rows.empty()) throw Error(ErrorCode::parse, path + ": no datapoints");
  Dataset ds;
  ds.name = std::filesystem::path(path).filename().string();
  ds.features = Matrix::Zero(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(std::max<std::size_t>(d, 1)));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (const auto& [c, v] : rows[r]) ds.features(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = v;
  ds.labels = detail::remap_labels(labels, path);
  return ds;
}

/// Comma- or whitespace-delimited numeric table. A leading non-numeric row is
/// treated as a header and skipped once. `label_column` < 0 counts from the end.
inline Dataset load_delimited(const std::string& path, int label_column) {
  auto in = detail::open_input(path);
  std::vector<std::vector<double>> table;
  std::string line;
  std::size_t lineno = 0;
  bool header_seen = false;
  std::size_t width = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view view = detail::trim(line);
    if (view.empty()) continue;
    std::vector<std::string_view> cells;
    if (view.find(',') != std::string_view::npos) {
      std::size_t start = 0;
      for (;;) {
        const auto comma = view.find(',', start);
        cells.push_back(detail::trim(view.substr(start, comma == std::string_view::npos ? view.npos : comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
      }
    } else {
      cells = detail::split_ws(view);
    }
    std::vector<double> row(cells.size());
    bool numeric = true;
    for (std::size_t c = 0; c < cells.size(); ++c) numeric = numeric && detail::parse_double(cells[c], row[c]);
    const std::string where = path + ":" + std::to_string(lineno);
    if (!numeric) {
      if (table.empty() && !header_seen) {
        header_seen = true;
        width = cells.size();
        continue;
      }
      throw Error(ErrorCode::parse, where + ": non-numeric cell");
    }
    if (width == 0) width = row.size();
    if (row.size() != width) {
      throw Error(ErrorCode::parse, where + ": expected " + std::to_string(width) + " columns, found " +
                                        std::to_string(row.size()));
    }
    table.push_back(std::move(row));
  }
  if (table.empty()) throw Error(ErrorCode::parse, path + ": no datapoints");
  const int w = static_cast<int>(width);
  const int lc = label_column < 0 ? w + label_column : label_column;
  require(lc >= 0 && lc < w && w >= 2, ErrorCode::invalid_argument,
          "label column " + std::to_string(label_column) + " out of range for " + std::to_string(w) + " columns");
  Dataset ds;
  ds.name = std::filesystem::path(path).filename().string();
  ds.features.resize(static_cast<Eigen::Index>(table.size()), w - 1);
  std::vector<double> labels(table.size());
  for (std::size_t r = 0; r < table.size(); ++r) {
    int out_c = 0;
    for (int c = 0; c < w; ++c) {
      if (c == lc) labels[r] = table[r][static_cast<std::size_t>(c)];
      else ds.features(static_cast<Eigen::Index>(r), out_c++) = table[r][static_cast<std::size_t>(c)];
    }
  }
  ds.labels = detail::remap_labels(labels, path);
  return ds;
}

/// Column z-scores with the population standard deviation (divide by n).
inline Dataset standardize(const Dataset& ds) {
  require(ds.size() >= 2, ErrorCode::invalid_argument, "standardize needs at least two datapoints");
  Dataset out = ds;
  out.constant_columns.clear();
  const double n = static_cast<double>(ds.size());
  for (Eigen::Index c = 0; c < ds.features.cols(); ++c) {
    auto col = out.features.col(c);
    const double mean = col.sum() / n;
    const double var = (col.array() - mean).square().sum() / n;
    const double sd = std::sqrt(var);
    if (!(sd > 0.0)) {
      out.constant_columns.push_back(static_cast<std::size_t>(c));
      continue;
    }
    col = ((col.array() - mean) / sd).matrix();
  }
  out.standardized = true;
  return out;
}

/// i.i.d. standard normal features with uniformly random labels in {-1, +1}.
inline Dataset make_synthetic(RngStream& rng, std::size_t n, std::size_t d) {
  require(n >= 1 && d >= 1, ErrorCode::invalid_argument, "make_synthetic needs n, d >= 1");
  Dataset ds;
  ds.name = "synthetic";
  ds.features.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  ds.labels.resize(static_cast<Eigen::Index>(n));
  for (Eigen::Index r = 0; r < ds.features.rows(); ++r) {
    for (Eigen::Index c = 0; c < ds.features.cols(); ++c) ds.features(r, c) = rng.normal();
    ds.labels[r] = rng.uniform_index(2) == 0 ? -1.0 : 1.0;
  }
  return ds;
}

struct IterationRecord {
  std::uint64_t seed = 0;
  std::size_t k = 0;
  double f_sub = 0.0;              // f(x^k) - f^*
  double f_sub_avg_iterate = 0.0;  // f(mean of x^0..x^k) - f^*
  double dist_sq = 0.0;            // ||x^k - x^*||^2
  double gamma = 0.0;              // stepsize used at step k

  friend bool operator==(const IterationRecord&, const IterationRecord&) = default;
};

enum class TraceFormat { csv, json_lines };

inline TraceFormat parse_trace_format(std::string_view s) {
  if (s == "csv") return TraceFormat::csv;
  if (s == "jsonl" || s == "json-lines" || s == "json_lines") return TraceFormat::json_lines;
  throw Error(ErrorCode::configuration, "unknown trace format '" + std::string(s) + "'");
}

inline std::string trace_extension(TraceFormat f) { return f == TraceFormat::csv ? ".csv" : ".jsonl"; }

inline constexpr std::string_view kTraceHeader = "seed,k,f_sub,f_sub_avg_iterate,dist_sq,gamma";

/// Shortest-safe decimal: 17 significant digits round-trip every double.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::ofstream open_output(const std::string& path) {
  const auto parent = std::filesystem::path(path).parent_path();
  std::error_code ec;
  if (!parent.empty()) std::filesystem::create_directories(parent, ec);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::io, "cannot open '" + path + "' for writing");
  return out;
}

inline void write_trace(const std::vector<IterationRecord>& records, const std::string& path,
                        TraceFormat format = TraceFormat::csv) {
  auto out = open_output(path);
  if (format == TraceFormat::csv) {
    out << kTraceHeader << '\n';
    for (const auto& r : records) {
      out << r.seed << ',' << r.k << ',' << format_double(r.f_sub) << ','
          << format_double(r.f_sub_avg_iterate) << ',' << format_double(r.dist_sq) << ','
          << format_double(r.gamma) << '\n';
    }
  } else {
    for (const auto& r : records) {
      out << "{\"seed\":" << r.seed << ",\"k\":" << r.k << ",\"f_sub\":" << format_double(r.f_sub)
          << ",\"f_sub_avg_iterate\":" << format_double(r.f_sub_avg_iterate)
          << ",\"dist_sq\":" << format_double(r.dist_sq) << ",\"gamma\":" << format_double(r.gamma)
          << "}\n";
    }
  }
  out.flush();
  if (!out) throw Error(ErrorCode::io, "write failed for '" + path + "'");
}

inline std::vector<IterationRecord> read_trace(const std::string& path,
                                               TraceFormat format = TraceFormat::csv) {
  auto in = detail::open_input(path);
  std::vector<IterationRecord> out;
  std::string line;
  std::size_t lineno = 0;
  auto num = [&](std::string_view tok, const std::string& where) {
    double v = 0.0;
    std::string tmp(tok);
    char* end = nullptr;
    v = std::strtod(tmp.c_str(), &end);
    if (end != tmp.c_str() + tmp.size()) throw Error(ErrorCode::parse, where + ": bad number '" + tmp + "'");
    return v;
  };
  while (std::getline(in, line)) {
    ++lineno;
    const std::string where = path + ":" + std::to_string(lineno);
    if (line.empty()) continue;
    IterationRecord r;
    if (format == TraceFormat::csv) {
      if (lineno == 1) {
        if (line != kTraceHeader) throw Error(ErrorCode::parse, where + ": unexpected header");
        continue;
      }
      std::vector<std::string_view> cells;
      std::string_view view(line);
      std::size_t start = 0;
      for (;;) {
        const auto comma = view.find(',', start);
        cells.push_back(view.substr(start, comma == view.npos ? view.npos : comma - start));
        if (comma == view.npos) break;
        start = comma + 1;
      }
      if (cells.size() != 6) throw Error(ErrorCode::parse, where + ": expected 6 fields");
      r.seed = std::stoull(std::string(cells[0]));
      r.k = static_cast<std::size_t>(std::stoull(std::string(cells[1])));
      r.f_sub = num(cells[2], where);
      r.f_sub_avg_iterate = num(cells[3], where);
      r.dist_sq = num(cells[4], where);
      r.gamma = num(cells[5], where);
    } else {
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(line);
        r.seed = j.at("seed").get<std::uint64_t>();
        r.k = j.at("k").get<std::size_t>();
        r.f_sub = j.at("f_sub").get<double>();
        r.f_sub_avg_iterate = j.at("f_sub_avg_iterate").get<double>();
        r.dist_sq = j.at("dist_sq").get<double>();
        r.gamma = j.at("gamma").get<double>();
      } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::parse, where + ": " + e.what());
      }
    }
    out.push_back(r);
  }
  return out;
}

}  // namespace sps
