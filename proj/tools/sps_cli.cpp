#include <cstdio>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sps/sps.hpp"
#include "sps/verify.hpp"

namespace {

using nlohmann::json;

const std::vector<std::string> kOptimizers = {"sps_max", "decsps", "decsps_ns", "sgd_constant", "sgd_decreasing",
                                              "adagrad_norm", "adam", "amsgrad", "sgd", "sgd_dec"};

// Flags shared by run, sweep and reference. Everything is kept as text so a
// flag can be told apart from its default, and so sweep can take lists.
struct Flags {
  std::string config;
  std::map<std::string, std::string> values;  // config key -> raw text
  std::set<std::string> switches;             // boolean flags that were given
};

void add_value(CLI::App* app, Flags& f, const std::string& flag, const std::string& key, const std::string& help) {
  app->add_option_function<std::string>(
      "--" + flag, [&f, key](const std::string& v) { f.values[key] = v; }, help);
}

void add_problem_flags(CLI::App* app, Flags& f) {
  app->add_option("--config", f.config, "JSON config file; explicit flags take precedence")
      ->check(CLI::ExistingFile);
  add_value(app, f, "problem", "problem", "counterexample | quadratic | synthetic | dataset (alias logistic) | absolute");
  add_value(app, f, "dataset", "dataset", "LIBSVM or delimited file (problem dataset)");
  add_value(app, f, "dataset-format", "dataset_format", "auto | libsvm | delimited");
  add_value(app, f, "label-column", "label_column", "label column of a delimited file (negative counts from the end)");
  add_value(app, f, "lambda", "lambda", "L2 regularisation for logistic problems");
  add_value(app, f, "label-sign", "label_sign", "standard | as_printed");
  add_value(app, f, "n", "n", "number of components for generated problems");
  add_value(app, f, "d", "d", "dimension for generated problems");
  add_value(app, f, "floor", "floor", "component minimum value f_i^* for quadratic");
  add_value(app, f, "spread", "spread", "shift range for the absolute problem");
  add_value(app, f, "problem-seed", "problem_seed", "generator seed for the problem itself");
  add_value(app, f, "reference-tol", "reference_tol", "gradient-norm tolerance of the reference solve");
  add_value(app, f, "out", "out", "output directory");
  app->add_flag_callback("--interpolated", [&f] { f.switches.insert("interpolated"); },
                         "quadratic: share one offset across components");
  app->add_flag_callback("--no-standardize", [&f] { f.switches.insert("no_standardize"); },
                         "keep dataset features as loaded");
}

void add_run_flags(CLI::App* app, Flags& f, bool lists) {
  const std::string many = lists ? " (comma-separated list)" : "";
  add_value(app, f, "optimizer", "optimizer", "sps_max | decsps | decsps_ns | sgd_constant | sgd_decreasing | adagrad_norm | adam | amsgrad" + many);
  add_value(app, f, "batch-size", "batch_size", "minibatch size B");
  add_value(app, f, "iters", "iters", "iteration budget K");
  add_value(app, f, "seeds", "seeds", "seed count N (seeds 0..N-1) or a comma-separated list");
  add_value(app, f, "gamma-b", "gamma_b", "stepsize bound gamma_b" + many);
  add_value(app, f, "c0", "c0", "DecSPS scaling c_0" + many);
  add_value(app, f, "c", "c", "SPS_max constant c" + many);
  add_value(app, f, "gamma-ell", "gamma_ell", "DecSPS-NS stepsize floor" + many);
  add_value(app, f, "c-schedule", "c_schedule", "constant | sqrt | linear_half" + many);
  add_value(app, f, "eta", "eta", "base stepsize of SGD, AdaGrad-Norm, Adam, AMSgrad" + many);
  add_value(app, f, "b0", "b0", "AdaGrad-Norm initial accumulator root" + many);
  add_value(app, f, "beta2", "beta2", "Adam / AMSgrad second-moment decay" + many);
  add_value(app, f, "epsilon", "epsilon", "Adam / AMSgrad denominator offset");
  add_value(app, f, "lower-bound", "lower_bound", "zero | exact | <number>" + many);
  add_value(app, f, "format", "format", "csv | jsonl");
  add_value(app, f, "record-every", "record_every", "record every m-th iteration (and the last)");
  add_value(app, f, "x0-scale", "x0_scale", "scale of the Gaussian starting point");
  add_value(app, f, "threads", "threads", "worker threads across seeds");
  add_value(app, f, "zero-gradient", "zero_gradient", "resample | hold");
  add_value(app, f, "label", "label", "output file label");
}

const std::set<std::string> kTextKeys = {"problem", "dataset", "dataset_format", "label_sign", "out",
                                         "optimizer", "c_schedule", "format", "zero_gradient", "label",
                                         "lower_bound", "seeds"};

json typed_value(const std::string& key, const std::string& text) {
  if (kTextKeys.count(key)) return text;
  try {
    std::size_t pos = 0;
    if (key == "label_column") {
      const int v = std::stoi(text, &pos);
      if (pos == text.size()) return v;
    } else if (key == "n" || key == "d" || key == "batch_size" || key == "iters" || key == "record_every" ||
               key == "threads" || key == "problem_seed") {
      if (!text.empty() && text[0] != '-') {
        const unsigned long long v = std::stoull(text, &pos);
        if (pos == text.size()) return v;
      }
    } else {
      const double v = std::stod(text, &pos);
      if (pos == text.size()) return v;
    }
  } catch (const std::logic_error&) {
  }
  throw sps::Error(sps::ErrorCode::configuration, "invalid value '" + text + "' for --" + key);
}

sps::RunConfig base_config(const Flags& f, const std::map<std::string, std::string>& values) {
  sps::RunConfig cfg;
  cfg.out_dir = "out";
  if (!f.config.empty()) sps::apply_json(cfg, sps::read_json_file(f.config));
  json overrides = json::object();
  for (const auto& [k, v] : values) overrides[k] = typed_value(k, v);
  if (f.switches.count("interpolated")) overrides["interpolated"] = true;
  if (f.switches.count("no_standardize")) overrides["standardize"] = false;
  sps::apply_json(cfg, overrides);
  return cfg;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(item);
  return out;
}

void print_summary(const sps::ExperimentResult& res) {
  std::printf("%s: n=%zu d=%zu f*=%.12g, %zu seed(s)\n", res.label.c_str(), res.n, res.d, res.reference.f_star,
              res.seeds.size());
  for (const auto& s : res.seeds) {
    if (s.outcome.halted) std::printf("  seed %llu halted: %s\n", static_cast<unsigned long long>(s.seed), s.outcome.diagnostic.c_str());
  }
  if (!res.aggregate.rows.empty()) {
    const auto& last = res.aggregate.rows.back();
    std::printf("  k=%zu  f(x^k)-f* = %.6g +- %.3g   f(xbar)-f* = %.6g +- %.3g\n", last.k, last.f_sub_mean,
                2.0 * last.f_sub_std, last.f_avg_mean, 2.0 * last.f_avg_std);
  }
  for (const auto& w : res.written) std::printf("  wrote %s\n", w.c_str());
}

int cmd_run(const Flags& f) {
  const auto cfg = base_config(f, f.values);
  print_summary(sps::run_experiment(cfg));
  return 0;
}

int cmd_sweep(const Flags& f) {
  static const std::vector<std::string> kListKeys = {"optimizer", "gamma_b", "c0", "c", "gamma_ell", "c_schedule",
                                                     "eta", "b0", "beta2", "lower_bound"};
  std::map<std::string, std::string> fixed = f.values;
  std::vector<std::pair<std::string, std::vector<std::string>>> axes;
  for (const auto& key : kListKeys) {
    auto it = fixed.find(key);
    if (it == fixed.end()) continue;
    axes.emplace_back(key, split_list(it->second));
    fixed.erase(it);
  }
  std::vector<std::map<std::string, std::string>> cells{fixed};
  for (const auto& [key, vals] : axes) {
    std::vector<std::map<std::string, std::string>> next;
    for (const auto& cell : cells) {
      for (const auto& v : vals) {
        auto c = cell;
        c[key] = v;
        next.push_back(std::move(c));
      }
    }
    cells = std::move(next);
  }
  std::vector<sps::RunConfig> cfgs;
  std::set<std::string> labels;
  for (const auto& cell : cells) {
    auto cfg = base_config(f, cell);
    cfg.label.clear();
    // Knobs irrelevant to an optimizer produce identical cells; keep one.
    if (labels.insert(sps::run_label(cfg)).second) cfgs.push_back(std::move(cfg));
  }
  const auto grid = sps::compare_grid(cfgs);
  std::printf("%-4s %-48s %-14s %-12s\n", "rank", "label", "f(x^K)-f*", "+-2std");
  for (std::size_t i = 0; i < grid.summary.size(); ++i) {
    const auto& r = grid.summary[i];
    std::printf("%-4zu %-48s %-14.6g %-12.3g\n", i + 1, r.label.c_str(), r.final_f_sub_mean, r.final_f_sub_2std);
  }
  for (const auto& w : grid.written) std::printf("wrote %s\n", w.c_str());
  return 0;
}

int cmd_reference(const Flags& f) {
  const auto cfg = base_config(f, f.values);
  const auto obj = sps::build_problem(cfg.problem);
  const auto ref = sps::obtain_reference(obj, cfg.problem, cfg.reference_tol, cfg.out_dir);
  std::printf("problem %s hash %s: n=%zu d=%zu\n", std::string(sps::to_string(cfg.problem.kind)).c_str(),
              sps::problem_hash(cfg.problem).c_str(), sps::objective_size(obj), sps::objective_dim(obj));
  std::printf("f* = %.17g  ||grad f(x*)|| = %.3e  method %s\n", ref.f_star, ref.grad_norm, ref.method.c_str());
  if (!cfg.out_dir.empty()) std::printf("cached %s\n", sps::reference_cache_path(cfg.out_dir, sps::problem_hash(cfg.problem)).c_str());
  return 0;
}

int cmd_verify(const std::vector<int>& only) {
  int failed = 0;
  sps::run_acceptance(only, [&](const sps::CriterionResult& r) {
    std::printf("%s\n", sps::format_result(r).c_str());
    std::fflush(stdout);
    if (!r.passed) ++failed;
  });
  std::printf("%s: %d failed\n", failed == 0 ? "all criteria passed" : "verification failed", failed);
  return failed == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stochastic Polyak stepsize experiments", "sps"};
  app.set_version_flag("--version", SPS_VERSION);
  app.require_subcommand(1);

  Flags run_flags, sweep_flags, ref_flags;
  auto* run = app.add_subcommand("run", "run one optimizer over a set of seeds and write traces");
  add_problem_flags(run, run_flags);
  add_run_flags(run, run_flags, false);
  run->get_option("--optimizer")->check(CLI::IsMember(kOptimizers));

  auto* sweep = app.add_subcommand("sweep", "run a grid of optimizers / hyperparameters on one problem");
  add_problem_flags(sweep, sweep_flags);
  add_run_flags(sweep, sweep_flags, true);

  auto* reference = app.add_subcommand("reference", "solve for x*, f* and cache the result");
  add_problem_flags(reference, ref_flags);

  std::vector<int> only;
  auto* verify = app.add_subcommand("verify", "run the acceptance suite");
  verify->add_option("--only", only, "criterion ids to run")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*run) return cmd_run(run_flags);
    if (*sweep) {
      if (auto it = sweep_flags.values.find("optimizer"); it != sweep_flags.values.end()) {
        for (const auto& name : split_list(it->second)) sps::parse_method(name);
      }
      return cmd_sweep(sweep_flags);
    }
    if (*reference) return cmd_reference(ref_flags);
    if (*verify) return cmd_verify(only);
  } catch (const sps::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    if (e.code() == sps::ErrorCode::configuration) {
      std::fprintf(stderr, "\n%s", app.get_subcommands().front()->help().c_str());
      return 2;
    }
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
