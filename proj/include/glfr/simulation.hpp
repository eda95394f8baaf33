#pragma once

// Monte Carlo harness: repeated sampling from known laws, running the
// estimators of one scenario, and aggregating bias, MSE and coverage.

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <istream>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <type_traits>
#include <vector>

#include <json.hpp>

#include "glfr/censored.hpp"
#include "glfr/common_scale.hpp"
#include "glfr/distribution.hpp"
#include "glfr/error.hpp"
#include "glfr/general.hpp"
#include "glfr/known_scale.hpp"
#include "glfr/numerics.hpp"
#include "glfr/parallel.hpp"
#include "glfr/posterior.hpp"
#include "glfr/random.hpp"

namespace glfr::sim {

enum class Scenario { known_scale, common_scale, general, censored };

inline const char* to_string(Scenario s) {
  switch (s) {
    case Scenario::known_scale: return "known_scale";
    case Scenario::common_scale: return "common_scale";
    case Scenario::general: return "general";
    case Scenario::censored: return "censored";
  }
  return "known_scale";
}

inline Scenario parse_scenario(const std::string& s) {
  if (s == "known_scale") return Scenario::known_scale;
  if (s == "common_scale") return Scenario::common_scale;
  if (s == "general") return Scenario::general;
  if (s == "censored") return Scenario::censored;
  throw Error(ErrorCode::invalid_config, "scenario: unknown value '" + s + "'");
}

struct ExperimentConfig {
  Scenario scenario = Scenario::known_scale;
  GlfrParams x{1.0, 2.0, 1.0};  ///< law of X (strength)
  GlfrParams y{1.0, 2.0, 1.0};  ///< law of Y (stress); shares the scale of x except in `general`
  std::size_t n = 25;
  std::size_t m = 25;
  censor::SchemeKind x_scheme = censor::SchemeKind::type2;
  censor::SchemeKind y_scheme = censor::SchemeKind::type2;
  std::size_t x_failures = 0;  ///< observed failures on the x side (censored scenario)
  std::size_t y_failures = 0;
  std::size_t replications = 1000;
  double level = 0.95;
  bool interval = true;  ///< compute the scenario's confidence interval
  bool bayes = true;     ///< compute the scenario's Bayes point estimate
  std::uint64_t seed = 20240601;
  unsigned threads = 1;
};

inline void validate(const ExperimentConfig& c) {
  auto bad = [](const std::string& field, const std::string& msg) {
    throw Error(ErrorCode::invalid_config, field + ": " + msg);
  };
  if (!is_valid(c.x)) bad("x", "invalid GLFR parameters");
  if (!is_valid(c.y)) bad("y", "invalid GLFR parameters");
  if (c.scenario != Scenario::general && (c.x.a != c.y.a || c.x.b != c.y.b)) {
    bad("a2/b2", "only the general scenario allows different scales");
  }
  if (c.replications < 1) bad("replications", "must be at least 1");
  if (!(c.level > 0.0 && c.level < 1.0)) bad("level", "must lie in (0,1)");
  const std::size_t min_size = c.scenario == Scenario::known_scale ? 1 : (c.scenario == Scenario::general ? 3 : 2);
  if (c.n < min_size || c.m < min_size) bad("n/m", "sample sizes too small for the scenario");
  if (c.scenario == Scenario::censored) {
    if (c.x_failures < 1 || c.x_failures > c.n) bad("x_failures", "must satisfy 1 <= failures <= n");
    if (c.y_failures < 1 || c.y_failures > c.m) bad("y_failures", "must satisfy 1 <= failures <= m");
  }
  if (c.threads < 1) bad("threads", "must be at least 1");
}

/// True value of R for the configured laws.
inline double true_r(const ExperimentConfig& c) {
  if (c.scenario == Scenario::general) return general::r_integral(c.x, c.y);
  return c.x.alpha / (c.x.alpha + c.y.alpha);
}

/// Estimates from one replicate. `params` holds (a, b, alpha, beta, a2, b2);
/// entries a scenario does not estimate stay NaN.
struct Replicate {
  bool ok = false;
  double r_hat = num::kNaN;
  double lo = num::kNaN;
  double hi = num::kNaN;
  double bayes = num::kNaN;
  std::array<double, 6> params{num::kNaN, num::kNaN, num::kNaN, num::kNaN, num::kNaN, num::kNaN};
};

struct ExperimentRow {
  ExperimentConfig config;
  double r_true = 0.0;
  std::size_t successes = 0;
  std::size_t failures = 0;
  bool flagged = false;  ///< more than 2% of replicates failed
  std::array<double, 6> mean_params{num::kNaN, num::kNaN, num::kNaN, num::kNaN, num::kNaN, num::kNaN};
  double mean_r_hat = num::kNaN;
  double bias = num::kNaN;
  double mse = num::kNaN;
  double mean_lo = num::kNaN;
  double mean_hi = num::kNaN;
  double cp = num::kNaN;
  double mean_bayes = num::kNaN;
};

template <class URBG>
Replicate run_replicate(const ExperimentConfig& c, URBG& rng) {
  Replicate r;
  switch (c.scenario) {
    case Scenario::known_scale: {
      const std::vector<double> x = sample(c.x, c.n, rng), y = sample(c.y, c.m, rng);
      const known::Scale s{c.x.a, c.x.b};
      const known::KnownScaleFit f = known::mle_known(x, y, s);
      r.r_hat = f.r_hat;
      r.params[2] = f.alpha_hat;
      r.params[3] = f.beta_hat;
      if (c.interval) {
        const num::Interval ci = known::exact_ci(f, 1.0 - c.level);
        r.lo = ci.lo;
        r.hi = ci.hi;
      }
      if (c.bayes) r.bayes = known::lindley_estimate(f.n, f.m, f.t1, f.t2, kNoninformative, kNoninformative);
      break;
    }
    case Scenario::common_scale: {
      const std::vector<double> x = sample(c.x, c.n, rng), y = sample(c.y, c.m, rng);
      const common::CommonScaleFit f = common::fit_common(x, y);
      if (!f.converged) throw Error(ErrorCode::non_convergence, "common-scale fit did not converge");
      r.r_hat = f.r_hat;
      r.params = {f.a_hat, f.b_hat, f.alpha_hat, f.beta_hat, num::kNaN, num::kNaN};
      if (c.interval) {
        const common::InfoMatrix info = common::observed_info(f.theta(), x, y);
        const num::Interval ci =
            common::asymptotic_ci(f.r_hat, common::asymptotic_variance(info), f.n, c.level).interval;
        r.lo = ci.lo;
        r.hi = ci.hi;
      }
      if (c.bayes) {
        const lik::MapScale ms = common::map_scale(x, y, common::kNoninformativePriors);
        r.bayes = common::lindley_common(c.n, c.m, log_transform_sum(x, ms.a, ms.b), log_transform_sum(y, ms.a, ms.b),
                                         kNoninformative, kNoninformative);
      }
      break;
    }
    case Scenario::general: {
      const std::vector<double> x = sample(c.x, c.n, rng), y = sample(c.y, c.m, rng);
      const general::GeneralFit f = general::fit_general(x, y);
      if (!f.converged) throw Error(ErrorCode::non_convergence, "general fit did not converge");
      r.r_hat = f.r_hat;
      r.params = {f.px.a, f.px.b, f.px.alpha, f.py.alpha, f.py.a, f.py.b};
      if (c.bayes) {
        general::GeneralPriors pr;
        const std::array<std::span<const double>, 1> xs{x}, ys{y};
        const std::array<GammaPrior, 1> ax{pr.alpha}, ay{pr.beta};
        const lik::MapScale mx = lik::map_scale(xs, ax, {pr.a1, pr.b1});
        const lik::MapScale my = lik::map_scale(ys, ay, {pr.a2, pr.b2});
        r.bayes = posterior::lindley(static_cast<double>(c.n), static_cast<double>(c.m),
                                     log_transform_sum(x, mx.a, mx.b), log_transform_sum(y, my.a, my.b), pr.alpha,
                                     pr.beta);
      }
      break;
    }
    case Scenario::censored: {
      const censor::CensoredSample xs =
          censor::generate_censored(c.x, censor::scheme_of_kind(c.x_scheme, c.n, c.x_failures), rng);
      const censor::CensoredSample ys =
          censor::generate_censored(c.y, censor::scheme_of_kind(c.y_scheme, c.m, c.y_failures), rng);
      const known::Scale s{c.x.a, c.x.b};
      const censor::CensoredFit f = censor::censored_mle(xs, ys, s);
      r.r_hat = f.r_hat;
      r.params[2] = f.alpha_hat;
      r.params[3] = f.beta_hat;
      if (c.interval) {
        const num::Interval ci = censor::censored_ci(xs, ys, s, f, c.level);
        r.lo = ci.lo;
        r.hi = ci.hi;
      }
      break;
    }
  }
  r.ok = std::isfinite(r.r_hat);
  return r;
}

/// Runs all replicates (replicate i uses substream(seed, i)) and aggregates
/// them in index order, so the row does not depend on the thread count.
inline ExperimentRow run_experiment(const ExperimentConfig& cfg) {
  validate(cfg);
  ExperimentRow row;
  row.config = cfg;
  row.r_true = true_r(cfg);
  std::vector<Replicate> reps(cfg.replications);
  parallel_for(cfg.replications, cfg.threads, [&](std::size_t i) {
    Rng rng = substream(cfg.seed, i);
    try {
      reps[i] = run_replicate(cfg, rng);
    } catch (const Error&) {
      reps[i] = Replicate{};
    }
  });
  num::CompensatedSum sum_r, sum_sq, sum_lo, sum_hi, sum_cover, sum_bayes;
  std::array<num::CompensatedSum, 6> sum_p;
  std::size_t with_ci = 0, with_bayes = 0;
  for (const Replicate& r : reps) {
    if (!r.ok) {
      ++row.failures;
      continue;
    }
    ++row.successes;
    sum_r.add(r.r_hat);
    sum_sq.add((r.r_hat - row.r_true) * (r.r_hat - row.r_true));
    for (std::size_t k = 0; k < 6; ++k) sum_p[k].add(r.params[k]);
    if (std::isfinite(r.lo) && std::isfinite(r.hi)) {
      ++with_ci;
      sum_lo.add(r.lo);
      sum_hi.add(r.hi);
      sum_cover.add(r.lo <= row.r_true && row.r_true <= r.hi ? 1.0 : 0.0);
    }
    if (std::isfinite(r.bayes)) {
      ++with_bayes;
      sum_bayes.add(r.bayes);
    }
  }
  row.flagged = static_cast<double>(row.failures) > 0.02 * static_cast<double>(cfg.replications);
  if (row.successes > 0) {
    const auto s = static_cast<double>(row.successes);
    row.mean_r_hat = sum_r.value() / s;
    row.bias = row.mean_r_hat - row.r_true;
    row.mse = sum_sq.value() / s;
    for (std::size_t k = 0; k < 6; ++k) row.mean_params[k] = sum_p[k].value() / s;
  }
  if (with_ci > 0) {
    const auto s = static_cast<double>(with_ci);
    row.mean_lo = sum_lo.value() / s;
    row.mean_hi = sum_hi.value() / s;
    row.cp = sum_cover.value() / s;
  }
  if (with_bayes > 0) row.mean_bayes = sum_bayes.value() / static_cast<double>(with_bayes);
  return row;
}

// ---------------------------------------------------------------------------
// Output

enum class TableFormat { csv, json };

inline const std::vector<std::string>& table_columns() {
  static const std::vector<std::string> cols{
      "scenario", "n",          "m",     "x_scheme", "x_failures", "y_scheme",   "y_failures", "a",
      "b",        "alpha",      "beta",  "a2",       "b2",         "R",          "replications", "failures",
      "flagged",  "mean_a",     "mean_b", "mean_alpha", "mean_beta", "mean_a2",  "mean_b2",    "mean_R_hat",
      "bias",     "mse",        "ci_lo", "ci_hi",    "cp",         "mean_R_bayes"};
  return cols;
}

namespace detail {

inline std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::vector<std::string> row_fields(const ExperimentRow& r) {
  const ExperimentConfig& c = r.config;
  const bool cens = c.scenario == Scenario::censored;
  return {to_string(c.scenario),
          std::to_string(c.n),
          std::to_string(c.m),
          cens ? censor::to_string(c.x_scheme) : "",
          cens ? std::to_string(c.x_failures) : "",
          cens ? censor::to_string(c.y_scheme) : "",
          cens ? std::to_string(c.y_failures) : "",
          fmt(c.x.a),
          fmt(c.x.b),
          fmt(c.x.alpha),
          fmt(c.y.alpha),
          fmt(c.y.a),
          fmt(c.y.b),
          fmt(r.r_true),
          std::to_string(c.replications),
          std::to_string(r.failures),
          r.flagged ? "true" : "false",
          fmt(r.mean_params[0]),
          fmt(r.mean_params[1]),
          fmt(r.mean_params[2]),
          fmt(r.mean_params[3]),
          fmt(r.mean_params[4]),
          fmt(r.mean_params[5]),
          fmt(r.mean_r_hat),
          fmt(r.bias),
          fmt(r.mse),
          fmt(r.mean_lo),
          fmt(r.mean_hi),
          fmt(r.cp),
          fmt(r.mean_bayes)};
}

inline nlohmann::json num_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

}  // namespace detail

inline nlohmann::json row_to_json(const ExperimentRow& r) {
  const ExperimentConfig& c = r.config;
  nlohmann::json j;
  j["scenario"] = to_string(c.scenario);
  j["n"] = c.n;
  j["m"] = c.m;
  if (c.scenario == Scenario::censored) {
    j["x_scheme"] = censor::to_string(c.x_scheme);
    j["x_failures"] = c.x_failures;
    j["y_scheme"] = censor::to_string(c.y_scheme);
    j["y_failures"] = c.y_failures;
  }
  j["params"] = {{"a", c.x.a}, {"b", c.x.b}, {"alpha", c.x.alpha}, {"beta", c.y.alpha}, {"a2", c.y.a}, {"b2", c.y.b}};
  j["R"] = r.r_true;
  j["replications"] = c.replications;
  j["seed"] = c.seed;
  j["failures"] = r.failures;
  j["flagged"] = r.flagged;
  j["mean_estimates"] = {{"a", detail::num_or_null(r.mean_params[0])},     {"b", detail::num_or_null(r.mean_params[1])},
                         {"alpha", detail::num_or_null(r.mean_params[2])}, {"beta", detail::num_or_null(r.mean_params[3])},
                         {"a2", detail::num_or_null(r.mean_params[4])},    {"b2", detail::num_or_null(r.mean_params[5])}};
  j["mean_R_hat"] = detail::num_or_null(r.mean_r_hat);
  j["bias"] = detail::num_or_null(r.bias);
  j["mse"] = detail::num_or_null(r.mse);
  j["ci"] = {{"lo", detail::num_or_null(r.mean_lo)}, {"hi", detail::num_or_null(r.mean_hi)}, {"level", c.level}};
  j["cp"] = detail::num_or_null(r.cp);
  j["mean_R_bayes"] = detail::num_or_null(r.mean_bayes);
  return j;
}

inline std::string emit_table(const std::vector<ExperimentRow>& rows, TableFormat format) {
  if (format == TableFormat::json) {
    nlohmann::json doc;
    doc["schema"] = "glfr-simulation/1";
    doc["rows"] = nlohmann::json::array();
    for (const auto& r : rows) doc["rows"].push_back(row_to_json(r));
    return doc.dump(2) + "\n";
  }
  std::ostringstream out;
  const auto& cols = table_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << "\n";
  for (const auto& r : rows) {
    const auto f = detail::row_fields(r);
    for (std::size_t i = 0; i < f.size(); ++i) out << (i ? "," : "") << f[i];
    out << "\n";
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// key=value configuration

/// Reads a configuration with one `key = value` per line; '#' starts a
/// comment. Keys: scenario, a, b, alpha, beta, a2, b2, n, m, x_scheme,
/// x_failures, y_scheme, y_failures, replications, level, seed, threads,
/// interval, bayes. a2 and b2 default to a and b.
inline ExperimentConfig parse_config(std::istream& in) {
  std::map<std::string, std::string> kv;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::invalid_config, "line " + std::to_string(lineno) + ": expected key = value");
    }
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r"), e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
    };
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return [&] {
    ExperimentConfig c;
    auto real = [&](const std::string& key, double& dst) {
      if (auto it = kv.find(key); it != kv.end()) {
        std::size_t used = 0;
        try {
          dst = std::stod(it->second, &used);
        } catch (const std::exception&) {
          used = 0;
        }
        if (used != it->second.size() || it->second.empty()) {
          throw Error(ErrorCode::invalid_config, key + ": not a number '" + it->second + "'");
        }
        kv.erase(it);
      }
    };
    auto count = [&](const std::string& key, auto& dst) {
      if (auto it = kv.find(key); it != kv.end()) {
        const std::string v = it->second;
        if (v.empty() || v.find_first_not_of("0123456789") != std::string::npos) {
          throw Error(ErrorCode::invalid_config, key + ": not a nonnegative integer '" + v + "'");
        }
        dst = static_cast<std::remove_reference_t<decltype(dst)>>(std::stoull(v));
        kv.erase(it);
      }
    };
    auto flag = [&](const std::string& key, bool& dst) {
      if (auto it = kv.find(key); it != kv.end()) {
        if (it->second == "true" || it->second == "1") dst = true;
        else if (it->second == "false" || it->second == "0") dst = false;
        else throw Error(ErrorCode::invalid_config, key + ": expected true or false");
        kv.erase(it);
      }
    };
    auto scheme = [&](const std::string& key, censor::SchemeKind& dst) {
      if (auto it = kv.find(key); it != kv.end()) {
        try {
          dst = censor::parse_scheme_kind(it->second);
        } catch (const Error&) {
          throw Error(ErrorCode::invalid_config, key + ": unknown scheme '" + it->second + "'");
        }
        kv.erase(it);
      }
    };
    if (auto it = kv.find("scenario"); it != kv.end()) {
      c.scenario = parse_scenario(it->second);
      kv.erase(it);
    }
    real("a", c.x.a);
    real("b", c.x.b);
    real("alpha", c.x.alpha);
    real("beta", c.y.alpha);
    c.y.a = c.x.a;
    c.y.b = c.x.b;
    real("a2", c.y.a);
    real("b2", c.y.b);
    count("n", c.n);
    count("m", c.m);
    scheme("x_scheme", c.x_scheme);
    scheme("y_scheme", c.y_scheme);
    count("x_failures", c.x_failures);
    count("y_failures", c.y_failures);
    count("replications", c.replications);
    real("level", c.level);
    count("seed", c.seed);
    count("threads", c.threads);
    flag("interval", c.interval);
    flag("bayes", c.bayes);
    if (!kv.empty()) throw Error(ErrorCode::invalid_config, kv.begin()->first + ": unknown key");
    validate(c);
    return c;
  }();
}

}  // namespace glfr::sim
