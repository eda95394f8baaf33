#pragma once

// Command implementations for the glfr tool. Each command builds a JSON
// report; main() only parses arguments and prints. Kept in a header so the
// integration tests can drive commands without spawning processes.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "glfr/glfr.hpp"

namespace glfr::cli {

using nlohmann::json;

/// Inconsistent command-line options detected after parsing; exits with 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline constexpr const char* kReportSchema = "glfr-report/1";

/// Seed from --seed, else GLFR_SEED, else 1.
inline std::uint64_t resolve_seed(std::optional<std::uint64_t> flag) {
  if (flag) return *flag;
  if (const char* env = std::getenv("GLFR_SEED")) {
    const std::string s = env;
    if (!s.empty() && s.find_first_not_of("0123456789") == std::string::npos) return std::stoull(s);
    throw Error(ErrorCode::invalid_config, "GLFR_SEED must be a nonnegative integer");
  }
  return 1;
}

inline json interval_json(const num::Interval& i) { return {{"lo", i.lo}, {"hi", i.hi}, {"level", i.level}}; }

inline json params_json(const GlfrParams& p) { return {{"a", p.a}, {"b", p.b}, {"alpha", p.alpha}}; }

inline json ks_json(std::vector<double> data, const GlfrParams& p) {
  std::sort(data.begin(), data.end());
  const num::KsResult r = num::ks_test(data, [&](double v) { return cdf(p, v); });
  return {{"D", r.statistic}, {"p_value", r.p_value}, {"n", data.size()}};
}

inline io::DataSet load(const std::string& path) { return io::ingest(path, io::guess_format(path)); }

/// Expands --prior values: two numbers apply to every parameter, otherwise
/// one (shape, rate) pair per parameter in the mode's order.
inline std::vector<GammaPrior> expand_priors(const std::vector<double>& v, std::size_t count,
                                             const std::vector<GammaPrior>& defaults) {
  if (v.empty()) return defaults;
  if (v.size() % 2 != 0) throw Error(ErrorCode::invalid_config, "--prior: needs shape,rate pairs");
  std::vector<GammaPrior> out;
  if (v.size() == 2) {
    out.assign(count, GammaPrior{v[0], v[1]});
  } else if (v.size() == 2 * count) {
    for (std::size_t i = 0; i < count; ++i) out.push_back({v[2 * i], v[2 * i + 1]});
  } else if (count > 2 && v.size() == 4) {
    // Only the two shape priors given; scale priors keep their defaults.
    out = defaults;
    out[count - 2] = {v[0], v[1]};
    out[count - 1] = {v[2], v[3]};
  } else {
    throw Error(ErrorCode::invalid_config, "--prior: expected 2, 4 or " + std::to_string(2 * count) + " numbers");
  }
  for (const auto& g : out) validate(g);
  return out;
}

// ---------------------------------------------------------------------------

struct FitOptions {
  std::string x_path, y_path;
  std::string mode = "common";
  double a = 1.0, b = 2.0;
  std::string ci = "none";
  double level = 0.95;
  std::size_t resamples = 1000;
  std::optional<std::uint64_t> seed;
  bool gof = false;
  unsigned threads = 1;
};

inline json cmd_fit(const FitOptions& o) {
  const io::DataSet xd = load(o.x_path), yd = load(o.y_path);
  const auto& x = xd.values;
  const auto& y = yd.values;
  json r{{"schema", kReportSchema}, {"command", "fit"}, {"mode", o.mode}, {"n", x.size()}, {"m", y.size()}};
  GlfrParams px, py;
  double r_hat = 0.0;
  const std::string ci = o.ci;
  auto bad_ci = [&] { throw Error(ErrorCode::invalid_config, "--ci " + ci + " is not available in mode " + o.mode); };
  if (o.mode == "known") {
    const known::Scale s{o.a, o.b};
    const known::KnownScaleFit f = known::mle_known(x, y, s);
    px = {s.a, s.b, f.alpha_hat};
    py = {s.a, s.b, f.beta_hat};
    r_hat = f.r_hat;
    r["estimates"] = {{"a", s.a}, {"b", s.b}, {"alpha", f.alpha_hat}, {"beta", f.beta_hat}};
    if (ci == "exact") {
      r["interval"] = interval_json(known::exact_ci(f, 1.0 - o.level));
      r["interval"]["method"] = "exact";
    } else if (ci == "bootstrap") {
      Rng rng(resolve_seed(o.seed));
      const auto bs = common::bootstrap_ci(x, y, s, {o.resamples, o.level, o.threads, 0.05}, rng);
      r["interval"] = interval_json(bs.interval);
      r["interval"]["method"] = "bootstrap";
      r["interval"]["r_star_mean"] = bs.r_star_mean;
      r["interval"]["resamples"] = o.resamples;
      r["interval"]["failures"] = bs.failures;
    } else if (ci != "none") {
      bad_ci();
    }
  } else if (o.mode == "common") {
    const common::CommonScaleFit f = common::fit_common(x, y);
    px = {f.a_hat, f.b_hat, f.alpha_hat};
    py = {f.a_hat, f.b_hat, f.beta_hat};
    r_hat = f.r_hat;
    r["estimates"] = {{"a", f.a_hat}, {"b", f.b_hat}, {"alpha", f.alpha_hat}, {"beta", f.beta_hat}};
    r["converged"] = f.converged;
    r["iterations"] = f.iterations;
    r["score_norm"] = f.score_norm;
    r["boundary"] = lik::to_string(f.boundary);
    r["log_likelihood"] = f.log_likelihood;
    if (ci == "asymptotic") {
      const common::InfoMatrix info = common::observed_info(f.theta(), x, y);
      const auto c = common::asymptotic_ci(f.r_hat, common::asymptotic_variance(info), f.n, o.level);
      r["interval"] = interval_json(c.interval);
      r["interval"]["method"] = "asymptotic";
      r["interval"]["sigma2"] = info.sigma2;
      r["interval"]["clipped"] = c.clipped;
    } else if (ci == "bootstrap") {
      Rng rng(resolve_seed(o.seed));
      const auto bs = common::bootstrap_ci(x, y, std::nullopt, {o.resamples, o.level, o.threads, 0.05}, rng);
      r["interval"] = interval_json(bs.interval);
      r["interval"]["method"] = "bootstrap";
      r["interval"]["r_star_mean"] = bs.r_star_mean;
      r["interval"]["resamples"] = o.resamples;
      r["interval"]["failures"] = bs.failures;
    } else if (ci != "none") {
      bad_ci();
    }
  } else if (o.mode == "general") {
    const general::GeneralFit f = general::fit_general(x, y);
    px = f.px;
    py = f.py;
    r_hat = f.r_hat;
    r["estimates"] = {{"x", params_json(f.px)}, {"y", params_json(f.py)}};
    r["converged"] = f.converged;
    r["score_norm"] = f.score_norm;
    if (ci != "none") bad_ci();
  } else {
    throw Error(ErrorCode::invalid_config, "--mode must be known, common or general");
  }
  r["R_hat"] = r_hat;
  if (o.gof) r["gof"] = {{"x", ks_json(x, px)}, {"y", ks_json(y, py)}};
  return r;
}

// ---------------------------------------------------------------------------

struct BayesOptions {
  std::string x_path, y_path;
  std::string mode = "common";
  double a = 1.0, b = 2.0;
  std::vector<double> prior;
  bool noninformative = false;
  std::size_t draws = 10000;
  double level = 0.95;
  std::optional<std::uint64_t> seed;
};

inline json cmd_bayes(const BayesOptions& o) {
  const io::DataSet xd = load(o.x_path), yd = load(o.y_path);
  const auto& x = xd.values;
  const auto& y = yd.values;
  if (o.noninformative && !o.prior.empty()) {
    throw Error(ErrorCode::invalid_config, "--prior and --noninformative are mutually exclusive");
  }
  if (o.draws < 1) throw Error(ErrorCode::invalid_config, "--draws must be at least 1");
  Rng rng(resolve_seed(o.seed));
  json r{{"schema", kReportSchema}, {"command", "bayes"}, {"mode", o.mode}, {"n", x.size()}, {"m", y.size()}};
  auto post_json = [](const ShapePosteriors& p) {
    return json{{"alpha", {{"shape", p.alpha.shape}, {"rate", p.alpha.rate}}},
                {"beta", {{"shape", p.beta.shape}, {"rate", p.beta.rate}}}};
  };
  auto prior_json = [](const std::vector<GammaPrior>& v) {
    json a = json::array();
    for (const auto& g : v) a.push_back({{"shape", g.shape}, {"rate", g.rate}});
    return a;
  };
  if (o.mode == "known") {
    const auto pr = expand_priors(o.prior, 2, {kNoninformative, kNoninformative});
    const known::Scale s{o.a, o.b};
    const ShapePosteriors post = known::posterior_params(x, y, s, pr[0], pr[1]);
    const double t1 = known::shape_statistic(x, s), t2 = known::shape_statistic(y, s);
    auto d = posterior::sample_r(post, o.draws, rng);
    std::sort(d.draws.begin(), d.draws.end());
    r["priors"] = prior_json(pr);
    r["scale"] = {{"a", s.a}, {"b", s.b}};
    r["posterior"] = post_json(post);
    r["R_bayes"] = known::lindley_estimate(x.size(), y.size(), t1, t2, pr[0], pr[1]);
    r["R_mean"] = posterior::r_mean(post);
    r["credible"] = interval_json(common::percentile_interval(d.draws, o.level));
    r["credible_exact"] = interval_json(posterior::credible_interval(post, o.level));
    r["acceptance_rate"] = d.acceptance_rate;
  } else if (o.mode == "common") {
    const common::CommonPriors def;
    const auto pr = expand_priors(o.prior, 4, {def.a, def.b, def.alpha, def.beta});
    const common::CommonPriors cp{pr[0], pr[1], pr[2], pr[3]};
    const common::BayesResult b = common::bayes_common(x, y, cp, o.draws, o.level, rng);
    r["priors"] = prior_json(pr);
    r["map_scale"] = {{"a", b.scale.a}, {"b", b.scale.b}, {"boundary", lik::to_string(b.scale.boundary)}};
    r["posterior"] = post_json(b.posterior);
    r["R_bayes"] = b.r_lindley;
    r["R_mode"] = b.r_mode;
    r["R_mean"] = b.r_mean;
    r["credible"] = interval_json(b.credible);
    r["credible_exact"] = interval_json(b.exact);
    r["acceptance_rate"] = b.acceptance_rate;
  } else if (o.mode == "general") {
    const general::GeneralPriors def;
    const auto pr = expand_priors(o.prior, 6, {def.a1, def.b1, def.a2, def.b2, def.alpha, def.beta});
    const general::GeneralPriors gp{pr[0], pr[1], pr[2], pr[3], pr[4], pr[5]};
    const general::GeneralBayes b = general::bayes_general(x, y, gp, {o.draws, o.draws, o.level}, rng);
    r["priors"] = prior_json(pr);
    r["map_scale"] = {{"x", {{"a", b.x_scale.a}, {"b", b.x_scale.b}}}, {"y", {{"a", b.y_scale.a}, {"b", b.y_scale.b}}}};
    r["posterior"] = post_json(b.posterior);
    r["R_bayes"] = b.r_bayes;
    r["R_bayes_integral"] = b.r_bayes_integral;
    r["credible"] = interval_json(b.credible);
    r["acceptance_rate"] = b.acceptance_rate;
  } else {
    throw Error(ErrorCode::invalid_config, "--mode must be known, common or general");
  }
  r["draws"] = o.draws;
  return r;
}

// ---------------------------------------------------------------------------

struct CensorOptions {
  std::string x_path, y_path;
  std::string kind = "type4";
  std::string kind_y;  ///< defaults to kind
  std::optional<std::size_t> n;
  std::size_t m = 0;
  std::optional<std::size_t> m_y;
  std::optional<double> a, b;  ///< known scale; estimated from the complete data when absent
  std::string source = "data";
  double level = 0.95;
  std::optional<std::uint64_t> seed;
};

inline json cmd_censor(const CensorOptions& o) {
  const io::DataSet xd = load(o.x_path), yd = load(o.y_path);
  const auto& x = xd.values;
  const auto& y = yd.values;
  if (o.a.has_value() != o.b.has_value()) throw Error(ErrorCode::invalid_config, "--a and --b go together");
  const censor::SchemeKind kx = censor::parse_scheme_kind(o.kind);
  const censor::SchemeKind ky = censor::parse_scheme_kind(o.kind_y.empty() ? o.kind : o.kind_y);
  const std::size_t nx = o.n.value_or(x.size()), ny = o.n.value_or(y.size());
  const std::size_t mx = o.m, my = o.m_y.value_or(o.m);
  if (mx > nx || my > ny || mx < 1 || my < 1) throw UsageError("--m: need 1 <= m <= n on each side");
  const censor::CensoringScheme sx = censor::scheme_of_kind(kx, nx, mx);
  const censor::CensoringScheme sy = censor::scheme_of_kind(ky, ny, my);

  known::Scale scale;
  json scale_j;
  std::optional<common::CommonScaleFit> full;
  if (o.a) {
    scale = {*o.a, *o.b};
    scale_j = {{"a", scale.a}, {"b", scale.b}, {"source", "given"}};
  } else {
    full = common::fit_common(x, y);
    scale = {full->a_hat, full->b_hat};
    scale_j = {{"a", scale.a}, {"b", scale.b}, {"source", "complete-data MLE"}};
  }
  Rng rng(resolve_seed(o.seed));
  censor::CensoredSample cx, cy;
  if (o.source == "data") {
    cx = censor::censor_observed(x, sx, rng);
    cy = censor::censor_observed(y, sy, rng);
  } else if (o.source == "model") {
    const known::KnownScaleFit kf = known::mle_known(x, y, scale);
    cx = censor::generate_censored({scale.a, scale.b, kf.alpha_hat}, sx, rng);
    cy = censor::generate_censored({scale.a, scale.b, kf.beta_hat}, sy, rng);
  } else {
    throw Error(ErrorCode::invalid_config, "--source must be data or model");
  }
  const censor::CensoredFit f = censor::censored_mle(cx, cy, scale);
  auto scheme_j = [](const censor::CensoringScheme& s, censor::SchemeKind k) {
    return json{{"kind", censor::to_string(k)}, {"n", s.n}, {"m", s.m}, {"removals", s.removals}};
  };
  json r{{"schema", kReportSchema}, {"command", "censor"}, {"source", o.source}};
  r["scheme"] = {{"x", scheme_j(sx, kx)}, {"y", scheme_j(sy, ky)}};
  r["scale"] = scale_j;
  r["observed"] = {{"x", cx.times}, {"y", cy.times}};
  r["estimates"] = {{"alpha", f.alpha_hat}, {"beta", f.beta_hat}};
  r["R_hat"] = f.r_hat;
  r["interval"] = interval_json(censor::censored_ci(cx, cy, scale, f, o.level));
  r["interval"]["method"] = "delta";
  return r;
}

// ---------------------------------------------------------------------------

struct SampleOptions {
  double a = 1.0, b = 2.0, alpha = 1.0;
  std::size_t n = 0;
  std::optional<std::uint64_t> seed;
  std::string out;
  bool ks_check = false;
};

/// Returns the report; the draws themselves go to `data_out` one per line.
inline json cmd_sample(const SampleOptions& o, std::ostream& data_out) {
  const GlfrParams p{o.a, o.b, o.alpha};
  validate(p);
  if (o.n == 0) throw Error(ErrorCode::domain, "--n must be at least 1");
  const std::uint64_t seed = resolve_seed(o.seed);
  Rng rng(seed);
  const std::vector<double> xs = sample(p, o.n, rng);
  data_out << "# GLFR(a=" << o.a << ", b=" << o.b << ", alpha=" << o.alpha << "), n=" << o.n << ", seed=" << seed
           << "\n";
  char buf[40];
  for (double v : xs) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    data_out << buf << "\n";
  }
  json r{{"schema", kReportSchema}, {"command", "sample"}, {"params", params_json(p)}, {"n", o.n}, {"seed", seed}};
  if (o.ks_check) r["ks"] = ks_json(xs, p);
  return r;
}

// ---------------------------------------------------------------------------

/// Formats a report as an indented key/value listing, numbers to 6
/// significant digits.
inline void pretty(const json& j, std::ostream& out, int indent = 0) {
  const std::string pad(static_cast<std::size_t>(indent), ' ');
  auto scalar = [](const json& v) -> std::string {
    if (v.is_number_float()) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.6g", v.get<double>());
      return buf;
    }
    if (v.is_string()) return v.get<std::string>();
    return v.dump();
  };
  for (auto it = j.begin(); it != j.end(); ++it) {
    const json& v = it.value();
    if (v.is_object()) {
      out << pad << it.key() << ":\n";
      pretty(v, out, indent + 2);
    } else if (v.is_array() && !v.empty() && v.front().is_object()) {
      out << pad << it.key() << ":\n";
      for (std::size_t i = 0; i < v.size(); ++i) {
        out << pad << "  [" << i << "]\n";
        pretty(v[i], out, indent + 4);
      }
    } else if (v.is_array()) {
      out << pad << it.key() << ": [";
      for (std::size_t i = 0; i < v.size(); ++i) out << (i ? ", " : "") << scalar(v[i]);
      out << "]\n";
    } else {
      out << pad << it.key() << ": " << scalar(v) << "\n";
    }
  }
}

inline json error_json(const std::string& code, const std::string& message) {
  return {{"error", {{"code", code}, {"message", message}}}};
}

/// Entry point shared by main() and the tests. Returns the exit status:
/// 0 on success, 1 for a failed computation or bad input, 2 for usage errors.
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Stress-strength inference for GLFR distributions", "glfr"};
  app.require_subcommand(1);
  bool pretty_out = false;
  app.add_flag("--pretty", pretty_out, "Human-readable output instead of JSON");

  FitOptions fit;
  auto* c_fit = app.add_subcommand("fit", "Maximum likelihood fit of R = P(Y < X)");
  c_fit->add_option("x", fit.x_path, "Strength sample file")->required();
  c_fit->add_option("y", fit.y_path, "Stress sample file")->required();
  c_fit->add_option("--mode", fit.mode, "known | common | general")->check(CLI::IsMember({"known", "common", "general"}));
  c_fit->add_option("--a", fit.a, "Known scale a (mode known)");
  c_fit->add_option("--b", fit.b, "Known scale b (mode known)");
  c_fit->add_option("--ci", fit.ci, "none | exact | asymptotic | bootstrap")
      ->check(CLI::IsMember({"none", "exact", "asymptotic", "bootstrap"}));
  c_fit->add_option("--level", fit.level, "Confidence level");
  c_fit->add_option("--resamples,-B", fit.resamples, "Bootstrap resamples");
  c_fit->add_option("--seed", fit.seed, "Random seed (default: GLFR_SEED or 1)");
  c_fit->add_option("--threads", fit.threads, "Worker threads for the bootstrap");
  c_fit->add_flag("--gof", fit.gof, "Kolmogorov-Smirnov fit check per sample");

  BayesOptions bay;
  auto* c_bay = app.add_subcommand("bayes", "Bayes estimate and credible interval of R");
  c_bay->add_option("x", bay.x_path, "Strength sample file")->required();
  c_bay->add_option("y", bay.y_path, "Stress sample file")->required();
  c_bay->add_option("--mode", bay.mode, "known | common | general")->check(CLI::IsMember({"known", "common", "general"}));
  c_bay->add_option("--a", bay.a, "Known scale a (mode known)");
  c_bay->add_option("--b", bay.b, "Known scale b (mode known)");
  c_bay->add_option("--prior", bay.prior, "Gamma shape,rate pairs")->delimiter(',');
  c_bay->add_flag("--noninformative", bay.noninformative, "Vague priors (the default)");
  c_bay->add_option("--draws", bay.draws, "Posterior draws for the credible interval");
  c_bay->add_option("--level", bay.level, "Credible level");
  c_bay->add_option("--seed", bay.seed, "Random seed (default: GLFR_SEED or 1)");

  CensorOptions cen;
  auto* c_cen = app.add_subcommand("censor", "Progressively censored analysis at a common scale");
  c_cen->add_option("x", cen.x_path, "Strength sample file")->required();
  c_cen->add_option("y", cen.y_path, "Stress sample file")->required();
  c_cen->add_option("--kind", cen.kind, "type2 | type3 | type4")->check(CLI::IsMember({"type2", "type3", "type4"}));
  c_cen->add_option("--kind-y", cen.kind_y, "Scheme kind for y (default: --kind)")
      ->check(CLI::IsMember({"type2", "type3", "type4"}));
  c_cen->add_option("--n", cen.n, "Units on test (default: data size)");
  c_cen->add_option("--m", cen.m, "Observed failures")->required();
  c_cen->add_option("--m-y", cen.m_y, "Observed failures for y (default: --m)");
  c_cen->add_option("--a", cen.a, "Known scale a");
  c_cen->add_option("--b", cen.b, "Known scale b");
  c_cen->add_option("--source", cen.source, "data | model")->check(CLI::IsMember({"data", "model"}));
  c_cen->add_option("--level", cen.level, "Confidence level");
  c_cen->add_option("--seed", cen.seed, "Random seed (default: GLFR_SEED or 1)");

  std::string sim_config, sim_format = "csv", sim_out;
  std::vector<std::string> sim_set;
  auto* c_sim = app.add_subcommand("simulate", "Monte Carlo experiment");
  c_sim->add_option("--config", sim_config, "key=value configuration file");
  c_sim->add_option("--set", sim_set, "Extra key=value settings, applied after --config");
  c_sim->add_option("--format", sim_format, "csv | json")->check(CLI::IsMember({"csv", "json"}));
  c_sim->add_option("--out", sim_out, "Output file (default: stdout)");

  SampleOptions smp;
  auto* c_smp = app.add_subcommand("sample", "Draw a GLFR sample");
  c_smp->add_option("--a", smp.a, "Scale a");
  c_smp->add_option("--b", smp.b, "Scale b");
  c_smp->add_option("--alpha", smp.alpha, "Shape");
  c_smp->add_option("--n", smp.n, "Sample size")->required();
  c_smp->add_option("--seed", smp.seed, "Random seed (default: GLFR_SEED or 1)");
  c_smp->add_option("--out", smp.out, "Output file for the draws (default: stdout)");
  c_smp->add_flag("--ks-check", smp.ks_check, "Report a KS test of the draws against the law");

  std::vector<std::string> args(argv + 1, argv + argc);
  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << error_json("usage", e.what()).dump() << "\n";
    return 2;
  }

  auto emit = [&](const json& report) {
    if (pretty_out) pretty(report, out);
    else out << report.dump(2) << "\n";
  };
  try {
    if (*c_fit) {
      emit(cmd_fit(fit));
    } else if (*c_bay) {
      emit(cmd_bayes(bay));
    } else if (*c_cen) {
      emit(cmd_censor(cen));
    } else if (*c_sim) {
      // The resolved default seed comes first so the file and --set can override it.
      std::stringstream text;
      text << "seed = " << resolve_seed(std::nullopt) << "\n";
      if (!sim_config.empty()) {
        std::ifstream in(sim_config);
        if (!in) throw Error(ErrorCode::io, sim_config + ": cannot open file");
        text << in.rdbuf() << "\n";
      }
      for (const auto& s : sim_set) text << s << "\n";
      const sim::ExperimentConfig cfg = sim::parse_config(text);
      const std::string doc = sim::emit_table({sim::run_experiment(cfg)},
                                              sim_format == "json" ? sim::TableFormat::json : sim::TableFormat::csv);
      if (sim_out.empty()) {
        out << doc;
      } else {
        std::ofstream f(sim_out);
        if (!f) throw Error(ErrorCode::io, sim_out + ": cannot write file");
        f << doc;
      }
    } else if (*c_smp) {
      if (smp.out.empty()) {
        std::ostringstream data;
        const json report = cmd_sample(smp, data);
        out << data.str();
        if (smp.ks_check) err << report.dump() << "\n";
      } else {
        std::ofstream f(smp.out);
        if (!f) throw Error(ErrorCode::io, smp.out + ": cannot write file");
        emit(cmd_sample(smp, f));
      }
    }
  } catch (const UsageError& e) {
    err << error_json("usage", e.what()).dump() << "\n";
    return 2;
  } catch (const Error& e) {
    err << error_json(std::string(to_string(e.code())), e.what()).dump() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << error_json("internal", e.what()).dump() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace glfr::cli
