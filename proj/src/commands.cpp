#include "seqmon/commands.hpp"

#include <cmath>
#include <cstdlib>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "seqmon/analytics.hpp"
#include "seqmon/format.hpp"
#include "seqmon/montecarlo.hpp"
#include "seqmon/record_io.hpp"
#include "seqmon/solvers.hpp"

namespace seqmon {

using nlohmann::json;

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::ConfigError:
    case ErrorCode::InvalidParam:
    case ErrorCode::DimensionMismatch:
    case ErrorCode::NonSymmetricD:
    case ErrorCode::NonPositiveThreshold:
    case ErrorCode::IoError:
      return 2;
    default:
      return 3;
  }
}

namespace {

const std::vector<double> kDefaultEpsGrid = {0.1, 0.05, 0.02, 0.01, 0.005, 0.002, 0.001};
const std::vector<double> kDefaultSweepEps = {0.2, 0.1, 0.05, 0.02, 0.01};

json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

json estimate_json(const ErrorEstimate& e) {
  return {{"point", e.point}, {"ci_lo", e.ci_lo}, {"ci_hi", e.ci_hi}, {"n_trials", e.n_trials},
          {"n_errors", e.n_errors}};
}

json moments_json(const TauMoments& m) { return {{"mean", m.mean}, {"sem", m.sem}, {"var", m.var}, {"n", m.n}}; }

json histogram_json(const Histogram& h) { return {{"edges", h.edges}, {"counts", h.counts}}; }

bool want_json(const RunConfig& cfg, bool json_default) {
  if (cfg.format.empty()) return json_default;
  if (cfg.format == "bin") throw Error(ErrorCode::ConfigError, "run.format: bin is only valid for `record`");
  return cfg.format == "json";
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

json sweep_json(std::span<const SweepPoint> pts, bool sequential) {
  json arr = json::array();
  for (const auto& p : pts) {
    json o = {{sequential ? "epsilon" : "t", p.control}, {"error", estimate_json(p.error)}};
    if (sequential) {
      o["a"] = p.threshold;
      o["tau_mean"] = p.time;
      o["tau_sem"] = p.tau_sem;
      o["n_undecided"] = p.n_undecided;
    }
    arr.push_back(o);
  }
  return arr;
}

double auto_t_fit(const std::array<double, 2>& mu) { return 8.0 / std::min(mu[0], mu[1]); }

std::array<VarianceRate, 2> variance_rates(const HypothesisPair& pair, const RunConfig& cfg,
                                           const std::array<double, 2>& mu) {
  const double t_fit = cfg.t_fit > 0.0 ? cfg.t_fit : auto_t_fit(mu);
  return {variance_rate(pair, 0, t_fit, cfg.n_var, cfg.seed, cfg.dt, cfg.threads),
          variance_rate(pair, 1, t_fit, cfg.n_var, cfg.seed, cfg.dt, cfg.threads)};
}

std::vector<double> default_det_times(const HypothesisPair& pair) {
  const auto mu = asymptotic_drift(pair);
  const double a = std::log(999.0);
  const auto tau = mean_stopping_time(mu, a, a);
  const double t_end = 4.0 * std::max(tau[0], tau[1]);
  std::vector<double> times;
  for (int i = 0; i <= 60; ++i) times.push_back(t_end * i / 60.0);
  return times;
}

json iid_table(const IidGaussianSpec& spec, std::span<const double> eps) {
  json rows = json::array();
  for (double e : eps) {
    const IidSummary s = iid_summary(spec, e);
    rows.push_back({{"epsilon", e},
                    {"neg_log_eps", -std::log(e)},
                    {"mean_tau_pred", s.mean_tau},
                    {"T_det_pred", s.t_det},
                    {"ratio", s.ratio},
                    {"mean_tau_wald", s.mean_tau_wald},
                    {"T_det_exact", s.t_det_exact},
                    {"ratio_exact", s.t_det_exact / s.mean_tau_wald}});
  }
  return rows;
}

}  // namespace

std::string cmd_predict(const RunConfig& cfg) {
  json out;
  out["scenario"] = cfg.scenario;
  out["resolved_config"] = emit_config(cfg);
  if (cfg.scenario == "iid") {
    const IidGaussianSpec spec = build_iid(cfg);
    const IidSummary s = iid_summary(spec, cfg.eps0);
    out["mu"] = s.mu;
    out["nu"] = s.nu;
    out["r_sym"] = s.r_sym;
    out["r_stein"] = s.r_stein;
    out["mean_tau_table"] = iid_table(spec, cfg.eps_list.empty() ? kDefaultEpsGrid : cfg.eps_list);
    const auto c = gaussian_llr_consistency(s.mu, s.mu, s.nu, s.nu, 1e-12);
    out["gaussian_llr"] = {{"consistent", c.consistent}, {"details", c.details}};
    return dump(out);
  }

  const HypothesisPair pair = build_pair(cfg);
  const RiccatiOptions ropts;
  const std::array<Matrix, 2> sigma{riccati_steady_state(pair.model0, ropts),
                                    riccati_steady_state(pair.model1, ropts)};
  out["sigma_ss"] = {matrix_json(sigma[0]), matrix_json(sigma[1])};
  const auto mu = asymptotic_drift(pair, ropts);
  out["mu0"] = mu[0];
  out["mu1"] = mu[1];
  std::array<double, 2> abscissa{};
  for (int k = 0; k < 2; ++k) {
    const ExtendedSystem sys = build_steady_extended(pair, k, ropts);
    abscissa[k] = stability_check(sys.drift(sys.steady_covariance()));
  }
  out["drift_abscissa"] = abscissa;

  const SprtConfig sprt = build_sprt(cfg);
  const auto [alpha0, alpha1] = wald_error_bounds(sprt.thresholds.a0, sprt.thresholds.a1);
  out["thresholds"] = {{"a0", sprt.thresholds.a0}, {"a1", sprt.thresholds.a1}};
  out["wald_errors"] = {{"alpha0", alpha0}, {"alpha1", alpha1}};

  if (pair.identical_models() || !(mu[0] > 0.0 && mu[1] > 0.0)) {
    out["warning"] = "hypotheses are indistinguishable (zero drift); stopping times are infinite";
    return dump(out);
  }
  const auto tau = mean_stopping_time(mu, sprt.thresholds.a0, sprt.thresholds.a1);
  out["mean_tau"] = tau;
  json table = json::array();
  for (double e : cfg.eps_list.empty() ? kDefaultEpsGrid : cfg.eps_list) {
    const double a = std::log((1.0 - e) / e);
    const auto t = mean_stopping_time(mu, a, a);
    table.push_back({{"epsilon", e}, {"a", a}, {"tau0", t[0]}, {"tau1", t[1]}});
  }
  out["mean_tau_table"] = table;

  json ig = json::array();
  std::optional<std::array<VarianceRate, 2>> nu;
  if (cfg.n_var > 0) nu = variance_rates(pair, cfg, mu);
  for (int k = 0; k < 2; ++k) {
    ig.push_back({{"mu", mu[k]},
                  {"sigma2", nu ? json((*nu)[k].nu) : json(nullptr)},
                  {"a", k == 0 ? sprt.thresholds.a0 : sprt.thresholds.a1}});
  }
  out["ig_params"] = ig;
  if (nu) {
    out["nu"] = {{{"nu", (*nu)[0].nu}, {"std_error", (*nu)[0].std_error}},
                 {{"nu", (*nu)[1].nu}, {"std_error", (*nu)[1].std_error}}};
    const double tol = 3.0 * std::max((*nu)[0].std_error / (*nu)[0].nu, (*nu)[1].std_error / (*nu)[1].nu);
    const auto c = gaussian_llr_consistency(mu[0], mu[1], (*nu)[0].nu, (*nu)[1].nu, std::max(tol, 0.01));
    out["gaussian_llr"] = {{"consistent", c.consistent}, {"details", c.details}};
  } else {
    const auto c = gaussian_llr_consistency(mu[0], mu[1], 2.0 * mu[0], 2.0 * mu[1], 0.01);
    out["gaussian_llr"] = {{"consistent", c.consistent}, {"details", c.details}, {"means_only", true}};
  }

  if (cfg.scenario == "damping") {
    const auto& p = cfg.params;
    const auto cf = damping_closed_forms(p.at("gamma0"), p.at("gamma1"), p.at("kappa"), p.at("eta"), p.at("nbar"));
    out["closed_form"] = {{"sigma", cf.sigma},
                          {"mu", cf.mu},
                          {"sigma_rel_diff", {std::abs(cf.sigma[0] / sigma[0](0, 0) - 1.0),
                                              std::abs(cf.sigma[1] / sigma[1](0, 0) - 1.0)}},
                          {"mu_rel_diff", {std::abs(cf.mu[0] / mu[0] - 1.0), std::abs(cf.mu[1] / mu[1] - 1.0)}}};
  }
  return dump(out);
}

std::string cmd_sprt(const RunConfig& cfg) {
  const HypothesisPair pair = build_pair(cfg);
  const SprtConfig sprt = build_sprt(cfg);
  EnsembleOptions opts = build_options(cfg);
  const auto mu = asymptotic_drift(pair);
  std::optional<std::array<double, 2>> tau_pred;
  if (mu[0] > 0.0 && mu[1] > 0.0) tau_pred = mean_stopping_time(mu, sprt.thresholds.a0, sprt.thresholds.a1);
  if (!(opts.t_max > 0.0)) {
    if (!tau_pred) throw Error(ErrorCode::ZeroDrift, "cannot choose t_max automatically for zero drift; set run.t_max");
    opts.t_max = 20.0 * std::max((*tau_pred)[0], (*tau_pred)[1]);
  }
  const EnsembleStats st = run_sprt_ensemble(pair, sprt, opts);
  const auto [wa0, wa1] = wald_error_bounds(sprt.thresholds.a0, sprt.thresholds.a1);

  if (!want_json(cfg, true)) {
    std::ostringstream os;
    os << "a0,a1,n,n_undecided,n_nonfinite,tau_mean,tau_sem,alpha0,alpha1,err_point,err_ci_lo,err_ci_hi\n"
       << format_double(sprt.thresholds.a0) << ',' << format_double(sprt.thresholds.a1) << ',' << cfg.n_traj << ','
       << st.n_undecided[0] + st.n_undecided[1] << ',' << st.n_nonfinite << ',' << format_double(st.tau_all.mean)
       << ',' << format_double(st.tau_all.sem) << ',' << format_double(st.alpha0.point) << ','
       << format_double(st.alpha1.point) << ',' << format_double(st.perr.point) << ','
       << format_double(st.perr.ci_lo) << ',' << format_double(st.perr.ci_hi) << '\n';
    return os.str();
  }
  json out;
  out["resolved_config"] = emit_config(cfg);
  out["t_max"] = opts.t_max;
  out["thresholds"] = {{"a0", sprt.thresholds.a0}, {"a1", sprt.thresholds.a1}};
  out["n_per_hypothesis"] = st.n_per_hypothesis;
  out["alpha0"] = estimate_json(st.alpha0);
  out["alpha1"] = estimate_json(st.alpha1);
  out["perr"] = estimate_json(st.perr);
  out["tau"] = {moments_json(st.tau[0]), moments_json(st.tau[1])};
  out["tau_all"] = moments_json(st.tau_all);
  out["n_undecided"] = st.n_undecided;
  out["n_nonfinite"] = st.n_nonfinite;
  out["histogram"] = histogram_json(st.histogram);
  out["predicted"] = {{"mu", mu},
                      {"mean_tau", tau_pred ? json(*tau_pred) : json(nullptr)},
                      {"alpha0", wa0},
                      {"alpha1", wa1}};
  return dump(out);
}

std::string cmd_seq_sweep(const RunConfig& cfg) {
  const HypothesisPair pair = build_pair(cfg);
  const auto& eps = cfg.eps_list.empty() ? kDefaultSweepEps : cfg.eps_list;
  const auto pts = sequential_sweep(pair, eps, build_options(cfg));
  if (!want_json(cfg, false)) return seq_sweep_csv(pts);
  json out;
  out["resolved_config"] = emit_config(cfg);
  out["points"] = sweep_json(pts, true);
  return dump(out);
}

std::string cmd_det_sweep(const RunConfig& cfg) {
  const HypothesisPair pair = build_pair(cfg);
  const std::vector<double> times = cfg.times.empty() ? default_det_times(pair) : cfg.times;
  const auto pts = deterministic_sweep(pair, times, build_options(cfg));
  if (!want_json(cfg, false)) return det_sweep_csv(pts);
  json out;
  out["resolved_config"] = emit_config(cfg);
  out["note"] = "all time slices come from one ensemble and are correlated";
  out["points"] = sweep_json(pts, false);
  return dump(out);
}

std::string cmd_hist(const RunConfig& cfg, const std::string& kind) {
  const HypothesisPair pair = build_pair(cfg);
  const auto mu = asymptotic_drift(pair);
  std::optional<std::array<VarianceRate, 2>> nu;
  if (cfg.n_var > 0) nu = variance_rates(pair, cfg, mu);

  if (kind == "llr") {
    const std::vector<double> slices = cfg.times.empty() ? std::vector<double>{0.5, 1.0, 2.0} : cfg.times;
    const std::array<double, 2> nu_v = nu ? std::array<double, 2>{(*nu)[0].nu, (*nu)[1].nu}
                                          : std::array<double, 2>{0.0, 0.0};
    const auto res = llr_slice_histogram(pair, slices, build_options(cfg), nu_v);
    if (!want_json(cfg, false)) {
      std::ostringstream os;
      os << "t,true_k,bin_lo,bin_hi,count,density,gauss_density\n";
      for (const auto& sl : res) {
        const auto dens = sl.histogram.density();
        for (std::size_t b = 0; b < sl.histogram.counts.size(); ++b) {
          const double lo = sl.histogram.edges[b], hi = sl.histogram.edges[b + 1];
          double g = std::numeric_limits<double>::quiet_NaN();
          if (sl.predicted_var > 0.0) {
            const double x = 0.5 * (lo + hi) - sl.predicted_mean;
            g = std::exp(-x * x / (2.0 * sl.predicted_var)) / std::sqrt(2.0 * std::numbers::pi * sl.predicted_var);
          }
          os << format_double(sl.t) << ',' << sl.true_k << ',' << format_double(lo) << ',' << format_double(hi)
             << ',' << sl.histogram.counts[b] << ',' << format_double(dens[b]) << ',' << format_double(g) << '\n';
        }
      }
      return os.str();
    }
    json out;
    out["resolved_config"] = emit_config(cfg);
    json arr = json::array();
    for (const auto& sl : res) {
      arr.push_back({{"t", sl.t},
                     {"true_k", sl.true_k},
                     {"mean", sl.mean},
                     {"var", sl.var},
                     {"mean_sem", sl.mean_sem},
                     {"var_sem", sl.var_sem},
                     {"predicted_mean", sl.predicted_mean},
                     {"predicted_var", nu ? json(sl.predicted_var) : json(nullptr)},
                     {"histogram", histogram_json(sl.histogram)}});
    }
    out["slices"] = arr;
    return dump(out);
  }
  if (kind != "tau") throw Error(ErrorCode::ConfigError, "--kind must be tau or llr");

  const SprtConfig sprt = build_sprt(cfg);
  EnsembleOptions opts = build_options(cfg);
  const auto tau_pred = mean_stopping_time(mu, sprt.thresholds.a0, sprt.thresholds.a1);
  if (!(opts.t_max > 0.0)) opts.t_max = 20.0 * std::max(tau_pred[0], tau_pred[1]);
  const EnsembleStats st = run_sprt_ensemble(pair, sprt, opts);
  const int k = cfg.true_k;
  const IgParams ig{mu[k], nu ? (*nu)[k].nu : 2.0 * mu[k], k == 1 ? sprt.thresholds.a1 : sprt.thresholds.a0};
  const StoppingHistogram sh = stopping_histogram(st.taus[k], ig);
  const auto dens = sh.histogram.density();
  if (!want_json(cfg, false)) {
    std::ostringstream os;
    os << "bin_lo,bin_hi,count,density,ig_density\n";
    for (std::size_t b = 0; b < sh.histogram.counts.size(); ++b) {
      const double lo = sh.histogram.edges[b], hi = sh.histogram.edges[b + 1];
      const double mid = 0.5 * (lo + hi);
      os << format_double(lo) << ',' << format_double(hi) << ',' << sh.histogram.counts[b] << ','
         << format_double(dens[b]) << ',' << format_double(inverse_gaussian_pdf(mid / ig.a, ig.mu, ig.sigma2, ig.a) / ig.a)
         << '\n';
    }
    return os.str();
  }
  json out;
  out["resolved_config"] = emit_config(cfg);
  out["true_k"] = k;
  out["ks"] = sh.ks;
  out["n"] = st.taus[k].size();
  out["ig_params"] = {{"mu", ig.mu}, {"sigma2", ig.sigma2}, {"a", ig.a}, {"sigma2_source", nu ? "fit" : "2mu"}};
  out["histogram"] = histogram_json(sh.histogram);
  return dump(out);
}

std::string cmd_iid(const RunConfig& cfg, bool monte_carlo) {
  const IidGaussianSpec spec = build_iid(cfg);
  std::vector<double> eps = cfg.eps_list;
  if (eps.empty()) {
    for (int e = 1; e <= 12; ++e) eps.push_back(std::pow(10.0, -e));
  }
  const json table = iid_table(spec, eps);
  if (!want_json(cfg, false)) {
    std::ostringstream os;
    os << "epsilon,neg_log_eps,mean_tau_pred,T_det_pred,ratio,mean_tau_wald,T_det_exact,ratio_exact\n";
    for (const auto& r : table) {
      os << format_double(r["epsilon"]) << ',' << format_double(r["neg_log_eps"]) << ','
         << format_double(r["mean_tau_pred"]) << ',' << format_double(r["T_det_pred"]) << ','
         << format_double(r["ratio"]) << ',' << format_double(r["mean_tau_wald"]) << ','
         << format_double(r["T_det_exact"]) << ',' << format_double(r["ratio_exact"]) << '\n';
    }
    return os.str();
  }
  json out;
  out["resolved_config"] = emit_config(cfg);
  const double mu = spec.mu();
  out["mu"] = mu;
  out["nu"] = spec.nu();
  out["table"] = table;
  // Boundary of the achievable (R₀, R₁) region of the deterministic test,
  // traced by the threshold slope ξ ∈ [−μ, μ].
  json region = json::array();
  for (int i = 0; i <= 40; ++i) {
    const double xi = -mu + 2.0 * mu * i / 40.0;
    const auto [r0, r1] = iid_error_rates(mu, xi);
    region.push_back({{"xi", xi}, {"R0", r0}, {"R1", r1}});
  }
  out["rate_region"] = region;
  if (monte_carlo) {
    const double e = cfg.eps0;
    const IidSummary s = iid_summary(spec, e);
    IidOptions o;
    o.n_trials = cfg.n_traj;
    o.substeps = cfg.substeps;
    o.t_max = cfg.t_max > 0.0 ? cfg.t_max : 20.0 * s.mean_tau;
    o.seed = cfg.seed;
    o.threads = cfg.threads;
    const double a = std::log((1.0 - e) / e);
    const EnsembleStats st = run_iid_sprt(mu, {a, a}, o);
    std::vector<int> n_grid;
    for (int n = 0; n <= static_cast<int>(std::ceil(2.0 * s.t_det_exact)); ++n) n_grid.push_back(n);
    IidOptions od = o;
    od.seed = derive_seed(cfg.seed, 1);
    const auto sweep = iid_deterministic_sweep(mu, n_grid, od);
    const double t_det = time_to_error(sweep, e);
    out["monte_carlo"] = {{"epsilon", e},
                          {"tau", moments_json(st.tau_all)},
                          {"perr", estimate_json(st.perr)},
                          {"t_det", t_det},
                          {"ratio", t_det / st.tau_all.mean}};
  }
  return dump(out);
}

std::string cmd_filter(const RunConfig& cfg, const std::string& input) {
  const HypothesisPair pair = build_pair(cfg);
  const MeasurementRecord rec = read_record(input, std::nullopt);
  const InitPolicy init = cfg.init == "transient" ? InitPolicy::Transient : InitPolicy::SteadyState;
  const auto ell = filter_from_record(pair, rec, init);
  const SprtConfig sprt = build_sprt(cfg);
  if (!want_json(cfg, false)) {
    std::ostringstream os;
    os << "t,ell\n";
    for (std::size_t i = 0; i < ell.size(); ++i) {
      os << format_double(static_cast<double>(i) * rec.dt) << ',' << format_double(ell[i]) << '\n';
    }
    return os.str();
  }
  json out;
  out["n_steps"] = rec.dy.size();
  out["dt"] = rec.dt;
  out["ell_final"] = ell.back();
  out["decision"] = "undecided";
  out["tau"] = nullptr;
  for (std::size_t i = 1; i < ell.size(); ++i) {
    const bool up = ell[i] >= sprt.thresholds.a1;
    if (up || ell[i] <= -sprt.thresholds.a0) {
      const double barrier = up ? sprt.thresholds.a1 : -sprt.thresholds.a0;
      out["decision"] = up ? "h1" : "h0";
      out["tau"] = (static_cast<double>(i - 1) + (barrier - ell[i - 1]) / (ell[i] - ell[i - 1])) * rec.dt;
      break;
    }
  }
  out["thresholds"] = {{"a0", sprt.thresholds.a0}, {"a1", sprt.thresholds.a1}};
  return dump(out);
}

std::string cmd_record(const RunConfig& cfg) {
  const HypothesisPair pair = build_pair(cfg);
  const ExtendedSystem sys = build_steady_extended(pair, cfg.true_k);
  NoiseStream noise(cfg.seed, 0, cfg.dt);
  const InitPolicy init = cfg.init == "transient" ? InitPolicy::Transient : InitPolicy::SteadyState;
  const auto [rec, ell] = generate_record(sys, cfg.horizon, cfg.dt, noise, init);
  if (cfg.format == "csv") return record_to_csv(rec);
  if (!cfg.format.empty() && cfg.format != "bin") throw Error(ErrorCode::ConfigError, "record format must be bin or csv");
  return record_to_binary(rec);
}

namespace {

struct Overrides {
  std::optional<std::string> config;
  std::optional<std::string> scenario;
  std::optional<double> epsilon;
  std::optional<double> alpha0;
  std::optional<double> alpha1;
  std::optional<int> n_traj;
  std::optional<double> dt;
  std::optional<double> t_max;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<int> true_k;
  std::optional<std::string> out;
  std::optional<std::string> format;
};

void add_common(CLI::App* sub, Overrides& ov) {
  sub->add_option("--config", ov.config, "INI config file");
  sub->add_option("--scenario", ov.scenario, "damping|frequency|frequency_scaled|force|iid|custom");
  sub->add_option("--epsilon", ov.epsilon, "symmetric strong-mode error target");
  sub->add_option("--alpha0", ov.alpha0, "weak-mode target P1(d=0)");
  sub->add_option("--alpha1", ov.alpha1, "weak-mode target P0(d=1)");
  sub->add_option("--n-traj", ov.n_traj, "ensemble size (even)");
  sub->add_option("--dt", ov.dt, "time step [s]");
  sub->add_option("--t-max", ov.t_max, "per-trajectory time limit [s]");
  sub->add_option("--seed", ov.seed, "master seed");
  sub->add_option("--threads", ov.threads, "worker threads (default: $SEQMON_THREADS)");
  sub->add_option("--true-k", ov.true_k, "hypothesis generating the signal");
  sub->add_option("--out", ov.out, "output path, - for stdout");
  sub->add_option("--format", ov.format, "csv|json (record: bin|csv)");
}

RunConfig assemble(const Overrides& ov) {
  RunConfig cfg = ov.config ? load_config_file(*ov.config) : RunConfig{};
  if (ov.scenario) {
    if (*ov.scenario != cfg.scenario) cfg.params.clear();
    cfg.scenario = *ov.scenario;
  }
  if (const char* env = std::getenv("SEQMON_THREADS"); env && *env) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (*end != '\0' || v < 1) throw Error(ErrorCode::ConfigError, "SEQMON_THREADS must be a positive integer");
    cfg.threads = static_cast<int>(v);
  }
  if (ov.epsilon) {
    cfg.mode = "strong";
    cfg.eps0 = cfg.eps1 = *ov.epsilon;
  }
  if (ov.alpha0 || ov.alpha1) {
    cfg.mode = "weak";
    if (ov.alpha0) cfg.alpha0 = *ov.alpha0;
    if (ov.alpha1) cfg.alpha1 = *ov.alpha1;
  }
  if (ov.n_traj) cfg.n_traj = *ov.n_traj;
  if (ov.dt) cfg.dt = *ov.dt;
  if (ov.t_max) cfg.t_max = *ov.t_max;
  if (ov.seed) cfg.seed = *ov.seed;
  if (ov.threads) cfg.threads = *ov.threads;
  if (ov.true_k) cfg.true_k = *ov.true_k;
  if (ov.out) cfg.out = *ov.out;
  if (ov.format) cfg.format = *ov.format;
  return resolve_config(cfg);
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Sequential and fixed-horizon tests for continuously monitored Gaussian systems"};
  app.require_subcommand(1);
  Overrides ov;
  std::string kind = "tau";
  std::string input;
  bool mc = false;
  double horizon = -1.0;

  auto* predict = app.add_subcommand("predict", "analytic drift rates, stopping times and closed forms (JSON)");
  auto* sprt = app.add_subcommand("sprt", "one SPRT ensemble");
  auto* seq = app.add_subcommand("seq-sweep", "SPRT over a decreasing list of epsilon");
  auto* det = app.add_subcommand("det-sweep", "fixed-horizon error against time");
  auto* hist = app.add_subcommand("hist", "stopping-time or LLR histograms");
  auto* iid = app.add_subcommand("iid", "IID Gaussian closed forms");
  auto* filter = app.add_subcommand("filter", "run both filters on a measurement record");
  auto* record = app.add_subcommand("record", "generate a measurement record under one hypothesis");
  auto* config = app.add_subcommand("config", "print the resolved configuration");
  for (auto* sub : {predict, sprt, seq, det, hist, iid, filter, record, config}) add_common(sub, ov);
  hist->add_option("--kind", kind, "tau|llr")->check(CLI::IsMember({"tau", "llr"}));
  iid->add_flag("--mc", mc, "also run the direct-sampling Monte Carlo at --epsilon");
  filter->add_option("--input", input, "record file (CSV or binary)")->required();
  record->add_option("--horizon", horizon, "record length [s]");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    RunConfig cfg = assemble(ov);
    if (horizon >= 0.0) cfg.horizon = horizon;
    std::string body;
    if (*predict) body = cmd_predict(cfg);
    else if (*sprt) body = cmd_sprt(cfg);
    else if (*seq) body = cmd_seq_sweep(cfg);
    else if (*det) body = cmd_det_sweep(cfg);
    else if (*hist) body = cmd_hist(cfg, kind);
    else if (*iid) body = cmd_iid(cfg, mc);
    else if (*filter) body = cmd_filter(cfg, input);
    else if (*record) body = cmd_record(cfg);
    else body = emit_config(cfg);
    write_atomic(cfg.out, body);
    return 0;
  } catch (const Error& e) {
    std::cerr << "seqmon: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "seqmon: " << e.what() << '\n';
    return 3;
  }
}

}  // namespace seqmon
