#include "seqmon/montecarlo.hpp"

#include <cmath>
#include <exception>
#include <limits>
#include <mutex>

#include "seqmon/analytics.hpp"
#include "seqmon/error.hpp"
#include "seqmon/solvers.hpp"

namespace seqmon {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Runs body(i) for i in [0, n). Exceptions are rethrown after the loop; the
// one from the lowest index wins so the failure is the same for any schedule.
template <class Body>
void for_each_index(int n, int threads, Body&& body) {
  std::exception_ptr first;
  int first_index = std::numeric_limits<int>::max();
  std::mutex mu;
  auto guarded = [&](int i) {
    try {
      body(i);
    } catch (...) {
      std::lock_guard<std::mutex> lock(mu);
      if (i < first_index) {
        first_index = i;
        first = std::current_exception();
      }
    }
  };
  if (threads <= 1) {
    for (int i = 0; i < n; ++i) guarded(i);
  } else {
#pragma omp parallel for schedule(dynamic, 16) num_threads(threads)
    for (int i = 0; i < n; ++i) guarded(i);
  }
  if (first) std::rethrow_exception(first);
}

void require_even(int n) {
  if (n <= 0 || n % 2 != 0) throw Error(ErrorCode::InvalidParam, "ensemble size must be a positive even number");
}

std::array<ExtendedSystem, 2> make_systems(const HypothesisPair& pair, InitPolicy init) {
  ExtendedSystem sys0 = build_steady_extended(pair, 0);
  ExtendedSystem sys1 = build_extended(pair, 1);
  sys1.Sigma_ss = sys0.Sigma_ss;
  if (init == InitPolicy::SteadyState) {
    for (const ExtendedSystem* s : {&sys0, &sys1}) {
      if (!(stability_check(s->drift(s->steady_covariance())) < 0.0)) {
        throw Error(ErrorCode::NotHurwitz, "extended filter drift is not stable");
      }
    }
  }
  return {std::move(sys0), std::move(sys1)};
}

std::vector<SprtSample> run_sprt_batch(const std::array<ExtendedSystem, 2>& systems, const SprtBatchSpec& spec,
                                       int threads) {
  require_even(spec.n_traj);
  std::vector<SprtSample> out(static_cast<std::size_t>(spec.n_traj));
  const int half = spec.n_traj / 2;
  for_each_index(spec.n_traj, threads, [&](int i) {
    NoiseStream noise(spec.seed, static_cast<std::uint64_t>(i), spec.dt);
    SprtSample& s = out[static_cast<std::size_t>(i)];
    try {
      const TrajectoryOutcome o = simulate_sprt(systems[i < half ? 0 : 1], spec.thresholds, spec.dt, spec.t_max,
                                                noise, spec.init);
      s.tau = o.tau;
      s.ell_final = o.ell_final;
      s.decision = o.decision;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NonFinite) throw;
      s.nonfinite = true;
    }
  });
  return out;
}

FixedEnsemble run_fixed(const std::array<ExtendedSystem, 2>& systems, std::span<const double> times, int n_traj,
                        double dt, std::uint64_t seed, InitPolicy init, int threads) {
  require_even(n_traj);
  FixedEnsemble fe;
  fe.times.assign(times.begin(), times.end());
  fe.n_traj = n_traj;
  const std::size_t ns = times.size();
  fe.ell.assign(static_cast<std::size_t>(n_traj) * ns, 0.0);
  fe.valid.assign(static_cast<std::size_t>(n_traj), 1);
  const double T = ns == 0 ? 0.0 : *std::max_element(times.begin(), times.end());
  const int half = n_traj / 2;
  for_each_index(n_traj, threads, [&](int i) {
    NoiseStream noise(seed, static_cast<std::uint64_t>(i), dt);
    try {
      const LlrPath path = simulate_fixed(systems[i < half ? 0 : 1], T, times, dt, noise, init);
      std::copy(path.ell.begin(), path.ell.end(), fe.ell.begin() + static_cast<std::ptrdiff_t>(i * ns));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NonFinite) throw;
      fe.valid[static_cast<std::size_t>(i)] = 0;
    }
  });
  for (char v : fe.valid) fe.n_nonfinite += v ? 0 : 1;
  return fe;
}

ErrorEstimate undefined_estimate() {
  ErrorEstimate e;
  e.point = kNaN;
  e.ci_lo = 0.0;
  e.ci_hi = 1.0;
  return e;
}

// π₀α̂₁ + π₁α̂₀ as the point; the interval is the Wilson interval of the pooled
// counts, widened if needed so it contains the weighted point.
ErrorEstimate pooled_error(const ErrorEstimate& alpha0, const ErrorEstimate& alpha1, std::array<double, 2> priors) {
  const std::int64_t n = alpha0.n_trials + alpha1.n_trials;
  if (n == 0) return undefined_estimate();
  ErrorEstimate e = wilson_interval(alpha0.n_errors + alpha1.n_errors, n);
  if (alpha0.n_trials > 0 && alpha1.n_trials > 0) {
    e.point = priors[0] * alpha1.point + priors[1] * alpha0.point;
    e.ci_lo = std::min(e.ci_lo, e.point);
    e.ci_hi = std::max(e.ci_hi, e.point);
  }
  return e;
}

ErrorEstimate estimate_or_undefined(std::span<const DecisionRecord> records, int k, UndecidedPolicy policy) {
  try {
    return estimate_error(records, k, policy);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::EmptyEnsemble) throw;
    return undefined_estimate();
  }
}

// Error counts of a fixed-horizon ensemble at one slice.
SweepPoint fixed_slice_point(const FixedEnsemble& fe, std::size_t slice, double a, std::array<double, 2> priors) {
  const int half = fe.n_traj / 2;
  std::array<std::int64_t, 2> n{0, 0}, err{0, 0};
  for (int i = 0; i < fe.n_traj; ++i) {
    if (!fe.valid[static_cast<std::size_t>(i)]) continue;
    const int k = i < half ? 0 : 1;
    ++n[k];
    if (deterministic_decide(fe.at(i, slice), a) != k) ++err[k];
  }
  SweepPoint pt;
  pt.control = fe.times[slice];
  pt.time = fe.times[slice];
  pt.threshold = a;
  const ErrorEstimate alpha1 = n[0] > 0 ? wilson_interval(err[0], n[0]) : undefined_estimate();
  const ErrorEstimate alpha0 = n[1] > 0 ? wilson_interval(err[1], n[1]) : undefined_estimate();
  pt.error = pooled_error(alpha0, alpha1, priors);
  return pt;
}

}  // namespace

std::int64_t Histogram::total() const {
  std::int64_t t = 0;
  for (auto c : counts) t += c;
  return t;
}

std::vector<double> Histogram::density() const {
  std::vector<double> d(counts.size(), 0.0);
  const double n = static_cast<double>(total());
  if (n == 0.0) return d;
  for (std::size_t i = 0; i < counts.size(); ++i) d[i] = static_cast<double>(counts[i]) / (n * (edges[i + 1] - edges[i]));
  return d;
}

Histogram freedman_diaconis_histogram(std::span<const double> samples) {
  Histogram h;
  if (samples.empty()) return h;
  std::vector<double> x(samples.begin(), samples.end());
  std::sort(x.begin(), x.end());
  const double lo = x.front(), hi = x.back();
  const std::size_t n = x.size();
  if (hi == lo) {
    h.edges = {lo - 0.5, lo + 0.5};
    h.counts = {static_cast<std::int64_t>(n)};
    return h;
  }
  auto quantile = [&](double q) {
    const double pos = q * static_cast<double>(n - 1);
    const std::size_t i = static_cast<std::size_t>(pos);
    const double f = pos - static_cast<double>(i);
    return i + 1 < n ? x[i] * (1.0 - f) + x[i + 1] * f : x[i];
  };
  const double iqr = quantile(0.75) - quantile(0.25);
  const double width = 2.0 * iqr / std::cbrt(static_cast<double>(n));
  std::size_t bins = width > 0.0 ? static_cast<std::size_t>(std::ceil((hi - lo) / width))
                                 : static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(n))));
  bins = std::clamp<std::size_t>(bins, 1, 10000);
  const double w = (hi - lo) / static_cast<double>(bins);
  h.edges.resize(bins + 1);
  for (std::size_t i = 0; i <= bins; ++i) h.edges[i] = lo + w * static_cast<double>(i);
  h.edges.back() = hi;
  h.counts.assign(bins, 0);
  for (double v : x) {
    auto b = static_cast<std::size_t>((v - lo) / w);
    ++h.counts[std::min(b, bins - 1)];
  }
  return h;
}

std::vector<SprtSample> run_sprt_batch_serial(const std::array<ExtendedSystem, 2>& systems, const SprtBatchSpec& spec) {
  return run_sprt_batch(systems, spec, 1);
}

std::vector<SprtSample> run_sprt_batch_parallel(const std::array<ExtendedSystem, 2>& systems,
                                                const SprtBatchSpec& spec, int threads) {
  return run_sprt_batch(systems, spec, std::max(threads, 2));
}

TauMoments tau_moments(std::span<const double> taus) {
  TauMoments m;
  m.n = static_cast<std::int64_t>(taus.size());
  if (m.n == 0) {
    m.mean = m.var = m.sem = kNaN;
    return m;
  }
  double sum = 0.0;
  for (double t : taus) sum += t;
  m.mean = sum / static_cast<double>(m.n);
  double acc = 0.0;
  for (double t : taus) acc += (t - m.mean) * (t - m.mean);
  m.var = m.n > 1 ? acc / static_cast<double>(m.n - 1) : 0.0;
  m.sem = std::sqrt(m.var / static_cast<double>(m.n));
  return m;
}

EnsembleStats aggregate_sprt(std::span<const SprtSample> samples, int n_traj, std::array<double, 2> priors,
                             UndecidedPolicy policy) {
  require_even(n_traj);
  if (samples.size() != static_cast<std::size_t>(n_traj)) {
    throw Error(ErrorCode::DimensionMismatch, "sample count does not match the ensemble size");
  }
  EnsembleStats st;
  st.n_per_hypothesis = n_traj / 2;
  st.priors = priors;
  std::array<std::vector<DecisionRecord>, 2> records;
  std::vector<double> all;
  for (int i = 0; i < n_traj; ++i) {
    const int k = i < n_traj / 2 ? 0 : 1;
    const SprtSample& s = samples[static_cast<std::size_t>(i)];
    if (s.nonfinite) {
      ++st.n_nonfinite;
      continue;
    }
    records[k].push_back({s.decision, s.ell_final});
    if (s.decision == Decision::Undecided) {
      ++st.n_undecided[k];
      continue;
    }
    st.taus[k].push_back(s.tau);
    all.push_back(s.tau);
  }
  st.alpha1 = estimate_or_undefined(records[0], 0, policy);
  st.alpha0 = estimate_or_undefined(records[1], 1, policy);
  st.perr = pooled_error(st.alpha0, st.alpha1, priors);
  for (int k = 0; k < 2; ++k) st.tau[k] = tau_moments(st.taus[k]);
  st.tau_all = tau_moments(all);
  st.histogram = freedman_diaconis_histogram(all);
  return st;
}

EnsembleStats run_sprt_ensemble(const HypothesisPair& pair, const SprtConfig& config, const EnsembleOptions& opts) {
  require_even(opts.n_traj);
  const auto systems = make_systems(pair, opts.init);
  double t_max = opts.t_max;
  if (!(t_max > 0.0)) {
    const auto tau = mean_stopping_time(asymptotic_drift(pair), config.thresholds.a0, config.thresholds.a1);
    t_max = 20.0 * std::max(tau[0], tau[1]);
  }
  SprtBatchSpec spec{config.thresholds, opts.n_traj, opts.dt, t_max, opts.seed, opts.init};
  const auto samples = opts.threads > 1 ? run_sprt_batch_parallel(systems, spec, opts.threads)
                                        : run_sprt_batch_serial(systems, spec);
  return aggregate_sprt(samples, opts.n_traj, pair.priors, opts.policy);
}

FixedEnsemble run_fixed_ensemble_serial(const std::array<ExtendedSystem, 2>& systems, std::span<const double> times,
                                        int n_traj, double dt, std::uint64_t seed, InitPolicy init) {
  return run_fixed(systems, times, n_traj, dt, seed, init, 1);
}

FixedEnsemble run_fixed_ensemble_parallel(const std::array<ExtendedSystem, 2>& systems,
                                          std::span<const double> times, int n_traj, double dt,
                                          std::uint64_t seed, InitPolicy init, int threads) {
  return run_fixed(systems, times, n_traj, dt, seed, init, std::max(threads, 2));
}

std::vector<SweepPoint> deterministic_sweep(const HypothesisPair& pair, std::span<const double> times,
                                            const EnsembleOptions& opts) {
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!(times[i] >= 0.0) || (i > 0 && !(times[i] > times[i - 1]))) {
      throw Error(ErrorCode::InvalidParam, "sweep times must be non-negative and strictly increasing");
    }
  }
  const auto systems = make_systems(pair, opts.init);
  const FixedEnsemble fe = opts.threads > 1 ? run_fixed_ensemble_parallel(systems, times, opts.n_traj, opts.dt,
                                                                          opts.seed, opts.init, opts.threads)
                                            : run_fixed_ensemble_serial(systems, times, opts.n_traj, opts.dt,
                                                                        opts.seed, opts.init);
  // Bayes threshold for the given priors; 0 for equal priors.
  const double a = std::log(pair.priors[0] / pair.priors[1]);
  std::vector<SweepPoint> out;
  out.reserve(times.size());
  for (std::size_t s = 0; s < times.size(); ++s) out.push_back(fixed_slice_point(fe, s, a, pair.priors));
  return out;
}

std::vector<SweepPoint> sequential_sweep(const HypothesisPair& pair, std::span<const double> eps_list,
                                         const EnsembleOptions& opts) {
  if (eps_list.empty()) return {};
  for (std::size_t i = 0; i < eps_list.size(); ++i) {
    if (!(eps_list[i] > 0.0 && eps_list[i] < 0.5) || (i > 0 && !(eps_list[i] < eps_list[i - 1]))) {
      throw Error(ErrorCode::InvalidParam, "epsilon list must be strictly decreasing within (0, 1/2)");
    }
  }
  EnsembleOptions run = opts;
  if (!(opts.t_max > 0.0)) {
    const auto mu = asymptotic_drift(pair);
    const double a = std::log((1.0 - eps_list.back()) / eps_list.back());
    const auto tau = mean_stopping_time(mu, a, a);
    run.t_max = 20.0 * std::max(tau[0], tau[1]);
  }
  std::vector<SweepPoint> out;
  out.reserve(eps_list.size());
  for (std::size_t j = 0; j < eps_list.size(); ++j) {
    const SprtConfig cfg = SprtConfig::symmetric(eps_list[j]);
    run.seed = derive_seed(opts.seed, j);
    const EnsembleStats st = run_sprt_ensemble(pair, cfg, run);
    SweepPoint pt;
    pt.control = eps_list[j];
    pt.time = st.tau_all.mean;
    pt.tau_sem = st.tau_all.sem;
    pt.threshold = cfg.thresholds.a1;
    pt.error = st.perr;
    pt.n_undecided = st.n_undecided[0] + st.n_undecided[1];
    out.push_back(pt);
  }
  return out;
}

double time_to_error(std::span<const SweepPoint> sweep, double target) {
  if (!(target > 0.0)) throw Error(ErrorCode::InvalidParam, "target error must be positive");
  // A zero count is floored at half an error so the log stays finite.
  auto log_p = [](const SweepPoint& s) {
    const double floor = s.error.n_trials > 0 ? 0.5 / static_cast<double>(s.error.n_trials) : 0.0;
    return std::log(std::max(s.error.point, floor));
  };
  for (std::size_t j = 0; j < sweep.size(); ++j) {
    if (!(sweep[j].error.point <= target)) continue;
    if (j == 0) return sweep[0].time;
    const double l0 = log_p(sweep[j - 1]), l1 = log_p(sweep[j]);
    const double f = l1 == l0 ? 1.0 : (std::log(target) - l0) / (l1 - l0);
    return sweep[j - 1].time + std::clamp(f, 0.0, 1.0) * (sweep[j].time - sweep[j - 1].time);
  }
  return kNaN;
}

StoppingHistogram stopping_histogram(std::span<const double> taus, const IgParams& ig) {
  if (taus.size() < 100) throw Error(ErrorCode::TooFewSamples, "stopping-time histogram needs at least 100 samples");
  StoppingHistogram out;
  out.histogram = freedman_diaconis_histogram(taus);
  out.ks = ks_distance(std::vector<double>(taus.begin(), taus.end()),
                       [&](double tau) { return inverse_gaussian_cdf(tau / ig.a, ig.mu, ig.sigma2, ig.a); });
  return out;
}

std::vector<LlrSlice> llr_slice_histogram(const HypothesisPair& pair, std::span<const double> t_slices,
                                          const EnsembleOptions& opts, std::array<double, 2> nu) {
  const auto systems = make_systems(pair, opts.init);
  const auto mu = asymptotic_drift(pair);
  const FixedEnsemble fe = run_fixed(systems, t_slices, opts.n_traj, opts.dt, opts.seed, opts.init, opts.threads);
  const int half = opts.n_traj / 2;
  std::vector<LlrSlice> out;
  for (std::size_t s = 0; s < t_slices.size(); ++s) {
    for (int k = 0; k < 2; ++k) {
      std::vector<double> v;
      v.reserve(static_cast<std::size_t>(half));
      for (int i = k * half; i < (k + 1) * half; ++i) {
        if (fe.valid[static_cast<std::size_t>(i)]) v.push_back(fe.at(i, s));
      }
      LlrSlice sl;
      sl.t = t_slices[s];
      sl.true_k = k;
      sl.histogram = freedman_diaconis_histogram(v);
      const TauMoments m = tau_moments(v);
      sl.mean = m.mean;
      sl.var = m.var;
      sl.mean_sem = m.sem;
      sl.var_sem = m.n > 1 ? m.var * std::sqrt(2.0 / static_cast<double>(m.n - 1)) : kNaN;
      sl.predicted_mean = (k == 1 ? 1.0 : -1.0) * mu[k] * sl.t;
      sl.predicted_var = nu[k] * sl.t;
      out.push_back(std::move(sl));
    }
  }
  return out;
}

EnsembleStats run_iid_sprt(double mu, Thresholds thr, const IidOptions& opts) {
  require_even(opts.n_trials);
  if (!(mu > 0.0)) throw Error(ErrorCode::ZeroDrift, "drift rate must be positive");
  if (opts.substeps < 1) throw Error(ErrorCode::InvalidParam, "substeps must be positive");
  if (!(thr.a0 > 0.0 && thr.a1 > 0.0)) throw Error(ErrorCode::NonPositiveThreshold, "thresholds must be positive");
  const double h = 1.0 / opts.substeps;
  const double sd = std::sqrt(2.0 * mu * h);
  const auto max_steps = static_cast<std::int64_t>(std::llround(opts.t_max * opts.substeps));
  const int half = opts.n_trials / 2;
  std::vector<SprtSample> out(static_cast<std::size_t>(opts.n_trials));
  for_each_index(opts.n_trials, opts.threads, [&](int i) {
    NoiseStream noise(opts.seed, static_cast<std::uint64_t>(i), 1.0);
    const double drift = (i < half ? -mu : mu) * h;
    SprtSample& s = out[static_cast<std::size_t>(i)];
    double ell = 0.0;
    for (std::int64_t n = 0; n < max_steps; ++n) {
      const double prev = ell;
      ell += drift + sd * noise.standard_normal();
      if (ell >= thr.a1 || ell <= -thr.a0) {
        const double barrier = ell >= thr.a1 ? thr.a1 : -thr.a0;
        s.decision = ell >= thr.a1 ? Decision::H1 : Decision::H0;
        s.tau = (static_cast<double>(n) + (barrier - prev) / (ell - prev)) * h;
        s.ell_final = ell;
        return;
      }
    }
    s.tau = static_cast<double>(max_steps) * h;
    s.ell_final = ell;
  });
  return aggregate_sprt(out, opts.n_trials, {0.5, 0.5});
}

std::vector<SweepPoint> iid_deterministic_sweep(double mu, std::span<const int> n_samples, const IidOptions& opts) {
  require_even(opts.n_trials);
  if (!(mu > 0.0)) throw Error(ErrorCode::ZeroDrift, "drift rate must be positive");
  for (std::size_t i = 0; i < n_samples.size(); ++i) {
    if (n_samples[i] < 0 || (i > 0 && n_samples[i] <= n_samples[i - 1])) {
      throw Error(ErrorCode::InvalidParam, "sample counts must be non-negative and strictly increasing");
    }
  }
  FixedEnsemble fe;
  fe.n_traj = opts.n_trials;
  for (int n : n_samples) fe.times.push_back(static_cast<double>(n));
  const std::size_t ns = n_samples.size();
  fe.ell.assign(static_cast<std::size_t>(opts.n_trials) * ns, 0.0);
  fe.valid.assign(static_cast<std::size_t>(opts.n_trials), 1);
  const double sd = std::sqrt(2.0 * mu);
  const int half = opts.n_trials / 2;
  for_each_index(opts.n_trials, opts.threads, [&](int i) {
    NoiseStream noise(opts.seed, static_cast<std::uint64_t>(i), 1.0);
    const double drift = i < half ? -mu : mu;
    double ell = 0.0;
    int n = 0;
    for (std::size_t s = 0; s < ns; ++s) {
      for (; n < n_samples[s]; ++n) ell += drift + sd * noise.standard_normal();
      fe.ell[static_cast<std::size_t>(i) * ns + s] = ell;
    }
  });
  std::vector<SweepPoint> out;
  for (std::size_t s = 0; s < ns; ++s) out.push_back(fixed_slice_point(fe, s, 0.0, {0.5, 0.5}));
  return out;
}

}  // namespace seqmon
