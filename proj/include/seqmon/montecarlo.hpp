#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "seqmon/hypothesis_test.hpp"
#include "seqmon/model.hpp"
#include "seqmon/trajectory.hpp"

namespace seqmon {

struct Histogram {
  std::vector<double> edges;
  std::vector<std::int64_t> counts;

  std::int64_t total() const;
  /// Counts divided by (total · bin width).
  std::vector<double> density() const;
};

/// Freedman–Diaconis binning; falls back to √n bins when the IQR vanishes.
Histogram freedman_diaconis_histogram(std::span<const double> samples);

/// Per-trajectory result in an SPRT ensemble.
struct SprtSample {
  double tau = 0.0;
  double ell_final = 0.0;
  Decision decision = Decision::Undecided;
  bool nonfinite = false;
};

/// Trajectories [0, N/2) run under h₀, [N/2, N) under h₁; stream id = index.
struct SprtBatchSpec {
  Thresholds thresholds;
  int n_traj = 0;
  double dt = 1e-4;
  double t_max = 10.0;
  std::uint64_t seed = 1;
  InitPolicy init = InitPolicy::SteadyState;
};

/// Serial reference kernel.
std::vector<SprtSample> run_sprt_batch_serial(const std::array<ExtendedSystem, 2>& systems,
                                              const SprtBatchSpec& spec);

/// OpenMP kernel; bit-identical to the serial one for any thread count.
std::vector<SprtSample> run_sprt_batch_parallel(const std::array<ExtendedSystem, 2>& systems,
                                                const SprtBatchSpec& spec, int threads);

struct TauMoments {
  double mean = 0.0;
  double sem = 0.0;
  double var = 0.0;
  std::int64_t n = 0;
};

TauMoments tau_moments(std::span<const double> taus);

struct EnsembleStats {
  int n_per_hypothesis = 0;
  std::array<double, 2> priors{0.5, 0.5};
  ErrorEstimate alpha0;  // P₁(d = 0), from h₁ trajectories
  ErrorEstimate alpha1;  // P₀(d = 1), from h₀ trajectories
  ErrorEstimate perr;    // π₀α̂₁ + π₁α̂₀; CI from the pooled counts
  std::array<TauMoments, 2> tau;  // per true hypothesis, decided trajectories
  TauMoments tau_all;
  std::array<std::int64_t, 2> n_undecided{0, 0};
  std::int64_t n_nonfinite = 0;
  Histogram histogram;  // decided τ, both hypotheses
  std::array<std::vector<double>, 2> taus;  // decided stopping times per true hypothesis
};

/// Aggregates per-trajectory samples (order-independent reduction).
EnsembleStats aggregate_sprt(std::span<const SprtSample> samples, int n_traj, std::array<double, 2> priors,
                             UndecidedPolicy policy = UndecidedPolicy::Exclude);

struct EnsembleOptions {
  int n_traj = 4000;
  double dt = 1e-4;
  double t_max = 10.0;
  std::uint64_t seed = 1;
  int threads = 1;
  InitPolicy init = InitPolicy::SteadyState;
  UndecidedPolicy policy = UndecidedPolicy::Exclude;
};

/// N/2 SPRT trajectories per true hypothesis. Throws InvalidParam if N is odd.
/// opts.t_max ≤ 0 selects 20× the larger predicted 𝔼[τ].
EnsembleStats run_sprt_ensemble(const HypothesisPair& pair, const SprtConfig& config, const EnsembleOptions& opts);

struct SweepPoint {
  double control = 0.0;  // ε (sequential, decreasing) or t (deterministic, increasing)
  double time = 0.0;     // τ̄ or t
  double threshold = 0.0;
  ErrorEstimate error;
  std::int64_t n_undecided = 0;
  double tau_sem = 0.0;
};

/// Fixed-horizon ensemble: ℓ_t for each trajectory at each of `times`.
/// Rows [0, N/2) are h₀ trajectories, [N/2, N) h₁.
struct FixedEnsemble {
  std::vector<double> times;
  int n_traj = 0;
  std::vector<double> ell;  // n_traj × times.size(), row-major
  std::int64_t n_nonfinite = 0;
  std::vector<char> valid;

  double at(int traj, std::size_t slice) const { return ell[static_cast<std::size_t>(traj) * times.size() + slice]; }
};

FixedEnsemble run_fixed_ensemble_serial(const std::array<ExtendedSystem, 2>& systems, std::span<const double> times,
                                        int n_traj, double dt, std::uint64_t seed, InitPolicy init);
FixedEnsemble run_fixed_ensemble_parallel(const std::array<ExtendedSystem, 2>& systems,
                                          std::span<const double> times, int n_traj, double dt,
                                          std::uint64_t seed, InitPolicy init, int threads);

/// Errors of the threshold-0 likelihood test at each time, one ensemble reused
/// across all slices (slices are correlated).
std::vector<SweepPoint> deterministic_sweep(const HypothesisPair& pair, std::span<const double> times,
                                            const EnsembleOptions& opts);

/// Symmetric SPRT (a = log((1−ε)/ε)) for each ε in a decreasing list.
/// opts.t_max ≤ 0 selects 20× the predicted 𝔼[τ] at the smallest ε.
std::vector<SweepPoint> sequential_sweep(const HypothesisPair& pair, std::span<const double> eps_list,
                                         const EnsembleOptions& opts);

/// First time the sweep's error estimate drops to `target`, interpolating
/// log P̂ linearly between bracketing slices. Returns NaN if never reached.
double time_to_error(std::span<const SweepPoint> sweep, double target);

/// Kolmogorov–Smirnov distance sup|F_n − F| between a sample and a CDF.
template <class Cdf>
double ks_distance(std::vector<double> samples, Cdf&& cdf);

struct StoppingHistogram {
  Histogram histogram;
  double ks = 0.0;
};

/// Inverse-Gaussian parameters of the normalised stopping time τ/a.
struct IgParams {
  double mu = 0.0;
  double sigma2 = 0.0;
  double a = 0.0;
};

/// Histogram of the τ sample and its KS distance to the inverse Gaussian of
/// τ/a. Throws TooFewSamples below 100 samples.
StoppingHistogram stopping_histogram(std::span<const double> taus, const IgParams& ig);

struct LlrSlice {
  double t = 0.0;
  int true_k = 0;
  Histogram histogram;
  double mean = 0.0;
  double var = 0.0;
  double mean_sem = 0.0;
  double var_sem = 0.0;
  double predicted_mean = 0.0;  // (−1)^{k+1} μ_k t
  double predicted_var = 0.0;   // ν_k t (0 when ν is not supplied)
};

/// ℓ histograms at each time slice and hypothesis, with Gaussian-bulk overlay
/// parameters. `nu` may be {0, 0} to omit the variance overlay.
std::vector<LlrSlice> llr_slice_histogram(const HypothesisPair& pair, std::span<const double> t_slices,
                                          const EnsembleOptions& opts, std::array<double, 2> nu = {0.0, 0.0});

/// Direct sampling of the IID Gaussian test: each sample adds N(±μ, 2μ) to ℓ.
/// Each sample is split into `substeps` Brownian sub-increments so that the
/// SPRT sees a near-continuous path (negligible overshoot); τ is measured in
/// samples.
struct IidOptions {
  int n_trials = 20000;
  int substeps = 100;
  double t_max = 1000.0;  // samples
  std::uint64_t seed = 1;
  int threads = 1;
};

/// SPRT on N/2 trials per hypothesis with equal priors.
EnsembleStats run_iid_sprt(double mu, Thresholds thresholds, const IidOptions& opts);

/// Threshold-0 decisions after n samples for each n in `n_samples` (integers),
/// one ensemble of N/2 records per hypothesis reused across all n.
std::vector<SweepPoint> iid_deterministic_sweep(double mu, std::span<const int> n_samples, const IidOptions& opts);

// ---------------------------------------------------------------------------

template <class Cdf>
double ks_distance(std::vector<double> samples, Cdf&& cdf) {
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    d = std::max({d, (static_cast<double>(i) + 1.0) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

}  // namespace seqmon
