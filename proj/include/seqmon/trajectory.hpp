#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "seqmon/hypothesis_test.hpp"
#include "seqmon/linalg.hpp"
#include "seqmon/model.hpp"
#include "seqmon/rng.hpp"

namespace seqmon {

/// How the conditional covariance is handled during a trajectory.
///  SteadyState: Σ pinned at the Riccati fixed point, r(0) = 0.
///  Transient:   Σ co-integrated from the unconditional steady state, r(0) = 0.
enum class InitPolicy { SteadyState, Transient };

/// Instantaneous state of a running pair of filters in extended form.
struct FilterState {
  double t = 0.0;
  Vector X;      // (r₀, r₁)
  Matrix Sigma;  // σ₀ ⊕ σ₁
  double ell = 0.0;
};

enum class Hit { Lower, Upper, Timeout };

struct TrajectoryOutcome {
  double tau = 0.0;
  Decision decision = Decision::Undecided;
  Hit hit = Hit::Timeout;
  double ell_final = 0.0;
  std::vector<std::pair<double, double>> samples;  // (t, ℓ_t) when requested
};

/// ℓ recorded at a set of sample times.
struct LlrPath {
  std::vector<double> t;
  std::vector<double> ell;
};

/// Initial state for a policy. Transient requires each A to be Hurwitz.
FilterState initial_state(const ExtendedSystem& sys, InitPolicy init);

/// One Euler–Maruyama step of both filters and ℓ under sys.true_k, using the
/// physical noise increment dw (m entries) shared by both filters. With
/// `pin_covariance` the Sigma of `state` is held fixed.
FilterState step(const FilterState& state, const ExtendedSystem& sys, double dt, const Vector& dw,
                 bool pin_covariance = true);

/// Precomputed per-filter blocks of an ExtendedSystem; runs the inner loops.
class TrajectoryKernel {
 public:
  struct State {
    std::int64_t step = 0;
    double t = 0.0;
    std::array<SmallVec, 2> r;
    std::array<SmallMat, 2> sigma;
    std::array<SmallMat, 2> gain;
    double ell = 0.0;
  };

  TrajectoryKernel(const ExtendedSystem& sys, InitPolicy init);

  State initial() const;
  int meas_dim() const { return m_; }
  int true_k() const { return true_k_; }

  /// Simulation mode: signal generated by true_k from innovation dw.
  /// Returns the m-dimensional record increment dy that was fed to the filters.
  void advance(State& s, double dt, const SmallVec& dw, SmallVec* dy_out = nullptr) const;

  /// Experiment mode: filters driven by a measured increment dy; ℓ accumulated
  /// as (CΔr)·dy − ½(‖Cr₁‖² − ‖Cr₀‖²)dt.
  void advance_record(State& s, double dt, const SmallVec& dy) const;

  FilterState to_filter_state(const State& s) const;

 private:
  void update_filters(State& s, double dt, const SmallVec& dy) const;

  int true_k_;
  int p_;  // 2n
  int m_;
  bool transient_;
  SmallMat C_;
  std::array<SmallMat, 2> A_;
  std::array<SmallVec, 2> b_;
  std::array<SmallMat, 2> D_;
  std::array<SmallMat, 2> Gamma_;
  std::array<SmallMat, 2> sigma0_;
};

/// Runs the SPRT on one trajectory until ℓ leaves (−a₀, a₁) or t_max is
/// reached. The crossing time is refined by linear interpolation between the
/// bracketing steps. Throws NonFinite on blow-up.
TrajectoryOutcome simulate_sprt(const ExtendedSystem& sys, Thresholds thr, double dt, double t_max,
                                NoiseStream& noise, InitPolicy init = InitPolicy::SteadyState);

/// Fixed-horizon run recording ℓ at `sample_times` (each rounded to the step grid).
LlrPath simulate_fixed(const ExtendedSystem& sys, double T, std::span<const double> sample_times, double dt,
                       NoiseStream& noise, InitPolicy init = InitPolicy::SteadyState);

/// Measurement record of increments dy (one m-vector per step).
struct MeasurementRecord {
  double dt = 0.0;
  int meas_dim = 0;
  std::vector<Vector> dy;
};

/// Generates a record under sys.true_k together with the ℓ path (one entry per
/// step, including ℓ(0) = 0) computed from the innovation form.
std::pair<MeasurementRecord, std::vector<double>> generate_record(const ExtendedSystem& sys, double T, double dt,
                                                                 NoiseStream& noise,
                                                                 InitPolicy init = InitPolicy::SteadyState);

/// Runs both conditional filters on a supplied record; returns ℓ after every
/// step, starting with ℓ(0) = 0. Never references a true hypothesis.
std::vector<double> filter_from_record(const HypothesisPair& pair, const MeasurementRecord& record,
                                       InitPolicy init = InitPolicy::SteadyState);

}  // namespace seqmon
