#include "seqmon/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "seqmon/error.hpp"
#include "seqmon/solvers.hpp"

namespace seqmon {

namespace {

std::int64_t steps_for(double T, double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw Error(ErrorCode::InvalidParam, "time step must be positive");
  if (!(T >= 0.0) || !std::isfinite(T)) throw Error(ErrorCode::InvalidParam, "horizon must be non-negative");
  return std::llround(T / dt);
}

Matrix unconditional_covariance(const Matrix& A, const Matrix& D) { return lyapunov_solve(A, D); }

Matrix initial_covariance(const ExtendedSystem& sys, InitPolicy init) {
  if (init == InitPolicy::SteadyState) return sys.steady_covariance();
  const int p = sys.dim() / 2;
  return direct_sum(unconditional_covariance(sys.calA.topLeftCorner(p, p), sys.calD.topLeftCorner(p, p)),
                    unconditional_covariance(sys.calA.bottomRightCorner(p, p), sys.calD.bottomRightCorner(p, p)));
}

void throw_nonfinite(double t) {
  std::ostringstream os;
  os << "log-likelihood ratio became non-finite at t = " << t;
  throw Error(ErrorCode::NonFinite, os.str());
}

}  // namespace

FilterState initial_state(const ExtendedSystem& sys, InitPolicy init) {
  FilterState s;
  s.X = Vector::Zero(sys.dim());
  s.Sigma = initial_covariance(sys, init);
  return s;
}

FilterState step(const FilterState& state, const ExtendedSystem& sys, double dt, const Vector& dw,
                 bool pin_covariance) {
  const int p = sys.dim() / 2;
  const int m = sys.meas_dim;
  if (dw.size() != m) throw Error(ErrorCode::DimensionMismatch, "noise increment has the wrong size");
  const Matrix chi = sys.gain(state.Sigma);
  const Vector Cr_k = sys.calC.block(sys.true_k * m, sys.true_k * p, m, p) * state.X.segment(sys.true_k * p, p);
  const Vector dy = Cr_k * dt + dw;
  const Vector e = sys.llr_map() * state.X;
  const double sgn = sys.true_k == 1 ? 1.0 : -1.0;

  FilterState next = state;
  next.t = state.t + dt;
  next.ell = state.ell + sgn * 0.5 * e.squaredNorm() * dt + e.dot(dw);
  next.X = state.X + (sys.calA * state.X + sys.B) * dt + chi * (sys.Q * dy - sys.calC * state.X * dt);
  if (!pin_covariance) {
    next.Sigma = state.Sigma +
                 (sys.calA * state.Sigma + state.Sigma * sys.calA.transpose() + sys.calD - chi * chi.transpose()) * dt;
    next.Sigma = 0.5 * (next.Sigma + next.Sigma.transpose());
  }
  return next;
}

TrajectoryKernel::TrajectoryKernel(const ExtendedSystem& sys, InitPolicy init)
    : true_k_(sys.true_k), p_(sys.dim() / 2), m_(sys.meas_dim), transient_(init == InitPolicy::Transient) {
  if (p_ > kMaxFilterDim || m_ > kMaxFilterDim) {
    throw Error(ErrorCode::InvalidParam, "trajectory kernel supports at most 8 state and measurement components");
  }
  const Matrix Sigma = initial_covariance(sys, init);
  C_ = sys.calC.topLeftCorner(m_, p_);
  for (int j = 0; j < 2; ++j) {
    A_[j] = sys.calA.block(j * p_, j * p_, p_, p_);
    b_[j] = sys.B.segment(j * p_, p_);
    D_[j] = sys.calD.block(j * p_, j * p_, p_, p_);
    Gamma_[j] = sys.GammaTilde.block(j * p_, j * m_, p_, m_);
    sigma0_[j] = Sigma.block(j * p_, j * p_, p_, p_);
  }
}

TrajectoryKernel::State TrajectoryKernel::initial() const {
  State s;
  for (int j = 0; j < 2; ++j) {
    s.r[j] = SmallVec::Zero(p_);
    s.sigma[j] = sigma0_[j];
    s.gain[j] = sigma0_[j] * C_.transpose() - Gamma_[j];
  }
  return s;
}

void TrajectoryKernel::update_filters(State& s, double dt, const SmallVec& dy) const {
  for (int j = 0; j < 2; ++j) {
    const SmallVec innovation = dy - C_ * s.r[j] * dt;
    s.r[j] += (A_[j] * s.r[j] + b_[j]) * dt + s.gain[j] * innovation;
    if (transient_) {
      SmallMat ds = A_[j] * s.sigma[j] + s.sigma[j] * A_[j].transpose() + D_[j] - s.gain[j] * s.gain[j].transpose();
      s.sigma[j] += ds * dt;
      s.sigma[j] = 0.5 * (s.sigma[j] + s.sigma[j].transpose()).eval();
      s.gain[j] = s.sigma[j] * C_.transpose() - Gamma_[j];
    }
  }
}

void TrajectoryKernel::advance(State& s, double dt, const SmallVec& dw, SmallVec* dy_out) const {
  const SmallVec e = C_ * (s.r[1] - s.r[0]);
  const SmallVec dy = C_ * s.r[true_k_] * dt + dw;
  const double sgn = true_k_ == 1 ? 1.0 : -1.0;
  s.ell += sgn * 0.5 * e.squaredNorm() * dt + e.dot(dw);
  update_filters(s, dt, dy);
  ++s.step;
  s.t = static_cast<double>(s.step) * dt;
  if (dy_out) *dy_out = dy;
}

void TrajectoryKernel::advance_record(State& s, double dt, const SmallVec& dy) const {
  const SmallVec c0 = C_ * s.r[0];
  const SmallVec c1 = C_ * s.r[1];
  s.ell += (c1 - c0).dot(dy) - 0.5 * (c1.squaredNorm() - c0.squaredNorm()) * dt;
  update_filters(s, dt, dy);
  ++s.step;
  s.t = static_cast<double>(s.step) * dt;
}

FilterState TrajectoryKernel::to_filter_state(const State& s) const {
  FilterState f;
  f.t = s.t;
  f.ell = s.ell;
  f.X.resize(2 * p_);
  f.X << s.r[0], s.r[1];
  f.Sigma = direct_sum(s.sigma[0], s.sigma[1]);
  return f;
}

TrajectoryOutcome simulate_sprt(const ExtendedSystem& sys, Thresholds thr, double dt, double t_max,
                                NoiseStream& noise, InitPolicy init) {
  if (!(thr.a0 > 0.0 && thr.a1 > 0.0)) throw Error(ErrorCode::NonPositiveThreshold, "SPRT thresholds must be positive");
  const std::int64_t n_steps = steps_for(t_max, dt);
  const TrajectoryKernel kernel(sys, init);
  auto s = kernel.initial();
  SmallVec dw(kernel.meas_dim());
  TrajectoryOutcome out;
  for (std::int64_t i = 0; i < n_steps; ++i) {
    const double prev = s.ell;
    const double t_prev = s.t;
    noise.fill(dw);
    kernel.advance(s, dt, dw);
    if (!std::isfinite(s.ell)) throw_nonfinite(s.t);
    if (s.ell >= thr.a1) {
      out.hit = Hit::Upper;
      out.decision = Decision::H1;
      out.tau = t_prev + dt * (thr.a1 - prev) / (s.ell - prev);
      out.ell_final = s.ell;
      return out;
    }
    if (s.ell <= -thr.a0) {
      out.hit = Hit::Lower;
      out.decision = Decision::H0;
      out.tau = t_prev + dt * (-thr.a0 - prev) / (s.ell - prev);
      out.ell_final = s.ell;
      return out;
    }
  }
  out.tau = s.t;
  out.ell_final = s.ell;
  return out;
}

LlrPath simulate_fixed(const ExtendedSystem& sys, double T, std::span<const double> sample_times, double dt,
                       NoiseStream& noise, InitPolicy init) {
  const std::int64_t n_steps = steps_for(T, dt);
  std::vector<std::int64_t> idx(sample_times.size());
  for (std::size_t i = 0; i < sample_times.size(); ++i) {
    idx[i] = steps_for(sample_times[i], dt);
    if (idx[i] > n_steps) throw Error(ErrorCode::InvalidParam, "sample time beyond the horizon");
  }
  std::vector<std::size_t> order(idx.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return idx[a] < idx[b]; });

  LlrPath path;
  path.t.resize(sample_times.size());
  path.ell.resize(sample_times.size());
  const TrajectoryKernel kernel(sys, init);
  auto s = kernel.initial();
  SmallVec dw(kernel.meas_dim());
  std::size_t next = 0;
  const std::int64_t last = idx.empty() ? 0 : idx[order.back()];
  for (std::int64_t i = 0;; ++i) {
    while (next < order.size() && idx[order[next]] == i) {
      path.t[order[next]] = s.t;
      path.ell[order[next]] = s.ell;
      ++next;
    }
    if (i >= last) break;
    noise.fill(dw);
    kernel.advance(s, dt, dw);
    if (!std::isfinite(s.ell)) throw_nonfinite(s.t);
  }
  return path;
}

std::pair<MeasurementRecord, std::vector<double>> generate_record(const ExtendedSystem& sys, double T, double dt,
                                                                 NoiseStream& noise, InitPolicy init) {
  const std::int64_t n_steps = steps_for(T, dt);
  const TrajectoryKernel kernel(sys, init);
  auto s = kernel.initial();
  MeasurementRecord rec;
  rec.dt = dt;
  rec.meas_dim = kernel.meas_dim();
  rec.dy.reserve(static_cast<std::size_t>(n_steps));
  std::vector<double> ell{0.0};
  ell.reserve(static_cast<std::size_t>(n_steps) + 1);
  SmallVec dw(kernel.meas_dim());
  SmallVec dy(kernel.meas_dim());
  for (std::int64_t i = 0; i < n_steps; ++i) {
    noise.fill(dw);
    kernel.advance(s, dt, dw, &dy);
    if (!std::isfinite(s.ell)) throw_nonfinite(s.t);
    rec.dy.emplace_back(dy);
    ell.push_back(s.ell);
  }
  return {std::move(rec), std::move(ell)};
}

std::vector<double> filter_from_record(const HypothesisPair& pair, const MeasurementRecord& record, InitPolicy init) {
  const HypothesisPair checked = validate_pair(pair);
  if (!(record.dt > 0.0) || !std::isfinite(record.dt)) throw Error(ErrorCode::InvalidParam, "record dt must be positive");
  if (record.meas_dim != checked.model0.meas_dim()) {
    throw Error(ErrorCode::DimensionMismatch, "record has " + std::to_string(record.meas_dim) +
                                                  " channels, model expects " +
                                                  std::to_string(checked.model0.meas_dim()));
  }
  ExtendedSystem sys = build_extended(checked, 0);
  if (init == InitPolicy::SteadyState) attach_steady_state(sys, checked);
  const TrajectoryKernel kernel(sys, init);
  auto s = kernel.initial();
  std::vector<double> ell{0.0};
  ell.reserve(record.dy.size() + 1);
  SmallVec dy(record.meas_dim);
  for (const Vector& row : record.dy) {
    if (row.size() != record.meas_dim) throw Error(ErrorCode::DimensionMismatch, "record row has the wrong width");
    if (!row.allFinite()) throw Error(ErrorCode::NonFinite, "record contains non-finite increments");
    dy = row;
    kernel.advance_record(s, record.dt, dy);
    if (!std::isfinite(s.ell)) throw_nonfinite(s.t);
    ell.push_back(s.ell);
  }
  return ell;
}

}  // namespace seqmon
