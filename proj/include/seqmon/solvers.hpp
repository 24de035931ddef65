#pragma once

#include <optional>

#include "seqmon/linalg.hpp"
#include "seqmon/model.hpp"

namespace seqmon {

struct RiccatiOptions {
  double tol = 1e-10;       // ‖σ̇‖_F < tol·‖D‖_F
  double max_time = 100.0;  // seconds of simulated covariance evolution
  int window = 10;          // consecutive converged steps required
  std::optional<Matrix> seed;  // initial σ; defaults to the unconditional steady state
};

/// Steady state of σ̇ = Aσ + σAᵀ + D − χ(σ)χ(σ)ᵀ, found by integrating the
/// Riccati ODE (RK4) until the derivative stagnates. Throws NoConvergence.
Matrix riccati_steady_state(const GaussianModel& model, const RiccatiOptions& opts = {});

/// Right-hand side of the Riccati ODE at σ.
Matrix riccati_rhs(const GaussianModel& model, const Matrix& sigma);

/// Solves M W + W Mᵀ + Q = 0 by vectorisation. Throws NotHurwitz / SingularSystem.
Matrix lyapunov_solve(const Matrix& M, const Matrix& Q);

/// Fixed point of dX = (M X + B) dt: d = −M⁻¹B. Throws NotHurwitz.
Vector stationary_mean(const Matrix& M, const Vector& B);

/// Spectral abscissa max Re λ(M).
double stability_check(const Matrix& M);

struct StationaryStats {
  Vector d;        // stationary mean
  Matrix W;        // stationary covariance
  Matrix W_tilde;  // second moment W + d dᵀ
};

/// Fills sys.Sigma_ss from per-hypothesis Riccati steady states.
void attach_steady_state(ExtendedSystem& sys, const HypothesisPair& pair, const RiccatiOptions& opts = {});

/// Builds the extended system with its steady covariance attached.
ExtendedSystem build_steady_extended(const HypothesisPair& pair, int true_k, const RiccatiOptions& opts = {});

/// Stationary mean and covariance of X under sys.true_k (Σ pinned at steady state).
StationaryStats stationary_stats(const ExtendedSystem& sys);

}  // namespace seqmon
