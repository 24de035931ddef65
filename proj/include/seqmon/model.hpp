#pragma once

#include <array>
#include <optional>
#include <string>

#include "seqmon/linalg.hpp"

namespace seqmon {

/// Linear-Gaussian conditional dynamics for one hypothesis:
///
///   dr = (A r + b) dt + χ(σ)(dy − C r dt),   χ(σ) = σ Cᵀ − Γ
///   σ̇  = A σ + σ Aᵀ + D − χ(σ) χ(σ)ᵀ
///   dy = C r dt + dw
///
/// A, D are 2n×2n, b has 2n entries, C is m×2n and Γ is 2n×m.
struct GaussianModel {
  int n_modes = 1;
  Matrix A;
  Vector b;
  Matrix C;
  Matrix D;
  Matrix Gamma;

  int state_dim() const { return 2 * n_modes; }
  int meas_dim() const { return static_cast<int>(C.rows()); }

  /// Measurement back-action gain χ(σ) = σCᵀ − Γ.
  Matrix gain(const Matrix& sigma) const { return sigma * C.transpose() - Gamma; }

  bool operator==(const GaussianModel&) const = default;
};

/// Relative PSD tolerance for D, scaled by the largest |eigenvalue|.
inline constexpr double kTolPsd = 1e-10;

/// Checks every GaussianModel invariant and returns the model unchanged.
/// Throws Error{DimensionMismatch | NonSymmetricD | NonFinite}.
GaussianModel validate_model(GaussianModel model);

struct HypothesisPair {
  GaussianModel model0;
  GaussianModel model1;
  std::array<double, 2> priors{0.5, 0.5};

  const GaussianModel& model(int k) const { return k == 0 ? model0 : model1; }
  bool identical_models() const { return model0 == model1; }

  /// Same pair with hypothesis labels exchanged (models and priors).
  HypothesisPair swapped() const;
};

/// Validates both models, the shared measurement map C, and the priors.
HypothesisPair validate_pair(HypothesisPair pair);

/// Both filters stacked in one 4n-dimensional state X = (r₀, r₁), with the
/// signal generated by hypothesis `true_k`.
struct ExtendedSystem {
  int true_k = 0;
  int n_modes = 1;
  int meas_dim = 1;
  Matrix calA;        // A₀ ⊕ A₁
  Matrix calC;        // C ⊕ C
  Matrix calD;        // D₀ ⊕ D₁
  Matrix GammaTilde;  // Γ₀ ⊕ Γ₁
  Vector B;           // (b₀, b₁)
  Matrix Pi_k;        // 2m×2m innovation selector, Π_k 𝒞X = 𝒞X − (C r_k, C r_k)
  Matrix Delta;       // 2m×m, Δᵀ𝒞X = C(r₁ − r₀)
  Matrix Q;           // 2m×m, (1, 1)ᵀ: the single physical noise feeds both filters
  std::optional<Matrix> Sigma_ss;  // σ₀ ⊕ σ₁ once the Riccati solver has run

  int dim() const { return static_cast<int>(calA.rows()); }

  /// χ(Σ) = Σ𝒞ᵀ − Γ̃.
  Matrix gain(const Matrix& Sigma) const;

  /// Drift of the extended OU process, 𝒜 − χ(Σ)Π_k𝒞.
  Matrix drift(const Matrix& Sigma) const;

  /// Noise loading χ(Σ)(1, 1)ᵀ (4n×m).
  Matrix noise_loading(const Matrix& Sigma) const;

  /// Row map X ↦ Δᵀ𝒞X = C(r₁ − r₀), an m×4n matrix.
  Matrix llr_map() const { return Delta.transpose() * calC; }

  const Matrix& steady_covariance() const;
};

/// Assembles the extended system. Sigma_ss is left unset; call
/// `attach_steady_state` (solvers) to fill it.
ExtendedSystem build_extended(const HypothesisPair& pair, int true_k);

struct OptomechParams {
  double gamma = 0.0;
  double kappa = 0.0;
  double eta = 1.0;
  double nbar = 0.0;
  double omega = 0.0;
  double b_force = 0.0;

  /// Unconditional steady-state covariance n̄ + 1/2 + κ/γ.
  double sigma_uc() const { return nbar + 0.5 + kappa / gamma; }
};

/// Rotating-frame damping model: A = −γ/2·I, C = −√(4ηκ)·I, D = γσ_uc·I.
GaussianModel damping_model(const OptomechParams& p);

/// Oscillator model: A = ((−γ/2, −ω), (ω, −γ/2)), C = √(4ηκ)·diag(1, 0),
/// D = γσ_uc·I, b = (0, b_force).
GaussianModel oscillator_model(const OptomechParams& p);

HypothesisPair preset_damping(double gamma0, double gamma1, double kappa, double eta, double nbar);
HypothesisPair preset_frequency(double omega0, double omega1, double gamma, double kappa, double eta,
                                double nbar);
HypothesisPair preset_force(double b0, double b1, double gamma, double kappa, double omega, double eta,
                            double nbar);

/// Frequency discrimination at full scale (ω₀ = 10⁵ s⁻¹, γ = 500, κ = 10³).
HypothesisPair preset_frequency_full();

/// Desk-scale frequency discrimination: all rates divided by 100
/// (ω₀ = 10³, γ = 5, κ = 10), i.e. the same physics with t → 100 t.
HypothesisPair preset_frequency_scaled();

}  // namespace seqmon
