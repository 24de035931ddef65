#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "seqmon/model.hpp"
#include "seqmon/solvers.hpp"

namespace seqmon {

/// Asymptotic LLR drift rates μ₀, μ₁ (both reported as non-negative rates;
/// 𝔼_k[ℓ_t] ≈ (−1)^{k+1} μ_k t).
///
/// For each k the extended drift M_k = 𝒜 − χ(Σ_ss)Π_k𝒞 is checked for
/// stability, the stationary mean d and covariance W are solved, and
/// μ_k = ½ Tr[𝒞ᵀΔΔᵀ𝒞 (W + d dᵀ)]. Throws NotHurwitz / NoConvergence.
std::array<double, 2> asymptotic_drift(const HypothesisPair& pair, const RiccatiOptions& opts = {});

struct VarianceRate {
  double nu = 0.0;
  double std_error = 0.0;
};

/// Monte Carlo estimate of ν_k = lim Var_k[ℓ_t]/t: slope of the ensemble
/// variance against t over [t_fit/4, t_fit]. The standard error comes from
/// the spread of slopes over 16 disjoint trajectory batches.
VarianceRate variance_rate(const HypothesisPair& pair, int k, double t_fit, int n_traj, std::uint64_t seed,
                           double dt, int threads = 1);

/// Wald-type mean stopping time (no overshoot) for each hypothesis:
///   𝔼_k[τ] = (a_k(1 − α_{k⊕1}) − a_{k⊕1} α_{k⊕1}) / μ_k.
/// Throws ZeroDrift if a rate is not positive.
std::array<double, 2> mean_stopping_time(const std::array<double, 2>& mu, double a0, double a1);

/// Stopping-time density of the normalised time t̃ = τ/a for a barrier at a
/// hit by ℓ = μt + σζ_t: √a / (σ√(2π) t̃^{3/2}) · exp(−a(1 − μt̃)²/(2σ²t̃)).
double inverse_gaussian_pdf(double t_norm, double mu, double sigma2, double a);

/// CDF of inverse_gaussian_pdf, computed by Gauss–Kronrod quadrature.
double inverse_gaussian_cdf(double t_norm, double mu, double sigma2, double a);

/// Exit-time density through each barrier of X_t = μt + σW_t started at 0 in
/// (−a0, a1), by the image-charge series.
struct FirstPassageDensity {
  double lower = 0.0;
  double upper = 0.0;
  int terms = 0;
  double total() const { return lower + upper; }
};

/// n_terms is the minimum number of image pairs; more are added until the
/// last pair is below 1e-12 of the running sum (hard cap 10⁴).
FirstPassageDensity first_passage_series(double t, double mu, double sigma, double a0, double a1, int n_terms = 1);

/// Fixed-horizon IID-Gaussian errors with threshold a at time t, as {α₀, α₁}.
std::pair<double, double> iid_fixed_errors(double t, double a, double mu);

/// Asymptotic deterministic error rates R_k(ξ) = (μ + (−1)^k ξ)² / (4μ), the
/// decay rate of α_k from iid_fixed_errors with threshold a = −ξt.
std::pair<double, double> iid_error_rates(double mu, double xi);

struct IidGaussianSpec {
  double m0 = 0.0;
  double m1 = 1.0;
  double sigma = 1.0;
  double mu() const { return (m1 - m0) * (m1 - m0) / (2.0 * sigma * sigma); }
  double nu() const { return 2.0 * mu(); }
};

struct IidSummary {
  double mu = 0.0;
  double nu = 0.0;
  double r_sym = 0.0;
  double r_stein = 0.0;
  double mean_tau = 0.0;         // −log ε / μ
  double t_det = 0.0;            // −4 log ε / μ
  double ratio = 0.0;            // t_det / mean_tau
  double mean_tau_wald = 0.0;    // log((1−ε)/ε)(1 − 2ε)/μ
  double t_det_exact = 0.0;      // solves ½ erfc(√(μt)/2) = ε
};

IidSummary iid_summary(const IidGaussianSpec& spec, double eps);

struct DampingClosedForms {
  std::array<double, 2> sigma{};
  std::array<double, 2> mu{};
};

/// Closed forms for the damping preset: stationary conditional variance
///   σ_k = γ_k/(8ηκ) (√(1 + 16ηκσ_uc,k/γ_k) − 1)
/// and the drift rates, with χ_k = cσ_k, c the scalar of C, for the
/// hypothesis whose damping γ_t generates the signal and the other γ_o:
///   μ = c²(γ_o²χ_t² + 2cγ_tχ_o(χ_t − χ_o)² + γ_t²χ_o² + γ_tγ_o(χ_t² − 4χ_tχ_o + χ_o²))
///       / (γ_t(γ_o + 2cχ_o)(γ_t + γ_o + 2cχ_o)).
DampingClosedForms damping_closed_forms(double gamma0, double gamma1, double kappa, double eta, double nbar);

struct LlrConsistency {
  bool consistent = true;
  std::string details;
};

/// A Gaussian LLR requires μ₀ = μ₁ and ν_k = 2μ_k.
LlrConsistency gaussian_llr_consistency(double mu0, double mu1, double nu0, double nu1, double tol);

}  // namespace seqmon
