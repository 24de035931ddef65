#include "seqmon/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/erf.hpp>

#include "seqmon/error.hpp"
#include "seqmon/rng.hpp"
#include "seqmon/trajectory.hpp"

namespace seqmon {

std::array<double, 2> asymptotic_drift(const HypothesisPair& pair, const RiccatiOptions& opts) {
  const ExtendedSystem sys0 = build_steady_extended(pair, 0, opts);
  ExtendedSystem sys1 = build_extended(pair, 1);
  sys1.Sigma_ss = sys0.Sigma_ss;

  std::array<double, 2> mu{};
  for (int k = 0; k < 2; ++k) {
    const ExtendedSystem& sys = k == 0 ? sys0 : sys1;
    const StationaryStats st = stationary_stats(sys);
    const Matrix L = sys.llr_map();
    // ½ 𝔼‖C(r₁ − r₀)‖² = ½ Tr[LᵀL W̃].
    mu[k] = 0.5 * (L * st.W_tilde * L.transpose()).trace();
  }
  return mu;
}

VarianceRate variance_rate(const HypothesisPair& pair, int k, double t_fit, int n_traj, std::uint64_t seed,
                           double dt, int threads) {
  if (k != 0 && k != 1) throw Error(ErrorCode::InvalidParam, "k must be 0 or 1");
  if (!(t_fit > 0.0)) throw Error(ErrorCode::InvalidParam, "fit horizon must be positive");
  constexpr int kBatches = 16;
  constexpr int kSlices = 16;
  if (n_traj < 2 * kBatches) throw Error(ErrorCode::TooFewSamples, "variance fit needs at least 32 trajectories");

  const ExtendedSystem sys = build_steady_extended(pair, k);
  std::vector<double> times(kSlices);
  for (int i = 0; i < kSlices; ++i) times[i] = t_fit * (0.25 + 0.75 * i / (kSlices - 1));

  std::vector<double> ell(static_cast<std::size_t>(n_traj) * kSlices);
  const std::uint64_t stream_seed = derive_seed(seed, 0x76617200ULL + static_cast<std::uint64_t>(k));
  bool failed = false;
#pragma omp parallel for schedule(dynamic, 8) num_threads(std::max(1, threads))
  for (int i = 0; i < n_traj; ++i) {
    try {
      NoiseStream noise(stream_seed, static_cast<std::uint64_t>(i), dt);
      const LlrPath path = simulate_fixed(sys, t_fit, times, dt, noise);
      std::copy(path.ell.begin(), path.ell.end(), ell.begin() + static_cast<std::ptrdiff_t>(i) * kSlices);
    } catch (const Error&) {
#pragma omp atomic write
      failed = true;
    }
  }
  if (failed) throw Error(ErrorCode::NonFinite, "trajectory blew up during the variance fit");

  auto slope = [&](int begin, int end) {
    std::vector<double> var(kSlices);
    const double n = end - begin;
    for (int s = 0; s < kSlices; ++s) {
      double mean = 0.0;
      for (int i = begin; i < end; ++i) mean += ell[static_cast<std::size_t>(i) * kSlices + s];
      mean /= n;
      double acc = 0.0;
      for (int i = begin; i < end; ++i) {
        const double d = ell[static_cast<std::size_t>(i) * kSlices + s] - mean;
        acc += d * d;
      }
      var[s] = acc / (n - 1.0);
    }
    double tm = 0.0, vm = 0.0;
    for (int s = 0; s < kSlices; ++s) {
      tm += times[s];
      vm += var[s];
    }
    tm /= kSlices;
    vm /= kSlices;
    double num = 0.0, den = 0.0;
    for (int s = 0; s < kSlices; ++s) {
      num += (times[s] - tm) * (var[s] - vm);
      den += (times[s] - tm) * (times[s] - tm);
    }
    return num / den;
  };

  VarianceRate out;
  out.nu = slope(0, n_traj);
  std::array<double, kBatches> b{};
  const int per = n_traj / kBatches;
  double bm = 0.0;
  for (int j = 0; j < kBatches; ++j) {
    b[j] = slope(j * per, (j + 1) * per);
    bm += b[j];
  }
  bm /= kBatches;
  double bv = 0.0;
  for (double x : b) bv += (x - bm) * (x - bm);
  bv /= kBatches - 1;
  out.std_error = std::sqrt(bv / kBatches);
  return out;
}

std::array<double, 2> mean_stopping_time(const std::array<double, 2>& mu, double a0, double a1) {
  if (!(mu[0] > 0.0) || !(mu[1] > 0.0)) throw Error(ErrorCode::ZeroDrift, "drift rates must be positive");
  const auto [alpha0, alpha1] = wald_error_bounds(a0, a1);
  return {(a0 * (1.0 - alpha1) - a1 * alpha1) / mu[0], (a1 * (1.0 - alpha0) - a0 * alpha0) / mu[1]};
}

namespace {

void check_ig(double mu, double sigma2, double a) {
  if (!(mu > 0.0) || !(sigma2 > 0.0) || !(a > 0.0)) {
    throw Error(ErrorCode::InvalidParam, "inverse Gaussian needs positive mu, sigma2 and a");
  }
}

}  // namespace

double inverse_gaussian_pdf(double t_norm, double mu, double sigma2, double a) {
  check_ig(mu, sigma2, a);
  if (!(t_norm > 0.0)) return 0.0;
  const double dev = 1.0 - mu * t_norm;
  return std::sqrt(a / (2.0 * std::numbers::pi * sigma2)) * std::pow(t_norm, -1.5) *
         std::exp(-a * dev * dev / (2.0 * sigma2 * t_norm));
}

double inverse_gaussian_cdf(double t_norm, double mu, double sigma2, double a) {
  check_ig(mu, sigma2, a);
  if (!(t_norm > 0.0)) return 0.0;
  using boost::math::quadrature::gauss_kronrod;
  auto f = [&](double x) { return inverse_gaussian_pdf(x, mu, sigma2, a); };
  const double mode_side = std::min(t_norm, 1.0 / mu);
  double total = gauss_kronrod<double, 61>::integrate(f, 0.0, mode_side, 15, 1e-13);
  if (t_norm > mode_side) total += gauss_kronrod<double, 61>::integrate(f, mode_side, t_norm, 15, 1e-13);
  return std::clamp(total, 0.0, 1.0);
}

FirstPassageDensity first_passage_series(double t, double mu, double sigma, double a0, double a1, int n_terms) {
  if (!(sigma > 0.0) || !(a0 > 0.0) || !(a1 > 0.0) || !std::isfinite(mu)) {
    throw Error(ErrorCode::InvalidParam, "first-passage series needs sigma, a0, a1 > 0");
  }
  FirstPassageDensity out;
  if (!(t > 0.0)) return out;
  const double s2 = sigma * sigma;
  const double w = a0 + a1;
  const double norm = 1.0 / (sigma * std::sqrt(2.0 * std::numbers::pi * t * t * t));
  const double spread = sigma * std::sqrt(t);

  // Image term for exit through a barrier at distance `b` with drift `m` towards it.
  auto term = [&](double b, double m, long n) {
    const double x = b + 2.0 * static_cast<double>(n) * w;
    return x * norm * std::exp(m * b / s2 - m * m * t / (2.0 * s2) - x * x / (2.0 * s2 * t));
  };
  auto side = [&](double b, double m) {
    double sum = term(b, m, 0);
    long n = 1;
    for (; n <= 10000; ++n) {
      const double up = term(b, m, n);
      const double down = term(b, m, -n);
      sum += up + down;
      const double x_min = std::min(std::abs(b + 2.0 * n * w), std::abs(b - 2.0 * n * w));
      if (n >= n_terms && x_min > spread && std::max(std::abs(up), std::abs(down)) <= 1e-12 * std::abs(sum)) break;
    }
    out.terms = std::max(out.terms, static_cast<int>(std::min(n, 10000L)));
    return sum;
  };
  out.upper = std::max(0.0, side(a1, mu));
  out.lower = std::max(0.0, side(a0, -mu));
  return out;
}

std::pair<double, double> iid_fixed_errors(double t, double a, double mu) {
  if (!(t > 0.0) || !(mu > 0.0)) throw Error(ErrorCode::InvalidParam, "iid errors need t > 0 and mu > 0");
  const double s = std::sqrt(4.0 * mu * t);
  return {0.5 * std::erfc((mu * t - a) / s), 0.5 * std::erfc((mu * t + a) / s)};
}

std::pair<double, double> iid_error_rates(double mu, double xi) {
  if (!(mu > 0.0)) throw Error(ErrorCode::ZeroDrift, "drift rate must be positive");
  return {(mu + xi) * (mu + xi) / (4.0 * mu), (mu - xi) * (mu - xi) / (4.0 * mu)};
}

IidSummary iid_summary(const IidGaussianSpec& spec, double eps) {
  if (!(spec.sigma > 0.0)) throw Error(ErrorCode::InvalidParam, "sigma must be positive");
  if (!(eps > 0.0 && eps < 0.5)) throw Error(ErrorCode::InvalidParam, "epsilon must lie in (0, 1/2)");
  IidSummary s;
  s.mu = spec.mu();
  if (!(s.mu > 0.0)) throw Error(ErrorCode::ZeroDrift, "the two means coincide");
  s.nu = spec.nu();
  s.r_sym = iid_error_rates(s.mu, 0.0).first;
  s.r_stein = s.mu;
  s.mean_tau = -std::log(eps) / s.mu;
  s.t_det = -4.0 * std::log(eps) / s.mu;
  s.ratio = s.t_det / s.mean_tau;
  s.mean_tau_wald = std::log((1.0 - eps) / eps) * (1.0 - 2.0 * eps) / s.mu;
  const double x = boost::math::erfc_inv(2.0 * eps);
  s.t_det_exact = 4.0 * x * x / s.mu;
  return s;
}

DampingClosedForms damping_closed_forms(double gamma0, double gamma1, double kappa, double eta, double nbar) {
  // Reuse the preset validation.
  (void)preset_damping(gamma0, gamma1, kappa, eta, nbar);
  DampingClosedForms out;
  const std::array<double, 2> g{gamma0, gamma1};
  const double c = -std::sqrt(4.0 * eta * kappa);
  std::array<double, 2> chi{};
  for (int k = 0; k < 2; ++k) {
    const double s_uc = OptomechParams{.gamma = g[k], .kappa = kappa, .eta = eta, .nbar = nbar}.sigma_uc();
    out.sigma[k] = g[k] / (8.0 * eta * kappa) * (std::sqrt(1.0 + 16.0 * eta * kappa * s_uc / g[k]) - 1.0);
    chi[k] = c * out.sigma[k];
  }
  for (int k = 0; k < 2; ++k) {
    const double gt = g[k], go = g[1 - k];
    const double xt = chi[k], xo = chi[1 - k];
    const double num = go * go * xt * xt + 2.0 * c * gt * xo * (xt - xo) * (xt - xo) + gt * gt * xo * xo +
                       gt * go * (xt * xt - 4.0 * xt * xo + xo * xo);
    const double den = gt * (go + 2.0 * c * xo) * (gt + go + 2.0 * c * xo);
    out.mu[k] = c * c * num / den;
  }
  return out;
}

LlrConsistency gaussian_llr_consistency(double mu0, double mu1, double nu0, double nu1, double tol) {
  LlrConsistency out;
  std::ostringstream os;
  auto rel = [](double x, double y) { return std::abs(x - y) / std::max({std::abs(x), std::abs(y), 1e-300}); };
  if (rel(mu0, mu1) > tol) {
    out.consistent = false;
    os << "mu0 = " << mu0 << " differs from mu1 = " << mu1 << "; ";
  }
  if (rel(nu0, 2.0 * mu0) > tol) {
    out.consistent = false;
    os << "nu0 = " << nu0 << " differs from 2 mu0 = " << 2.0 * mu0 << "; ";
  }
  if (rel(nu1, 2.0 * mu1) > tol) {
    out.consistent = false;
    os << "nu1 = " << nu1 << " differs from 2 mu1 = " << 2.0 * mu1 << "; ";
  }
  out.details = out.consistent ? "consistent with a Gaussian log-likelihood ratio" : os.str();
  return out;
}

}  // namespace seqmon
