#include "seqmon/model.hpp"

#include <cmath>
#include <sstream>

#include "seqmon/error.hpp"

namespace seqmon {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NonSymmetricD: return "NonSymmetricD";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::InvalidParam: return "InvalidParam";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::NotHurwitz: return "NotHurwitz";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::NonPositiveThreshold: return "NonPositiveThreshold";
    case ErrorCode::ZeroDrift: return "ZeroDrift";
    case ErrorCode::EmptyEnsemble: return "EmptyEnsemble";
    case ErrorCode::TooFewSamples: return "TooFewSamples";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

Matrix direct_sum(const Matrix& a, const Matrix& b) {
  Matrix out = Matrix::Zero(a.rows() + b.rows(), a.cols() + b.cols());
  out.topLeftCorner(a.rows(), a.cols()) = a;
  out.bottomRightCorner(b.rows(), b.cols()) = b;
  return out;
}

bool all_finite(const Matrix& m) { return m.allFinite(); }

namespace {

std::string shape(const Matrix& m) {
  std::ostringstream os;
  os << m.rows() << "x" << m.cols();
  return os.str();
}

void expect_shape(const char* name, const Matrix& m, Eigen::Index rows, Eigen::Index cols) {
  if (m.rows() != rows || m.cols() != cols) {
    std::ostringstream os;
    os << name << " has shape " << shape(m) << ", expected " << rows << "x" << cols;
    throw Error(ErrorCode::DimensionMismatch, os.str());
  }
}

}  // namespace

GaussianModel validate_model(GaussianModel model) {
  if (model.n_modes < 1) throw Error(ErrorCode::DimensionMismatch, "n_modes must be positive");
  const Eigen::Index p = model.state_dim();
  const Eigen::Index m = model.C.rows();
  if (m < 1) throw Error(ErrorCode::DimensionMismatch, "C must have at least one row");
  expect_shape("A", model.A, p, p);
  expect_shape("C", model.C, m, p);
  expect_shape("D", model.D, p, p);
  if (model.b.size() != p) {
    throw Error(ErrorCode::DimensionMismatch, "b has " + std::to_string(model.b.size()) + " entries, expected " +
                                                  std::to_string(p));
  }
  if (model.Gamma.size() == 0) model.Gamma = Matrix::Zero(p, m);
  expect_shape("Gamma", model.Gamma, p, m);

  if (!model.A.allFinite() || !model.b.allFinite() || !model.C.allFinite() || !model.D.allFinite() ||
      !model.Gamma.allFinite()) {
    throw Error(ErrorCode::NonFinite, "model contains non-finite entries");
  }

  const double scale = std::max(1.0, model.D.cwiseAbs().maxCoeff());
  if ((model.D - model.D.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw Error(ErrorCode::NonSymmetricD, "D is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(model.D, Eigen::EigenvaluesOnly);
  const auto& ev = eig.eigenvalues();
  const double largest = ev.cwiseAbs().maxCoeff();
  if (ev.minCoeff() < -kTolPsd * largest) {
    std::ostringstream os;
    os << "D is not positive semidefinite (min eigenvalue " << ev.minCoeff() << ")";
    throw Error(ErrorCode::NonSymmetricD, os.str());
  }
  return model;
}

HypothesisPair HypothesisPair::swapped() const { return HypothesisPair{model1, model0, {priors[1], priors[0]}}; }

HypothesisPair validate_pair(HypothesisPair pair) {
  pair.model0 = validate_model(std::move(pair.model0));
  pair.model1 = validate_model(std::move(pair.model1));
  if (pair.model0.n_modes != pair.model1.n_modes || pair.model0.meas_dim() != pair.model1.meas_dim()) {
    throw Error(ErrorCode::DimensionMismatch, "hypotheses differ in n_modes or measurement dimension");
  }
  if (pair.model0.C != pair.model1.C) {
    throw Error(ErrorCode::DimensionMismatch, "measurement map C must be shared by both hypotheses");
  }
  const auto [p0, p1] = pair.priors;
  if (!(p0 >= 0.0 && p0 <= 1.0 && p1 >= 0.0 && p1 <= 1.0) || std::abs(p0 + p1 - 1.0) > 1e-12) {
    throw Error(ErrorCode::InvalidParam, "priors must be probabilities summing to one");
  }
  return pair;
}

Matrix ExtendedSystem::gain(const Matrix& Sigma) const { return Sigma * calC.transpose() - GammaTilde; }

Matrix ExtendedSystem::drift(const Matrix& Sigma) const { return calA - gain(Sigma) * Pi_k * calC; }

Matrix ExtendedSystem::noise_loading(const Matrix& Sigma) const { return gain(Sigma) * Q; }

const Matrix& ExtendedSystem::steady_covariance() const {
  if (!Sigma_ss) throw Error(ErrorCode::InvalidParam, "extended system has no steady-state covariance attached");
  return *Sigma_ss;
}

ExtendedSystem build_extended(const HypothesisPair& input, int true_k) {
  if (true_k != 0 && true_k != 1) throw Error(ErrorCode::InvalidParam, "true_k must be 0 or 1");
  const HypothesisPair pair = validate_pair(input);
  const GaussianModel& m0 = pair.model0;
  const GaussianModel& m1 = pair.model1;
  const Eigen::Index m = m0.meas_dim();
  const Eigen::Index p = m0.state_dim();

  ExtendedSystem sys;
  sys.true_k = true_k;
  sys.n_modes = m0.n_modes;
  sys.meas_dim = static_cast<int>(m);
  sys.calA = direct_sum(m0.A, m1.A);
  sys.calC = direct_sum(m0.C, m1.C);
  sys.calD = direct_sum(m0.D, m1.D);
  sys.GammaTilde = direct_sum(m0.Gamma, m1.Gamma);
  sys.B.resize(2 * p);
  sys.B << m0.b, m1.b;

  const Matrix I = Matrix::Identity(m, m);
  // Π_k = 1 − (1, 1)ᵀ e_kᵀ: the innovation seen by filter j is C r_k − C r_j.
  sys.Pi_k = Matrix::Identity(2 * m, 2 * m);
  sys.Pi_k.block(0, true_k * m, m, m) -= I;
  sys.Pi_k.block(m, true_k * m, m, m) -= I;

  sys.Delta.resize(2 * m, m);
  sys.Delta << -I, I;
  sys.Q.resize(2 * m, m);
  sys.Q << I, I;
  return sys;
}

GaussianModel damping_model(const OptomechParams& p) {
  GaussianModel g;
  g.n_modes = 1;
  const Matrix I = Matrix::Identity(2, 2);
  g.A = -0.5 * p.gamma * I;
  g.b = Vector::Zero(2);
  g.C = -std::sqrt(4.0 * p.eta * p.kappa) * I;
  g.D = p.gamma * p.sigma_uc() * I;
  g.Gamma = Matrix::Zero(2, 2);
  return g;
}

GaussianModel oscillator_model(const OptomechParams& p) {
  GaussianModel g;
  g.n_modes = 1;
  g.A.resize(2, 2);
  g.A << -0.5 * p.gamma, -p.omega, p.omega, -0.5 * p.gamma;
  g.b = Vector::Zero(2);
  g.b[1] = p.b_force;
  g.C = Matrix::Zero(2, 2);
  g.C(0, 0) = std::sqrt(4.0 * p.eta * p.kappa);
  g.D = p.gamma * p.sigma_uc() * Matrix::Identity(2, 2);
  g.Gamma = Matrix::Zero(2, 2);
  return g;
}

namespace {

void check_params(const OptomechParams& p, bool need_gamma) {
  auto bad = [](const std::string& what) { throw Error(ErrorCode::InvalidParam, what); };
  for (double v : {p.gamma, p.kappa, p.eta, p.nbar, p.omega, p.b_force}) {
    if (!std::isfinite(v)) bad("optomechanical parameters must be finite");
  }
  if (need_gamma && !(p.gamma > 0.0)) bad("gamma must be positive");
  if (!(p.kappa > 0.0)) bad("kappa must be positive");
  if (!(p.eta > 0.0 && p.eta <= 1.0)) bad("eta must lie in (0, 1]");
  if (p.nbar < 0.0) bad("nbar must be non-negative");
  if (p.omega < 0.0) bad("omega must be non-negative");
}

}  // namespace

HypothesisPair preset_damping(double gamma0, double gamma1, double kappa, double eta, double nbar) {
  OptomechParams p0{.gamma = gamma0, .kappa = kappa, .eta = eta, .nbar = nbar};
  OptomechParams p1 = p0;
  p1.gamma = gamma1;
  check_params(p0, true);
  check_params(p1, true);
  return validate_pair({damping_model(p0), damping_model(p1), {0.5, 0.5}});
}

HypothesisPair preset_frequency(double omega0, double omega1, double gamma, double kappa, double eta, double nbar) {
  OptomechParams p0{.gamma = gamma, .kappa = kappa, .eta = eta, .nbar = nbar, .omega = omega0};
  OptomechParams p1 = p0;
  p1.omega = omega1;
  check_params(p0, true);
  check_params(p1, true);
  if (!(omega0 > 0.0 && omega1 > 0.0)) throw Error(ErrorCode::InvalidParam, "frequencies must be positive");
  return validate_pair({oscillator_model(p0), oscillator_model(p1), {0.5, 0.5}});
}

HypothesisPair preset_force(double b0, double b1, double gamma, double kappa, double omega, double eta, double nbar) {
  OptomechParams p0{.gamma = gamma, .kappa = kappa, .eta = eta, .nbar = nbar, .omega = omega, .b_force = b0};
  OptomechParams p1 = p0;
  p1.b_force = b1;
  check_params(p0, true);
  check_params(p1, true);
  if (b0 < 0.0 || b1 < 0.0) throw Error(ErrorCode::InvalidParam, "force amplitudes must be non-negative");
  return validate_pair({oscillator_model(p0), oscillator_model(p1), {0.5, 0.5}});
}

HypothesisPair preset_frequency_full() { return preset_frequency(1e5, 1.02e5, 500.0, 1e3, 1.0, 1.0); }

HypothesisPair preset_frequency_scaled() { return preset_frequency(1e3, 1.02e3, 5.0, 10.0, 1.0, 1.0); }

}  // namespace seqmon
