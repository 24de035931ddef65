#include "seqmon/solvers.hpp"

#include <cmath>
#include <sstream>

#include "seqmon/error.hpp"

namespace seqmon {

double stability_check(const Matrix& M) {
  if (M.rows() != M.cols()) throw Error(ErrorCode::DimensionMismatch, "stability_check needs a square matrix");
  if (M.size() == 0) return -std::numeric_limits<double>::infinity();
  Eigen::EigenSolver<Matrix> es(M, false);
  return es.eigenvalues().real().maxCoeff();
}

namespace {

void require_hurwitz(const Matrix& M, const char* who) {
  const double abscissa = stability_check(M);
  if (!(abscissa < 0.0)) {
    std::ostringstream os;
    os << who << ": matrix is not Hurwitz (max Re eigenvalue " << abscissa << ")";
    throw Error(ErrorCode::NotHurwitz, os.str());
  }
}

}  // namespace

Matrix lyapunov_solve(const Matrix& M, const Matrix& Q) {
  const Eigen::Index k = M.rows();
  if (M.cols() != k || Q.rows() != k || Q.cols() != k) {
    throw Error(ErrorCode::DimensionMismatch, "lyapunov_solve: M and Q must be square and of equal size");
  }
  require_hurwitz(M, "lyapunov_solve");

  // vec(MW + WMᵀ) = (I ⊗ M + M ⊗ I) vec(W) for column-major vec.
  const Eigen::Index kk = k * k;
  Matrix K = Matrix::Zero(kk, kk);
  for (Eigen::Index j = 0; j < k; ++j) {
    K.block(j * k, j * k, k, k) += M;
    for (Eigen::Index i = 0; i < k; ++i) {
      K.block(i * k, j * k, k, k).diagonal().array() += M(i, j);
    }
  }
  Eigen::FullPivLU<Matrix> lu(K);
  if (!lu.isInvertible()) throw Error(ErrorCode::SingularSystem, "Lyapunov operator is singular");
  const Vector rhs = -Eigen::Map<const Vector>(Q.data(), kk);
  const Vector w = lu.solve(rhs);
  Matrix W = Eigen::Map<const Matrix>(w.data(), k, k);
  return 0.5 * (W + W.transpose());
}

Vector stationary_mean(const Matrix& M, const Vector& B) {
  if (M.rows() != M.cols() || M.rows() != B.size()) {
    throw Error(ErrorCode::DimensionMismatch, "stationary_mean: M must be square and match B");
  }
  require_hurwitz(M, "stationary_mean");
  return -M.fullPivLu().solve(B);
}

Matrix riccati_rhs(const GaussianModel& model, const Matrix& sigma) {
  const Matrix chi = model.gain(sigma);
  return model.A * sigma + sigma * model.A.transpose() + model.D - chi * chi.transpose();
}

namespace {

Matrix default_riccati_seed(const GaussianModel& model) {
  if (stability_check(model.A) < 0.0) {
    // Unconditional steady state: Aσ + σAᵀ + D = 0.
    return lyapunov_solve(model.A, model.D);
  }
  if (model.D.norm() > 0.0) return model.D;
  return Matrix::Identity(model.A.rows(), model.A.cols());
}

}  // namespace

Matrix riccati_steady_state(const GaussianModel& model, const RiccatiOptions& opts) {
  Matrix sigma = opts.seed ? *opts.seed : default_riccati_seed(model);
  const Eigen::Index p = model.state_dim();
  if (sigma.rows() != p || sigma.cols() != p) throw Error(ErrorCode::DimensionMismatch, "Riccati seed has wrong shape");

  const double d_scale = std::max(model.D.norm(), 1e-300);
  const double ctc = (model.C.transpose() * model.C).norm();
  auto step_size = [&](const Matrix& s) {
    const double rate = model.A.norm() + ctc * s.norm() + (model.Gamma * model.C).norm() + 1e-12;
    return 0.05 / rate;
  };

  double t = 0.0;
  double h = step_size(sigma);
  int converged = 0;
  long long iter = 0;
  while (t < opts.max_time) {
    const Matrix k1 = riccati_rhs(model, sigma);
    if (!k1.allFinite() || sigma.norm() > 1e200) break;
    if (k1.norm() < opts.tol * d_scale) {
      if (++converged >= opts.window) return 0.5 * (sigma + sigma.transpose());
    } else {
      converged = 0;
    }
    const Matrix k2 = riccati_rhs(model, sigma + 0.5 * h * k1);
    const Matrix k3 = riccati_rhs(model, sigma + 0.5 * h * k2);
    const Matrix k4 = riccati_rhs(model, sigma + h * k3);
    sigma += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    sigma = 0.5 * (sigma + sigma.transpose());
    t += h;
    if (++iter % 256 == 0) h = step_size(sigma);
  }
  std::ostringstream os;
  os << "Riccati integration did not settle within t = " << opts.max_time << " s (residual "
     << riccati_rhs(model, sigma).norm() / d_scale << " relative)";
  throw Error(ErrorCode::NoConvergence, os.str());
}

void attach_steady_state(ExtendedSystem& sys, const HypothesisPair& pair, const RiccatiOptions& opts) {
  const Matrix s0 = riccati_steady_state(pair.model0, opts);
  const Matrix s1 = pair.identical_models() ? s0 : riccati_steady_state(pair.model1, opts);
  sys.Sigma_ss = direct_sum(s0, s1);
}

ExtendedSystem build_steady_extended(const HypothesisPair& pair, int true_k, const RiccatiOptions& opts) {
  ExtendedSystem sys = build_extended(pair, true_k);
  attach_steady_state(sys, pair, opts);
  return sys;
}

StationaryStats stationary_stats(const ExtendedSystem& sys) {
  const Matrix& Sigma = sys.steady_covariance();
  const Matrix M = sys.drift(Sigma);
  const Matrix G = sys.noise_loading(Sigma);
  StationaryStats st;
  st.W = lyapunov_solve(M, G * G.transpose());
  st.d = stationary_mean(M, sys.B);
  st.W_tilde = st.W + st.d * st.d.transpose();
  return st;
}

}  // namespace seqmon
