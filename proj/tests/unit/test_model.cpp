#include <cmath>
#include <functional>

#include <gtest/gtest.h>

#include "seqmon/error.hpp"
#include "seqmon/model.hpp"
#include "seqmon/rng.hpp"
#include "seqmon/solvers.hpp"
#include "seqmon/trajectory.hpp"

using namespace seqmon;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an Error";
  return ErrorCode::IoError;
}

GaussianModel simple_model() {
  GaussianModel m;
  m.A = -Matrix::Identity(2, 2);
  m.b = Vector::Zero(2);
  m.C = Matrix::Identity(1, 2);
  m.D = Matrix::Identity(2, 2);
  return m;
}

}  // namespace

TEST(Model, DampingPresetMatrices) {
  const HypothesisPair p = preset_damping(100, 440, 10, 1, 1);
  // σ_uc = n̄ + 1/2 + κ/γ = 1.6 for γ = 100.
  EXPECT_TRUE(p.model0.D.isApprox(160.0 * Matrix::Identity(2, 2)));
  EXPECT_TRUE(p.model0.A.isApprox(-50.0 * Matrix::Identity(2, 2)));
  EXPECT_TRUE(p.model0.C.isApprox(-std::sqrt(40.0) * Matrix::Identity(2, 2)));
  EXPECT_DOUBLE_EQ(p.model1.D(0, 0), 440.0 * (1.5 + 10.0 / 440.0));
  EXPECT_TRUE(p.model0.Gamma.isZero());
  EXPECT_TRUE(p.model1.b.isZero());
  EXPECT_NO_THROW(validate_model(p.model0));
}

TEST(Model, DampingEqualRatesGiveIdenticalModels) {
  const HypothesisPair p = preset_damping(100, 100, 10, 1, 1);
  EXPECT_TRUE(p.identical_models());
}

TEST(Model, PresetRejectsBadParameters) {
  EXPECT_EQ(code_of([] { preset_damping(100, 440, 10, 0.0, 1); }), ErrorCode::InvalidParam);
  EXPECT_EQ(code_of([] { preset_damping(-1, 440, 10, 1, 1); }), ErrorCode::InvalidParam);
  EXPECT_EQ(code_of([] { preset_damping(100, 440, 10, 1.5, 1); }), ErrorCode::InvalidParam);
  EXPECT_EQ(code_of([] { preset_frequency(1e3, 1e3, 5, 10, 1, -1); }), ErrorCode::InvalidParam);
  EXPECT_EQ(code_of([] { preset_force(0, 40, 500, -10, 1e3, 0.1, 1); }), ErrorCode::InvalidParam);
}

TEST(Model, FrequencyPresetMatrices) {
  const HypothesisPair p = preset_frequency(1e5, 1.02e5, 500, 1e3, 1, 1);
  EXPECT_DOUBLE_EQ(p.model1.A(0, 1), -1.02e5);
  EXPECT_DOUBLE_EQ(p.model1.A(1, 0), 1.02e5);
  EXPECT_DOUBLE_EQ(p.model0.A(0, 0), -250.0);
  EXPECT_DOUBLE_EQ(p.model0.C(0, 0), std::sqrt(4e3));
  EXPECT_DOUBLE_EQ(p.model0.C(1, 1), 0.0);
  EXPECT_DOUBLE_EQ(p.model0.D(1, 1), 500.0 * 3.5);
  EXPECT_TRUE(preset_frequency(1e3, 1e3, 5, 10, 1, 1).identical_models());
}

TEST(Model, ForcePresetDrive) {
  const HypothesisPair p = preset_force(0, 40, 500, 10, 1e3, 0.1, 1);
  EXPECT_DOUBLE_EQ(p.model1.b[1], 40.0);
  EXPECT_DOUBLE_EQ(p.model1.b[0], 0.0);
  EXPECT_TRUE(p.model0.b.isZero());
  EXPECT_TRUE(p.model0.A == p.model1.A);
  EXPECT_TRUE(preset_force(40, 40, 500, 10, 1e3, 0.1, 1).identical_models());
}

TEST(Model, ValidateShapeMismatch) {
  GaussianModel m = simple_model();
  m.C = Matrix::Zero(1, 4);
  EXPECT_EQ(code_of([&] { validate_model(m); }), ErrorCode::DimensionMismatch);
  m = simple_model();
  m.b = Vector::Zero(3);
  EXPECT_EQ(code_of([&] { validate_model(m); }), ErrorCode::DimensionMismatch);
}

TEST(Model, ValidateIndefiniteD) {
  GaussianModel m = simple_model();
  m.D(1, 1) = -1.0;
  EXPECT_EQ(code_of([&] { validate_model(m); }), ErrorCode::NonSymmetricD);
  m = simple_model();
  m.D(0, 1) = 0.5;
  EXPECT_EQ(code_of([&] { validate_model(m); }), ErrorCode::NonSymmetricD);
}

TEST(Model, ValidateNonFinite) {
  GaussianModel m = simple_model();
  m.A(0, 0) = std::nan("");
  EXPECT_EQ(code_of([&] { validate_model(m); }), ErrorCode::NonFinite);
}

TEST(Model, ValidateFillsZeroGamma) {
  GaussianModel m = simple_model();
  const GaussianModel v = validate_model(m);
  EXPECT_EQ(v.Gamma.rows(), 2);
  EXPECT_EQ(v.Gamma.cols(), 1);
  EXPECT_TRUE(v.Gamma.isZero());
}

TEST(Model, PairRejectsDifferentC) {
  HypothesisPair p{simple_model(), simple_model(), {0.5, 0.5}};
  p.model1.C(0, 1) = 2.0;
  EXPECT_EQ(code_of([&] { validate_pair(p); }), ErrorCode::DimensionMismatch);
}

TEST(Model, PairRejectsBadPriors) {
  HypothesisPair p{simple_model(), simple_model(), {0.5, 0.6}};
  EXPECT_EQ(code_of([&] { validate_pair(p); }), ErrorCode::InvalidParam);
}

TEST(Extended, IdenticalModelsBlockStructure) {
  const HypothesisPair p = preset_damping(100, 100, 10, 1, 1);
  const ExtendedSystem sys = build_extended(p, 0);
  EXPECT_TRUE(sys.calA.isApprox(direct_sum(p.model0.A, p.model0.A)));
  Vector X(4);
  X << 0.3, -1.2, 0.3, -1.2;
  EXPECT_TRUE((sys.llr_map() * X).isZero());
}

TEST(Extended, SelectorBlocks) {
  const HypothesisPair p = preset_damping(100, 440, 10, 1, 1);
  const Matrix I = Matrix::Identity(2, 2);
  const ExtendedSystem s0 = build_extended(p, 0);
  const ExtendedSystem s1 = build_extended(p, 1);
  EXPECT_TRUE(s0.Pi_k.topRows(2).isZero());
  EXPECT_TRUE(s0.Pi_k.block(2, 0, 2, 2).isApprox(-I));
  EXPECT_TRUE(s0.Pi_k.block(2, 2, 2, 2).isApprox(I));
  // Under h₁ the row of filter 0 is (1, −1) and the row of filter 1 vanishes.
  EXPECT_TRUE(s1.Pi_k.bottomRows(2).isZero());
  EXPECT_TRUE(s1.Pi_k.block(0, 0, 2, 2).isApprox(I));
  EXPECT_TRUE(s1.Pi_k.block(0, 2, 2, 2).isApprox(-I));
}

TEST(Extended, SelectorGivesInnovationDifference) {
  const HypothesisPair p = preset_damping(100, 440, 10, 1, 1);
  Vector X(4);
  X << 0.7, -0.1, 1.9, 0.4;
  for (int k = 0; k < 2; ++k) {
    const ExtendedSystem sys = build_extended(p, k);
    const Vector CX = sys.calC * X;
    const Vector Crk = CX.segment(2 * k, 2);
    Vector expect(4);
    expect << CX.head(2) - Crk, CX.tail(2) - Crk;
    EXPECT_TRUE((sys.Pi_k * CX).isApprox(expect)) << "k = " << k;
  }
}

TEST(Extended, LlrMapSign) {
  const HypothesisPair p = preset_damping(100, 440, 10, 1, 1);
  const ExtendedSystem sys = build_extended(p, 1);
  Vector X(4);
  X << 1.0, 2.0, 4.0, 8.0;
  const Vector expect = p.model0.C * (X.tail(2) - X.head(2));
  EXPECT_TRUE((sys.llr_map() * X).isApprox(expect));
}

TEST(Extended, ShapesForTwoChannels) {
  const ExtendedSystem sys = build_extended(preset_damping(100, 440, 10, 1, 1), 1);
  EXPECT_EQ(sys.calA.rows(), 4);
  EXPECT_EQ(sys.calC.rows(), 4);
  EXPECT_EQ(sys.calC.cols(), 4);
  EXPECT_EQ(sys.Delta.rows(), 4);
  EXPECT_EQ(sys.Delta.cols(), 2);
  EXPECT_FALSE(sys.Sigma_ss.has_value());
}

TEST(Extended, BuildIsPure) {
  const HypothesisPair p = preset_frequency(1e3, 1.02e3, 5, 10, 1, 1);
  const ExtendedSystem a = build_extended(p, 1);
  const ExtendedSystem b = build_extended(p, 1);
  EXPECT_TRUE(a.calA == b.calA);
  EXPECT_TRUE(a.calC == b.calC);
  EXPECT_TRUE(a.calD == b.calD);
  EXPECT_TRUE(a.Pi_k == b.Pi_k);
  EXPECT_TRUE(a.B == b.B);
}

TEST(Extended, RejectsBadHypothesisIndex) {
  EXPECT_EQ(code_of([] { build_extended(preset_damping(100, 440, 10, 1, 1), 2); }), ErrorCode::InvalidParam);
}

// Dividing every rate by 100 is the substitution t → 100 t. With matched step
// sizes and the same Gaussian draws the two simulations coincide.
TEST(Presets, ScaledFrequencyIsTimeRescaled) {
  const HypothesisPair full = preset_frequency_full();
  const HypothesisPair scaled = preset_frequency_scaled();
  const ExtendedSystem sf = build_steady_extended(full, 1);
  const ExtendedSystem ss = build_steady_extended(scaled, 1);
  const std::vector<double> times{0.25, 0.5, 1.0};
  std::vector<double> times_full;
  for (double t : times) times_full.push_back(t / 100.0);
  NoiseStream nf(7, 3, 1e-7), ns(7, 3, 1e-5);
  const LlrPath pf = simulate_fixed(sf, 0.01, times_full, 1e-7, nf);
  const LlrPath ps = simulate_fixed(ss, 1.0, times, 1e-5, ns);
  for (std::size_t i = 0; i < times.size(); ++i) {
    EXPECT_NEAR(pf.ell[i], ps.ell[i], 1e-7 * std::max(1.0, std::abs(ps.ell[i])));
  }
}
