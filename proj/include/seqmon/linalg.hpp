#pragma once

#include <Eigen/Dense>

namespace seqmon {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Per-filter quantities in the trajectory kernel are bounded so they live on
// the stack. 2n <= 8 and m <= 8 covers up to four modes.
inline constexpr int kMaxFilterDim = 8;

using SmallVec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxFilterDim, 1>;
using SmallMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxFilterDim, kMaxFilterDim>;

/// Direct sum a ⊕ b.
Matrix direct_sum(const Matrix& a, const Matrix& b);

bool all_finite(const Matrix& m);

}  // namespace seqmon
