#pragma once

#include <span>
#include <string>
#include <vector>

#include "seqmon/linalg.hpp"
#include "seqmon/montecarlo.hpp"

namespace seqmon {

/// Shortest decimal that round-trips to the same double; "nan", "inf", "-inf".
std::string format_double(double x);

/// Matrix as "a b; c d" (rows separated by ';').
std::string format_matrix(const Matrix& m);
std::string format_vector(const Vector& v);
std::string format_list(std::span<const double> xs);

/// Writes `content` to a sibling temporary file and renames it over `path`,
/// so a failed run never leaves a partial file. "-" writes to stdout.
void write_atomic(const std::string& path, const std::string& content);

/// epsilon, a, n, n_undecided, tau_mean, tau_sem, err_point, err_ci_lo, err_ci_hi
std::string seq_sweep_csv(std::span<const SweepPoint> points);

/// t, n, err_point, err_ci_lo, err_ci_hi
std::string det_sweep_csv(std::span<const SweepPoint> points);

}  // namespace seqmon
