#include "seqmon/format.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <unistd.h>

#include "seqmon/error.hpp"

namespace seqmon {

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::string format_matrix(const Matrix& m) {
  std::string out;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    if (i > 0) out += "; ";
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j > 0) out += ' ';
      out += format_double(m(i, j));
    }
  }
  return out;
}

std::string format_vector(const Vector& v) {
  std::string out;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i > 0) out += ' ';
    out += format_double(v[i]);
  }
  return out;
}

std::string format_list(std::span<const double> xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i > 0) out += ' ';
    out += format_double(xs[i]);
  }
  return out;
}

void write_atomic(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content << std::flush;
    return;
  }
  const std::string tmp = path + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw Error(ErrorCode::IoError, "cannot open " + tmp + " for writing");
    f << content;
    f.flush();
    if (!f) {
      std::remove(tmp.c_str());
      throw Error(ErrorCode::IoError, "write to " + tmp + " failed");
    }
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    std::remove(tmp.c_str());
    throw Error(ErrorCode::IoError, "cannot rename " + tmp + " to " + path);
  }
}

std::string seq_sweep_csv(std::span<const SweepPoint> points) {
  std::ostringstream os;
  os << "epsilon,a,n,n_undecided,tau_mean,tau_sem,err_point,err_ci_lo,err_ci_hi\n";
  for (const auto& p : points) {
    os << format_double(p.control) << ',' << format_double(p.threshold) << ',' << p.error.n_trials + p.n_undecided
       << ',' << p.n_undecided << ',' << format_double(p.time) << ',' << format_double(p.tau_sem) << ','
       << format_double(p.error.point) << ',' << format_double(p.error.ci_lo) << ','
       << format_double(p.error.ci_hi) << '\n';
  }
  return os.str();
}

std::string det_sweep_csv(std::span<const SweepPoint> points) {
  std::ostringstream os;
  os << "t,n,err_point,err_ci_lo,err_ci_hi\n";
  for (const auto& p : points) {
    os << format_double(p.time) << ',' << p.error.n_trials << ',' << format_double(p.error.point) << ','
       << format_double(p.error.ci_lo) << ',' << format_double(p.error.ci_hi) << '\n';
  }
  return os.str();
}

}  // namespace seqmon
