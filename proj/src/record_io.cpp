#include "seqmon/record_io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include <boost/algorithm/string.hpp>

#include "seqmon/error.hpp"
#include "seqmon/format.hpp"

namespace seqmon {

namespace {

constexpr char kMagic[8] = {'S', 'E', 'Q', 'M', 'R', 'E', 'C', '1'};

static_assert(std::endian::native == std::endian::little, "binary records assume a little-endian host");

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::IoError, "cannot open " + path);
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

bool parse_number(const std::string& s, double& out) {
  const std::string t = boost::algorithm::trim_copy(s);
  if (t.empty()) return false;
  char* end = nullptr;
  out = std::strtod(t.c_str(), &end);
  return end == t.c_str() + t.size();
}

template <class T>
void put(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

template <class T>
T get(const std::string& in, std::size_t& pos) {
  if (pos + sizeof(T) > in.size()) throw Error(ErrorCode::IoError, "binary record is truncated");
  T v;
  std::memcpy(&v, in.data() + pos, sizeof(T));
  pos += sizeof(T);
  return v;
}

}  // namespace

MeasurementRecord read_record_csv(const std::string& path, std::optional<double> dt) {
  std::istringstream in(slurp(path));
  std::string line;
  std::vector<double> t;
  MeasurementRecord rec;
  rec.meas_dim = -1;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    boost::algorithm::trim(line);
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    boost::algorithm::split(cells, line, boost::is_any_of(","));
    std::vector<double> vals(cells.size());
    bool numeric = true;
    for (std::size_t i = 0; i < cells.size(); ++i) numeric = numeric && parse_number(cells[i], vals[i]);
    if (!numeric) {
      if (t.empty() && rec.meas_dim < 0) continue;  // header
      throw Error(ErrorCode::IoError, path + ":" + std::to_string(line_no) + ": non-numeric cell");
    }
    if (cells.size() < 2) throw Error(ErrorCode::IoError, path + ":" + std::to_string(line_no) + ": need t and dy");
    const int m = static_cast<int>(cells.size()) - 1;
    if (rec.meas_dim < 0) rec.meas_dim = m;
    if (m != rec.meas_dim) {
      throw Error(ErrorCode::DimensionMismatch, path + ":" + std::to_string(line_no) + ": inconsistent column count");
    }
    t.push_back(vals[0]);
    rec.dy.emplace_back(Eigen::Map<const Vector>(vals.data() + 1, m));
  }
  if (rec.meas_dim < 0) rec.meas_dim = 0;
  if (dt) {
    rec.dt = *dt;
  } else if (t.size() >= 2) {
    rec.dt = t[1] - t[0];
    for (std::size_t i = 1; i < t.size(); ++i) {
      const double expect = t[0] + static_cast<double>(i) * rec.dt;
      if (std::abs(t[i] - expect) > 1e-6 * std::max(std::abs(expect), rec.dt)) {
        throw Error(ErrorCode::IoError, path + ": time column is not uniformly spaced");
      }
    }
  } else {
    throw Error(ErrorCode::IoError, path + ": cannot infer dt from fewer than two rows");
  }
  if (!(rec.dt > 0.0)) throw Error(ErrorCode::IoError, path + ": dt must be positive");
  return rec;
}

std::string record_to_csv(const MeasurementRecord& rec) {
  std::ostringstream os;
  os << 't';
  for (int j = 0; j < rec.meas_dim; ++j) os << ",dy" << j + 1;
  os << '\n';
  for (std::size_t i = 0; i < rec.dy.size(); ++i) {
    os << format_double(static_cast<double>(i) * rec.dt);
    for (int j = 0; j < rec.meas_dim; ++j) os << ',' << format_double(rec.dy[i][j]);
    os << '\n';
  }
  return os.str();
}

MeasurementRecord read_record_binary(const std::string& path) {
  const std::string in = slurp(path);
  if (in.size() < sizeof kMagic || std::memcmp(in.data(), kMagic, sizeof kMagic) != 0) {
    throw Error(ErrorCode::IoError, path + ": not a binary record");
  }
  std::size_t pos = sizeof kMagic;
  MeasurementRecord rec;
  rec.meas_dim = static_cast<int>(get<std::uint32_t>(in, pos));
  (void)get<std::uint32_t>(in, pos);
  rec.dt = get<double>(in, pos);
  const auto n = get<std::uint64_t>(in, pos);
  if (rec.meas_dim < 1 || !(rec.dt > 0.0)) throw Error(ErrorCode::IoError, path + ": bad header");
  if ((in.size() - pos) != n * static_cast<std::uint64_t>(rec.meas_dim) * sizeof(double)) {
    throw Error(ErrorCode::IoError, path + ": payload size does not match the header");
  }
  rec.dy.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    Vector v(rec.meas_dim);
    for (int j = 0; j < rec.meas_dim; ++j) v[j] = get<double>(in, pos);
    rec.dy.push_back(std::move(v));
  }
  return rec;
}

std::string record_to_binary(const MeasurementRecord& rec) {
  std::string out(kMagic, sizeof kMagic);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(rec.meas_dim));
  put<std::uint32_t>(out, 0);
  put<double>(out, rec.dt);
  put<std::uint64_t>(out, rec.dy.size());
  for (const auto& v : rec.dy) {
    for (int j = 0; j < rec.meas_dim; ++j) put<double>(out, v[j]);
  }
  return out;
}

MeasurementRecord read_record(const std::string& path, std::optional<double> dt) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::IoError, "cannot open " + path);
  char head[sizeof kMagic] = {};
  f.read(head, sizeof head);
  if (f.gcount() == static_cast<std::streamsize>(sizeof head) && std::memcmp(head, kMagic, sizeof kMagic) == 0) {
    return read_record_binary(path);
  }
  return read_record_csv(path, dt);
}

}  // namespace seqmon
