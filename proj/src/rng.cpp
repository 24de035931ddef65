#include "seqmon/rng.hpp"

#include "seqmon/error.hpp"

#include <cmath>

namespace seqmon {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream_id) {
  return splitmix64(splitmix64(master) ^ splitmix64(stream_id + 0x632be59bd9b4e019ULL));
}

NoiseStream::NoiseStream(std::uint64_t seed, std::uint64_t stream_id, double dt)
    : seed_(seed), stream_id_(stream_id), dt_(dt), sqrt_dt_(std::sqrt(dt)), engine_(derive_seed(seed, stream_id)) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw Error(ErrorCode::InvalidParam, "time step must be positive");
}

}  // namespace seqmon
