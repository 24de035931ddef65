#pragma once

#include <optional>
#include <string>

#include "seqmon/trajectory.hpp"

namespace seqmon {

/// CSV records have columns t, dy1 … dym, one row per increment, where t is
/// the start of the increment's interval. A header row is optional. dt is
/// taken from the t column (which must be uniform) unless given explicitly.
MeasurementRecord read_record_csv(const std::string& path, std::optional<double> dt = std::nullopt);
std::string record_to_csv(const MeasurementRecord& rec);

/// Binary records: 8-byte magic "SEQMREC1", uint32 m, uint32 reserved (0),
/// float64 dt, uint64 step count, then step count × m float64 increments,
/// all little-endian.
MeasurementRecord read_record_binary(const std::string& path);
std::string record_to_binary(const MeasurementRecord& rec);

/// Dispatches on the binary magic.
MeasurementRecord read_record(const std::string& path, std::optional<double> dt = std::nullopt);

}  // namespace seqmon
