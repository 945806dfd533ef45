#pragma once

// Plain-text file formats.
//
// Trace CSV: header `time_s,intensity`, one sample per LF-terminated row,
// decimal point, 17 significant digits (round-trips doubles exactly).
// Bits file: characters '0'/'1'; whitespace and commas are ignored.

#include "mcloop/config.hpp"
#include "mcloop/transceiver.hpp"

#include <filesystem>
#include <iosfwd>

namespace mcloop {

/// Relative deviation allowed between any time step and the mean step.
inline constexpr double kMaxSamplingJitter = 0.01;

void write_trace(std::ostream& out, const ReceivedTrace& trace);
ReceivedTrace read_trace(std::istream& in);

/// Throws IoError on unreadable files, malformed rows, non-increasing time
/// stamps, jitter above kMaxSamplingJitter, or fewer than two rows.
ReceivedTrace import_trace(const std::filesystem::path& path);
void export_trace(const ReceivedTrace& trace, const std::filesystem::path& path);

Bits read_bits(const std::filesystem::path& path);
void write_bits(const Bits& bits, const std::filesystem::path& path);

}  // namespace mcloop
