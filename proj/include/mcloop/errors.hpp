#pragma once

#include <stdexcept>
#include <string>

namespace mcloop {

/// Invalid or inconsistent configuration (bad parameter, violated invariant,
/// unstable step size). Maps to CLI exit code 2.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Pilot sequence cannot calibrate a detector (no bit 1, no repeated pair).
class CalibrationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Numerical failure during time stepping. Maps to CLI exit code 3.
class InstabilityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// File read/write or format failure. Maps to CLI exit code 4.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace mcloop
