#pragma once

#include <stdexcept>
#include <string>

namespace bliss {

/// Base of every error raised by the simulator.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid or inconsistent configuration (bad key, out-of-range value).
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error("config error: " + what) {}
};

/// Malformed file or byte stream (raster, weight bundle).
class FormatError : public Error {
 public:
  explicit FormatError(const std::string& what) : Error("format error: " + what) {}
};

/// A caller broke a precondition (dimension mismatch, out-of-range argument).
class ContractError : public Error {
 public:
  explicit ContractError(const std::string& what) : Error("contract error: " + what) {}
};

/// Numbered frame files with a missing index.
class SequenceGapError : public Error {
 public:
  explicit SequenceGapError(const std::string& what) : Error("sequence gap: " + what) {}
};

/// Run-length stream that is truncated or disagrees with its header.
class CorruptStreamError : public Error {
 public:
  explicit CorruptStreamError(const std::string& what) : Error("corrupt stream: " + what) {}
};

/// Segmentation carries too few pupil pixels to estimate a gaze.
class NoPupilError : public Error {
 public:
  explicit NoPupilError(const std::string& what) : Error("no pupil: " + what) {}
};

/// The stage graph cannot be scheduled with the given timings.
class SchedulingError : public Error {
 public:
  explicit SchedulingError(const std::string& what) : Error("scheduling error: " + what) {}
};

}  // namespace bliss
