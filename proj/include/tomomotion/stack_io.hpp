#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "tomomotion/estimator.hpp"
#include "tomomotion/projector.hpp"

namespace tomomotion {

/// File could not be read, written or verified.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Stack on disk: `frames.bin` (little-endian float64, frame-major, x1 fastest)
/// and `stack.json` holding geometry, timing and the CRC-32 of the blob.
inline constexpr const char* kStackBlob = "frames.bin";
inline constexpr const char* kStackHeader = "stack.json";

void write_stack(const ProjectionStack& stack, const std::filesystem::path& dir);
/// Throws IoError on a missing file or checksum mismatch, ConfigError on a malformed header.
ProjectionStack read_stack(const std::filesystem::path& dir);

/// CRC-32 of the little-endian float64 encoding of all frames.
std::uint32_t stack_checksum(const ProjectionStack& stack);

/// Ground truth per frame, as stored in the truth CSV.
struct TruthTable {
  std::vector<double> times;
  std::vector<Vec3> translation;
  std::vector<double> alpha;
  std::vector<double> phi;
  std::vector<double> omega3;
  std::vector<Mat3> rotation;
  /// Center of the phantom, stored on a leading "# c3" comment line.
  std::optional<Vec3> c3;

  std::size_t size() const { return times.size(); }
};

TruthTable truth_table(const MotionGroundTruth& motion, const std::optional<Vec3>& c3);
void write_truth_csv(const TruthTable& truth, const std::filesystem::path& path);
TruthTable read_truth_csv(const std::filesystem::path& path);

void write_estimate_csv(const MotionEstimate& estimate, const std::filesystem::path& path);
MotionEstimate read_estimate_csv(const std::filesystem::path& path);

/// Per-frame absolute errors and their summary.
struct ComparisonRow {
  double t = 0.0;
  std::optional<double> txy;
  std::optional<double> phi;
  std::optional<double> omega3;
  std::optional<double> alpha;
};
struct ErrorSummary {
  std::size_t count = 0;
  double max = 0.0;
  double median = 0.0;
};
struct Comparison {
  std::vector<ComparisonRow> rows;
  ErrorSummary txy;
  ErrorSummary phi;
  ErrorSummary omega3;
  ErrorSummary alpha;
};

/// phi errors are taken modulo pi. Throws InvalidArgument on timestamp mismatch.
Comparison compare_estimate(const MotionEstimate& estimate, const TruthTable& truth);
void write_comparison_csv(const Comparison& comparison, const std::filesystem::path& path);

/// Writes `content` to a temporary sibling and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);
std::string read_file(const std::filesystem::path& path);

/// Shortest round-trip formatting with 17 significant digits.
std::string format_double(double value);

}  // namespace tomomotion
