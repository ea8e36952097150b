#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace tomomotion {

struct VerifyCheck {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  /// "<=" or ">=": how value is compared against threshold.
  std::string comparison = "<=";
  bool passed = false;
};

struct VerifyReport {
  std::string suite;
  std::vector<VerifyCheck> checks;

  bool passed() const;
  void add(std::string name, double value, double threshold, const std::string& comparison = "<=");
  nlohmann::json to_json() const;
};

struct VerifyOptions {
  std::uint64_t seed = 1;
  /// Smaller frames and fewer samples (used by the unit tests).
  bool quick = false;
};

/// projection_slice, symmetry, taylor, reflection, degenerate, a12.
const std::vector<std::string>& verify_suites();

/// Throws InvalidArgument for an unknown suite.
VerifyReport run_verify(const std::string& suite, const VerifyOptions& options = {});

VerifyReport verify_projection_slice(const VerifyOptions& options);
VerifyReport verify_symmetry(const VerifyOptions& options);
VerifyReport verify_taylor(const VerifyOptions& options);
VerifyReport verify_reflection(const VerifyOptions& options);
VerifyReport verify_degenerate(const VerifyOptions& options);
VerifyReport verify_a12(const VerifyOptions& options);

}  // namespace tomomotion
