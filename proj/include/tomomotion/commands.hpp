#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "tomomotion/verify.hpp"

namespace tomomotion {

/// Process exit codes of the command-line front end.
inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitVerifyFailed = 2;

/// Files written by `simulate` next to the stack.
inline constexpr const char* kTruthFile = "truth.csv";
inline constexpr const char* kConfigFile = "config.json";

/// Renders the configured experiment into `out_dir`: the stack, the truth CSV
/// (with C3) and the resolved configuration.
int cmd_simulate(const std::filesystem::path& config, const std::filesystem::path& out_dir,
                 std::ostream& log);

/// Estimates the motion of a stored stack. C3 comes from the truth CSV when
/// given. Estimator settings come from `config` (a run configuration), else
/// from the configuration stored next to the stack, else the defaults.
int cmd_estimate(const std::filesystem::path& stack_dir,
                 const std::optional<std::filesystem::path>& truth,
                 const std::filesystem::path& out,
                 const std::optional<std::filesystem::path>& config, std::ostream& log);

/// Runs one verification suite; returns kExitVerifyFailed when a check fails.
int cmd_verify(const std::string& suite, const std::optional<std::filesystem::path>& json_out,
               const VerifyOptions& options, std::ostream& log);

int cmd_compare(const std::filesystem::path& estimate, const std::filesystem::path& truth,
                const std::filesystem::path& out, std::ostream& log);

}  // namespace tomomotion
