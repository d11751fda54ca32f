// Command-line front end.
//
// Exit codes: 0 success, 2 domain error, 3 rejected or infeasible result,
// 64 usage error.
#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

namespace rbqkd::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDomain = 2;
inline constexpr int kExitRejected = 3;
inline constexpr int kExitUsage = 64;

inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kOutDirEnv = "RBQKD_OUT_DIR";

struct RunManifest {
  std::string subcommand;
  std::string config_digest;  ///< 16 hex digits
  std::uint64_t seed = 0;
  std::string version = kVersion;
  std::vector<std::string> outputs;

  nlohmann::json to_json() const;
};

/// FNV-1a over the compact dump. Object keys are sorted by the JSON library,
/// so the digest does not depend on key order in the source file.
std::string config_digest(const nlohmann::json& config);

/// Locale-independent, 12 significant digits.
std::string format_number(double v);

int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace rbqkd::cli
