#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "camp/cli/config.hpp"

namespace camp::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitIo = 3;
inline constexpr int kExitDomain = 4;

// Environment variable consulted for the output directory when neither
// --out nor out_dir is given.
inline constexpr const char* kOutDirEnv = "CAMP_OUT_DIR";

struct CommandContext {
  RunConfig config;
  std::filesystem::path out_dir;
  unsigned threads = 1;
  std::ostream* log = nullptr;  // summary lines
};

std::filesystem::path resolve_out_dir(const std::optional<std::filesystem::path>& flag, const RunConfig& cfg);
std::filesystem::path checkpoint_path(const CommandContext& ctx);

void cmd_train(const CommandContext& ctx);
void cmd_certify(const CommandContext& ctx);
void cmd_attack(const CommandContext& ctx);
void cmd_eval(const CommandContext& ctx);
void cmd_qgap(const CommandContext& ctx);
void cmd_radii(const CommandContext& ctx);

// Full command line entry point; returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace camp::cli
