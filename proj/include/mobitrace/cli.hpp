#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mobitrace/cdr_ingest.hpp"
#include "mobitrace/distribution_lab.hpp"
#include "mobitrace/power_law_fit.hpp"

namespace mobitrace::cli {

enum class Command { Ingest, Summarize, Rescale, Jumps, Waits, RgDist, Fit, Classify, Synth, Selftest };

std::optional<Command> parse_command(std::string_view name);

/// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

/// Thrown for bad flag or config values; carries the offending flag name.
class UsageError : public std::runtime_error {
 public:
  UsageError(std::string flag, const std::string& what)
      : std::runtime_error("--" + flag + ": " + what), flag_(std::move(flag)) {}
  const std::string& flag() const noexcept { return flag_; }

 private:
  std::string flag_;
};

struct RunConfig {
  std::vector<std::filesystem::path> inputs;
  std::string out = "-";  // "-" is standard output
  RefPoint ref;           // nullopt = AUTO
  std::optional<Instant> from;
  std::optional<Instant> to;
  std::optional<Binning> binning;  // per-command default when unset
  FitRange fit_range{0.1, 100.0};
  R0Mode r0_mode = R0Mode::FixedZero;
  std::size_t users = 100;
  std::uint64_t seed = 1;
  std::size_t events_min = 20;
  std::size_t events_max = 200;
  double beta = 1.5;
  double kappa = 50.0;
  FitRange rg_range{0.2, 40.0};
  double commuter_fraction = 0.0;
  std::optional<std::filesystem::path> svg;
  std::optional<std::filesystem::path> rejects;
  bool quiet = false;

  std::optional<TimeWindow> window() const;
};

/// Applies one `key=value` setting; keys are the long flag names without
/// dashes. Throws UsageError.
void apply_setting(RunConfig& config, std::string_view key, std::string_view value);

/// Flat key=value file; blank lines and lines starting with '#' are ignored.
void load_config_file(RunConfig& config, const std::filesystem::path& path);

/// Executes one command. Tabular output goes to config.out, or to `stdout_sink`
/// when config.out is "-". Throws mobitrace::Error on data errors and
/// UsageError on bad configuration. Returns the exit code (selftest failures
/// give kExitData).
int run(Command command, const RunConfig& config, std::ostream& stdout_sink);

/// Full command-line entry point; returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace mobitrace::cli
