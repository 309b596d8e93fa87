#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>

namespace mobitrace {

using Instant = std::chrono::sys_seconds;

/// Parses `YYYY-MM-DDThh:mm:ssZ` (whole seconds, UTC). Anything else,
/// including leap seconds, fractional seconds and offsets, is rejected.
std::optional<Instant> parse_iso8601_utc(std::string_view text) noexcept;

std::string format_iso8601_utc(Instant t);

}  // namespace mobitrace
