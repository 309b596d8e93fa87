#pragma once

#include <cstddef>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "mobitrace/geo.hpp"
#include "mobitrace/timeutil.hpp"

namespace mobitrace {

inline constexpr std::string_view kCdrHeader = "user_id,timestamp,lat,lon";

/// One projected activity event.
struct CdrRecord {
  std::string user_id;
  Instant t;
  Position pos;

  friend bool operator==(const CdrRecord&, const CdrRecord&) = default;
};

/// A parsed row before projection.
struct GeoRecord {
  std::string user_id;
  Instant t;
  GeoPoint geo;

  friend bool operator==(const GeoRecord&, const GeoRecord&) = default;
};

enum class RejectReason {
  MalformedLine,
  BadTimestamp,
  BadCoordinate,
  WindowExcluded,
  OutOfProjectionRange,
};

std::string_view to_string(RejectReason reason) noexcept;

struct LineError {
  std::size_t line_no = 0;
  RejectReason reason = RejectReason::MalformedLine;

  friend bool operator==(const LineError&, const LineError&) = default;
};

using ParsedLine = std::variant<GeoRecord, LineError>;

/// Parses one non-header CSV row. Never throws on malformed content.
ParsedLine parse_cdr_line(std::string_view line, std::size_t line_no);

/// Closed interval [from, to].
struct TimeWindow {
  Instant from;
  Instant to;

  bool contains(Instant t) const noexcept { return t >= from && t <= to; }
};

struct IngestStats {
  std::uint64_t lines_read = 0;
  std::uint64_t records_ok = 0;
  std::uint64_t records_rejected = 0;
  std::map<RejectReason, std::uint64_t> reject_reasons;
  GeoPoint ref_point;

  void count_reject(RejectReason reason) {
    ++records_rejected;
    ++reject_reasons[reason];
  }

  /// Componentwise sum, for chunked ingestion. Keeps this->ref_point.
  IngestStats& operator+=(const IngestStats& other);
};

/// Projection reference: explicit point, or nullopt for the mean of accepted rows.
using RefPoint = std::optional<GeoPoint>;

struct IngestResult {
  std::vector<CdrRecord> records;
  IngestStats stats;
  std::vector<LineError> rejects;  // in line order
};

/// Reads every source in order as one concatenated stream. The header line
/// of each source is skipped when present and is not counted. Line numbers
/// are physical, 1-based, over the concatenation.
/// Throws Error(EmptyInput) when no row is accepted.
IngestResult ingest_stream(const std::vector<std::istream*>& sources, const RefPoint& ref,
                           const std::optional<TimeWindow>& window = std::nullopt);

IngestResult ingest_stream(std::istream& source, const RefPoint& ref,
                           const std::optional<TimeWindow>& window = std::nullopt);

/// CSV `line_no,reason`.
void write_reject_report(std::ostream& out, const std::vector<LineError>& rejects);

}  // namespace mobitrace
