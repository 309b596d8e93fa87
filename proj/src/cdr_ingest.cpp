#include "mobitrace/cdr_ingest.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <iterator>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "mobitrace/error.hpp"

namespace mobitrace {

std::string_view to_string(RejectReason reason) noexcept {
  switch (reason) {
    case RejectReason::MalformedLine: return "MalformedLine";
    case RejectReason::BadTimestamp: return "BadTimestamp";
    case RejectReason::BadCoordinate: return "BadCoordinate";
    case RejectReason::WindowExcluded: return "WindowExcluded";
    case RejectReason::OutOfProjectionRange: return "OutOfProjectionRange";
  }
  return "Unknown";
}

IngestStats& IngestStats::operator+=(const IngestStats& other) {
  lines_read += other.lines_read;
  records_ok += other.records_ok;
  records_rejected += other.records_rejected;
  for (const auto& [reason, count] : other.reject_reasons) reject_reasons[reason] += count;
  return *this;
}

namespace {

std::optional<double> parse_number(std::string_view field) noexcept {
  if (field.empty()) return std::nullopt;
  double value = 0.0;
  const auto* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (ec != std::errc{} || ptr != end || !std::isfinite(value)) return std::nullopt;
  return value;
}

std::string_view strip_cr(std::string_view line) noexcept {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  return line;
}

}  // namespace

ParsedLine parse_cdr_line(std::string_view line, std::size_t line_no) {
  line = strip_cr(line);

  std::array<std::string_view, 4> fields;
  std::size_t n_fields = 0;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (n_fields == fields.size()) return LineError{line_no, RejectReason::MalformedLine};
    fields[n_fields++] = line.substr(start, comma == std::string_view::npos ? line.npos : comma - start);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  if (n_fields != fields.size() || fields[0].empty()) {
    return LineError{line_no, RejectReason::MalformedLine};
  }

  const auto t = parse_iso8601_utc(fields[1]);
  if (!t) return LineError{line_no, RejectReason::BadTimestamp};

  const auto lat = parse_number(fields[2]);
  const auto lon = parse_number(fields[3]);
  if (!lat || !lon) return LineError{line_no, RejectReason::BadCoordinate};
  const GeoPoint geo{*lat, *lon};
  if (!geo.valid()) return LineError{line_no, RejectReason::BadCoordinate};

  return GeoRecord{std::string(fields[0]), *t, geo};
}

IngestResult ingest_stream(const std::vector<std::istream*>& sources, const RefPoint& ref,
                           const std::optional<TimeWindow>& window) {
  IngestResult result;
  IngestStats& stats = result.stats;

  std::vector<GeoRecord> accepted;
  std::vector<std::size_t> accepted_lines;
  std::size_t line_no = 0;
  std::string line;

  for (std::istream* source : sources) {
    bool first = true;
    while (std::getline(*source, line)) {
      ++line_no;
      if (first) {
        first = false;
        if (strip_cr(line) == kCdrHeader) continue;
      }
      ++stats.lines_read;
      auto parsed = parse_cdr_line(line, line_no);
      if (auto* err = std::get_if<LineError>(&parsed)) {
        stats.count_reject(err->reason);
        result.rejects.push_back(*err);
        continue;
      }
      auto& record = std::get<GeoRecord>(parsed);
      if (window && !window->contains(record.t)) {
        stats.count_reject(RejectReason::WindowExcluded);
        result.rejects.push_back({line_no, RejectReason::WindowExcluded});
        continue;
      }
      accepted.push_back(std::move(record));
      accepted_lines.push_back(line_no);
    }
  }

  if (ref) {
    stats.ref_point = *ref;
  } else if (!accepted.empty()) {
    double lat_sum = 0.0;
    double lon_sum = 0.0;
    for (const auto& r : accepted) {
      lat_sum += r.geo.lat;
      lon_sum += r.geo.lon;
    }
    const auto n = static_cast<double>(accepted.size());
    stats.ref_point = {lat_sum / n, lon_sum / n};
  }

  result.records.reserve(accepted.size());
  std::vector<LineError> projection_rejects;
  for (std::size_t i = 0; i < accepted.size(); ++i) {
    auto& r = accepted[i];
    const double dlat = r.geo.lat - stats.ref_point.lat;
    const double dlon = r.geo.lon - stats.ref_point.lon;
    if (std::abs(dlat) >= kProjectionGuardDeg || std::abs(dlon) >= kProjectionGuardDeg) {
      stats.count_reject(RejectReason::OutOfProjectionRange);
      projection_rejects.push_back({accepted_lines[i], RejectReason::OutOfProjectionRange});
      continue;
    }
    result.records.push_back({std::move(r.user_id), r.t, project(r.geo, stats.ref_point)});
  }
  stats.records_ok = result.records.size();

  if (!projection_rejects.empty()) {
    std::vector<LineError> merged;
    merged.reserve(result.rejects.size() + projection_rejects.size());
    std::merge(result.rejects.begin(), result.rejects.end(), projection_rejects.begin(),
               projection_rejects.end(), std::back_inserter(merged),
               [](const LineError& a, const LineError& b) { return a.line_no < b.line_no; });
    result.rejects = std::move(merged);
  }

  spdlog::debug("ingest: {} lines, {} ok, {} rejected, ref ({:.6f}, {:.6f})", stats.lines_read,
                stats.records_ok, stats.records_rejected, stats.ref_point.lat,
                stats.ref_point.lon);

  if (result.records.empty()) {
    throw Error(ErrorKind::EmptyInput,
                fmt::format("no valid rows among {} data lines", stats.lines_read));
  }
  return result;
}

IngestResult ingest_stream(std::istream& source, const RefPoint& ref,
                           const std::optional<TimeWindow>& window) {
  return ingest_stream(std::vector<std::istream*>{&source}, ref, window);
}

void write_reject_report(std::ostream& out, const std::vector<LineError>& rejects) {
  out << "line_no,reason\n";
  for (const auto& r : rejects) out << r.line_no << ',' << to_string(r.reason) << '\n';
}

}  // namespace mobitrace
