#include "mobitrace/trajectory_store.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include <fmt/format.h>

#include "mobitrace/error.hpp"

namespace mobitrace {

TrajectoryMap build_trajectories(std::span<const CdrRecord> records) {
  TrajectoryMap out;
  for (const auto& r : records) {
    auto [it, inserted] = out.try_emplace(r.user_id);
    if (inserted) it->second.user_id = r.user_id;
    it->second.points.push_back({r.t, r.pos});
  }
  for (auto& [user, traj] : out) {
    std::stable_sort(traj.points.begin(), traj.points.end(),
                     [](const TrajectoryPoint& a, const TrajectoryPoint& b) { return a.t < b.t; });
  }
  return out;
}

Trajectory prefix(const Trajectory& traj, std::size_t k) {
  if (k < 1 || k > traj.size()) {
    throw Error(ErrorKind::BadPrefix,
                fmt::format("k = {} outside [1, {}] for user {}", k, traj.size(), traj.user_id));
  }
  Trajectory out{traj.user_id, {}};
  out.points.assign(traj.points.begin(), traj.points.begin() + static_cast<std::ptrdiff_t>(k));
  return out;
}

namespace {

void append_shortest(std::string& buf, double v) {
  char tmp[32];
  const auto [ptr, ec] = std::to_chars(tmp, tmp + sizeof tmp, v);
  buf.append(tmp, ptr);
}

}  // namespace

void write_trajectory_dump(std::ostream& out, const TrajectoryMap& trajectories) {
  out << "user_id,t,x_km,y_km\n";
  std::string row;
  for (const auto& [user, traj] : trajectories) {
    for (const auto& p : traj.points) {
      row.clear();
      row += user;
      row += ',';
      row += format_iso8601_utc(p.t);
      row += ',';
      append_shortest(row, p.pos.x);
      row += ',';
      append_shortest(row, p.pos.y);
      row += '\n';
      out << row;
    }
  }
}

TrajectoryMap read_trajectory_dump(std::istream& in) {
  TrajectoryMap out;
  std::string line;
  std::size_t line_no = 0;
  auto fail = [&line_no](const char* what) {
    throw Error(ErrorKind::BadArgument, fmt::format("trajectory dump line {}: {}", line_no, what));
  };

  if (!std::getline(in, line)) return out;
  ++line_no;
  if (line != "user_id,t,x_km,y_km") fail("missing header");

  while (std::getline(in, line)) {
    ++line_no;
    std::string_view rest = line;
    std::string_view fields[4];
    for (int i = 0; i < 4; ++i) {
      const auto comma = rest.find(',');
      if ((comma == std::string_view::npos) != (i == 3)) fail("expected 4 fields");
      fields[i] = rest.substr(0, comma);
      if (comma != std::string_view::npos) rest.remove_prefix(comma + 1);
    }
    const auto t = parse_iso8601_utc(fields[1]);
    if (fields[0].empty() || !t) fail("bad user or timestamp");
    double xy[2];
    for (int i = 0; i < 2; ++i) {
      const auto f = fields[2 + i];
      const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), xy[i]);
      if (ec != std::errc{} || ptr != f.data() + f.size() || !std::isfinite(xy[i])) {
        fail("bad coordinate");
      }
    }
    auto [it, inserted] = out.try_emplace(std::string(fields[0]));
    if (inserted) it->second.user_id = it->first;
    auto& points = it->second.points;
    if (!points.empty() && points.back().t > *t) fail("rows not sorted by time");
    points.push_back({*t, {xy[0], xy[1]}});
  }
  return out;
}

}  // namespace mobitrace
