#pragma once

#include <cstddef>
#include <istream>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "mobitrace/cdr_ingest.hpp"
#include "mobitrace/geo.hpp"
#include "mobitrace/timeutil.hpp"

namespace mobitrace {

struct TrajectoryPoint {
  Instant t;
  Position pos;

  friend bool operator==(const TrajectoryPoint&, const TrajectoryPoint&) = default;
};

/// Time-ordered positions of one user. Stored trajectories are never empty.
struct Trajectory {
  std::string user_id;
  std::vector<TrajectoryPoint> points;

  std::size_t size() const noexcept { return points.size(); }
  friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

/// Keyed by user_id; iteration is in sorted user order.
using TrajectoryMap = std::map<std::string, Trajectory>;

/// Groups records per user and stably sorts each group by time, so equal
/// timestamps keep their input order.
TrajectoryMap build_trajectories(std::span<const CdrRecord> records);

/// First k points. Throws Error(BadPrefix) unless 1 <= k <= n.
Trajectory prefix(const Trajectory& traj, std::size_t k);

/// CSV `user_id,t,x_km,y_km`, sorted by (user_id, t). Coordinates use the
/// shortest round-trip representation so that read_trajectory_dump()
/// reproduces them bit for bit.
void write_trajectory_dump(std::ostream& out, const TrajectoryMap& trajectories);

/// Throws Error(BadArgument) on any malformed row.
TrajectoryMap read_trajectory_dump(std::istream& in);

}  // namespace mobitrace
