#include "mobitrace/synth_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/quadrature/gauss.hpp>
#include <fmt/format.h>

#include "mobitrace/error.hpp"

namespace mobitrace::synth {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr std::size_t kCdfNodes = 2048;
constexpr double kQuantileTolerance = 1e-10;
}  // namespace

double Rng::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

std::int64_t Rng::uniform_int(std::int64_t lo, std::int64_t hi) {
  if (hi <= lo) return lo;
  const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
  __extension__ using u128 = unsigned __int128;
  const auto scaled = static_cast<u128>(next()) * span;
  return lo + static_cast<std::int64_t>(scaled >> 64);
}

double Rng::normal() {
  const double u1 = uniform_pos();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
}

std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t index) noexcept {
  return mix64(mix64(master_seed) + index);
}

Trajectory gen_user(const UserSpec& spec, const std::string& user_id) {
  Rng rng(spec.seed);
  const auto t0 = spec.t_start.time_since_epoch().count();
  const auto t1 = std::max(spec.t_end.time_since_epoch().count(), t0);

  Trajectory traj{user_id, {}};
  traj.points.reserve(spec.n_events);
  for (std::size_t i = 0; i < spec.n_events; ++i) {
    const Instant t{std::chrono::seconds{rng.uniform_int(t0, t1)}};
    Position center = spec.home;
    if (spec.work && rng.uniform() >= spec.home_weight) center = *spec.work;
    const double dx = spec.scale_km * rng.normal();
    const double dy = spec.scale_km * rng.normal();
    traj.points.push_back({t, {center.x + dx, center.y + dy}});
  }
  std::stable_sort(traj.points.begin(), traj.points.end(),
                   [](const TrajectoryPoint& a, const TrajectoryPoint& b) { return a.t < b.t; });
  return traj;
}

// ---------------------------------------------------------------------------
// Truncated power-law sampler
// ---------------------------------------------------------------------------

TruncatedPowerLawSampler::TruncatedPowerLawSampler(TruncatedPowerLaw law, FitRange range)
    : law_(law), range_(range) {
  if (!(range.r_min > 0.0) || !(range.r_max > range.r_min) || !(law.kappa > 0.0) ||
      !(law.r0 >= 0.0) || !std::isfinite(law.beta)) {
    throw Error(ErrorKind::BadArgument, "sampler needs 0 < r_min < r_max, kappa > 0, r0 >= 0");
  }
  const double lo = std::log(range.r_min);
  const double hi = std::log(range.r_max);
  nodes_.resize(kCdfNodes + 1);
  for (std::size_t i = 0; i <= kCdfNodes; ++i) {
    nodes_[i] = std::exp(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(kCdfNodes));
  }
  nodes_.front() = range.r_min;
  nodes_.back() = range.r_max;
  cumulative_.assign(kCdfNodes + 1, 0.0);
  for (std::size_t i = 1; i <= kCdfNodes; ++i) {
    cumulative_[i] = cumulative_[i - 1] + segment_integral(nodes_[i - 1], nodes_[i]);
  }
}

double TruncatedPowerLawSampler::segment_integral(double a, double b) const {
  if (b <= a) return 0.0;
  auto integrand = [this](double s) {
    const double r = std::exp(s);
    return std::exp(s - law_.beta * std::log(r + law_.r0) - r / law_.kappa);
  };
  return boost::math::quadrature::gauss<double, 20>::integrate(integrand, std::log(a), std::log(b));
}

double TruncatedPowerLawSampler::cdf(double r) const {
  if (r <= range_.r_min) return 0.0;
  if (r >= range_.r_max) return 1.0;
  const auto it = std::upper_bound(nodes_.begin(), nodes_.end(), r);
  const auto k = static_cast<std::size_t>(it - nodes_.begin()) - 1;
  return (cumulative_[k] + segment_integral(nodes_[k], r)) / cumulative_.back();
}

double TruncatedPowerLawSampler::quantile(double u) const {
  if (!(u > 0.0)) return range_.r_min;
  if (u >= 1.0) return range_.r_max;
  const double target = u * cumulative_.back();
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), target);
  const auto k = std::min(static_cast<std::size_t>(it - cumulative_.begin()) - 1, kCdfNodes - 1);
  const double residual = target - cumulative_[k];
  double lo = nodes_[k];
  double hi = nodes_[k + 1];
  while (hi - lo > kQuantileTolerance * hi) {
    const double mid = 0.5 * (lo + hi);
    if (segment_integral(nodes_[k], mid) < residual) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// ---------------------------------------------------------------------------
// Populations
// ---------------------------------------------------------------------------

std::vector<PopulationMember> plan_population(const PopulationSpec& spec) {
  if (spec.n_users < 1 || spec.events_min < 1 || spec.events_max < spec.events_min) {
    throw Error(ErrorKind::BadArgument, "population needs n_users >= 1 and 1 <= events_min <= events_max");
  }
  if (spec.t_end < spec.t_start) throw Error(ErrorKind::BadArgument, "population window is reversed");
  const TruncatedPowerLawSampler sampler(spec.rg_law, spec.rg_range);

  const std::size_t width = std::max<std::size_t>(5, fmt::format("{}", spec.n_users).size());
  std::vector<PopulationMember> members;
  members.reserve(spec.n_users);
  for (std::size_t i = 0; i < spec.n_users; ++i) {
    Rng rng(derive_seed(spec.master_seed, i));
    PopulationMember m;
    m.user_id = fmt::format("u{:0{}d}", i, width);
    m.rg_target = sampler.sample(rng);

    UserSpec& u = m.spec;
    u.home = {(rng.uniform() - 0.5) * spec.region_km, (rng.uniform() - 0.5) * spec.region_km};
    u.n_events = static_cast<std::size_t>(rng.uniform_int(static_cast<std::int64_t>(spec.events_min),
                                                          static_cast<std::int64_t>(spec.events_max)));
    u.t_start = spec.t_start;
    u.t_end = spec.t_end;

    const bool commuter = rng.uniform() < spec.commuter_fraction;
    const double separation = spec.commute_min_km + rng.uniform() * (spec.commute_max_km - spec.commute_min_km);
    const double heading = kTwoPi * rng.uniform();
    u.seed = rng.next();

    double cloud_variance = 0.5 * m.rg_target * m.rg_target;
    if (commuter) {
      // Mixture variance: 2σ² + w(1 - w)D² = rg².
      const double w = u.home_weight;
      const double spread = w * (1.0 - w);
      const double d = std::min(separation, 0.9 * m.rg_target / std::sqrt(spread));
      u.work = Position{u.home.x + d * std::cos(heading), u.home.y + d * std::sin(heading)};
      cloud_variance = 0.5 * (m.rg_target * m.rg_target - spread * d * d);
    }
    u.scale_km = std::sqrt(cloud_variance);
    members.push_back(std::move(m));
  }
  return members;
}

std::vector<CdrRecord> gen_population(const PopulationSpec& spec) {
  std::vector<CdrRecord> records;
  for (const auto& m : plan_population(spec)) {
    const Trajectory traj = gen_user(m.spec, m.user_id);
    for (const auto& p : traj.points) records.push_back({m.user_id, p.t, p.pos});
  }
  return records;
}

void write_cdr_csv(std::ostream& out, const std::vector<CdrRecord>& records, GeoPoint anchor) {
  out << kCdrHeader << '\n';
  std::string row;
  for (const auto& r : records) {
    const GeoPoint g = unproject(r.pos, anchor);
    row = fmt::format("{},{},{:.9g},{:.9g}\n", r.user_id, format_iso8601_utc(r.t), g.lat, g.lon);
    out << row;
  }
}

// ---------------------------------------------------------------------------
// Brute-force summary
// ---------------------------------------------------------------------------

MobilitySummary naive_summary_oracle(const Trajectory& traj) {
  const auto& pts = traj.points;
  const auto n = static_cast<double>(pts.size());
  MobilitySummary s;
  s.user_id = traj.user_id;
  s.n = pts.size();

  double x_sum = 0.0;
  for (const auto& p : pts) x_sum += p.pos.x;
  const double x_cm = x_sum / n;
  double y_sum = 0.0;
  for (const auto& p : pts) y_sum += p.pos.y;
  const double y_cm = y_sum / n;
  s.com = {x_cm, y_cm};

  double sq = 0.0;
  for (const auto& p : pts) {
    sq += (p.pos.x - x_cm) * (p.pos.x - x_cm) + (p.pos.y - y_cm) * (p.pos.y - y_cm);
  }
  s.rg = std::sqrt(sq / n);

  double i_xx = 0.0;
  for (const auto& p : pts) i_xx += (p.pos.y - y_cm) * (p.pos.y - y_cm);
  double i_yy = 0.0;
  for (const auto& p : pts) i_yy += (p.pos.x - x_cm) * (p.pos.x - x_cm);
  double i_xy = 0.0;
  for (const auto& p : pts) i_xy -= (p.pos.x - x_cm) * (p.pos.y - y_cm);
  const double i_yx = i_xy;

  const double radicand = 4.0 * i_xy * i_yx + i_xx * i_xx - 2.0 * i_xx * i_yy + i_yy * i_yy;
  s.mu = std::sqrt(std::max(radicand, 0.0));

  // Direction of the smaller-eigenvalue eigenvector from the closed form:
  // cos θ = -I_xy/d / sqrt(1 + I_xy²/d²), sin θ = 1 / sqrt(1 + I_xy²/d²).
  const double pi = std::numbers::pi;
  double theta = 0.0;
  s.isotropic = s.mu <= kIsotropicEpsilon * (i_xx + i_yy);
  if (!s.isotropic) {
    const double d = 0.5 * i_xx - 0.5 * i_yy + 0.5 * s.mu;
    if (d > 0.0) {
      const double root = std::sqrt(1.0 + i_xy * i_xy / (d * d));
      theta = std::atan2(1.0 / root, -i_xy / d / root);
    }
    if (theta >= pi) theta -= pi;
  }

  double sx = 0.0;
  for (const auto& p : pts) {
    const double u = (p.pos.x - x_cm) * std::cos(theta) + (p.pos.y - y_cm) * std::sin(theta);
    sx += u * u;
  }
  double sy = 0.0;
  for (const auto& p : pts) {
    const double v = -(p.pos.x - x_cm) * std::sin(theta) + (p.pos.y - y_cm) * std::cos(theta);
    sy += v * v;
  }
  double sigma_x = std::sqrt(sx / n);
  double sigma_y = std::sqrt(sy / n);
  if (s.isotropic) {
    sigma_x = sigma_y = std::sqrt((sigma_x * sigma_x + sigma_y * sigma_y) / 2.0);
  } else if (sigma_x < sigma_y) {
    std::swap(sigma_x, sigma_y);
    theta += pi / 2.0;
    if (theta >= pi) theta -= pi;
  }
  s.theta = theta;
  s.sigma_x = sigma_x;
  s.sigma_y = sigma_y;
  s.degenerate_axis = sigma_y <= kDegenerateAxisEpsilon * sigma_x;

  struct Group {
    Position pos;
    std::size_t count;
    std::size_t first;
  };
  std::vector<Group> groups;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    bool seen = false;
    for (std::size_t j = 0; j < i && !seen; ++j) seen = pts[j].pos == pts[i].pos;
    if (seen) continue;
    std::size_t count = 0;
    for (const auto& q : pts) count += q.pos == pts[i].pos ? 1 : 0;
    groups.push_back({pts[i].pos, count, i});
  }
  std::sort(groups.begin(), groups.end(), [](const Group& a, const Group& b) {
    return a.count != b.count ? a.count > b.count : a.first < b.first;
  });
  for (std::size_t i = 0; i < groups.size() && i < 2; ++i) {
    s.top_positions.push_back({groups[i].pos, groups[i].count});
  }
  return s;
}

std::vector<Trajectory> gen_corpus(std::uint64_t seed, std::size_t count, std::size_t n_max) {
  std::vector<Trajectory> out;
  out.reserve(count);
  const Instant t0{std::chrono::seconds{1717200000}};
  for (std::size_t i = 0; i < count; ++i) {
    Rng rng(derive_seed(seed, i));
    UserSpec u;
    u.home = {(rng.uniform() - 0.5) * 100.0, (rng.uniform() - 0.5) * 100.0};
    u.scale_km = std::exp(std::log(0.05) + rng.uniform() * std::log(30.0 / 0.05));
    u.n_events = static_cast<std::size_t>(rng.uniform_int(1, static_cast<std::int64_t>(n_max)));
    u.t_start = t0;
    u.t_end = t0 + std::chrono::hours{24};
    if (i % 2 == 1) {
      const double d = u.scale_km * (2.0 + 8.0 * rng.uniform());
      const double heading = kTwoPi * rng.uniform();
      u.work = Position{u.home.x + d * std::cos(heading), u.home.y + d * std::sin(heading)};
    }
    u.seed = rng.next();
    out.push_back(gen_user(u, fmt::format("c{:06d}", i)));
  }
  return out;
}

SummaryDiscrepancy compare_summaries(const MobilitySummary& a, const MobilitySummary& b) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  if (a.user_id != b.user_id || a.n != b.n) return {kInf, "identity"};
  if (a.isotropic != b.isotropic) return {kInf, "isotropic"};
  if (a.degenerate_axis != b.degenerate_axis) return {kInf, "degenerate_axis"};
  if (a.top_positions != b.top_positions) return {kInf, "top_positions"};

  SummaryDiscrepancy worst;
  auto check = [&worst](const char* field, double x, double y, double floor) {
    const double scale = std::max({std::abs(x), std::abs(y), floor});
    const double diff = std::abs(x - y);
    const double err = diff == 0.0 ? 0.0 : (scale > 0.0 ? diff / scale : kInf);
    if (!(err <= worst.value)) worst = {err, field};
  };
  const double rg = std::max(a.rg, b.rg);
  check("x_cm", a.com.x, b.com.x, rg);
  check("y_cm", a.com.y, b.com.y, rg);
  check("rg", a.rg, b.rg, rg);
  check("sigma_x", a.sigma_x, b.sigma_x, rg);
  check("sigma_y", a.sigma_y, b.sigma_y, rg);
  check("mu", a.mu, b.mu, static_cast<double>(a.n) * rg * rg);

  const double pi = std::numbers::pi;
  double dtheta = std::fmod(std::abs(a.theta - b.theta), pi);
  dtheta = std::min(dtheta, pi - dtheta);
  if (!(dtheta <= worst.value)) worst = {dtheta, "theta"};
  return worst;
}

}  // namespace mobitrace::synth
