#include "mobitrace/mobility_kernel.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include <Eigen/Eigenvalues>
#include <fmt/format.h>

#include "mobitrace/error.hpp"

namespace mobitrace {

namespace {

constexpr double kPi = std::numbers::pi;

double reduce_mod_pi(double theta) noexcept {
  theta = std::fmod(theta, kPi);
  if (theta < 0.0) theta += kPi;
  if (theta >= kPi) theta -= kPi;
  return theta;
}

// Centered coordinates rotated by -theta.
Position rotate_centered(Position p, Position com, double c, double s) noexcept {
  const double dx = p.x - com.x;
  const double dy = p.y - com.y;
  return {dx * c + dy * s, -dx * s + dy * c};
}

}  // namespace

Position center_of_mass(const Trajectory& traj) {
  double sx = 0.0;
  double sy = 0.0;
  for (const auto& p : traj.points) {
    sx += p.pos.x;
    sy += p.pos.y;
  }
  const auto n = static_cast<double>(traj.size());
  return {sx / n, sy / n};
}

double radius_of_gyration(const Trajectory& traj) {
  const Position com = center_of_mass(traj);
  double sum = 0.0;
  for (const auto& p : traj.points) {
    const double dx = p.pos.x - com.x;
    const double dy = p.pos.y - com.y;
    sum += dx * dx + dy * dy;
  }
  return std::sqrt(sum / static_cast<double>(traj.size()));
}

std::vector<std::pair<Instant, double>> rg_time_series(const Trajectory& traj) {
  std::vector<std::pair<Instant, double>> out;
  out.reserve(traj.size());
  // Welford running moments; the origin is shifted to the first point.
  const Position origin = traj.points.front().pos;
  double mx = 0.0;
  double my = 0.0;
  double m2 = 0.0;
  double k = 0.0;
  for (const auto& p : traj.points) {
    k += 1.0;
    const double x = p.pos.x - origin.x;
    const double y = p.pos.y - origin.y;
    const double dx = x - mx;
    const double dy = y - my;
    mx += dx / k;
    my += dy / k;
    m2 += dx * (x - mx) + dy * (y - my);
    out.emplace_back(p.t, std::sqrt(std::max(m2, 0.0) / k));
  }
  // The full-length value comes from the two-pass route so the series ends on
  // exactly radius_of_gyration(traj).
  out.back().second = radius_of_gyration(traj);
  return out;
}

std::vector<PositionCount> top_frequent_positions(const Trajectory& traj, std::size_t k) {
  std::vector<PositionCount> groups;
  std::map<std::pair<double, double>, std::size_t> index;
  for (const auto& p : traj.points) {
    auto [it, inserted] = index.try_emplace({p.pos.x, p.pos.y}, groups.size());
    if (inserted) {
      groups.push_back({p.pos, 1});
    } else {
      ++groups[it->second].count;
    }
  }
  // Groups are in first-occurrence order, which a stable sort preserves among ties.
  std::stable_sort(groups.begin(), groups.end(),
                   [](const PositionCount& a, const PositionCount& b) { return a.count > b.count; });
  if (groups.size() > k) groups.resize(k);
  return groups;
}

InertiaTensor inertia_tensor(const Trajectory& traj) {
  const Position com = center_of_mass(traj);
  InertiaTensor t;
  for (const auto& p : traj.points) {
    const double dx = p.pos.x - com.x;
    const double dy = p.pos.y - com.y;
    t.ixx += dy * dy;
    t.iyy += dx * dx;
    t.ixy -= dx * dy;
  }
  return t;
}

double mu_discriminant(const InertiaTensor& t) noexcept {
  const double diff = t.ixx - t.iyy;
  return std::sqrt(diff * diff + 4.0 * t.ixy * t.ixy);
}

namespace {

Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> solve(const InertiaTensor& t) {
  Eigen::Matrix2d m;
  m << t.ixx, t.ixy, t.ixy, t.iyy;
  return Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d>(m);
}

}  // namespace

Eigenvalues2 eigenvalues(const InertiaTensor& t) {
  const auto solver = solve(t);
  return {solver.eigenvalues()(0), solver.eigenvalues()(1)};
}

PrincipalAngle principal_angle(const InertiaTensor& t) {
  if (mu_discriminant(t) <= kIsotropicEpsilon * t.trace()) return {0.0, true};
  const auto solver = solve(t);
  // Eigenvalues come out ascending; column 0 belongs to the smaller one.
  const Eigen::Vector2d v = solver.eigenvectors().col(0);
  return {reduce_mod_pi(std::atan2(v(1), v(0))), false};
}

std::optional<double> closed_form_cos_theta(const InertiaTensor& t) noexcept {
  const double mu = mu_discriminant(t);
  const double d = 0.5 * t.ixx - 0.5 * t.iyy + 0.5 * mu;
  if (d == 0.0) {
    if (t.ixy == 0.0) return std::nullopt;
    // Limit of the expression as d -> 0+.
    return t.ixy > 0.0 ? -1.0 : 1.0;
  }
  const double ratio = t.ixy / d;
  return -ratio / std::sqrt(1.0 + ratio * ratio);
}

SigmaAxes sigma_axes(const Trajectory& traj, double theta) {
  const Position com = center_of_mass(traj);
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  double su = 0.0;
  double sv = 0.0;
  for (const auto& p : traj.points) {
    const Position r = rotate_centered(p.pos, com, c, s);
    su += r.x * r.x;
    sv += r.y * r.y;
  }
  const auto n = static_cast<double>(traj.size());
  return {std::sqrt(su / n), std::sqrt(sv / n)};
}

MobilitySummary summarize(const Trajectory& traj) {
  MobilitySummary s;
  s.user_id = traj.user_id;
  s.n = traj.size();
  s.com = center_of_mass(traj);
  s.rg = radius_of_gyration(traj);

  const InertiaTensor tensor = inertia_tensor(traj);
  s.mu = mu_discriminant(tensor);
  const PrincipalAngle angle = principal_angle(tensor);
  s.theta = angle.theta;
  s.isotropic = angle.isotropic;

  SigmaAxes axes = sigma_axes(traj, s.theta);
  if (s.isotropic) {
    // Both axes carry the same spread; split it evenly.
    const double equal = std::sqrt(0.5 * (axes.sigma_x * axes.sigma_x + axes.sigma_y * axes.sigma_y));
    axes = {equal, equal};
  } else if (axes.sigma_x < axes.sigma_y) {
    std::swap(axes.sigma_x, axes.sigma_y);
    s.theta = reduce_mod_pi(s.theta + 0.5 * kPi);
  }
  s.sigma_x = axes.sigma_x;
  s.sigma_y = axes.sigma_y;
  s.degenerate_axis = s.sigma_y <= kDegenerateAxisEpsilon * s.sigma_x;
  s.top_positions = top_frequent_positions(traj, 2);
  return s;
}

IntrinsicTrajectory to_intrinsic_frame(const Trajectory& traj) {
  const MobilitySummary s = summarize(traj);
  if (!(s.rg > 0.0)) {
    throw Error(ErrorKind::DegenerateTrajectory,
                fmt::format("user {} has all {} points at one position", traj.user_id, traj.size()));
  }
  const double c = std::cos(s.theta);
  const double sn = std::sin(s.theta);

  IntrinsicTrajectory out{traj.user_id, {}, s.degenerate_axis};
  out.points.reserve(traj.size());

  const double sign =
      rotate_centered(s.top_positions.front().pos, s.com, c, sn).x < 0.0 ? -1.0 : 1.0;
  for (const auto& p : traj.points) {
    const Position r = rotate_centered(p.pos, s.com, c, sn);
    const double u = sign * r.x / s.sigma_x;
    const double v = s.degenerate_axis ? 0.0 : sign * r.y / s.sigma_y;
    out.points.push_back({p.t, u, v});
  }
  return out;
}

}  // namespace mobitrace
