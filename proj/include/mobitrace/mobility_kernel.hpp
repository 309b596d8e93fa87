#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mobitrace/geo.hpp"
#include "mobitrace/timeutil.hpp"
#include "mobitrace/trajectory_store.hpp"

namespace mobitrace {

/// μ <= kIsotropicEpsilon * (ixx + iyy) marks a tensor as isotropic.
inline constexpr double kIsotropicEpsilon = 1e-12;

/// σ_y <= kDegenerateAxisEpsilon * σ_x marks the minor axis as collapsed.
inline constexpr double kDegenerateAxisEpsilon = 1e-9;

/// Second moments of a point cloud about its center of mass, in km².
/// iyx is identical to ixy.
struct InertiaTensor {
  double ixx = 0.0;  // Σ y'²
  double iyy = 0.0;  // Σ x'²
  double ixy = 0.0;  // -Σ x'y'

  double trace() const noexcept { return ixx + iyy; }
};

struct Eigenvalues2 {
  double lower = 0.0;
  double upper = 0.0;
};

struct PrincipalAngle {
  double theta = 0.0;  // radians in [0, π)
  bool isotropic = false;
};

struct SigmaAxes {
  double sigma_x = 0.0;
  double sigma_y = 0.0;
};

struct PositionCount {
  Position pos;
  std::size_t count = 0;

  friend bool operator==(const PositionCount&, const PositionCount&) = default;
};

struct MobilitySummary {
  std::string user_id;
  std::size_t n = 0;
  Position com;
  double rg = 0.0;
  double theta = 0.0;
  double mu = 0.0;
  double sigma_x = 0.0;
  double sigma_y = 0.0;
  std::vector<PositionCount> top_positions;  // at most 2
  bool isotropic = false;
  bool degenerate_axis = false;
};

struct IntrinsicPoint {
  Instant t;
  double u = 0.0;
  double v = 0.0;
};

struct IntrinsicTrajectory {
  std::string user_id;
  std::vector<IntrinsicPoint> points;
  bool degenerate_axis = false;
};

// All functions below require a non-empty trajectory.

Position center_of_mass(const Trajectory& traj);

double radius_of_gyration(const Trajectory& traj);

/// rg of every prefix, k = 1..n, paired with the k-th timestamp.
std::vector<std::pair<Instant, double>> rg_time_series(const Trajectory& traj);

/// Exact-coordinate groups sorted by descending count, ties by first occurrence.
std::vector<PositionCount> top_frequent_positions(const Trajectory& traj, std::size_t k);

InertiaTensor inertia_tensor(const Trajectory& traj);

double mu_discriminant(const InertiaTensor& t) noexcept;

Eigenvalues2 eigenvalues(const InertiaTensor& t);

/// Orientation of the maximal-spread axis, i.e. the eigenvector of the
/// smaller inertia eigenvalue, reduced into [0, π). Isotropic tensors give 0.
PrincipalAngle principal_angle(const InertiaTensor& t);

/// Closed-form cos θ of the smaller-eigenvalue eigenvector,
///   cos θ = -I_xy / d / sqrt(1 + I_xy² / d²),  d = (I_xx - I_yy + μ) / 2.
/// nullopt where the expression is 0/0 (I_xy = 0 and d = 0).
std::optional<double> closed_form_cos_theta(const InertiaTensor& t) noexcept;

/// Population standard deviations along the axes rotated by theta.
SigmaAxes sigma_axes(const Trajectory& traj, double theta);

MobilitySummary summarize(const Trajectory& traj);

/// Translate to the center of mass, rotate the principal axis onto u, then
/// scale each axis by its σ. A collapsed minor axis yields v = 0. The sign is
/// chosen so the most frequent position lands at u >= 0.
/// Throws Error(DegenerateTrajectory) when rg = 0.
IntrinsicTrajectory to_intrinsic_frame(const Trajectory& traj);

}  // namespace mobitrace
