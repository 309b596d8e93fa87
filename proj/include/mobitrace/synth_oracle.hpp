#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "mobitrace/cdr_ingest.hpp"
#include "mobitrace/geo.hpp"
#include "mobitrace/mobility_kernel.hpp"
#include "mobitrace/power_law_fit.hpp"
#include "mobitrace/timeutil.hpp"
#include "mobitrace/trajectory_store.hpp"

namespace mobitrace::synth {

/// Anchor used when synthetic planar positions are written as lat/lon.
inline constexpr GeoPoint kDefaultAnchor{49.49, 0.12};

/// Deterministic random source. Uses only the raw 64-bit engine output so
/// that streams are identical across standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  /// Uniform in [0, 1).
  double uniform();
  /// Uniform in (0, 1].
  double uniform_pos() { return 1.0 - uniform(); }
  /// Uniform integer in [lo, hi].
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);
  /// Standard normal (Box-Muller, one variate per call).
  double normal();

 private:
  std::mt19937_64 engine_;
};

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Seed of the index-th user under a master seed.
std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t index) noexcept;

struct UserSpec {
  Position home;
  double scale_km = 1.0;  // per-axis σ of each Gaussian cluster
  std::size_t n_events = 1;
  Instant t_start;
  Instant t_end;
  std::uint64_t seed = 0;
  /// Commuter mode: a second cluster drawn with probability 1 - home_weight.
  std::optional<Position> work;
  double home_weight = 0.7;
};

Trajectory gen_user(const UserSpec& spec, const std::string& user_id = "u0");

/// Inverse-CDF sampler for p(r) ∝ (r + r0)^(-beta) exp(-r / kappa) on
/// [r_min, r_max]. The CDF is tabulated with fixed-order Gauss-Legendre
/// panels and inverted by bisection to 1e-10.
class TruncatedPowerLawSampler {
 public:
  TruncatedPowerLawSampler(TruncatedPowerLaw law, FitRange range);

  double cdf(double r) const;
  double quantile(double u) const;
  double sample(Rng& rng) const { return quantile(rng.uniform()); }

  const TruncatedPowerLaw& law() const noexcept { return law_; }
  const FitRange& range() const noexcept { return range_; }

 private:
  double segment_integral(double a, double b) const;

  TruncatedPowerLaw law_;
  FitRange range_;
  std::vector<double> nodes_;       // log-spaced abscissae
  std::vector<double> cumulative_;  // unnormalized mass up to nodes_[i]
};

struct PopulationSpec {
  std::size_t n_users = 100;
  TruncatedPowerLaw rg_law{1.5, 50.0, 0.0};
  FitRange rg_range{0.2, 40.0};
  std::size_t events_min = 20;
  std::size_t events_max = 200;
  Instant t_start = Instant{std::chrono::seconds{1717200000}};  // 2024-06-01T00:00:00Z
  Instant t_end = Instant{std::chrono::seconds{1717286399}};    // 2024-06-01T23:59:59Z
  std::uint64_t master_seed = 1;
  double region_km = 20.0;           // homes uniform in a square of this side
  double commuter_fraction = 0.0;    // share of two-cluster users
  double commute_min_km = 2.0;       // home-work separation range
  double commute_max_km = 15.0;
};

struct PopulationMember {
  std::string user_id;
  double rg_target = 0.0;
  UserSpec spec;
};

/// Per-user parameters, derived from per-user seeds only.
std::vector<PopulationMember> plan_population(const PopulationSpec& spec);

/// Records ordered by user index, then time.
std::vector<CdrRecord> gen_population(const PopulationSpec& spec);

/// Writes records as ingest CSV, lat/lon obtained by unprojecting about anchor.
void write_cdr_csv(std::ostream& out, const std::vector<CdrRecord>& records,
                   GeoPoint anchor = kDefaultAnchor);

/// Every summary field by direct, separate passes over the points.
MobilitySummary naive_summary_oracle(const Trajectory& traj);

/// Mixed test corpus: isotropic Gaussian and two-cluster commuter users with
/// n uniform in [1, n_max], log-uniform spreads and scattered homes.
std::vector<Trajectory> gen_corpus(std::uint64_t seed, std::size_t count, std::size_t n_max = 500);

/// Largest scaled disagreement between two summaries of the same trajectory.
/// Positions are scaled by max(|a|, |b|, rg), lengths by max(|a|, |b|, rg),
/// mu by max(|a|, |b|, n rg²); theta is compared as an absolute distance
/// modulo π. Discrete fields (n, flags, top positions) must match exactly,
/// otherwise the result is +inf.
struct SummaryDiscrepancy {
  double value = 0.0;
  std::string field;
};

SummaryDiscrepancy compare_summaries(const MobilitySummary& a, const MobilitySummary& b);

}  // namespace mobitrace::synth
