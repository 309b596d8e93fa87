#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <ostream>
#include <span>
#include <string_view>
#include <vector>

#include "mobitrace/mobility_kernel.hpp"
#include "mobitrace/power_law_fit.hpp"
#include "mobitrace/trajectory_store.hpp"

namespace mobitrace {

// ---------------------------------------------------------------------------
// Per-trajectory increments
// ---------------------------------------------------------------------------

/// Distances between consecutive points, km. Throws Error(TooShort) if n < 2.
std::vector<double> jump_sizes(const Trajectory& traj);

/// Gaps between consecutive timestamps, seconds. Throws Error(TooShort) if n < 2.
std::vector<std::int64_t> waiting_times(const Trajectory& traj);

// ---------------------------------------------------------------------------
// Histograms
// ---------------------------------------------------------------------------

enum class BinKind { Linear, Logarithmic };

/// Bin edges plus the kind they were built as. Bins are half-open
/// [edge_k, edge_k+1).
struct Binning {
  BinKind kind = BinKind::Logarithmic;
  std::vector<double> edges;

  /// edges_k = start * base^k, k = 0..n_bins.
  static Binning logarithmic(double base, double start, std::size_t n_bins);
  /// n_bins equal-width bins over [lo, hi).
  static Binning linear(double lo, double hi, std::size_t n_bins);
  /// Arbitrary strictly increasing edges.
  static Binning from_edges(std::vector<double> edges, BinKind kind = BinKind::Linear);

  std::size_t n_bins() const noexcept { return edges.empty() ? 0 : edges.size() - 1; }
};

/// Defaults for P(r_g): base 2 from 0.1 km over 12 bins.
Binning default_rg_binning();

struct Histogram {
  BinKind kind = BinKind::Logarithmic;
  std::vector<double> edges;
  std::vector<std::uint64_t> counts;
  std::uint64_t total = 0;
  std::uint64_t underflow = 0;
  std::uint64_t overflow = 0;

  explicit Histogram(const Binning& binning);

  void add(double value);
  void add(std::span<const double> values) {
    for (double v : values) add(v);
  }

  /// counts_b / (total * width_b); all zeros when total = 0.
  std::vector<double> density() const;

  /// Requires identical edges; throws Error(BadBinning) otherwise.
  Histogram& operator+=(const Histogram& other);
};

/// Log-binned histogram; non-positive values and values below start go to
/// underflow. Throws Error(BadBinning) unless base > 1, start > 0, n_bins >= 1.
Histogram log_binned_histogram(std::span<const double> values, double base, double start,
                               std::size_t n_bins);

/// Histogram of rg over the population. Throws Error(EmptyPopulation).
Histogram rg_distribution(std::span<const MobilitySummary> summaries, const Binning& binning);

/// CSV `bin_lo,bin_hi,count,density`.
void write_histogram(std::ostream& out, const Histogram& histogram);

// ---------------------------------------------------------------------------
// r_g bands
// ---------------------------------------------------------------------------

enum class RgBand { Low, Mid, High };

inline constexpr double kBandMidFromKm = 10.0;
inline constexpr double kBandHighFromKm = 20.0;

std::string_view to_string(RgBand band) noexcept;

/// LOW below 10 km, MID in [10, 20), HIGH from 20 km.
/// Throws Error(BadArgument) on negative or non-finite input.
RgBand classify_band(double rg);

/// Always holds all three bands.
std::map<RgBand, std::size_t> band_census(std::span<const MobilitySummary> summaries);

/// CSV `band,count`.
void write_band_census(std::ostream& out, const std::map<RgBand, std::size_t>& census);

/// rg^exp(-rg), the literal printed form of the P(r_g) law. Not a density;
/// kept for display. Throws Error(BadArgument) for rg <= 0.
double eval_printed_law_literal(double rg);

}  // namespace mobitrace
