#include "mobitrace/distribution_lab.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "mobitrace/error.hpp"

namespace mobitrace {

std::vector<double> jump_sizes(const Trajectory& traj) {
  if (traj.size() < 2) {
    throw Error(ErrorKind::TooShort, fmt::format("user {} has {} point(s)", traj.user_id, traj.size()));
  }
  std::vector<double> out;
  out.reserve(traj.size() - 1);
  for (std::size_t i = 1; i < traj.size(); ++i) {
    out.push_back(distance(traj.points[i - 1].pos, traj.points[i].pos));
  }
  return out;
}

std::vector<std::int64_t> waiting_times(const Trajectory& traj) {
  if (traj.size() < 2) {
    throw Error(ErrorKind::TooShort, fmt::format("user {} has {} point(s)", traj.user_id, traj.size()));
  }
  std::vector<std::int64_t> out;
  out.reserve(traj.size() - 1);
  for (std::size_t i = 1; i < traj.size(); ++i) {
    out.push_back((traj.points[i].t - traj.points[i - 1].t).count());
  }
  return out;
}

Binning Binning::logarithmic(double base, double start, std::size_t n_bins) {
  if (!(base > 1.0) || !(start > 0.0) || n_bins < 1 || !std::isfinite(base) ||
      !std::isfinite(start)) {
    throw Error(ErrorKind::BadBinning,
                fmt::format("log bins need base > 1, start > 0, n_bins >= 1 (got {}:{}:{})", base,
                            start, n_bins));
  }
  Binning b{BinKind::Logarithmic, {}};
  b.edges.reserve(n_bins + 1);
  for (std::size_t k = 0; k <= n_bins; ++k) {
    b.edges.push_back(start * std::pow(base, static_cast<double>(k)));
  }
  if (!std::isfinite(b.edges.back())) throw Error(ErrorKind::BadBinning, "top edge overflows");
  return b;
}

Binning Binning::linear(double lo, double hi, std::size_t n_bins) {
  if (!(hi > lo) || n_bins < 1 || !std::isfinite(lo) || !std::isfinite(hi)) {
    throw Error(ErrorKind::BadBinning,
                fmt::format("linear bins need lo < hi, n_bins >= 1 (got {}:{}:{})", lo, hi, n_bins));
  }
  Binning b{BinKind::Linear, {}};
  b.edges.reserve(n_bins + 1);
  const double width = (hi - lo) / static_cast<double>(n_bins);
  for (std::size_t k = 0; k < n_bins; ++k) b.edges.push_back(lo + width * static_cast<double>(k));
  b.edges.push_back(hi);
  return b;
}

Binning Binning::from_edges(std::vector<double> edges, BinKind kind) {
  if (edges.size() < 2) throw Error(ErrorKind::BadBinning, "need at least two edges");
  for (std::size_t i = 0; i < edges.size(); ++i) {
    if (!std::isfinite(edges[i]) || (i > 0 && !(edges[i] > edges[i - 1]))) {
      throw Error(ErrorKind::BadBinning, "edges must be finite and strictly increasing");
    }
  }
  if (kind == BinKind::Logarithmic && !(edges.front() > 0.0)) {
    throw Error(ErrorKind::BadBinning, "log edges must be positive");
  }
  return Binning{kind, std::move(edges)};
}

Binning default_rg_binning() { return Binning::logarithmic(2.0, 0.1, 12); }

Histogram::Histogram(const Binning& binning)
    : kind(binning.kind), edges(binning.edges), counts(binning.n_bins(), 0) {
  if (edges.size() < 2) throw Error(ErrorKind::BadBinning, "histogram needs at least one bin");
}

void Histogram::add(double value) {
  ++total;
  if (std::isnan(value) || value < edges.front() ||
      (kind == BinKind::Logarithmic && !(value > 0.0))) {
    ++underflow;
    return;
  }
  if (value >= edges.back()) {
    ++overflow;
    return;
  }
  const auto it = std::upper_bound(edges.begin(), edges.end(), value);
  ++counts[static_cast<std::size_t>(it - edges.begin()) - 1];
}

std::vector<double> Histogram::density() const {
  std::vector<double> out(counts.size(), 0.0);
  if (total == 0) return out;
  for (std::size_t b = 0; b < counts.size(); ++b) {
    out[b] = static_cast<double>(counts[b]) /
             (static_cast<double>(total) * (edges[b + 1] - edges[b]));
  }
  return out;
}

Histogram& Histogram::operator+=(const Histogram& other) {
  if (edges != other.edges) throw Error(ErrorKind::BadBinning, "cannot merge histograms with different edges");
  for (std::size_t b = 0; b < counts.size(); ++b) counts[b] += other.counts[b];
  total += other.total;
  underflow += other.underflow;
  overflow += other.overflow;
  return *this;
}

Histogram log_binned_histogram(std::span<const double> values, double base, double start,
                               std::size_t n_bins) {
  Histogram h(Binning::logarithmic(base, start, n_bins));
  h.add(values);
  return h;
}

Histogram rg_distribution(std::span<const MobilitySummary> summaries, const Binning& binning) {
  if (summaries.empty()) throw Error(ErrorKind::EmptyPopulation, "no users to histogram");
  Histogram h(binning);
  for (const auto& s : summaries) h.add(s.rg);
  return h;
}

void write_histogram(std::ostream& out, const Histogram& h) {
  out << "bin_lo,bin_hi,count,density\n";
  const auto density = h.density();
  for (std::size_t b = 0; b < h.counts.size(); ++b) {
    out << fmt::format("{:.9g},{:.9g},{},{:.9g}\n", h.edges[b], h.edges[b + 1], h.counts[b],
                       density[b]);
  }
}

std::string_view to_string(RgBand band) noexcept {
  switch (band) {
    case RgBand::Low: return "LOW";
    case RgBand::Mid: return "MID";
    case RgBand::High: return "HIGH";
  }
  return "UNKNOWN";
}

RgBand classify_band(double rg) {
  if (!std::isfinite(rg) || rg < 0.0) {
    throw Error(ErrorKind::BadArgument, fmt::format("rg must be finite and >= 0, got {}", rg));
  }
  if (rg < kBandMidFromKm) return RgBand::Low;
  if (rg < kBandHighFromKm) return RgBand::Mid;
  return RgBand::High;
}

std::map<RgBand, std::size_t> band_census(std::span<const MobilitySummary> summaries) {
  std::map<RgBand, std::size_t> census{{RgBand::Low, 0}, {RgBand::Mid, 0}, {RgBand::High, 0}};
  for (const auto& s : summaries) ++census[classify_band(s.rg)];
  return census;
}

void write_band_census(std::ostream& out, const std::map<RgBand, std::size_t>& census) {
  out << "band,count\n";
  for (const auto& [band, count] : census) out << to_string(band) << ',' << count << '\n';
}

double eval_printed_law_literal(double rg) {
  if (!(rg > 0.0) || !std::isfinite(rg)) {
    throw Error(ErrorKind::BadArgument, fmt::format("rg must be positive and finite, got {}", rg));
  }
  return std::pow(rg, std::exp(-rg));
}

}  // namespace mobitrace
