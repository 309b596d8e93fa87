#pragma once

#include <filesystem>
#include <span>
#include <string>

namespace mobitrace::cli {

struct SvgSeries {
  std::span<const double> x;
  std::span<const double> y;
  bool connect = false;  // polyline instead of dots
};

/// Minimal single-panel plot. With log_axes, non-positive values are dropped.
void write_svg_plot(const std::filesystem::path& path, const std::string& title,
                    const std::string& x_label, const std::string& y_label, const SvgSeries& series,
                    bool log_axes);

}  // namespace mobitrace::cli
