#include "svg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <vector>

#include <fmt/format.h>

#include "mobitrace/error.hpp"

namespace mobitrace::cli {

namespace {
constexpr double kWidth = 640.0;
constexpr double kHeight = 480.0;
constexpr double kMargin = 60.0;
}  // namespace

void write_svg_plot(const std::filesystem::path& path, const std::string& title,
                    const std::string& x_label, const std::string& y_label, const SvgSeries& series,
                    bool log_axes) {
  std::vector<std::pair<double, double>> pts;
  for (std::size_t i = 0; i < series.x.size() && i < series.y.size(); ++i) {
    double x = series.x[i];
    double y = series.y[i];
    if (log_axes) {
      if (!(x > 0.0) || !(y > 0.0)) continue;
      x = std::log10(x);
      y = std::log10(y);
    }
    if (std::isfinite(x) && std::isfinite(y)) pts.emplace_back(x, y);
  }

  double x_lo = std::numeric_limits<double>::infinity(), x_hi = -x_lo;
  double y_lo = x_lo, y_hi = -x_lo;
  for (const auto& [x, y] : pts) {
    x_lo = std::min(x_lo, x);
    x_hi = std::max(x_hi, x);
    y_lo = std::min(y_lo, y);
    y_hi = std::max(y_hi, y);
  }
  if (pts.empty()) x_lo = y_lo = 0.0, x_hi = y_hi = 1.0;
  if (x_hi <= x_lo) x_hi = x_lo + 1.0;
  if (y_hi <= y_lo) y_hi = y_lo + 1.0;

  auto sx = [&](double x) { return kMargin + (x - x_lo) / (x_hi - x_lo) * (kWidth - 2 * kMargin); };
  auto sy = [&](double y) { return kHeight - kMargin - (y - y_lo) / (y_hi - y_lo) * (kHeight - 2 * kMargin); };

  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, fmt::format("cannot write {}", path.string()));
  out << fmt::format(R"(<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}">)", kWidth, kHeight) << '\n';
  out << R"(<rect width="100%" height="100%" fill="white"/>)" << '\n';
  out << fmt::format(R"(<rect x="{}" y="{}" width="{}" height="{}" fill="none" stroke="black"/>)",
                     kMargin, kMargin, kWidth - 2 * kMargin, kHeight - 2 * kMargin) << '\n';
  out << fmt::format(R"(<text x="{}" y="30" text-anchor="middle" font-size="16">{}</text>)", kWidth / 2, title) << '\n';
  const std::string prefix = log_axes ? "log10 " : "";
  out << fmt::format(R"(<text x="{}" y="{}" text-anchor="middle" font-size="12">{}{}</text>)",
                     kWidth / 2, kHeight - 20, prefix, x_label) << '\n';
  out << fmt::format(R"svg(<text x="20" y="{}" text-anchor="middle" font-size="12" transform="rotate(-90 20 {})">{}{}</text>)svg",
                     kHeight / 2, kHeight / 2, prefix, y_label) << '\n';
  out << fmt::format(R"(<text x="{}" y="{}" font-size="10">{:.3g}</text><text x="{}" y="{}" font-size="10" text-anchor="end">{:.3g}</text>)",
                     kMargin, kHeight - kMargin + 14, x_lo, kWidth - kMargin, kHeight - kMargin + 14, x_hi) << '\n';
  out << fmt::format(R"(<text x="{}" y="{}" font-size="10" text-anchor="end">{:.3g}</text><text x="{}" y="{}" font-size="10" text-anchor="end">{:.3g}</text>)",
                     kMargin - 4, kHeight - kMargin, y_lo, kMargin - 4, kMargin + 10, y_hi) << '\n';

  if (series.connect) {
    out << R"(<polyline fill="none" stroke="steelblue" stroke-width="1.5" points=")";
    for (const auto& [x, y] : pts) out << fmt::format("{:.2f},{:.2f} ", sx(x), sy(y));
    out << "\"/>\n";
  }
  for (const auto& [x, y] : pts) {
    out << fmt::format(R"(<circle cx="{:.2f}" cy="{:.2f}" r="2" fill="steelblue"/>)", sx(x), sy(y)) << '\n';
  }
  out << "</svg>\n";
}

}  // namespace mobitrace::cli
