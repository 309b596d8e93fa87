#include "mobitrace/power_law_fit.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "mobitrace/error.hpp"

namespace mobitrace {

namespace {

constexpr double kBetaLo = 0.1;
constexpr double kBetaHi = 5.0;
constexpr double kQuadratureTolerance = 1e-13;
constexpr double kInf = std::numeric_limits<double>::infinity();

void check_range(const FitRange& range) {
  if (!(range.r_min > 0.0) || !(range.r_max > range.r_min) || !std::isfinite(range.r_max)) {
    throw Error(ErrorKind::BadArgument,
                fmt::format("fit range needs 0 < r_min < r_max < inf (got [{}, {}])", range.r_min,
                            range.r_max));
  }
}

// Sufficient statistics of the in-range samples.
struct SampleStats {
  std::vector<double> values;
  double sum = 0.0;
  double sum_log = 0.0;
};

SampleStats gather(std::span<const double> samples, const FitRange& range) {
  SampleStats s;
  for (double r : samples) {
    if (!range.contains(r)) continue;
    s.values.push_back(r);
    s.sum += r;
    s.sum_log += std::log(r);
  }
  return s;
}

double log_likelihood(const SampleStats& s, const TruncatedPowerLaw& law, const FitRange& range) {
  const double z = truncated_power_law_norm(law, range);
  if (!(z > 0.0) || !std::isfinite(z)) return -kInf;
  double sum_log = s.sum_log;
  if (law.r0 != 0.0) {
    sum_log = 0.0;
    for (double r : s.values) sum_log += std::log(r + law.r0);
  }
  const auto n = static_cast<double>(s.values.size());
  return -law.beta * sum_log - s.sum / law.kappa - n * std::log(z);
}

// Working coordinates: (beta, ln kappa[, sqrt r0]).
TruncatedPowerLaw from_params(std::span<const double> p) {
  TruncatedPowerLaw law{p[0], std::exp(p[1]), 0.0};
  if (p.size() > 2) law.r0 = p[2] * p[2];
  return law;
}

struct SimplexResult {
  std::vector<double> best;
  double value = kInf;
  std::size_t iterations = 0;
  bool converged = false;
};

template <typename F>
SimplexResult nelder_mead(F&& f, std::vector<double> start, std::vector<double> steps,
                          std::size_t max_iterations, double tolerance) {
  const std::size_t dim = start.size();
  std::vector<std::vector<double>> x(dim + 1, start);
  std::vector<double> fx(dim + 1);
  for (std::size_t i = 0; i < dim; ++i) x[i + 1][i] += steps[i];
  for (std::size_t i = 0; i <= dim; ++i) fx[i] = f(x[i]);

  std::vector<std::size_t> order(dim + 1);
  auto sort_vertices = [&] {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return fx[a] < fx[b]; });
    std::vector<std::vector<double>> xs(dim + 1);
    std::vector<double> fs(dim + 1);
    for (std::size_t i = 0; i <= dim; ++i) {
      xs[i] = std::move(x[order[i]]);
      fs[i] = fx[order[i]];
    }
    x = std::move(xs);
    fx = std::move(fs);
  };
  auto spread = [&] {
    double worst = 0.0;
    for (std::size_t i = 1; i <= dim; ++i) {
      for (std::size_t j = 0; j < dim; ++j) {
        const double scale = 1.0 + std::abs(x[0][j]);
        worst = std::max(worst, std::abs(x[i][j] - x[0][j]) / scale);
      }
    }
    return worst;
  };
  auto along = [&](const std::vector<double>& centroid, double t) {
    std::vector<double> p(dim);
    for (std::size_t j = 0; j < dim; ++j) p[j] = centroid[j] + t * (x[dim][j] - centroid[j]);
    return p;
  };

  SimplexResult result;
  sort_vertices();
  while (result.iterations < max_iterations) {
    if (spread() <= tolerance) {
      result.converged = true;
      break;
    }
    ++result.iterations;

    std::vector<double> centroid(dim, 0.0);
    for (std::size_t i = 0; i < dim; ++i) {
      for (std::size_t j = 0; j < dim; ++j) centroid[j] += x[i][j] / static_cast<double>(dim);
    }

    auto reflected = along(centroid, -1.0);
    const double f_reflected = f(reflected);
    if (f_reflected < fx[0]) {
      auto expanded = along(centroid, -2.0);
      const double f_expanded = f(expanded);
      if (f_expanded < f_reflected) {
        x[dim] = std::move(expanded);
        fx[dim] = f_expanded;
      } else {
        x[dim] = std::move(reflected);
        fx[dim] = f_reflected;
      }
    } else if (f_reflected < fx[dim - 1]) {
      x[dim] = std::move(reflected);
      fx[dim] = f_reflected;
    } else {
      const bool outside = f_reflected < fx[dim];
      auto contracted = along(centroid, outside ? -0.5 : 0.5);
      const double f_contracted = f(contracted);
      if (f_contracted < (outside ? f_reflected : fx[dim])) {
        x[dim] = std::move(contracted);
        fx[dim] = f_contracted;
      } else {
        for (std::size_t i = 1; i <= dim; ++i) {
          for (std::size_t j = 0; j < dim; ++j) x[i][j] = x[0][j] + 0.5 * (x[i][j] - x[0][j]);
          fx[i] = f(x[i]);
        }
      }
    }
    sort_vertices();
  }
  if (!result.converged && spread() <= tolerance) result.converged = true;
  result.best = x[0];
  result.value = fx[0];
  return result;
}

}  // namespace

double truncated_power_law_norm(const TruncatedPowerLaw& law, const FitRange& range) {
  check_range(range);
  auto integrand = [&law](double s) {
    const double r = std::exp(s);
    return std::exp(s - law.beta * std::log(r + law.r0) - r / law.kappa);
  };
  double error = 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
      integrand, std::log(range.r_min), std::log(range.r_max), 20, kQuadratureTolerance, &error);
}

double truncated_power_law_log_likelihood(std::span<const double> samples,
                                          const TruncatedPowerLaw& law, const FitRange& range) {
  check_range(range);
  return log_likelihood(gather(samples, range), law, range);
}

PowerLawFit fit_truncated_power_law(std::span<const double> samples, R0Mode r0_mode,
                                    const FitRange& range, const FitOptions& options) {
  check_range(range);
  const SampleStats stats = gather(samples, range);
  if (stats.values.size() < kMinFitSamples) {
    throw Error(ErrorKind::TooFewSamples,
                fmt::format("{} samples in [{}, {}], need at least {}", stats.values.size(),
                            range.r_min, range.r_max, kMinFitSamples));
  }
  const bool free_r0 = r0_mode == R0Mode::Free;

  auto objective = [&](std::span<const double> p) {
    if (!(p[0] > 0.0) || !std::isfinite(p[1])) return kInf;
    const double ll = log_likelihood(stats, from_params(p), range);
    return std::isfinite(ll) ? -ll : kInf;
  };

  // Coarse grid.
  const std::size_t nb = std::max<std::size_t>(options.beta_grid, 2);
  const std::size_t nk = std::max<std::size_t>(options.kappa_grid, 2);
  const double log_k_lo = std::log(range.r_min);
  const double log_k_hi = std::log(100.0 * range.r_max);
  const double beta_step = (kBetaHi - kBetaLo) / static_cast<double>(nb - 1);
  const double log_k_step = (log_k_hi - log_k_lo) / static_cast<double>(nk - 1);

  std::vector<double> r0_values{0.0};
  if (free_r0) {
    const std::size_t nr = std::max<std::size_t>(options.r0_grid, 2);
    const double lo = std::log(range.r_min * 1e-2);
    const double hi = std::log(range.r_max);
    for (std::size_t i = 0; i + 1 < nr; ++i) {
      r0_values.push_back(std::exp(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(nr - 2)));
    }
  }

  std::vector<double> best(free_r0 ? 3 : 2);
  double best_value = kInf;
  std::vector<double> p(best.size());
  for (double r0 : r0_values) {
    for (std::size_t i = 0; i < nb; ++i) {
      for (std::size_t j = 0; j < nk; ++j) {
        p[0] = kBetaLo + beta_step * static_cast<double>(i);
        p[1] = log_k_lo + log_k_step * static_cast<double>(j);
        if (free_r0) p[2] = std::sqrt(r0);
        const double value = objective(p);
        if (value < best_value) {
          best_value = value;
          best = p;
        }
      }
    }
  }
  if (!std::isfinite(best_value)) {
    throw Error(ErrorKind::NoConvergence, "likelihood is not finite anywhere on the grid");
  }

  // Simplex refinement, restarted once from its own optimum.
  std::vector<double> steps{beta_step, log_k_step};
  if (free_r0) steps.push_back(0.25 * std::sqrt(range.r_max));
  SimplexResult refined =
      nelder_mead(objective, best, steps, options.max_iterations, options.tolerance);
  std::size_t iterations = refined.iterations;
  if (refined.converged) {
    for (auto& s : steps) s *= 1e-2;
    SimplexResult again =
        nelder_mead(objective, refined.best, steps, options.max_iterations, options.tolerance);
    iterations += again.iterations;
    if (again.value <= refined.value) refined = std::move(again);
  }
  if (!refined.converged) {
    throw Error(ErrorKind::NoConvergence,
                fmt::format("simplex did not reach tolerance {} within {} iterations",
                            options.tolerance, options.max_iterations));
  }

  const TruncatedPowerLaw law = from_params(refined.best);
  PowerLawFit fit;
  fit.beta = law.beta;
  fit.kappa = law.kappa;
  fit.r0 = law.r0;
  fit.log_likelihood = log_likelihood(stats, law, range);
  fit.n_samples = stats.values.size();
  fit.fit_range = range;
  fit.iterations = iterations;
  spdlog::debug("fit: beta={} kappa={} r0={} loglik={} after {} simplex iterations", fit.beta,
                fit.kappa, fit.r0, fit.log_likelihood, iterations);
  return fit;
}

void write_fit_report(std::ostream& out, const PowerLawFit& fit) {
  out << fmt::format("beta={:.9g} kappa={:.9g} r0={:.9g} loglik={:.9g} n={}\n", fit.beta, fit.kappa,
                     fit.r0, fit.log_likelihood, fit.n_samples);
}

}  // namespace mobitrace
