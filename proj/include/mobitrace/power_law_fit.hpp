#pragma once

#include <cstddef>
#include <ostream>
#include <span>

namespace mobitrace {

enum class R0Mode { FixedZero, Free };

struct FitRange {
  double r_min = 0.1;
  double r_max = 100.0;

  bool contains(double r) const noexcept { return r >= r_min && r <= r_max; }
};

/// Parameters of p(r) = C (r + r0)^(-beta) exp(-r / kappa) on [r_min, r_max].
struct TruncatedPowerLaw {
  double beta = 1.0;
  double kappa = 1.0;
  double r0 = 0.0;
};

struct PowerLawFit {
  double beta = 0.0;
  double kappa = 0.0;
  double r0 = 0.0;
  double log_likelihood = 0.0;
  std::size_t n_samples = 0;
  FitRange fit_range;
  std::size_t iterations = 0;  // simplex iterations used by the refinement
};

struct FitOptions {
  std::size_t beta_grid = 50;
  std::size_t kappa_grid = 40;
  std::size_t r0_grid = 12;  // used only in R0Mode::Free
  std::size_t max_iterations = 500;
  double tolerance = 1e-8;
};

inline constexpr std::size_t kMinFitSamples = 100;

/// ∫ (r + r0)^(-beta) exp(-r / kappa) dr over the range, by adaptive
/// Gauss-Kronrod quadrature in log r.
double truncated_power_law_norm(const TruncatedPowerLaw& law, const FitRange& range);

/// Log-likelihood of the in-range samples; out-of-range samples are ignored.
double truncated_power_law_log_likelihood(std::span<const double> samples,
                                          const TruncatedPowerLaw& law, const FitRange& range);

/// Maximum-likelihood fit: coarse grid over beta in [0.1, 5] and kappa in
/// [r_min, 100 r_max] (log-spaced), refined by Nelder-Mead.
/// Throws Error(TooFewSamples), Error(BadArgument), Error(NoConvergence).
PowerLawFit fit_truncated_power_law(std::span<const double> samples, R0Mode r0_mode,
                                    const FitRange& range, const FitOptions& options = {});

/// `beta=… kappa=… r0=… loglik=… n=…`
void write_fit_report(std::ostream& out, const PowerLawFit& fit);

}  // namespace mobitrace
