#include "mobitrace/selftest.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <fmt/format.h>

#include "mobitrace/mobility_kernel.hpp"
#include "mobitrace/synth_oracle.hpp"

namespace mobitrace {

namespace {

double rel_err(double a, double b, double scale) {
  const double diff = std::abs(a - b);
  if (diff == 0.0) return 0.0;
  return scale > 0.0 ? diff / scale : std::numeric_limits<double>::infinity();
}

PropertyResult verdict(std::string name, double worst, double tolerance, std::size_t checked) {
  PropertyResult r{std::move(name), worst <= tolerance, {}};
  r.detail = fmt::format("{} trajectories, max error {:.3e} (tolerance {:.0e})", checked, worst, tolerance);
  return r;
}

}  // namespace

std::vector<PropertyResult> run_selftest(const SelftestOptions& options) {
  const auto corpus = synth::gen_corpus(options.seed, options.trajectories);

  double trace_worst = 0.0;
  double pythagoras_worst = 0.0;
  double mu_worst = 0.0;
  double angle_worst = 0.0;
  double oracle_worst = 0.0;
  std::string oracle_field = "none";
  std::size_t angle_checked = 0;

  for (const auto& traj : corpus) {
    MobilitySummary s = summarize(traj);
    s.rg *= options.rg_tamper;
    const InertiaTensor tensor = inertia_tensor(traj);
    const double n = static_cast<double>(s.n);
    const double trace = tensor.trace();

    trace_worst = std::max(trace_worst, rel_err(n * s.rg * s.rg, trace, std::max(n * s.rg * s.rg, trace)));
    const double rg2 = s.rg * s.rg;
    const double sig2 = s.sigma_x * s.sigma_x + s.sigma_y * s.sigma_y;
    pythagoras_worst = std::max(pythagoras_worst, rel_err(sig2, rg2, std::max(sig2, rg2)));

    const Eigenvalues2 ev = eigenvalues(tensor);
    mu_worst = std::max(mu_worst, rel_err(s.mu, ev.upper - ev.lower, std::max(s.mu, trace)));

    if (!s.isotropic && std::abs(tensor.ixy) > 1e-9 && s.mu > 1e-9) {
      if (const auto cos_closed = closed_form_cos_theta(tensor)) {
        // Compare the unsigned cosine; the axis direction is defined modulo π.
        const PrincipalAngle eigen_angle = principal_angle(tensor);
        angle_worst = std::max(angle_worst, std::abs(std::abs(*cos_closed) - std::abs(std::cos(eigen_angle.theta))));
        ++angle_checked;
      }
    }

    const auto oracle = synth::compare_summaries(s, synth::naive_summary_oracle(traj));
    if (!(oracle.value <= oracle_worst)) {
      oracle_worst = oracle.value;
      oracle_field = oracle.field;
    }
  }

  const double tol = options.tolerance;
  std::vector<PropertyResult> results;
  results.push_back(verdict("trace_identity", trace_worst, tol, corpus.size()));
  results.push_back(verdict("pythagorean_identity", pythagoras_worst, tol, corpus.size()));
  results.push_back(verdict("mu_eigen_gap", mu_worst, tol, corpus.size()));
  results.push_back(verdict("closed_form_angle", angle_worst, tol, angle_checked));
  auto oracle = verdict("oracle_agreement", oracle_worst, tol, corpus.size());
  oracle.detail += fmt::format(", worst field {}", oracle_field);
  results.push_back(std::move(oracle));
  return results;
}

void write_selftest_report(std::ostream& out, const std::vector<PropertyResult>& results) {
  for (const auto& r : results) {
    out << (r.passed ? "PASS " : "FAIL ") << r.name << ": " << r.detail << '\n';
  }
}

}  // namespace mobitrace
