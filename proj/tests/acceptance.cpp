// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <unistd.h>

#include "mobitrace/cdr_ingest.hpp"
#include "mobitrace/cli.hpp"
#include "mobitrace/distribution_lab.hpp"
#include "mobitrace/mobility_kernel.hpp"
#include "mobitrace/synth_oracle.hpp"
#include "mobitrace/trajectory_store.hpp"

using namespace mobitrace;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

double rel(double a, double b, double scale) {
  const double d = std::abs(a - b);
  return d == 0.0 ? 0.0 : d / scale;
}

double angle_gap(double a, double b) {
  double d = std::fmod(std::abs(a - b), std::numbers::pi);
  return std::min(d, std::numbers::pi - d);
}

struct Verdict {
  bool passed;
  std::string detail;
};

int failures = 0;

void report(int id, const std::string& name, const std::function<Verdict()>& check) {
  const auto start = Clock::now();
  Verdict v{false, ""};
  try {
    v = check();
  } catch (const std::exception& e) {
    v = {false, fmt::format("exception: {}", e.what())};
  }
  if (!v.passed) ++failures;
  std::cout << fmt::format("{} criterion {:>2} {}: {} [{:.2f} s]", v.passed ? "PASS" : "FAIL", id, name, v.detail,
                           seconds_since(start))
            << std::endl;
}

const std::vector<Trajectory>& corpus() {
  static const auto c = synth::gen_corpus(20240601, 1000, 500);
  return c;
}

Trajectory transformed(const Trajectory& t, const std::function<Position(Position)>& f) {
  Trajectory out = t;
  for (auto& p : out.points) p.pos = f(p.pos);
  return out;
}

Verdict oracle_equivalence() {
  const auto start = Clock::now();
  double worst = 0.0;
  std::string field = "none";
  for (const auto& traj : corpus()) {
    const auto d = synth::compare_summaries(summarize(traj), synth::naive_summary_oracle(traj));
    if (!(d.value <= worst)) {
      worst = d.value;
      field = d.field;
    }
  }
  const double elapsed = seconds_since(start);
  return {worst <= 1e-9 && elapsed < 10.0,
          fmt::format("{} trajectories, max scaled error {:.2e} ({}), {:.2f} s", corpus().size(), worst, field,
                      elapsed)};
}

Verdict trace_identity() {
  double worst = 0.0;
  for (const auto& traj : corpus()) {
    const auto s = summarize(traj);
    const auto t = inertia_tensor(traj);
    const double lhs = static_cast<double>(s.n) * s.rg * s.rg;
    worst = std::max(worst, rel(lhs, t.trace(), std::max(lhs, t.trace())));
  }
  return {worst <= 1e-9, fmt::format("max relative error {:.2e}", worst)};
}

Verdict pythagorean_identity() {
  double worst = 0.0;
  for (const auto& traj : corpus()) {
    const auto s = summarize(traj);
    const double lhs = s.sigma_x * s.sigma_x + s.sigma_y * s.sigma_y;
    const double rhs = s.rg * s.rg;
    worst = std::max(worst, rel(lhs, rhs, std::max(lhs, rhs)));
  }
  return {worst <= 1e-9, fmt::format("max relative error {:.2e}", worst)};
}

Verdict closed_form_cross_check() {
  double mu_worst = 0.0;
  double cos_worst = 0.0;
  std::size_t compared = 0;
  for (const auto& traj : corpus()) {
    const auto t = inertia_tensor(traj);
    const auto ev = eigenvalues(t);
    const double mu = mu_discriminant(t);
    mu_worst = std::max(mu_worst, rel(mu, ev.upper - ev.lower, std::max(mu, t.trace())));
    const auto angle = principal_angle(t);
    if (angle.isotropic || t.ixy == 0.0) continue;
    const auto c = closed_form_cos_theta(t);
    if (!c) return {false, "closed form undefined for a non-degenerate tensor"};
    cos_worst = std::max(cos_worst, std::abs(std::abs(*c) - std::abs(std::cos(angle.theta))));
    ++compared;
  }
  // Axis-aligned tensors: the closed form is 0/0 on one branch.
  bool aligned_ok = true;
  for (const InertiaTensor t : {InertiaTensor{1.0, 4.0, 0.0}, InertiaTensor{4.0, 1.0, 0.0},
                                InertiaTensor{0.0, 2.0, 0.0}, InertiaTensor{2.0, 0.0, 0.0}}) {
    const double theta = principal_angle(t).theta;
    aligned_ok = aligned_ok && (theta == 0.0 || theta == std::numbers::pi / 2);
  }
  return {mu_worst <= 1e-9 && cos_worst <= 1e-9 && aligned_ok && compared > 0,
          fmt::format("mu gap error {:.2e}, |cos| error {:.2e} over {} tensors, axis-aligned {}", mu_worst, cos_worst,
                      compared, aligned_ok ? "ok" : "wrong")};
}

Verdict intrinsic_frame() {
  double mean_worst = 0.0;
  double std_worst = 0.0;
  std::size_t checked = 0;
  bool major_ok = true;
  bool sign_ok = true;
  for (const auto& traj : corpus()) {
    const auto s = summarize(traj);
    if (s.rg == 0.0 || s.degenerate_axis) continue;
    const auto frame = to_intrinsic_frame(traj);
    const auto n = static_cast<double>(frame.points.size());
    double mu_ = 0, mv = 0, su = 0, sv = 0;
    for (const auto& p : frame.points) {
      mu_ += p.u;
      mv += p.v;
    }
    mu_ /= n;
    mv /= n;
    for (const auto& p : frame.points) {
      su += (p.u - mu_) * (p.u - mu_);
      sv += (p.v - mv) * (p.v - mv);
    }
    mean_worst = std::max({mean_worst, std::abs(mu_), std::abs(mv)});
    std_worst = std::max({std_worst, std::abs(std::sqrt(su / n) - 1.0), std::abs(std::sqrt(sv / n) - 1.0)});
    major_ok = major_ok && s.sigma_x >= s.sigma_y;
    // Locate the most frequent position in the transformed set.
    const auto top = s.top_positions.front().pos;
    for (std::size_t i = 0; i < traj.size(); ++i) {
      if (traj.points[i].pos == top) {
        sign_ok = sign_ok && frame.points[i].u >= 0.0;
        break;
      }
    }
    ++checked;
  }
  return {mean_worst <= 1e-9 && std_worst <= 1e-9 && major_ok && sign_ok && checked > 0,
          fmt::format("{} trajectories, mean error {:.2e}, std error {:.2e}, major axis {}, top at u>=0 {}", checked,
                      mean_worst, std_worst, major_ok ? "ok" : "wrong", sign_ok ? "ok" : "wrong")};
}

Verdict invariance() {
  synth::Rng rng(606);
  double t_worst = 0.0, r_worst = 0.0, s_worst = 0.0;
  for (std::size_t i = 0; i < 200; ++i) {
    const auto& traj = corpus()[i];
    const auto base = summarize(traj);
    const double rg = base.rg;

    const Position shift{(rng.uniform() - 0.5) * 200.0, (rng.uniform() - 0.5) * 200.0};
    const auto ts = summarize(transformed(traj, [&](Position p) { return p + shift; }));
    t_worst = std::max({t_worst, rel(ts.rg, rg, std::max(rg, 1e-300)) * (rg > 0),
                        rel(ts.com.x, base.com.x + shift.x, std::max({std::abs(ts.com.x), rg, 1.0})),
                        rel(ts.com.y, base.com.y + shift.y, std::max({std::abs(ts.com.y), rg, 1.0}))});
    if (rg > 0) {
      t_worst = std::max({t_worst, rel(ts.sigma_x, base.sigma_x, rg), rel(ts.sigma_y, base.sigma_y, rg)});
      if (!base.isotropic && !base.degenerate_axis) t_worst = std::max(t_worst, angle_gap(ts.theta, base.theta));
    }

    const double phi = rng.uniform() * 2.0 * std::numbers::pi;
    const double c = std::cos(phi), s = std::sin(phi);
    const auto rs = summarize(transformed(traj, [&](Position p) { return Position{c * p.x - s * p.y, s * p.x + c * p.y}; }));
    if (rg > 0) {
      r_worst = std::max({r_worst, rel(rs.rg, rg, rg), rel(rs.sigma_x, base.sigma_x, rg),
                          rel(rs.sigma_y, base.sigma_y, rg)});
      if (!base.isotropic && base.sigma_x - base.sigma_y > 1e-6 * rg) {
        r_worst = std::max(r_worst, angle_gap(rs.theta, base.theta + phi));
      }
    }

    const double k = std::exp((rng.uniform() - 0.5) * 8.0);
    const auto ss = summarize(transformed(traj, [&](Position p) { return Position{k * p.x, k * p.y}; }));
    if (rg > 0) {
      s_worst = std::max({s_worst, rel(ss.rg, k * rg, k * rg), rel(ss.sigma_x, k * base.sigma_x, k * rg),
                          rel(ss.sigma_y, k * base.sigma_y, k * rg), rel(ss.mu, k * k * base.mu, base.n * k * k * rg * rg)});
      if (!base.isotropic && !base.degenerate_axis) s_worst = std::max(s_worst, angle_gap(ss.theta, base.theta));
    }
  }
  return {t_worst <= 1e-9 && r_worst <= 1e-9 && s_worst <= 1e-9,
          fmt::format("200 trajectories, translation {:.2e}, rotation {:.2e}, scale {:.2e}", t_worst, r_worst,
                      s_worst)};
}

Verdict fit_recovery() {
  std::string detail;
  bool ok = true;
  double slowest = 0.0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto start = Clock::now();
    synth::PopulationSpec spec;
    spec.n_users = 10000;
    spec.master_seed = seed;
    spec.rg_law = {1.5, 50.0, 0.0};
    spec.rg_range = {0.05, 2000.0};
    spec.events_min = 200;
    spec.events_max = 400;
    const auto records = synth::gen_population(spec);
    const auto trajectories = build_trajectories(records);
    std::vector<double> rg;
    rg.reserve(trajectories.size());
    for (const auto& [user, traj] : trajectories) rg.push_back(summarize(traj).rg);
    const auto fit = fit_truncated_power_law(rg, R0Mode::FixedZero, {0.1, 1000.0});
    const double elapsed = seconds_since(start);
    slowest = std::max(slowest, elapsed);
    const bool seed_ok = std::abs(fit.beta - 1.5) <= 0.05 && std::abs(fit.kappa - 50.0) <= 5.0 && elapsed < 60.0;
    ok = ok && seed_ok;
    detail += fmt::format("{}seed {}: beta {:.4f} kappa {:.2f}", detail.empty() ? "" : "; ", seed, fit.beta, fit.kappa);
  }
  return {ok, fmt::format("{}; slowest seed {:.1f} s", detail, slowest)};
}

Verdict saturation() {
  synth::Rng rng(8080);
  std::size_t settled = 0;
  const std::size_t users = 500;
  const Instant t0{std::chrono::seconds{1717200000}};
  for (std::size_t i = 0; i < users; ++i) {
    synth::UserSpec u;
    u.home = {(rng.uniform() - 0.5) * 20.0, (rng.uniform() - 0.5) * 20.0};
    u.scale_km = std::exp(std::log(0.1) + rng.uniform() * std::log(300.0));
    u.n_events = 1000;
    u.t_start = t0;
    u.t_end = t0 + std::chrono::hours{24 * 30};
    u.seed = rng.next();
    const auto series = rg_time_series(synth::gen_user(u));
    const double final_rg = series.back().second;
    double drift = 0.0;
    for (std::size_t k = series.size() * 4 / 5; k < series.size(); ++k) {
      drift = std::max(drift, std::abs(series[k].second - final_rg) / final_rg);
    }
    settled += drift <= 0.05;
  }
  const double share = static_cast<double>(settled) / static_cast<double>(users);
  return {share >= 0.95, fmt::format("{} of {} users within 5% over the final 20% of events", settled, users)};
}

Verdict band_ordering() {
  synth::PopulationSpec spec;
  spec.n_users = 10000;
  spec.master_seed = 9;
  spec.rg_law = {1.5, 50.0, 0.0};
  spec.rg_range = {0.1, 40.0};
  const auto trajectories = build_trajectories(synth::gen_population(spec));
  std::vector<MobilitySummary> summaries;
  for (const auto& [user, traj] : trajectories) summaries.push_back(summarize(traj));
  const auto census = band_census(summaries);
  const auto low = census.at(RgBand::Low), mid = census.at(RgBand::Mid), high = census.at(RgBand::High);
  return {low > mid && mid > high, fmt::format("LOW {} MID {} HIGH {}", low, mid, high)};
}

struct CliRun {
  int code;
  std::string out;
};

CliRun run_tool(std::vector<std::string> args) {
  args.insert(args.begin(), "mobitrace");
  args.push_back("--quiet");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = mobitrace::cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str()};
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

std::string column(const std::string& row, std::size_t index) {
  std::istringstream in(row);
  std::string cell;
  for (std::size_t i = 0; i <= index; ++i) std::getline(in, cell, ',');
  return cell;
}

Verdict pipeline() {
  const fs::path dir = fs::temp_directory_path() / fmt::format("mobitrace_acceptance_{}", ::getpid());
  fs::create_directories(dir);
  const auto csv = (dir / "synth.csv").string();
  const auto synth_run = run_tool({"synth", "--seed", "7", "--out", csv});
  if (synth_run.code != 0) return {false, "synth failed"};

  std::ifstream in(csv, std::ios::binary);
  const auto ingested = ingest_stream(in, std::nullopt);
  const auto trajectories = build_trajectories(ingested.records);
  std::size_t csv_rows = 0;
  {
    std::ifstream again(csv, std::ios::binary);
    for (std::string line; std::getline(again, line);) ++csv_rows;
    --csv_rows;
  }
  std::size_t traj_points = 0;
  for (const auto& [user, traj] : trajectories) traj_points += traj.size();

  std::vector<CliRun> summaries, rgdists, classes;
  for (int round = 0; round < 2; ++round) {
    summaries.push_back(run_tool({"summarize", "--input", csv}));
    rgdists.push_back(run_tool({"rgdist", "--input", csv, "--lin-bins", "0:1000:50"}));
    classes.push_back(run_tool({"classify", "--input", csv}));
  }
  fs::remove_all(dir);

  const bool deterministic =
      summaries[0].out == summaries[1].out && rgdists[0].out == rgdists[1].out && classes[0].out == classes[1].out;
  const bool exit_ok = std::all_of(summaries.begin(), summaries.end(), [](auto& r) { return r.code == 0; }) &&
                       std::all_of(rgdists.begin(), rgdists.end(), [](auto& r) { return r.code == 0; }) &&
                       std::all_of(classes.begin(), classes.end(), [](auto& r) { return r.code == 0; });

  const auto summary_rows = lines(summaries[0].out);
  std::size_t summed_n = 0;
  for (std::size_t i = 1; i < summary_rows.size(); ++i) summed_n += std::stoull(column(summary_rows[i], 1));
  std::size_t rg_counted = 0;
  const auto rg_rows = lines(rgdists[0].out);
  for (std::size_t i = 1; i < rg_rows.size(); ++i) rg_counted += std::stoull(column(rg_rows[i], 2));
  std::size_t classified = 0;
  const auto class_rows = lines(classes[0].out);
  for (std::size_t i = 1; i < class_rows.size(); ++i) classified += std::stoull(column(class_rows[i], 1));

  const std::size_t users = trajectories.size();
  const bool conserved = ingested.stats.records_ok == csv_rows && ingested.stats.records_rejected == 0 &&
                         traj_points == csv_rows && summary_rows.size() == users + 1 && summed_n == csv_rows &&
                         rg_counted == users && classified == users && users == 100;
  return {deterministic && exit_ok && conserved,
          fmt::format("{} rows, {} users; summary rows {}, sum n {}, rgdist {}, classify {}; outputs {}", csv_rows,
                      users, summary_rows.size() - 1, summed_n, rg_counted, classified,
                      deterministic ? "bit-identical" : "differ")};
}

Verdict ingestion_robustness() {
  const std::size_t rows = 1'000'000;
  synth::Rng rng(1111);
  const std::vector<std::string> broken = {
      "u{},2024-06-01T08:00:00,49.5,0.1",        // no zone designator
      "u{},2024-06-01T08:00:00Z,149.5,0.1",      // latitude out of range
      "u{},2024-06-01T08:00:00Z,49.5",           // missing field
      "u{},2024-13-01T08:00:00Z,49.5,0.1",       // month 13
      "u{},2024-06-01T08:00:00Z,abc,0.1",        // not a number
      "u{},2024-06-01T08:00:00Z,49.5,0.1,extra", // extra field
      "garbage \x01\x02 line {}",
      "u{},2024-06-01T08:00:00Z,49.5,nan",
  };
  std::string csv = "user_id,timestamp,lat,lon\n";
  csv.reserve(rows * 48);
  std::size_t injected = 0;
  for (std::size_t i = 0; i < rows; ++i) {
    const auto user = i % 5000;
    if (i % 100 == 37) {
      csv += fmt::format(fmt::runtime(broken[rng.uniform_int(0, static_cast<std::int64_t>(broken.size()) - 1)]), user);
      ++injected;
    } else {
      csv += fmt::format("u{},2024-06-01T{:02}:{:02}:{:02}Z,{:.6f},{:.6f}", user, (i / 3600) % 24, (i / 60) % 60,
                         i % 60, 49.4 + 0.2 * rng.uniform(), 0.0 + 0.3 * rng.uniform());
    }
    csv += '\n';
  }
  std::istringstream in(std::move(csv));
  const auto start = Clock::now();
  const auto result = ingest_stream(in, GeoPoint{49.5, 0.15});
  const double elapsed = seconds_since(start);
  const double throughput = static_cast<double>(rows) / elapsed;
  const bool exact = result.stats.records_rejected == injected && result.stats.records_ok == rows - injected &&
                     result.stats.lines_read == rows && result.rejects.size() == injected;
  return {exact && throughput >= 100000.0,
          fmt::format("{} rows, {} injected, {} rejected, {} accepted, {:.0f} rows/s", rows, injected,
                      result.stats.records_rejected, result.stats.records_ok, throughput)};
}

}  // namespace

int main() {
  report(1, "oracle equivalence", oracle_equivalence);
  report(2, "trace identity", trace_identity);
  report(3, "pythagorean identity", pythagorean_identity);
  report(4, "closed-form angle cross-check", closed_form_cross_check);
  report(5, "intrinsic frame contract", intrinsic_frame);
  report(6, "invariance suite", invariance);
  report(7, "fit recovery", fit_recovery);
  report(8, "rg saturation", saturation);
  report(9, "band ordering", band_ordering);
  report(10, "pipeline conservation and determinism", pipeline);
  report(11, "ingestion robustness", ingestion_robustness);
  std::cout << fmt::format("{} of 11 criteria passed", 11 - failures) << std::endl;
  return failures == 0 ? 0 : 1;
}
