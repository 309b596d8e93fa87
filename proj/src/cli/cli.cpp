#include "mobitrace/cli.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include "mobitrace/error.hpp"
#include "mobitrace/mobility_kernel.hpp"
#include "mobitrace/selftest.hpp"
#include "mobitrace/synth_oracle.hpp"
#include "mobitrace/trajectory_store.hpp"
#include "svg.hpp"

namespace mobitrace::cli {

namespace {

constexpr std::pair<std::string_view, Command> kCommands[] = {
    {"ingest", Command::Ingest},   {"summarize", Command::Summarize}, {"rescale", Command::Rescale},
    {"jumps", Command::Jumps},     {"waits", Command::Waits},         {"rgdist", Command::RgDist},
    {"fit", Command::Fit},         {"classify", Command::Classify},   {"synth", Command::Synth},
    {"selftest", Command::Selftest},
};

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    parts.push_back(s.substr(start, pos == s.npos ? s.npos : pos - start));
    if (pos == s.npos) break;
    start = pos + 1;
  }
  return parts;
}

double to_double(std::string_view flag, std::string_view text) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(v)) {
    throw UsageError(std::string(flag), fmt::format("'{}' is not a finite number", text));
  }
  return v;
}

std::uint64_t to_uint(std::string_view flag, std::string_view text) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size()) {
    throw UsageError(std::string(flag), fmt::format("'{}' is not a non-negative integer", text));
  }
  return v;
}

std::vector<std::string_view> fields(std::string_view flag, std::string_view text, char sep,
                                     std::size_t expected, std::string_view shape) {
  auto parts = split(text, sep);
  if (parts.size() != expected) {
    throw UsageError(std::string(flag), fmt::format("expected {}, got '{}'", shape, text));
  }
  return parts;
}

FitRange to_range(std::string_view flag, std::string_view text) {
  const auto p = fields(flag, text, ':', 2, "MIN:MAX");
  FitRange r{to_double(flag, p[0]), to_double(flag, p[1])};
  if (!(r.r_min > 0.0) || !(r.r_max > r.r_min)) {
    throw UsageError(std::string(flag), "need 0 < MIN < MAX");
  }
  return r;
}

Binning to_binning(std::string_view flag, std::string_view text, bool log) {
  const auto p = fields(flag, text, ':', 3, log ? "BASE:START:NBINS" : "LO:HI:NBINS");
  const double a = to_double(flag, p[0]);
  const double b = to_double(flag, p[1]);
  const auto n = static_cast<std::size_t>(to_uint(flag, p[2]));
  try {
    return log ? Binning::logarithmic(a, b, n) : Binning::linear(a, b, n);
  } catch (const Error& e) {
    throw UsageError(std::string(flag), e.what());
  }
}

Instant to_instant(std::string_view flag, std::string_view text) {
  const auto t = parse_iso8601_utc(text);
  if (!t) throw UsageError(std::string(flag), fmt::format("'{}' is not YYYY-MM-DDThh:mm:ssZ", text));
  return *t;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

// Output sink: a file when a path is configured, otherwise the caller's stream.
class Output {
 public:
  Output(const std::string& path, std::ostream& fallback) {
    if (path == "-") {
      stream_ = &fallback;
    } else {
      file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
      if (!*file_) throw UsageError("out", fmt::format("cannot open '{}' for writing", path));
      stream_ = file_.get();
    }
  }
  std::ostream& operator*() { return *stream_; }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* stream_ = nullptr;
};

IngestResult load(const RunConfig& config) {
  if (config.inputs.empty()) throw UsageError("input", "no input file given");
  std::vector<std::ifstream> files;
  files.reserve(config.inputs.size());
  std::vector<std::istream*> sources;
  for (const auto& path : config.inputs) {
    files.emplace_back(path, std::ios::binary);
    if (!files.back()) throw UsageError("input", fmt::format("cannot read '{}'", path.string()));
    sources.push_back(&files.back());
  }
  IngestResult result = ingest_stream(sources, config.ref, config.window());
  const auto& st = result.stats;
  spdlog::info("ingested {} rows: {} ok, {} rejected; reference ({:.6f}, {:.6f})", st.lines_read,
               st.records_ok, st.records_rejected, st.ref_point.lat, st.ref_point.lon);
  for (const auto& [reason, count] : st.reject_reasons) {
    spdlog::info("  rejected {}: {}", to_string(reason), count);
  }
  if (config.rejects) {
    std::ofstream out(*config.rejects, std::ios::binary);
    if (!out) throw UsageError("rejects", fmt::format("cannot open '{}'", config.rejects->string()));
    write_reject_report(out, result.rejects);
  }
  return result;
}

std::vector<MobilitySummary> summarize_all(const TrajectoryMap& trajectories) {
  std::vector<MobilitySummary> out;
  out.reserve(trajectories.size());
  for (const auto& [user, traj] : trajectories) out.push_back(summarize(traj));
  return out;
}

std::string num(double v) { return fmt::format("{:.9g}", v); }

void write_summaries(std::ostream& out, const std::vector<MobilitySummary>& summaries) {
  out << "user_id,n,x_cm,y_cm,rg_km,theta_rad,mu_km2,sigma_x_km,sigma_y_km,degenerate,"
         "top1_x,top1_y,top1_n,top2_x,top2_y,top2_n\n";
  for (const auto& s : summaries) {
    out << s.user_id << ',' << s.n << ',' << num(s.com.x) << ',' << num(s.com.y) << ',' << num(s.rg)
        << ',' << num(s.theta) << ',' << num(s.mu) << ',' << num(s.sigma_x) << ','
        << num(s.sigma_y) << ',' << (s.degenerate_axis ? 1 : 0);
    for (std::size_t i = 0; i < 2; ++i) {
      if (i < s.top_positions.size()) {
        const auto& tp = s.top_positions[i];
        out << ',' << num(tp.pos.x) << ',' << num(tp.pos.y) << ',' << tp.count;
      } else {
        out << ",,,";
      }
    }
    out << '\n';
  }
}

void maybe_histogram_svg(const RunConfig& config, const Histogram& h, const std::string& title,
                         const std::string& x_label) {
  if (!config.svg) return;
  std::vector<double> centers;
  for (std::size_t b = 0; b + 1 < h.edges.size(); ++b) {
    centers.push_back(h.kind == BinKind::Logarithmic ? std::sqrt(h.edges[b] * h.edges[b + 1])
                                                     : 0.5 * (h.edges[b] + h.edges[b + 1]));
  }
  const auto density = h.density();
  write_svg_plot(*config.svg, title, x_label, "density", {centers, density, true},
                 h.kind == BinKind::Logarithmic);
}

int run_selftest_command(std::ostream& out) {
  const auto results = run_selftest();
  write_selftest_report(out, results);
  const bool ok = std::all_of(results.begin(), results.end(), [](const auto& r) { return r.passed; });
  return ok ? kExitOk : kExitData;
}

spdlog::level::level_enum level_from_env() {
  const char* env = std::getenv("MOBITRACE_LOG");
  const std::string_view v = env ? env : "";
  if (v == "error") return spdlog::level::err;
  if (v == "info") return spdlog::level::info;
  if (v == "debug") return spdlog::level::debug;
  return spdlog::level::warn;
}

void configure_logging(bool quiet) {
  static const auto logger = [] {
    auto l = spdlog::stderr_logger_st("mobitrace");
    l->set_pattern("[%l] %v");
    return l;
  }();
  spdlog::set_default_logger(logger);
  spdlog::set_level(quiet ? spdlog::level::err : level_from_env());
}

}  // namespace

std::optional<Command> parse_command(std::string_view name) {
  for (const auto& [key, command] : kCommands) {
    if (key == name) return command;
  }
  return std::nullopt;
}

std::optional<TimeWindow> RunConfig::window() const {
  if (!from && !to) return std::nullopt;
  return TimeWindow{from.value_or(Instant::min()), to.value_or(Instant::max())};
}

void apply_setting(RunConfig& c, std::string_view key, std::string_view value) {
  value = trim(value);
  if (key == "input") {
    c.inputs.emplace_back(std::string(value));
  } else if (key == "out") {
    c.out = std::string(value);
  } else if (key == "ref") {
    if (value == "auto") {
      c.ref.reset();
    } else {
      const auto p = fields(key, value, ',', 2, "auto or LAT,LON");
      const GeoPoint g{to_double(key, p[0]), to_double(key, p[1])};
      if (!g.valid()) throw UsageError("ref", "latitude or longitude out of range");
      c.ref = g;
    }
  } else if (key == "from") {
    c.from = to_instant(key, value);
  } else if (key == "to") {
    c.to = to_instant(key, value);
  } else if (key == "log-bins") {
    c.binning = to_binning(key, value, true);
  } else if (key == "lin-bins") {
    c.binning = to_binning(key, value, false);
  } else if (key == "fit-range") {
    c.fit_range = to_range(key, value);
  } else if (key == "r0") {
    if (value == "fixed") c.r0_mode = R0Mode::FixedZero;
    else if (value == "free") c.r0_mode = R0Mode::Free;
    else throw UsageError("r0", fmt::format("expected fixed or free, got '{}'", value));
  } else if (key == "users") {
    c.users = static_cast<std::size_t>(to_uint(key, value));
    if (c.users < 1) throw UsageError("users", "need at least one user");
  } else if (key == "seed") {
    c.seed = to_uint(key, value);
  } else if (key == "events") {
    const auto p = fields(key, value, ':', 2, "MIN:MAX");
    c.events_min = static_cast<std::size_t>(to_uint(key, p[0]));
    c.events_max = static_cast<std::size_t>(to_uint(key, p[1]));
    if (c.events_min < 1 || c.events_max < c.events_min) throw UsageError("events", "need 1 <= MIN <= MAX");
  } else if (key == "beta") {
    c.beta = to_double(key, value);
  } else if (key == "kappa") {
    c.kappa = to_double(key, value);
    if (!(c.kappa > 0.0)) throw UsageError("kappa", "must be positive");
  } else if (key == "rg-range") {
    c.rg_range = to_range(key, value);
  } else if (key == "commuters") {
    c.commuter_fraction = to_double(key, value);
    if (c.commuter_fraction < 0.0 || c.commuter_fraction > 1.0) throw UsageError("commuters", "must lie in [0, 1]");
  } else if (key == "svg") {
    c.svg = std::string(value);
  } else if (key == "rejects") {
    c.rejects = std::string(value);
  } else if (key == "quiet") {
    c.quiet = value.empty() || value == "true" || value == "1";
  } else {
    throw UsageError(std::string(key), "unknown setting");
  }
}

void load_config_file(RunConfig& config, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("config", fmt::format("cannot read '{}'", path.string()));
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view text = trim(line);
    if (text.empty() || text.front() == '#') continue;
    const auto eq = text.find('=');
    if (eq == text.npos) {
      throw UsageError("config", fmt::format("{}:{}: expected key=value", path.string(), line_no));
    }
    apply_setting(config, trim(text.substr(0, eq)), text.substr(eq + 1));
  }
}

int run(Command command, const RunConfig& config, std::ostream& stdout_sink) {
  if (command == Command::Selftest) {
    Output out(config.out, stdout_sink);
    return run_selftest_command(*out);
  }

  if (command == Command::Synth) {
    synth::PopulationSpec spec;
    spec.n_users = config.users;
    spec.master_seed = config.seed;
    spec.rg_law = {config.beta, config.kappa, 0.0};
    spec.rg_range = config.rg_range;
    spec.events_min = config.events_min;
    spec.events_max = config.events_max;
    spec.commuter_fraction = config.commuter_fraction;
    const auto records = synth::gen_population(spec);
    Output out(config.out, stdout_sink);
    synth::write_cdr_csv(*out, records, config.ref.value_or(synth::kDefaultAnchor));
    spdlog::info("synth: {} users, {} records", spec.n_users, records.size());
    return kExitOk;
  }

  const IngestResult ingested = load(config);
  const TrajectoryMap trajectories = build_trajectories(ingested.records);

  // Open the output only once the input has been read successfully.
  switch (command) {
    case Command::Ingest: {
      Output out(config.out, stdout_sink);
      write_trajectory_dump(*out, trajectories);
      break;
    }
    case Command::Summarize: {
      const auto summaries = summarize_all(trajectories);
      Output out(config.out, stdout_sink);
      write_summaries(*out, summaries);
      break;
    }
    case Command::Rescale: {
      std::vector<IntrinsicTrajectory> frames;
      for (const auto& [user, traj] : trajectories) {
        if (radius_of_gyration(traj) > 0.0) {
          frames.push_back(to_intrinsic_frame(traj));
        } else {
          spdlog::info("rescale: skipping {} (all points coincide)", user);
        }
      }
      Output out(config.out, stdout_sink);
      *out << "user_id,t,u,v\n";
      std::vector<double> us, vs;
      for (const auto& f : frames) {
        for (const auto& p : f.points) {
          *out << f.user_id << ',' << format_iso8601_utc(p.t) << ',' << num(p.u) << ',' << num(p.v) << '\n';
          us.push_back(p.u);
          vs.push_back(p.v);
        }
      }
      if (config.svg) write_svg_plot(*config.svg, "Scaled trajectories", "u", "v", {us, vs, false}, false);
      break;
    }
    case Command::Jumps:
    case Command::Waits: {
      const bool jumps = command == Command::Jumps;
      Histogram h(config.binning.value_or(jumps ? Binning::logarithmic(2.0, 0.1, 12)
                                                : Binning::logarithmic(2.0, 1.0, 20)));
      std::size_t skipped = 0;
      for (const auto& [user, traj] : trajectories) {
        if (traj.size() < 2) {
          ++skipped;
          continue;
        }
        if (jumps) {
          h.add(jump_sizes(traj));
        } else {
          for (auto dt : waiting_times(traj)) h.add(static_cast<double>(dt));
        }
      }
      spdlog::info("{}: {} values, {} single-point users skipped", jumps ? "jumps" : "waits", h.total, skipped);
      Output out(config.out, stdout_sink);
      write_histogram(*out, h);
      maybe_histogram_svg(config, h, jumps ? "Jump sizes" : "Waiting times", jumps ? "dr (km)" : "dt (s)");
      break;
    }
    case Command::RgDist: {
      const auto summaries = summarize_all(trajectories);
      const Histogram h = rg_distribution(summaries, config.binning.value_or(default_rg_binning()));
      Output out(config.out, stdout_sink);
      write_histogram(*out, h);
      maybe_histogram_svg(config, h, "P(rg)", "rg (km)");
      break;
    }
    case Command::Fit: {
      const auto summaries = summarize_all(trajectories);
      std::vector<double> rg;
      rg.reserve(summaries.size());
      for (const auto& s : summaries) rg.push_back(s.rg);
      const PowerLawFit fit = fit_truncated_power_law(rg, config.r0_mode, config.fit_range);
      Output out(config.out, stdout_sink);
      write_fit_report(*out, fit);
      break;
    }
    case Command::Classify: {
      const auto summaries = summarize_all(trajectories);
      const auto census = band_census(summaries);
      Output out(config.out, stdout_sink);
      write_band_census(*out, census);
      break;
    }
    case Command::Synth:
    case Command::Selftest:
      break;
  }
  return kExitOk;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"mobitrace: mobility analytics for call-detail-record streams"};
  app.set_version_flag("--version", "mobitrace 0.1.0");

  std::string command_name;
  std::vector<std::string> inputs;
  std::string config_path;
  bool quiet = false;

  app.add_option("command", command_name,
                 "ingest | summarize | rescale | jumps | waits | rgdist | fit | classify | synth | selftest")
      ->required();
  app.add_option("--config", config_path, "key=value settings file (flags take precedence)");
  app.add_option("--input", inputs, "input CSV (repeatable)");

  // Flags forwarded verbatim to apply_setting(), in this order.
  const std::vector<std::pair<std::string, std::string>> forwarded = {
      {"out", "output path, - for standard output"},
      {"ref", "projection reference: auto or LAT,LON"},
      {"from", "window start, YYYY-MM-DDThh:mm:ssZ"},
      {"to", "window end, YYYY-MM-DDThh:mm:ssZ"},
      {"log-bins", "BASE:START:NBINS"},
      {"lin-bins", "LO:HI:NBINS"},
      {"fit-range", "MIN:MAX in km"},
      {"r0", "fixed | free"},
      {"users", "synthetic population size"},
      {"seed", "master seed"},
      {"events", "events per synthetic user, MIN:MAX"},
      {"beta", "synthetic rg exponent"},
      {"kappa", "synthetic rg cutoff, km"},
      {"rg-range", "synthetic rg range MIN:MAX, km"},
      {"commuters", "share of two-cluster synthetic users"},
      {"svg", "also render an SVG plot to this path"},
      {"rejects", "write the rejected-row report to this path"},
  };
  std::vector<std::string> values(forwarded.size());
  std::vector<CLI::Option*> options;
  for (std::size_t i = 0; i < forwarded.size(); ++i) {
    options.push_back(app.add_option("--" + forwarded[i].first, values[i], forwarded[i].second));
  }
  app.add_flag("--quiet", quiet, "only report errors");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
  }

  try {
    const auto command = parse_command(command_name);
    if (!command) throw UsageError("command", fmt::format("unknown command '{}'", command_name));

    RunConfig config;
    if (!config_path.empty()) load_config_file(config, config_path);
    if (!inputs.empty()) {
      config.inputs.clear();
      for (const auto& in : inputs) config.inputs.emplace_back(in);
    }
    for (std::size_t i = 0; i < forwarded.size(); ++i) {
      if (options[i]->count() > 0) apply_setting(config, forwarded[i].first, values[i]);
    }
    if (quiet) config.quiet = true;

    configure_logging(config.quiet);
    return run(*command, config, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    err << "data error: " << e.what() << '\n';
    return kExitData;
  }
}

}  // namespace mobitrace::cli
