#include "fds/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <sstream>

#include "fds/constructions.hpp"
#include "fds/errors.hpp"
#include "fds/io.hpp"
#include "fds/plot.hpp"
#include "fds/spectra.hpp"

namespace fds::cli {
namespace {

// Keys a --config file may set; each maps to the option of the same name.
const std::vector<std::string> kConfigKeys = {
    "s",     "t",         "m0",       "blocks",    "target", "samples", "shifts",   "depth",   "input",
    "output", "theta-grid", "m-range", "box-range", "tol",    "neighbors", "workers", "epsilons", "runs"};

/// String-valued options that a config file can fill in when the command
/// line leaves them out.
class Params {
 public:
  CLI::Option* add(CLI::App* app, const std::string& flags, const std::string& key, const std::string& help,
                   const std::string& fallback = "") {
    values_[key] = fallback;
    auto* opt = app->add_option(flags, values_[key], help);
    if (!fallback.empty()) opt->default_str(fallback);
    options_[key] = opt;
    return opt;
  }

  void apply_config(const std::string& path) {
    std::istringstream in(read_file(path));
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
      ++n;
      auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      auto eq = line.find('=');
      auto strip = [](std::string s) {
        auto b = s.find_first_not_of(" \t\r");
        auto e = s.find_last_not_of(" \t\r");
        return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
      };
      if (strip(line).empty()) continue;
      if (eq == std::string::npos) throw ParseError(path + ":" + std::to_string(n) + ": expected 'key = value'");
      std::string key = strip(line.substr(0, eq));
      std::string value = strip(line.substr(eq + 1));
      std::replace(key.begin(), key.end(), '_', '-');
      if (std::find(kConfigKeys.begin(), kConfigKeys.end(), key) == kConfigKeys.end()) {
        throw ParseError(path + ":" + std::to_string(n) + ": unknown key '" + key + "'");
      }
      auto it = options_.find(key);
      if (it == options_.end() || it->second->count() > 0) continue;  // not ours, or given on the command line
      values_[key] = value;
    }
  }

  void set(const std::string& key, std::string value) { values_[key] = std::move(value); }
  bool has(const std::string& key) const { return !values_.at(key).empty(); }
  const std::string& get(const std::string& key) const { return values_.at(key); }
  std::string require(const std::string& key) const {
    if (!has(key)) throw ParseError("missing --" + key);
    return get(key);
  }

 private:
  std::map<std::string, std::string> values_;
  std::map<std::string, CLI::Option*> options_;
};

Level parse_count(const std::string& text, const std::string& what) {
  Rational r = Rational::parse(text);
  if (r.den() != 1) throw ParseError(what + " must be an integer, got '" + text + "'");
  return r.num();
}

double parse_tol(const std::string& text) {
  double tol = Rational::parse(text).to_double();
  if (tol < 0) throw ParseError("tolerance must be non-negative");
  return tol;
}

std::vector<Rational> parse_rational_list(const std::string& text) {
  std::vector<Rational> out;
  std::stringstream ss(text);
  std::string piece;
  while (std::getline(ss, piece, ',')) out.push_back(Rational::parse(piece));
  if (out.empty()) throw ParseError("empty list");
  return out;
}

std::vector<Level> parse_shifts(const std::string& spec, std::size_t count) {
  if (spec.empty() || spec == "doubling") return doubling_shifts(count);
  if (spec.rfind("linear:", 0) == 0) return linear_shifts(count, parse_count(spec.substr(7), "linear shift step"));
  std::vector<Level> out;
  for (const Rational& r : parse_rational_list(spec)) {
    if (r.den() != 1) throw ParseError("shifts must be integers");
    out.push_back(r.num());
  }
  return out;
}

NeighborMode parse_neighbors(const std::string& text) {
  if (text == "on") return NeighborMode::on;
  if (text == "off" || text.empty()) return NeighborMode::off;
  throw ParseError("--neighbors takes on or off, got '" + text + "'");
}

EstimatorOptions estimator_options(const Params& p) {
  EstimatorOptions opts;
  opts.neighbors = parse_neighbors(p.get("neighbors"));
  Level workers = parse_count(p.get("workers"), "--workers");
  if (workers < 1 || workers > 256) throw ParseError("--workers must lie in [1, 256]");
  opts.workers = static_cast<unsigned>(workers);
  return opts;
}

std::optional<LevelRange> optional_range(const Params& p, const std::string& key) {
  if (!p.has(key)) return std::nullopt;
  return parse_level_range(p.get(key));
}

void add_common(Params& p, CLI::App* app) {
  p.add(app, "--input,-i", "input", "set file");
  p.add(app, "--output,-o", "output", "output file");
  p.add(app, "--theta-grid", "theta-grid", "theta grid a:b:c or a comma list", "0.1:0.9:0.1");
  p.add(app, "--m-range", "m-range", "coarse level range lo:hi");
  p.add(app, "--box-range", "box-range", "level range for the box estimate lo:hi");
  p.add(app, "--neighbors", "neighbors", "count neighbouring intervals in tree windows: on|off", "off");
  p.add(app, "--workers", "workers", "threads for theta-grid evaluation", "1");
  p.add(app, "--epsilons", "epsilons", "quasi-Assouad epsilons", "0.1,0.05,0.02");
}

// ---------------------------------------------------------------------------

int cmd_construct(const std::string& generator, const Params& p, std::ostream& out) {
  const std::string output = p.require("output");
  SetModel set;
  std::ostringstream summary;
  if (generator == "two-phase") {
    TwoPhaseParams params(Rational::parse(p.require("s")), Rational::parse(p.require("t")),
                          parse_count(p.get("m0"), "m0"), static_cast<int>(parse_count(p.get("blocks"), "blocks")));
    auto s = two_phase_schedule(params);
    summary << "two-phase schedule s=" << params.s.str() << " t=" << params.t.str() << ": depth " << s.depth() << ", "
            << s.runs().size() << " runs";
    set = std::move(s);
  } else if (generator == "concave-union") {
    Polynomial f = Polynomial::parse(p.require("target"));
    if (auto bad = check_admissible(f); !bad.empty()) throw DomainError("target is not admissible: " + bad.front());
    const auto count = static_cast<std::size_t>(parse_count(p.get("samples"), "components"));
    if (count < 1) throw DomainError("at least one component is required");
    auto target = sample_target(f, count);
    auto cs = concave_union(target, parse_count(p.get("m0"), "m0"), static_cast<int>(parse_count(p.get("blocks"), "blocks")),
                            parse_shifts(p.get("shifts"), count));
    // Gap between f and the finite envelope, on a fine grid.
    auto params = component_parameters(target);
    std::vector<std::pair<double, double>> dparams;
    for (auto& [s, t] : params) dparams.emplace_back(s.to_double(), t.to_double());
    double gap = 0.0;
    for (int i = 1; i < 1000; ++i) {
      double theta = i / 1000.0;
      gap = std::max(gap, f(theta) - finite_sup_oracle(dparams, theta));
    }
    summary << "concave-union: " << cs.components().size() << " components, depth " << cs.depth()
            << ", envelope gap " << format_double(gap);
    set = std::move(cs);
  } else if (generator == "geometric") {
    auto t = geometric_sequence_tree(parse_count(p.get("depth"), "depth"));
    summary << "geometric sequence tree: depth " << t.depth() << ", " << t.node_count() << " nodes";
    set = std::move(t);
  } else if (generator == "full" || generator == "path") {
    Level depth = parse_count(p.get("depth"), "depth");
    auto t = generator == "full" ? DyadicTree::full(depth) : DyadicTree::leftmost_path(depth);
    summary << generator << " tree: depth " << t.depth() << ", " << t.node_count() << " nodes";
    set = std::move(t);
  } else if (generator == "from-schedule") {
    BranchingSchedule s;
    if (p.has("runs")) {
      s = BranchingSchedule(parse_run_list(p.get("runs")));
    } else {
      SetModel in = load_set(p.require("input"));
      if (!std::holds_alternative<BranchingSchedule>(in)) throw ParseError("from-schedule needs an fds-schedule input");
      s = std::get<BranchingSchedule>(in);
    }
    auto t = materialize(s);
    summary << "materialized schedule: depth " << t.depth() << ", " << t.node_count() << " nodes";
    set = std::move(t);
  } else {
    throw ParseError("unknown generator '" + generator + "'");
  }
  save_set(output, set);
  out << summary.str() << " -> " << output << '\n';
  return ok;
}

int cmd_estimate(const std::string& mode, const Params& p, std::ostream& out) {
  SetModel set = load_set(p.require("input"));
  SpectrumEstimator est(set, estimator_options(p));
  SpectrumEstimate e;
  std::ostringstream summary;
  summary << mode << ' ' << p.get("input") << ": ";
  if (mode == "spectrum" || mode == "upper") {
    auto grid = parse_theta_grid(p.get("theta-grid"));
    e = mode == "spectrum" ? est.spectrum(grid, optional_range(p, "m-range")) : est.upper(grid, optional_range(p, "m-range"));
    auto best = std::max_element(e.values.begin(), e.values.end()) - e.values.begin();
    summary << e.values.size() << " rows, levels [" << e.m_range.lo << "," << e.m_range.hi << "], max "
            << format_double(e.values[best]) << " at theta=" << e.theta_grid[best].str();
  } else if (mode == "box") {
    auto range = optional_range(p, "box-range");
    if (!range) range = optional_range(p, "m-range");
    e = est.box(range);
    summary << "box " << format_double(e.values[0]) << " at m=" << e.witnesses[0].m << ", levels [" << e.m_range.lo
            << "," << e.m_range.hi << "]";
  } else if (mode == "qa") {
    auto eps = parse_rational_list(p.get("epsilons"));
    auto qa = est.quasi_assouad(eps, optional_range(p, "m-range"));
    e = qa.upper;
    summary << "headline " << format_double(qa.headline) << ", trend " << qa.trend;
  } else {
    throw ParseError("unknown estimate mode '" + mode + "'");
  }
  std::ostringstream csv;
  write_csv(csv, e);
  if (p.has("output")) {
    write_file(p.get("output"), csv.str());
    out << summary.str() << " -> " << p.get("output") << '\n';
  } else {
    out << csv.str();
  }
  return ok;
}

int cmd_verify(const std::vector<std::string>& checks, const Params& p, std::ostream& out) {
  SetModel set = load_set(p.require("input"));
  SpectrumEstimator est(set, estimator_options(p));
  auto grid = parse_theta_grid(p.get("theta-grid"));
  const double tol = parse_tol(p.get("tol"));
  VerifyOptions opts;
  opts.m_range = optional_range(p, "m-range");
  opts.box_range = optional_range(p, "box-range");
  opts.epsilons = parse_rational_list(p.get("epsilons"));
  std::vector<int> ns;
  for (const Rational& r : parse_rational_list(p.get("n"))) {
    if (r.den() != 1 || r.num() < 2 || r.num() > 64) throw ParseError("--n values must be integers in [2, 64]");
    ns.push_back(static_cast<int>(r.num()));
  }

  std::vector<std::string> names;
  for (const auto& c : checks) {
    std::stringstream ss(c);
    std::string piece;
    while (std::getline(ss, piece, ',')) names.push_back(piece);
  }
  if (names.empty()) names = {"main-theorem", "bound", "chain", "nthroot"};
  for (const auto& n : names) {
    if (n != "main-theorem" && n != "bound" && n != "chain" && n != "nthroot") {
      throw ParseError("unknown check '" + n + "' (expected main-theorem, bound, chain or nthroot)");
    }
  }

  VerificationReport report;
  for (const auto& n : names) {
    VerificationReport r;
    if (n == "main-theorem") r = verify_main_theorem(est, grid, opts);
    if (n == "bound") r = verify_bound(est, grid, tol, opts);
    if (n == "chain") r = verify_chain(est, grid, tol, opts);
    if (n == "nthroot") r = verify_nthroot(est, grid, ns, tol, opts);
    for (auto& c : r.checks) report.checks.push_back(std::move(c));
  }
  std::ostringstream text;
  write_report(text, report);
  out << text.str();
  if (p.has("output")) write_file(p.get("output"), text.str());
  return report.passed() ? ok : check_failed;
}

int cmd_plot(const std::vector<std::string>& csvs, const Params& p, std::ostream& out) {
  std::vector<PlotSeries> series;
  for (const auto& path : csvs) {
    std::istringstream in(read_file(path));
    series.push_back({std::filesystem::path(path).stem().string(), read_csv(in)});
  }
  PlotOptions opts;
  if (p.has("overlay-u")) {
    auto st = parse_rational_list(p.get("overlay-u"));
    if (st.size() != 2) throw ParseError("--overlay-u takes s,t");
    closed_form_u(st[0], st[1], Rational(1, 2));  // validates 0 < s < t <= 1
    opts.overlay_u = std::make_pair(st[0], st[1]);
  }
  if (p.has("overlay-target")) opts.overlay_target = Polynomial::parse(p.get("overlay-target"));
  std::string svg = render_svg(series, opts);
  if (p.has("output")) {
    write_file(p.get("output"), svg);
    out << "plot: " << series.size() << " series -> " << p.get("output") << '\n';
  } else {
    out << svg;
  }
  return ok;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Assouad-type spectra of dyadic Moran sets: construct, estimate, verify, plot", "fds"};
  app.require_subcommand(1);
  std::string config;
  app.add_option("--config", config, "key = value file; command-line flags take precedence");

  Params cp;
  std::string generator;
  auto* construct = app.add_subcommand("construct", "build a set and write it to a file");
  construct->add_option("generator", generator, "two-phase | concave-union | geometric | full | path | from-schedule")
      ->required()
      ->check(CLI::IsMember({"two-phase", "concave-union", "geometric", "full", "path", "from-schedule"}));
  cp.add(construct, "--input,-i", "input", "schedule file (from-schedule)");
  cp.add(construct, "--output,-o", "output", "set file to write");
  cp.add(construct, "--s", "s", "two-phase lower exponent");
  cp.add(construct, "--t", "t", "two-phase upper exponent");
  cp.add(construct, "--m0", "m0", "first block boundary", "4");
  cp.add(construct, "--blocks", "blocks", "number of squared blocks", "3");
  cp.add(construct, "--target", "target", "target polynomial coefficients, constant first");
  cp.add(construct, "--components,--samples", "samples", "number of enumerated rationals", "8");
  cp.add(construct, "--shifts", "shifts", "doubling | linear:<c> | e1,e2,...", "doubling");
  cp.add(construct, "--depth", "depth", "tree depth", "10");
  cp.add(construct, "--runs", "runs", "schedule runs <count>x<c>,... (from-schedule)");
  std::string shift_linear;
  construct->add_option("--shift-linear", shift_linear, "shorthand for --shifts linear:<c>");
  construct->add_option("--config", config, "key = value file");

  Params ep;
  std::string mode;
  auto* estimate = app.add_subcommand("estimate", "estimate a spectrum and write CSV");
  estimate->add_option("mode", mode, "spectrum | upper | box | qa")
      ->required()
      ->check(CLI::IsMember({"spectrum", "upper", "box", "qa"}));
  add_common(ep, estimate);
  estimate->add_option("--config", config, "key = value file");

  Params vp;
  std::vector<std::string> checks;
  auto* verify = app.add_subcommand("verify", "check the spectrum relations; exit 1 if any fails");
  add_common(vp, verify);
  verify->add_option("--check", checks, "main-theorem, bound, chain, nthroot (default: all)");
  vp.add(verify, "--tol", "tol", "tolerance for bound, chain and nthroot", "0.05");
  vp.add(verify, "--n", "n", "root orders for nthroot", "2,3");
  verify->add_option("--config", config, "key = value file");

  Params pp;
  std::vector<std::string> csvs;
  auto* plot = app.add_subcommand("plot", "render CSV estimates as SVG");
  plot->add_option("csv", csvs, "CSV files")->required();
  pp.add(plot, "--output,-o", "output", "SVG file to write");
  pp.add(plot, "--overlay-u", "overlay-u", "overlay min{s/(1-theta), t} given s,t");
  pp.add(plot, "--overlay-target", "overlay-target", "overlay a target polynomial");
  plot->add_option("--config", config, "key = value file");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? ok : usage;
  }

  try {
    if (construct->parsed()) {
      if (!config.empty()) cp.apply_config(config);
      if (!shift_linear.empty()) cp.set("shifts", "linear:" + shift_linear);
      return cmd_construct(generator, cp, out);
    }
    if (estimate->parsed()) {
      if (!config.empty()) ep.apply_config(config);
      return cmd_estimate(mode, ep, out);
    }
    if (verify->parsed()) {
      if (!config.empty()) vp.apply_config(config);
      return cmd_verify(checks, vp, out);
    }
    if (plot->parsed()) {
      if (!config.empty()) pp.apply_config(config);
      return cmd_plot(csvs, pp, out);
    }
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return io;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return usage;
  }
  return usage;
}

}  // namespace fds::cli
