#include "fds/spectra.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <thread>

#include "fds/errors.hpp"
#include "window_model.hpp"

namespace fds {
namespace {

// Runs fn(0..n-1) on up to `workers` threads. Every index writes its own slot,
// so the result never depends on scheduling; the first failing index (by
// position) is rethrown.
template <typename Fn>
void parallel_for(std::size_t n, unsigned workers, Fn fn) {
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(n)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto body = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < n;) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(body);
  body();
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", x);
  return buf;
}

void require_theta(const Rational& theta) {
  if (theta <= Rational(0) || theta >= Rational(1)) {
    throw DomainError("theta " + theta.str() + " outside (0,1)");
  }
}

void require_levels(LevelRange r, Level depth) {
  if (r.lo < 1 || r.hi < r.lo || r.hi > depth) {
    throw DomainError("level range [" + std::to_string(r.lo) + ", " + std::to_string(r.hi) + "] not within [1, " +
                      std::to_string(depth) + "]");
  }
}

// Windows (m, ceil(m/theta)) must fit for at least the smallest m of the range.
void require_fit(LevelRange r, Level depth, const Rational& theta) {
  require_theta(theta);
  if (max_coarse_level(depth, theta) < r.lo) {
    throw DomainError("window (" + std::to_string(r.lo) + ", " + std::to_string(fine_level(r.lo, theta)) +
                      ") at theta = " + theta.str() + " exceeds depth " + std::to_string(depth));
  }
}

Witness to_witness(const Candidate& c) { return {c.m, c.m_prime, c.node}; }

Level isqrt(Level n) {
  auto r = static_cast<Level>(std::sqrt(static_cast<double>(n)));
  while (r * r > n) --r;
  while ((r + 1) * (r + 1) <= n) ++r;
  return r;
}

}  // namespace

Level depth_of(const SetModel& set) {
  return std::visit([](const auto& s) { return s.depth(); }, set);
}

const char* to_string(EstimateMode mode) {
  switch (mode) {
    case EstimateMode::assouad_spectrum: return "assouad-spectrum";
    case EstimateMode::upper_spectrum: return "upper-spectrum";
    case EstimateMode::box: return "box";
    case EstimateMode::quasi_assouad: return "quasi-assouad";
  }
  return "?";
}

LevelRange default_range(const SetModel& set) {
  const Level d = depth_of(set);
  Level lo = std::max<Level>(1, isqrt(d));
  if (const auto* cs = std::get_if<CompositeSet>(&set)) lo += cs->max_shift();
  return {std::min(lo, std::max<Level>(d, 1)), d};
}

LevelRange default_box_range(const SetModel& set) {
  const Level d = depth_of(set);
  return {std::max<Level>(1, d / 2), d};
}

std::vector<Rational> default_epsilons() { return {Rational(1, 10), Rational(1, 20), Rational(1, 50)}; }

SpectrumEstimator::SpectrumEstimator(const SetModel& set, EstimatorOptions options)
    : model_(make_window_model(set, options.neighbors)),
      options_(options),
      default_range_(default_range(set)),
      default_box_range_(default_box_range(set)) {}

SpectrumEstimator::~SpectrumEstimator() = default;
SpectrumEstimator::SpectrumEstimator(SpectrumEstimator&&) noexcept = default;
SpectrumEstimator& SpectrumEstimator::operator=(SpectrumEstimator&&) noexcept = default;

Level SpectrumEstimator::depth() const { return model_->depth(); }

namespace {

// With the default range, shallow sets start lower so that every theta keeps
// at least one window; an explicit range is used as given.
LevelRange range_for(LevelRange r, bool defaulted, Level depth, const Rational& theta) {
  if (defaulted) r.lo = std::max<Level>(1, std::min(r.lo, max_coarse_level(depth, theta)));
  require_fit(r, depth, theta);
  return r;
}

}  // namespace

LevelRange SpectrumEstimator::coarse_range(std::optional<LevelRange> range) const {
  LevelRange r = range.value_or(default_range_);
  require_levels(r, depth());
  return r;
}

SpectrumPoint SpectrumEstimator::window(Level m, Level m_prime) const {
  auto c = model_->window(m, m_prime);
  return {c.value, c.m, c.m_prime, c.node};
}

SpectrumEstimate SpectrumEstimator::spectrum(std::span<const Rational> grid, std::optional<LevelRange> range) const {
  SpectrumEstimate out;
  out.mode = EstimateMode::assouad_spectrum;
  out.m_range = coarse_range(range);
  out.theta_grid.assign(grid.begin(), grid.end());
  std::vector<LevelRange> ranges;
  for (const Rational& theta : grid) ranges.push_back(range_for(out.m_range, !range, depth(), theta));
  std::vector<Candidate> found(grid.size());
  parallel_for(grid.size(), options_.workers,
               [&](std::size_t i) { found[i] = model_->spectrum(grid[i], ranges[i].lo, ranges[i].hi); });
  for (const auto& c : found) {
    out.values.push_back(c.value);
    out.witnesses.push_back(to_witness(c));
  }
  return out;
}

SpectrumEstimate SpectrumEstimator::upper(std::span<const Rational> grid, std::optional<LevelRange> range) const {
  SpectrumEstimate out;
  out.mode = EstimateMode::upper_spectrum;
  out.m_range = coarse_range(range);
  out.theta_grid.assign(grid.begin(), grid.end());
  std::vector<LevelRange> ranges;
  for (const Rational& theta : grid) ranges.push_back(range_for(out.m_range, !range, depth(), theta));
  std::vector<Candidate> found(grid.size());
  parallel_for(grid.size(), options_.workers,
               [&](std::size_t i) { found[i] = model_->upper(grid[i], ranges[i].lo, ranges[i].hi); });
  for (const auto& c : found) {
    out.values.push_back(c.value);
    out.witnesses.push_back(to_witness(c));
  }
  return out;
}

SpectrumEstimate SpectrumEstimator::upper_by_ratio(std::span<const Rational> grid,
                                                   std::optional<LevelRange> range) const {
  SpectrumEstimate out;
  out.mode = EstimateMode::upper_spectrum;
  out.m_range = coarse_range(range);
  out.theta_grid.assign(grid.begin(), grid.end());
  std::vector<LevelRange> ranges;
  for (const Rational& theta : grid) ranges.push_back(range_for(out.m_range, !range, depth(), theta));
  // one enumeration per distinct coarse start
  std::vector<Candidate> found(grid.size());
  std::vector<bool> done(grid.size(), false);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (done[i]) continue;
    std::vector<std::size_t> group;
    std::vector<Rational> thetas;
    for (std::size_t j = i; j < grid.size(); ++j) {
      if (!done[j] && ranges[j].lo == ranges[i].lo) {
        group.push_back(j);
        thetas.push_back(grid[j]);
        done[j] = true;
      }
    }
    auto results = model_->upper_by_ratio(thetas, ranges[i].lo, ranges[i].hi);
    for (std::size_t k = 0; k < group.size(); ++k) found[group[k]] = std::move(results[k]);
  }
  for (const auto& c : found) {
    out.values.push_back(c.value);
    out.witnesses.push_back(to_witness(c));
  }
  return out;
}

SpectrumEstimate SpectrumEstimator::box(std::optional<LevelRange> range) const {
  SpectrumEstimate out;
  out.mode = EstimateMode::box;
  out.m_range = range.value_or(default_box_range_);
  require_levels(out.m_range, depth());
  double best = -1.0;
  Level best_m = out.m_range.lo;
  for (Level m = out.m_range.lo; m <= out.m_range.hi; ++m) {
    double v = model_->log2_level_count(m) / static_cast<double>(m);
    if (v > best) {
      best = v;
      best_m = m;
    }
  }
  out.values.push_back(best);
  out.witnesses.push_back({best_m, 0, Index(0)});
  return out;
}

QuasiAssouadEstimate SpectrumEstimator::quasi_assouad(std::span<const Rational> epsilons,
                                                      std::optional<LevelRange> range) const {
  if (epsilons.empty()) throw DomainError("at least one epsilon is required");
  QuasiAssouadEstimate out;
  out.epsilons.assign(epsilons.begin(), epsilons.end());
  std::vector<Rational> thetas;
  for (const Rational& eps : epsilons) {
    if (eps <= Rational(0) || eps >= Rational(1)) throw DomainError("epsilon " + eps.str() + " outside (0,1)");
    thetas.push_back(Rational(1) - eps);
  }
  out.upper = upper(thetas, range);
  out.upper.mode = EstimateMode::quasi_assouad;

  std::vector<std::size_t> order(epsilons.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return epsilons[b] < epsilons[a]; });
  out.headline = out.upper.values[order.back()];
  out.headline_witness = out.upper.witnesses[order.back()];
  for (std::size_t k = 0; k < order.size(); ++k) {
    double v = out.upper.values[order[k]];
    if (k > 0) {
      out.trend += ' ';
      if (v < out.upper.values[order[k - 1]]) out.non_decreasing_as_epsilon_shrinks = false;
    }
    out.trend += "eps=" + epsilons[order[k]].str() + ":" + fmt(v);
  }
  return out;
}

SpectrumEstimate estimate_spectrum(const SetModel& set, std::span<const Rational> grid,
                                   std::optional<LevelRange> range, EstimatorOptions options) {
  return SpectrumEstimator(set, options).spectrum(grid, range);
}

SpectrumEstimate estimate_upper(const SetModel& set, std::span<const Rational> grid,
                                std::optional<LevelRange> range, EstimatorOptions options) {
  return SpectrumEstimator(set, options).upper(grid, range);
}

SpectrumEstimate estimate_box(const SetModel& set, std::optional<LevelRange> range, EstimatorOptions options) {
  return SpectrumEstimator(set, options).box(range);
}

QuasiAssouadEstimate estimate_quasi_assouad(const SetModel& set, std::span<const Rational> epsilons,
                                            std::optional<LevelRange> range, EstimatorOptions options) {
  return SpectrumEstimator(set, options).quasi_assouad(epsilons, range);
}

// ---------------------------------------------------------------------------
// verifiers

bool VerificationReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckOutcome& c) { return c.passed; });
}

namespace {

constexpr std::size_t kMaxWitnessLines = 8;

std::string window_text(const Witness& w) {
  return "(" + std::to_string(w.m) + "," + std::to_string(w.m_prime) + ")";
}

// Accumulates margins (lhs - rhs) of a claimed lhs <= rhs.
class MarginCheck {
 public:
  MarginCheck(std::string name, double tol) {
    out_.name = std::move(name);
    out_.tol = tol;
    out_.worst = -std::numeric_limits<double>::infinity();
  }

  void add(double margin, const std::string& detail) {
    out_.worst = std::max(out_.worst, margin);
    if (margin > out_.tol) {
      out_.passed = false;
      if (out_.witnesses.size() < kMaxWitnessLines) out_.witnesses.push_back(detail + " margin=" + fmt(margin));
    }
  }

  CheckOutcome finish() {
    if (out_.worst == -std::numeric_limits<double>::infinity()) out_.worst = 0.0;
    return std::move(out_);
  }

 private:
  CheckOutcome out_;
};

}  // namespace

VerificationReport verify_main_theorem(const SpectrumEstimator& est, std::span<const Rational> grid,
                                       const VerifyOptions& opts) {
  auto lhs = est.upper(grid, opts.m_range);
  auto rhs = est.upper_by_ratio(grid, opts.m_range);
  CheckOutcome c;
  c.name = "main-theorem";
  for (std::size_t i = 0; i < grid.size(); ++i) {
    double dev = std::abs(lhs.values[i] - rhs.values[i]);
    c.worst = std::max(c.worst, dev);
    if (dev != 0.0) {
      c.passed = false;
      if (c.witnesses.size() < kMaxWitnessLines) {
        c.witnesses.push_back("theta=" + grid[i].str() + " upper=" + fmt(lhs.values[i]) + " at " +
                              window_text(lhs.witnesses[i]) + " ratio-max=" + fmt(rhs.values[i]) + " at " +
                              window_text(rhs.witnesses[i]));
      }
    }
  }
  return {{std::move(c)}};
}

VerificationReport verify_bound(const SpectrumEstimator& est, std::span<const Rational> grid, double tol,
                                const VerifyOptions& opts) {
  auto spec = est.spectrum(grid, opts.m_range);
  auto box = est.box(opts.box_range);
  MarginCheck check("bound", tol);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    double bound = box.values[0] / (1.0 - grid[i].to_double());
    check.add(spec.values[i] - bound, "theta=" + grid[i].str() + " spectrum=" + fmt(spec.values[i]) + " at " +
                                          window_text(spec.witnesses[i]) + " box/(1-theta)=" + fmt(bound));
  }
  return {{check.finish()}};
}

VerificationReport verify_chain(const SpectrumEstimator& est, std::span<const Rational> grid, double tol,
                                const VerifyOptions& opts) {
  auto spec = est.spectrum(grid, opts.m_range);
  auto up = est.upper(grid, opts.m_range);
  auto box = est.box(opts.box_range);
  auto qa = est.quasi_assouad(opts.epsilons, opts.m_range);
  const double b = box.values[0];

  MarginCheck box_spec("chain.box-spectrum", tol);
  MarginCheck spec_up("chain.spectrum-upper", 0.0);
  MarginCheck up_qa("chain.upper-qa", tol);
  MarginCheck monotone("chain.upper-monotone", 0.0);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const std::string th = "theta=" + grid[i].str();
    box_spec.add(b - spec.values[i], th + " box=" + fmt(b) + " at m=" + std::to_string(box.witnesses[0].m) +
                                         " spectrum=" + fmt(spec.values[i]) + " at " + window_text(spec.witnesses[i]));
    spec_up.add(spec.values[i] - up.values[i], th + " spectrum=" + fmt(spec.values[i]) + " at " +
                                                   window_text(spec.witnesses[i]) + " upper=" + fmt(up.values[i]) +
                                                   " at " + window_text(up.witnesses[i]));
    up_qa.add(up.values[i] - qa.headline, th + " upper=" + fmt(up.values[i]) + " at " + window_text(up.witnesses[i]) +
                                             " qa=" + fmt(qa.headline) + " at " + window_text(qa.headline_witness));
  }
  std::vector<std::size_t> order(grid.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return grid[a] < grid[b]; });
  for (std::size_t k = 1; k < order.size(); ++k) {
    auto i = order[k - 1];
    auto j = order[k];
    monotone.add(up.values[i] - up.values[j], "upper(" + grid[i].str() + ")=" + fmt(up.values[i]) + " > upper(" +
                                                  grid[j].str() + ")=" + fmt(up.values[j]));
  }
  return {{box_spec.finish(), spec_up.finish(), up_qa.finish(), monotone.finish()}};
}

Rational nth_root(const Rational& theta, int n) {
  require_theta(theta);
  if (n < 1) throw DomainError("root order must be at least 1");
  if (n == 1) return theta;
  constexpr std::int64_t max_den = 1000000;
  Rational r = Rational::approximate(std::pow(theta.to_double(), 1.0 / n), max_den);
  if (r >= Rational(1)) r = Rational(max_den - 1, max_den);
  if (r <= theta) r = theta;
  return r;
}

VerificationReport verify_nthroot(const SpectrumEstimator& est, std::span<const Rational> grid,
                                  std::span<const int> n_values, double tol, const VerifyOptions& opts) {
  VerificationReport report;
  auto spec = est.spectrum(grid, opts.m_range);
  for (int n : n_values) {
    std::vector<Rational> roots;
    for (const Rational& theta : grid) roots.push_back(nth_root(theta, n));
    auto root_spec = est.spectrum(roots, opts.m_range);
    MarginCheck check("nthroot.n=" + std::to_string(n), tol);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      check.add(spec.values[i] - root_spec.values[i],
                "theta=" + grid[i].str() + " spectrum=" + fmt(spec.values[i]) + " at " + window_text(spec.witnesses[i]) +
                    " root=" + roots[i].str() + " spectrum=" + fmt(root_spec.values[i]) + " at " +
                    window_text(root_spec.witnesses[i]));
    }
    report.checks.push_back(check.finish());
  }
  return report;
}

// ---------------------------------------------------------------------------
// grid / range specs

namespace {

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto pos = s.find(sep, start);
    out.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

Level parse_level(std::string_view text) {
  Rational r = Rational::parse(text);
  if (r.den() != 1) throw ParseError("level '" + std::string(text) + "' is not an integer");
  return r.num();
}

}  // namespace

std::vector<Rational> parse_theta_grid(std::string_view spec) {
  std::vector<Rational> out;
  if (spec.find(':') != std::string_view::npos) {
    auto parts = split(spec, ':');
    if (parts.size() != 3) throw ParseError("theta grid must look like a:b:c, got '" + std::string(spec) + "'");
    Rational a = Rational::parse(parts[0]);
    Rational b = Rational::parse(parts[1]);
    Rational c = Rational::parse(parts[2]);
    if (c <= Rational(0)) throw ParseError("theta grid step must be positive");
    if (b < a) throw ParseError("theta grid end is below its start");
    for (Rational x = a; x <= b; x += c) out.push_back(x);
  } else {
    for (auto piece : split(spec, ',')) out.push_back(Rational::parse(piece));
  }
  if (out.empty()) throw ParseError("empty theta grid");
  for (const Rational& x : out) {
    if (x <= Rational(0) || x >= Rational(1)) throw ParseError("theta " + x.str() + " outside (0,1)");
  }
  return out;
}

LevelRange parse_level_range(std::string_view spec) {
  auto parts = split(spec, ':');
  if (parts.size() != 2) throw ParseError("level range must look like lo:hi, got '" + std::string(spec) + "'");
  LevelRange r{parse_level(parts[0]), parse_level(parts[1])};
  if (r.lo < 1 || r.hi < r.lo) throw ParseError("level range '" + std::string(spec) + "' needs 1 <= lo <= hi");
  return r;
}

}  // namespace fds
