#include "fds/io.hpp"

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "fds/errors.hpp"

namespace fds {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> words(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != '\t' && s[j] != '\r') ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

template <typename Int>
Int parse_int(std::string_view text, const std::string& what) {
  Int value{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw ParseError(what + ": expected an integer, got '" + std::string(text) + "'");
  }
  return value;
}

Index parse_index(std::string_view text, const std::string& what) {
  if (text.empty() || text.find_first_not_of("0123456789") != std::string_view::npos) {
    throw ParseError(what + ": expected a non-negative integer, got '" + std::string(text) + "'");
  }
  return Index(std::string(text));
}

// Non-empty, non-comment lines with their 1-based line numbers.
struct Lines {
  explicit Lines(std::istream& is) {
    std::string line;
    std::size_t n = 0;
    while (std::getline(is, line)) {
      ++n;
      auto t = trim(line);
      if (t.empty() || t.front() == '#') continue;
      items.emplace_back(n, std::string(t));
    }
  }
  std::vector<std::pair<std::size_t, std::string>> items;
};

std::string at_line(std::size_t n) { return "line " + std::to_string(n); }

void expect_header(const Lines& lines, const std::string& header) {
  if (lines.items.empty() || lines.items[0].second != header) {
    throw ParseError("expected first line '" + header + "'");
  }
}

Level read_depth(const Lines& lines) {
  if (lines.items.size() < 2) throw ParseError("missing depth line");
  auto w = words(lines.items[1].second);
  if (w.size() != 2 || w[0] != "depth") throw ParseError(at_line(lines.items[1].first) + ": expected 'depth <D>'");
  auto d = parse_int<Level>(w[1], at_line(lines.items[1].first));
  if (d < 0) throw ParseError("negative depth");
  return d;
}

std::vector<Run> parse_runs(std::string_view spec, const std::string& where) {
  std::vector<Run> runs;
  std::size_t start = 0;
  while (start <= spec.size()) {
    auto comma = spec.find(',', start);
    auto piece = spec.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
    auto x = piece.find('x');
    if (x == std::string_view::npos) throw ParseError(where + ": run '" + std::string(piece) + "' is not <count>x<c>");
    Run r{parse_int<Level>(piece.substr(0, x), where), parse_int<int>(piece.substr(x + 1), where)};
    if (r.length < 1 || (r.child_count != 1 && r.child_count != 2)) {
      throw ParseError(where + ": run '" + std::string(piece) + "' needs count >= 1 and c in {1, 2}");
    }
    runs.push_back(r);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return runs;
}

BranchingSchedule checked_schedule(std::vector<Run> runs, const std::string& where) {
  try {
    return BranchingSchedule(std::move(runs));
  } catch (const DomainError& e) {
    throw ParseError(where + ": " + e.what());
  }
}

}  // namespace

std::vector<Run> parse_run_list(std::string_view spec) { return parse_runs(spec, "run list"); }

// ---------------------------------------------------------------------------

void write_tree(std::ostream& os, const DyadicTree& t) {
  os << "fds-tree 1\n" << "depth " << t.depth() << '\n';
  for (Level m = 0; m <= t.depth(); ++m) {
    auto level = t.level(m);
    if (level.empty()) continue;
    os << m << ':';
    for (const Index& k : level) os << ' ' << k;
    os << '\n';
  }
}

DyadicTree read_tree(std::istream& is) {
  Lines lines(is);
  expect_header(lines, "fds-tree 1");
  const Level depth = read_depth(lines);
  std::vector<std::vector<Index>> levels(static_cast<std::size_t>(depth) + 1);
  Level previous = -1;
  for (std::size_t i = 2; i < lines.items.size(); ++i) {
    const auto& [n, text] = lines.items[i];
    auto colon = text.find(':');
    if (colon == std::string::npos) throw ParseError(at_line(n) + ": expected '<level>: <index> ...'");
    auto level = parse_int<Level>(trim(std::string_view(text).substr(0, colon)), at_line(n));
    if (level < 0 || level > depth) throw ParseError(at_line(n) + ": level " + std::to_string(level) + " outside the depth");
    if (level <= previous) throw ParseError(at_line(n) + ": levels must be listed in increasing order");
    previous = level;
    auto& idx = levels[static_cast<std::size_t>(level)];
    for (auto w : words(std::string_view(text).substr(colon + 1))) {
      idx.push_back(parse_index(w, at_line(n)));
      if (idx.size() > 1 && !(idx[idx.size() - 2] < idx.back())) {
        throw ParseError(at_line(n) + ": indices must be strictly increasing");
      }
    }
  }
  for (Level m = 0; m <= depth; ++m) {
    if (levels[static_cast<std::size_t>(m)].empty()) throw ParseError("level " + std::to_string(m) + " has no intervals");
  }
  DyadicTree tree;
  try {
    tree = DyadicTree(depth, std::move(levels));
  } catch (const DomainError& e) {
    throw ParseError(std::string("invalid tree: ") + e.what());
  }
  for (const Violation& v : validate(tree)) {
    if (v.kind == Violation::Kind::prefix_closure) throw ParseError("invalid tree: " + to_string(v));
  }
  return tree;
}

void write_schedule(std::ostream& os, const BranchingSchedule& s) {
  os << "fds-schedule 1\n" << "depth " << s.depth() << '\n';
  for (const Run& r : s.runs()) os << r.length << ' ' << r.child_count << '\n';
}

BranchingSchedule read_schedule(std::istream& is) {
  Lines lines(is);
  expect_header(lines, "fds-schedule 1");
  const Level depth = read_depth(lines);
  std::vector<Run> runs;
  for (std::size_t i = 2; i < lines.items.size(); ++i) {
    const auto& [n, text] = lines.items[i];
    auto w = words(text);
    if (w.size() != 2) throw ParseError(at_line(n) + ": expected '<count> <c>'");
    runs.push_back({parse_int<Level>(w[0], at_line(n)), parse_int<int>(w[1], at_line(n))});
  }
  auto s = checked_schedule(std::move(runs), "schedule");
  if (s.depth() != depth) {
    throw ParseError("run lengths sum to " + std::to_string(s.depth()) + ", depth line says " + std::to_string(depth));
  }
  return s;
}

void write_composite(std::ostream& os, const CompositeSet& cs) {
  os << "fds-composite 1\n" << "origin " << (cs.include_origin() ? 1 : 0) << '\n';
  for (const Component& c : cs.components()) {
    os << "component " << c.shift << " inline:";
    bool first = true;
    for (const Run& r : c.schedule.runs()) {
      if (!first) os << ',';
      first = false;
      os << r.length << 'x' << r.child_count;
    }
    os << '\n';
  }
}

CompositeSet read_composite(std::istream& is, const std::filesystem::path& base_dir) {
  Lines lines(is);
  expect_header(lines, "fds-composite 1");
  if (lines.items.size() < 2) throw ParseError("missing origin line");
  auto ow = words(lines.items[1].second);
  if (ow.size() != 2 || ow[0] != "origin" || (ow[1] != "0" && ow[1] != "1")) {
    throw ParseError(at_line(lines.items[1].first) + ": expected 'origin <0|1>'");
  }
  std::vector<Component> components;
  for (std::size_t i = 2; i < lines.items.size(); ++i) {
    const auto& [n, text] = lines.items[i];
    auto w = words(text);
    if (w.size() != 3 || w[0] != "component") throw ParseError(at_line(n) + ": expected 'component <shift> <source>'");
    const Level shift = parse_int<Level>(w[1], at_line(n));
    constexpr std::string_view tag = "inline:";
    if (w[2].substr(0, tag.size()) == tag) {
      components.push_back({shift, checked_schedule(parse_runs(w[2].substr(tag.size()), at_line(n)), at_line(n))});
    } else {
      std::ifstream in(base_dir / std::string(w[2]));
      if (!in) throw IoError("cannot open component schedule '" + (base_dir / std::string(w[2])).string() + "'");
      components.push_back({shift, read_schedule(in)});
    }
  }
  try {
    return CompositeSet(std::move(components), ow[1] == "1");
  } catch (const DomainError& e) {
    throw ParseError(std::string("invalid composite: ") + e.what());
  }
}

void write_set(std::ostream& os, const SetModel& set) {
  struct Visitor {
    std::ostream& os;
    void operator()(const DyadicTree& t) const { write_tree(os, t); }
    void operator()(const BranchingSchedule& s) const { write_schedule(os, s); }
    void operator()(const CompositeSet& c) const { write_composite(os, c); }
  };
  std::visit(Visitor{os}, set);
}

SetModel read_set(std::istream& is, const std::filesystem::path& base_dir) {
  std::string text((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  std::istringstream in(text);
  std::string first;
  std::getline(in, first);
  in.seekg(0);
  auto head = trim(first);
  if (head == "fds-tree 1") return read_tree(in);
  if (head == "fds-schedule 1") return read_schedule(in);
  if (head == "fds-composite 1") return read_composite(in, base_dir);
  throw ParseError("unrecognised set file header '" + std::string(head) + "'");
}

SetModel load_set(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  return read_set(in, path.parent_path());
}

void save_set(const std::filesystem::path& path, const SetModel& set) {
  std::ostringstream os;
  write_set(os, set);
  write_file(path, os.str());
}

// ---------------------------------------------------------------------------

std::string format_double(double x) {
  char buf[64];
  for (int precision = 15; precision <= 17; ++precision) {
    std::snprintf(buf, sizeof buf, "%.*g", precision, x);
    if (std::strtod(buf, nullptr) == x) break;
  }
  return buf;
}

void write_csv(std::ostream& os, const SpectrumEstimate& e) {
  os << "theta,value,m_witness,mprime_witness\n";
  for (std::size_t i = 0; i < e.values.size(); ++i) {
    if (e.mode != EstimateMode::box) os << format_double(e.theta_grid[i].to_double());
    os << ',' << format_double(e.values[i]) << ',' << e.witnesses[i].m << ',' << e.witnesses[i].m_prime << '\n';
  }
}

std::vector<CsvRow> read_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || trim(line) != "theta,value,m_witness,mprime_witness") {
    throw ParseError("CSV header must be 'theta,value,m_witness,mprime_witness'");
  }
  std::vector<CsvRow> rows;
  std::size_t n = 1;
  while (std::getline(is, line)) {
    ++n;
    auto t = trim(line);
    if (t.empty()) continue;
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    while (true) {
      auto comma = t.find(',', start);
      cells.push_back(t.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (cells.size() != 4) throw ParseError("CSV " + at_line(n) + ": expected 4 fields");
    auto number = [&](std::string_view cell) {
      std::string s(trim(cell));
      char* end = nullptr;
      double v = std::strtod(s.c_str(), &end);
      if (s.empty() || end != s.c_str() + s.size()) throw ParseError("CSV " + at_line(n) + ": bad number '" + s + "'");
      return v;
    };
    CsvRow row;
    if (!trim(cells[0]).empty()) row.theta = number(cells[0]);
    row.value = number(cells[1]);
    row.m = parse_int<Level>(trim(cells[2]), "CSV " + at_line(n));
    row.m_prime = parse_int<Level>(trim(cells[3]), "CSV " + at_line(n));
    rows.push_back(row);
  }
  if (rows.empty()) throw ParseError("CSV has no rows");
  return rows;
}

void write_report(std::ostream& os, const VerificationReport& report) {
  for (const CheckOutcome& c : report.checks) {
    os << "CHECK " << c.name << ' ' << (c.passed ? "PASS" : "FAIL") << " worst=" << format_double(c.worst)
       << " tol=" << format_double(c.tol) << '\n';
    if (!c.passed) {
      for (const auto& w : c.witnesses) os << "  witness " << w << '\n';
    }
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("cannot read '" + path.string() + "'");
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << content;
  out.flush();
  if (!out) throw IoError("cannot write '" + path.string() + "'");
}

}  // namespace fds
