#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "fds/spectra.hpp"

namespace fds {

// Set files. All three formats are line-oriented text with a versioned first
// line: "fds-tree 1", "fds-schedule 1" or "fds-composite 1".

void write_tree(std::ostream& os, const DyadicTree& t);
/// Rejects malformed lines and prefix-closure violations.
DyadicTree read_tree(std::istream& is);

void write_schedule(std::ostream& os, const BranchingSchedule& s);
BranchingSchedule read_schedule(std::istream& is);

/// "<count>x<c>,<count>x<c>,..." as used by inline composite components.
std::vector<Run> parse_run_list(std::string_view spec);

/// Components are written inline ("inline:<count>x<c>,...").
void write_composite(std::ostream& os, const CompositeSet& cs);
/// Component sources are inline run lists or schedule file paths relative to base_dir.
CompositeSet read_composite(std::istream& is, const std::filesystem::path& base_dir = {});

void write_set(std::ostream& os, const SetModel& set);
SetModel read_set(std::istream& is, const std::filesystem::path& base_dir = {});

SetModel load_set(const std::filesystem::path& path);
void save_set(const std::filesystem::path& path, const SetModel& set);

/// Shortest decimal text that parses back to exactly x.
std::string format_double(double x);

// CSV: "theta,value,m_witness,mprime_witness"; box estimates have an empty theta.

void write_csv(std::ostream& os, const SpectrumEstimate& e);

struct CsvRow {
  std::optional<double> theta;
  double value = 0.0;
  Level m = 0;
  Level m_prime = 0;
};

/// Throws ParseError on a wrong header, malformed row or empty body.
std::vector<CsvRow> read_csv(std::istream& is);

/// "CHECK <name> <PASS|FAIL> worst=<v> tol=<v>", then indented witness lines for failures.
void write_report(std::ostream& os, const VerificationReport& report);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& content);

}  // namespace fds
