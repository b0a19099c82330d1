#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "rrsgd/analysis.hpp"
#include "rrsgd/engine.hpp"
#include "rrsgd/model.hpp"

namespace rrsgd {

// Shortest text that reads back to the same double (%.17g).
std::string format_double(double x);
// Whole-string parse; throws IoError naming `what` on junk.
double parse_double(const std::string& text, const std::string& what);
std::uint64_t parse_uint(const std::string& text, const std::string& what);

/// Comma-separated table with a header line. No quoting: every field in
/// the formats below is a number or a bare identifier.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Index of a header column; throws IoError if absent.
  std::size_t column(const std::string& name) const;
};

CsvTable read_csv(std::istream& in);
void write_csv(std::ostream& out, const CsvTable& table);
CsvTable read_csv_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& contents);

// feature_0..feature_{M-1},label  or  target_0..target_{p-1}
CsvTable dataset_table(const Dataset& data);
Dataset dataset_from_table(const CsvTable& table);

// epoch,position,sq_dev  (position is 1-based inside the epoch)
CsvTable trajectory_table(const Trajectory& trajectory);

// epoch,position,mean_sq_dev,stderr,msd_db
CsvTable summary_table(const MsdCurve& curve);

struct SummaryRow {
  std::uint64_t epoch = 0;
  std::size_t position = 1;
  double mean_sq_dev = 0.0;
  double std_error = 0.0;
  double msd_db = 0.0;
};
std::vector<SummaryRow> summary_rows(const CsvTable& table);

struct SweepRow {
  double mu = 0.0;
  double msd = 0.0;
  double msd_db = 0.0;
  double stderr_db = 0.0;
  std::optional<double> predicted_rr;  // empty field when not applicable
  double predicted_us = 0.0;
};
CsvTable sweep_table(const std::vector<SweepRow>& rows);
std::vector<SweepRow> sweep_rows(const CsvTable& table);

struct WalkRow {
  double beta = 0.0;
  std::size_t n = 1;
  double f_value = 0.0;
  std::optional<double> f_bruteforce;
};
// n,f_value[,f_bruteforce], with a leading beta column when the rows hold
// more than one beta.
CsvTable walk_table(const std::vector<WalkRow>& rows);
std::vector<WalkRow> walk_rows(const CsvTable& table);

}  // namespace rrsgd
