#include "rrsgd/io.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include "rrsgd/errors.hpp"

namespace rrsgd {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string trim_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

void require_header(const CsvTable& table, const std::vector<std::string>& expected, const char* what) {
  if (table.header != expected) {
    std::string want;
    for (const auto& h : expected) want += (want.empty() ? "" : ",") + h;
    throw IoError(std::string(what) + ": expected header " + want);
  }
}

std::optional<double> optional_double(const std::string& text, const std::string& what) {
  if (text.empty()) return std::nullopt;
  return parse_double(text, what);
}

}  // namespace

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

double parse_double(const std::string& text, const std::string& what) {
  if (text.empty()) throw IoError(what + ": empty numeric field");
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (end != text.c_str() + text.size() || (errno == ERANGE && std::isinf(v))) {
    throw IoError(what + ": not a number: '" + text + "'");
  }
  return v;
}

std::uint64_t parse_uint(const std::string& text, const std::string& what) {
  if (text.empty() || text.front() == '-' || text.front() == '+') {
    throw IoError(what + ": not a nonnegative integer: '" + text + "'");
  }
  errno = 0;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(text.c_str(), &end, 10);
  if (end != text.c_str() + text.size() || errno == ERANGE) {
    throw IoError(what + ": not a nonnegative integer: '" + text + "'");
  }
  return v;
}

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  throw IoError("csv: missing column '" + name + "'");
}

CsvTable read_csv(std::istream& in) {
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) throw IoError("csv: empty input");
  table.header = split_line(trim_cr(line));
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim_cr(line);
    if (line.empty()) continue;
    auto fields = split_line(line);
    if (fields.size() != table.header.size()) {
      throw IoError("csv: line " + std::to_string(line_no) + " has " + std::to_string(fields.size()) +
                    " fields, header has " + std::to_string(table.header.size()));
    }
    table.rows.push_back(std::move(fields));
  }
  return table;
}

void write_csv(std::ostream& out, const CsvTable& table) {
  auto emit = [&out](const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) out << ',';
      out << fields[i];
    }
    out << '\n';
  };
  emit(table.header);
  for (const auto& row : table.rows) emit(row);
}

CsvTable read_csv_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  return read_csv(in);
}

void write_text_file(const std::filesystem::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << contents;
  out.flush();
  if (!out) throw IoError("write to '" + path.string() + "' failed");
}

CsvTable dataset_table(const Dataset& data) {
  CsvTable t;
  const bool labeled = data.kind() == DatasetKind::labeled;
  const char* prefix = labeled ? "feature_" : "target_";
  for (std::size_t j = 0; j < data.dim(); ++j) t.header.push_back(prefix + std::to_string(j));
  if (labeled) t.header.emplace_back("label");
  const Matrix& rows = data.rows();
  for (Eigen::Index n = 0; n < rows.rows(); ++n) {
    std::vector<std::string> row;
    for (Eigen::Index j = 0; j < rows.cols(); ++j) row.push_back(format_double(rows(n, j)));
    if (labeled) row.push_back(data.labels()(n) > 0 ? "1" : "-1");
    t.rows.push_back(std::move(row));
  }
  return t;
}

Dataset dataset_from_table(const CsvTable& table) {
  if (table.header.empty()) throw IoError("dataset: empty header");
  const bool labeled = table.header.back() == "label";
  const std::size_t m = labeled ? table.header.size() - 1 : table.header.size();
  const char* prefix = labeled ? "feature_" : "target_";
  for (std::size_t j = 0; j < m; ++j) {
    if (table.header[j] != prefix + std::to_string(j)) {
      throw IoError("dataset: unexpected column '" + table.header[j] + "'");
    }
  }
  if (m == 0) throw IoError("dataset: no feature columns");
  const auto n = static_cast<Eigen::Index>(table.rows.size());
  Matrix rows(n, static_cast<Eigen::Index>(m));
  Vector labels(labeled ? n : 0);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& r = table.rows[static_cast<std::size_t>(i)];
    for (std::size_t j = 0; j < m; ++j) rows(i, static_cast<Eigen::Index>(j)) = parse_double(r[j], "dataset");
    if (labeled) labels(i) = parse_double(r[m], "dataset label");
  }
  return labeled ? Dataset::labeled(std::move(rows), std::move(labels)) : Dataset::with_targets(std::move(rows));
}

CsvTable trajectory_table(const Trajectory& trajectory) {
  CsvTable t;
  t.header = {"epoch", "position", "sq_dev"};
  for (std::size_t j = 0; j < trajectory.sq_dev.size(); ++j) {
    t.rows.push_back({std::to_string(trajectory.epoch_of(j)), std::to_string(trajectory.step_of(j) + 1),
                      format_double(trajectory.sq_dev[j])});
  }
  return t;
}

CsvTable summary_table(const MsdCurve& curve) {
  CsvTable t;
  t.header = {"epoch", "position", "mean_sq_dev", "stderr", "msd_db"};
  const bool every = curve.granularity == Granularity::every_iterate;
  for (std::size_t j = 0; j < curve.mean_sq_dev.size(); ++j) {
    const std::size_t epoch = every ? j / curve.epoch_length : j;
    const std::size_t position = every ? j % curve.epoch_length + 1 : 1;
    t.rows.push_back({std::to_string(epoch), std::to_string(position), format_double(curve.mean_sq_dev[j]),
                      format_double(curve.std_error[j]), format_double(to_db(curve.mean_sq_dev[j]))});
  }
  return t;
}

std::vector<SummaryRow> summary_rows(const CsvTable& table) {
  require_header(table, {"epoch", "position", "mean_sq_dev", "stderr", "msd_db"}, "summary");
  std::vector<SummaryRow> out;
  for (const auto& r : table.rows) {
    SummaryRow row;
    row.epoch = parse_uint(r[0], "summary epoch");
    row.position = parse_uint(r[1], "summary position");
    if (row.position < 1) throw IoError("summary: position is 1-based");
    row.mean_sq_dev = parse_double(r[2], "summary mean_sq_dev");
    row.std_error = parse_double(r[3], "summary stderr");
    row.msd_db = parse_double(r[4], "summary msd_db");
    out.push_back(row);
  }
  return out;
}

CsvTable sweep_table(const std::vector<SweepRow>& rows) {
  CsvTable t;
  t.header = {"mu", "msd", "msd_db", "stderr_db", "predicted_rr", "predicted_us"};
  for (const auto& r : rows) {
    t.rows.push_back({format_double(r.mu), format_double(r.msd), format_double(r.msd_db), format_double(r.stderr_db),
                      r.predicted_rr ? format_double(*r.predicted_rr) : std::string(),
                      format_double(r.predicted_us)});
  }
  return t;
}

std::vector<SweepRow> sweep_rows(const CsvTable& table) {
  require_header(table, {"mu", "msd", "msd_db", "stderr_db", "predicted_rr", "predicted_us"}, "sweep");
  std::vector<SweepRow> out;
  for (const auto& r : table.rows) {
    out.push_back({parse_double(r[0], "sweep mu"), parse_double(r[1], "sweep msd"),
                   parse_double(r[2], "sweep msd_db"), parse_double(r[3], "sweep stderr_db"),
                   optional_double(r[4], "sweep predicted_rr"), parse_double(r[5], "sweep predicted_us")});
  }
  return out;
}

CsvTable walk_table(const std::vector<WalkRow>& rows) {
  std::set<double> betas;
  bool verified = false;
  for (const auto& r : rows) {
    betas.insert(r.beta);
    verified = verified || r.f_bruteforce.has_value();
  }
  const bool with_beta = betas.size() > 1;
  CsvTable t;
  if (with_beta) t.header.emplace_back("beta");
  t.header.emplace_back("n");
  t.header.emplace_back("f_value");
  if (verified) t.header.emplace_back("f_bruteforce");
  for (const auto& r : rows) {
    std::vector<std::string> row;
    if (with_beta) row.push_back(format_double(r.beta));
    row.push_back(std::to_string(r.n));
    row.push_back(format_double(r.f_value));
    if (verified) row.push_back(r.f_bruteforce ? format_double(*r.f_bruteforce) : std::string());
    t.rows.push_back(std::move(row));
  }
  return t;
}

std::vector<WalkRow> walk_rows(const CsvTable& table) {
  const bool with_beta = !table.header.empty() && table.header.front() == "beta";
  const std::size_t off = with_beta ? 1 : 0;
  if (table.header.size() < off + 2 || table.header[off] != "n" || table.header[off + 1] != "f_value") {
    throw IoError("walk: expected header [beta,]n,f_value[,f_bruteforce]");
  }
  const bool verified = table.header.size() == off + 3;
  if (verified && table.header[off + 2] != "f_bruteforce") throw IoError("walk: unexpected column");
  if (table.header.size() > off + 3) throw IoError("walk: too many columns");
  std::vector<WalkRow> out;
  for (const auto& r : table.rows) {
    WalkRow row;
    if (with_beta) row.beta = parse_double(r[0], "walk beta");
    row.n = parse_uint(r[off], "walk n");
    row.f_value = parse_double(r[off + 1], "walk f_value");
    if (verified) row.f_bruteforce = optional_double(r[off + 2], "walk f_bruteforce");
    out.push_back(row);
  }
  return out;
}

}  // namespace rrsgd
