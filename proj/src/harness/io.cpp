#include "inexact/harness/io.hpp"

#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <vector>

#include "inexact/errors.hpp"

namespace inexact::harness {

namespace fs = std::filesystem;

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) {
    const auto b = field.find_first_not_of(" \t\r");
    const auto e = field.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? std::string() : field.substr(b, e - b + 1));
  }
  return out;
}

bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  char* end = nullptr;
  errno = 0;
  out = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size() && errno == 0;
}

}  // namespace

Matrix read_csv_matrix(const fs::path& path) {
  std::ifstream in(path);
  if (!in) detail::fail("cannot open " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  bool first = true;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto fields = split_fields(line);
    std::vector<double> row;
    bool numeric = true;
    for (const auto& f : fields) {
      double x = 0.0;
      if (!parse_double(f, x)) {
        numeric = false;
        break;
      }
      row.push_back(x);
    }
    if (!numeric) {
      if (first) {
        first = false;
        continue;
      }
      detail::fail(path.string() + ":" + std::to_string(lineno) + ": non-numeric field");
    }
    first = false;
    if (!rows.empty() && row.size() != rows.front().size()) {
      detail::fail(path.string() + ":" + std::to_string(lineno) + ": ragged row");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) detail::fail(path.string() + ": no data");
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = rows[i][j];
  }
  return m;
}

Vector read_csv_vector(const fs::path& path) {
  const Matrix m = read_csv_matrix(path);
  Vector v(m.size());
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) v[k++] = m(i, j);
  }
  return v;
}

std::string to_csv(const Matrix& m) {
  std::string out;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out += ',';
      out += format_double(m(i, j));
    }
    out += '\n';
  }
  return out;
}

void write_text_atomic(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) detail::fail("cannot write " + tmp.string());
    out << text;
    out.flush();
    if (!out) detail::fail("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

void write_csv(const fs::path& path, const Matrix& m) { write_text_atomic(path, to_csv(m)); }

void write_csv_vector(const fs::path& path, const Vector& v) {
  write_text_atomic(path, to_csv(Matrix(v)));
}

void write_json(const fs::path& path, const nlohmann::json& j) {
  write_text_atomic(path, j.dump(2) + "\n");
}

void write_trace(const fs::path& dir, const std::string& stem, const RunTrace& trace,
                 std::optional<std::uint64_t> seed) {
  std::ostringstream lines;
  trace.write_lines(lines);
  write_text_atomic(dir / (stem + ".txt"), lines.str());
  nlohmann::json meta = trace.metadata_json();
  meta.erase("wall_seconds");
  if (seed) meta["seed"] = *seed;
  write_json(dir / (stem + "_meta.json"), meta);
}

}  // namespace inexact::harness
