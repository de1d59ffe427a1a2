#include "smib/io/csv.hpp"

#include "smib/errors.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

namespace smib::io {

std::size_t Table::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  throw InvalidInput("table has no column '" + name + "'");
}

std::vector<double> Table::values(const std::string& name) const {
  const std::size_t c = column(name);
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r[c]);
  return out;
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.15g", v);
  return buf;
}

void write_csv(std::ostream& out, const Table& t) {
  for (std::size_t i = 0; i < t.header.size(); ++i) out << (i ? "," : "") << t.header[i];
  out << '\n';
  for (const auto& r : t.rows) {
    if (r.size() != t.header.size()) throw InvalidInput("write_csv: row width differs from header");
    for (std::size_t i = 0; i < r.size(); ++i) out << (i ? "," : "") << format_number(r[i]);
    out << '\n';
  }
}

void write_csv_file(const std::string& path, const Table& t) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  std::ofstream f(path);
  if (!f) throw InvalidInput("cannot write '" + path + "'");
  write_csv(f, t);
  if (!f) throw InvalidInput("write failed for '" + path + "'");
}

Table read_csv(std::istream& in) {
  Table t;
  std::string line;
  if (!std::getline(in, line)) throw InvalidInput("read_csv: empty input");
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) t.header.push_back(cell);
  }
  int n = 1;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      if (cell.empty() || *end != '\0') throw InvalidInput("read_csv: bad number on line " + std::to_string(n));
      row.push_back(v);
    }
    if (row.size() != t.header.size()) throw InvalidInput("read_csv: wrong width on line " + std::to_string(n));
    t.rows.push_back(std::move(row));
  }
  return t;
}

Table read_csv_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw InvalidInput("cannot open '" + path + "'");
  return read_csv(f);
}

const std::vector<std::string>& trace_channels() {
  static const std::vector<std::string> names{"V_t", "omega", "delta", "T_m", "G_V", "E_q", "E_FD", "V_F", "u_T"};
  return names;
}

Table trace_table(const numerics::Trace& trace, const std::map<std::string, double>& reference) {
  Table t;
  t.header.push_back("time");
  std::vector<const std::vector<double>*> cols;
  for (const auto& name : trace_channels()) {
    t.header.push_back(name);
    cols.push_back(&trace.channel(name));
  }
  std::vector<double> refs;
  for (const auto& [name, v] : reference) {
    t.header.push_back(name + "_ref");
    refs.push_back(v);
  }
  t.rows.reserve(trace.times.size());
  for (std::size_t i = 0; i < trace.times.size(); ++i) {
    std::vector<double> r{trace.times[i]};
    for (const auto* c : cols) r.push_back((*c)[i]);
    r.insert(r.end(), refs.begin(), refs.end());
    t.rows.push_back(std::move(r));
  }
  return t;
}

Table frequency_table(const std::vector<double>& omegas, const std::vector<CMat>& values, const std::string& prefix) {
  if (omegas.size() != values.size()) throw InvalidInput("frequency_table: size mismatch");
  Table t;
  t.header.push_back("omega");
  if (values.empty()) return t;
  const auto rows = values.front().rows(), cols = values.front().cols();
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) {
      const std::string n = prefix + std::to_string(i + 1) + std::to_string(j + 1);
      for (const char* s : {"_re", "_im", "_mag_db", "_phase_deg"}) t.header.push_back(n + s);
    }
  std::vector<double> last_phase(std::size_t(rows * cols), std::nan(""));
  for (std::size_t k = 0; k < omegas.size(); ++k) {
    std::vector<double> r{omegas[k]};
    for (Eigen::Index i = 0; i < rows; ++i)
      for (Eigen::Index j = 0; j < cols; ++j) {
        const Complex v = values[k](i, j);
        double ph = std::arg(v) * 180.0 / std::numbers::pi;
        double& prev = last_phase[std::size_t(i * cols + j)];
        if (std::isfinite(prev) && std::isfinite(ph)) ph += 360.0 * std::round((prev - ph) / 360.0);
        if (std::isfinite(ph)) prev = ph;
        r.insert(r.end(), {v.real(), v.imag(), 20.0 * std::log10(std::abs(v)), ph});
      }
    t.rows.push_back(std::move(r));
  }
  return t;
}

}  // namespace smib::io
