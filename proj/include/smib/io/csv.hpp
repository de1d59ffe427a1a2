#pragma once

#include "smib/freq/response.hpp"
#include "smib/numerics/ode.hpp"

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace smib::io {

/// Header row plus numeric rows.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  std::size_t column(const std::string& name) const;  // throws InvalidInput if absent
  std::vector<double> values(const std::string& name) const;
};

/// 15 significant digits; non-finite values print as nan / inf / -inf.
std::string format_number(double v);

void write_csv(std::ostream& out, const Table& t);
void write_csv_file(const std::string& path, const Table& t);
/// Strict reader: every row must have the header's width.
Table read_csv(std::istream& in);
Table read_csv_file(const std::string& path);

/// Trace channels that go to CSV, in column order.
const std::vector<std::string>& trace_channels();

/// time, the trace channels, then one constant `<name>_ref` column per reference.
Table trace_table(const numerics::Trace& trace, const std::map<std::string, double>& reference);

/// omega, then per channel Lij: re, im, mag_db, phase_deg (unwrapped along the grid).
Table frequency_table(const std::vector<double>& omegas, const std::vector<CMat>& values, const std::string& prefix);

}  // namespace smib::io
