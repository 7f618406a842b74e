#pragma once

// Plain CSV tables with a mandatory header row.  Numbers are written with 17
// significant digits so that every double survives a write/parse round trip.
//
//   errors.csv      experiment,N,subset,t,error
//   trajectory.csv  step,t,energy,min_bias_gap
//   histogram.csv   t,bin_left,bin_right,count
//   mapping.csv     z,f_theta,T_oracle
//   moments.csv     step,t,second_moment
//   density.csv     t,x,p

#include <cstddef>
#include <string>
#include <vector>

namespace wgf {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name) const;
  double number(std::size_t row, const std::string& name) const;
};

namespace schema {
inline const std::vector<std::string> errors{"experiment", "N", "subset", "t", "error"};
inline const std::vector<std::string> trajectory{"step", "t", "energy", "min_bias_gap"};
inline const std::vector<std::string> histogram{"t", "bin_left", "bin_right", "count"};
inline const std::vector<std::string> mapping{"z", "f_theta", "T_oracle"};
inline const std::vector<std::string> moments{"step", "t", "second_moment"};
inline const std::vector<std::string> density{"t", "x", "p"};
}  // namespace schema

std::string format_number(double x);
double parse_number(const std::string& s);

std::string to_csv(const CsvTable& table);
/// Throws std::invalid_argument on ragged rows, quotes, or an empty header.
CsvTable parse_csv(const std::string& text);

void write_csv(const std::string& path, const CsvTable& table);
CsvTable read_csv(const std::string& path);

/// Throws std::invalid_argument naming the first mismatching column.
void require_schema(const CsvTable& table, const std::vector<std::string>& header);

}  // namespace wgf
