#include "ael/io.h"

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <vector>

namespace ael {

Matrix read_matrix(std::istream& in, const std::string& name) {
  std::vector<std::vector<double>> rows;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ss(line);
    std::vector<double> row;
    std::string token;
    int col = 0;
    while (ss >> token) {
      ++col;
      try {
        size_t consumed = 0;
        const double v = std::stod(token, &consumed);
        if (consumed != token.size()) throw std::invalid_argument(token);
        row.push_back(v);
      } catch (const std::exception&) {
        throw InputError(name + ":" + std::to_string(line_no) + ": column " +
                         std::to_string(col) + ": not a number: '" + token + "'");
      }
    }
    if (row.empty()) continue;
    if (!rows.empty() && row.size() != rows.front().size())
      throw InputError(name + ":" + std::to_string(line_no) + ": expected " +
                       std::to_string(rows.front().size()) + " columns, found " +
                       std::to_string(row.size()));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw InputError(name + ": no numeric rows found");

  Matrix m(static_cast<Eigen::Index>(rows.size()),
           static_cast<Eigen::Index>(rows.front().size()));
  for (size_t i = 0; i < rows.size(); ++i)
    for (size_t j = 0; j < rows.front().size(); ++j)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return m;
}

Matrix read_matrix_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open data file: " + path);
  return read_matrix(in, path);
}

std::string format_number(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", value);
  return buf;
}

std::string coverage_csv(const CoverageReport& report) {
  std::ostringstream out;
  out << "method,level,n,population,coverage,mc_se,reps,infeasible,failures,seed\n";
  for (const auto& r : report.rows) {
    out << r.method << ',' << format_number(r.level) << ',' << r.n << ','
        << r.population << ',' << format_number(r.coverage) << ','
        << format_number(r.mc_se) << ',' << r.replications << ','
        << r.infeasible << ',' << r.failures << ',' << r.master_seed << '\n';
  }
  return out.str();
}

std::string bartlett_csv(const BartlettBiasReport& report) {
  std::ostringstream out;
  out << "population,n,mean_bn,mean_btilde,b_true,truth,reps,failures,seed\n";
  for (const auto& r : report.rows) {
    out << r.population << ',' << r.n << ',' << format_number(r.mean_naive)
        << ',' << format_number(r.mean_reduced) << ',' << format_number(r.b_true)
        << ',' << (r.simulated_truth ? "simulated" : "analytic") << ','
        << r.replications << ',' << r.failures << ',' << r.master_seed << '\n';
  }
  return out.str();
}

std::string coverage_table(const CoverageReport& report) {
  std::ostringstream out;
  out << std::left << std::setw(8) << "method" << std::setw(8) << "level"
      << std::setw(6) << "n" << std::setw(14) << "population" << std::setw(10)
      << "coverage" << std::setw(10) << "mc_se" << std::setw(8) << "reps"
      << std::setw(8) << "infeas" << "failures\n";
  for (const auto& r : report.rows) {
    out << std::left << std::setw(8) << r.method << std::setw(8)
        << format_number(r.level) << std::setw(6) << r.n << std::setw(14)
        << r.population << std::setw(10) << format_number(r.coverage)
        << std::setw(10) << format_number(r.mc_se) << std::setw(8)
        << r.replications << std::setw(8) << r.infeasible << r.failures << '\n';
  }
  return out.str();
}

std::string bartlett_table(const BartlettBiasReport& report) {
  std::ostringstream out;
  out << std::left << std::setw(14) << "population" << std::setw(6) << "n"
      << std::setw(10) << "mean_bn" << std::setw(12) << "mean_btilde"
      << std::setw(10) << "b_true" << std::setw(11) << "truth" << "reps\n";
  for (const auto& r : report.rows) {
    out << std::left << std::setw(14) << r.population << std::setw(6) << r.n
        << std::setw(10) << format_number(r.mean_naive) << std::setw(12)
        << format_number(r.mean_reduced) << std::setw(10)
        << format_number(r.b_true) << std::setw(11)
        << (r.simulated_truth ? "simulated" : "analytic") << r.replications
        << '\n';
  }
  return out.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot open output file: " + path);
  out << content;
  if (!out) throw InputError("failed writing output file: " + path);
}

}  // namespace ael
