#include "metroscope/csv.hpp"

#include <cstdio>

namespace metroscope {

std::string format_number(double value) {
  char buffer[48];
  std::snprintf(buffer, sizeof buffer, "%.12g", value);
  return buffer;
}

const char* const kSweepCsvHeader =
    "family,k,N,nbar_nominal,nbar_exact,scenario,delta,theta_min_numeric,"
    "theta_min_predicted,relative_error,status";

std::string sweep_record_row(const ExperimentRecord& record) {
  std::string row;
  row += family_name(record.family);
  row += ',';
  row += format_number(record.k);
  row += ',';
  row += std::to_string(record.n);
  row += ',';
  row += format_number(record.nbar_nominal);
  row += ',';
  row += format_number(record.nbar_exact);
  row += ',';
  row += scenario_name(record.scenario);
  row += ',';
  row += format_number(record.delta);
  row += ',';
  row += format_number(record.theta_min_numeric);
  row += ',';
  row += format_number(record.theta_min_predicted);
  row += ',';
  row += format_number(record.relative_error);
  row += ',';
  row += record.status;
  return row;
}

std::string sweep_csv(const std::vector<ExperimentRecord>& records) {
  std::string out = kSweepCsvHeader;
  out += '\n';
  for (const auto& record : records) {
    out += sweep_record_row(record);
    out += '\n';
  }
  return out;
}

const char* const kTableCsvHeader =
    "which,k,family,numeric,predicted,relative_error,status";

std::string table_csv(const TableReport& report) {
  std::string out = kTableCsvHeader;
  out += '\n';
  for (std::size_t row = 0; row < report.k_rows.size(); ++row) {
    for (std::size_t col = 0; col < report.family_columns.size(); ++col) {
      const TableCell& cell = report.cells[row][col];
      out += std::to_string(report.which);
      out += ',';
      out += format_number(report.k_rows[row]);
      out += ',';
      out += family_name(report.family_columns[col]);
      out += ',';
      out += format_number(cell.numeric);
      out += ',';
      out += format_number(cell.predicted);
      out += ',';
      out += format_number(cell.relative_error);
      out += ',';
      out += cell.status;
      out += '\n';
    }
  }
  return out;
}

}  // namespace metroscope
