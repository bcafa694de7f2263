#pragma once

#include <string>
#include <vector>

#include "metroscope/scaling.hpp"

namespace metroscope {

/// Fixed 12-significant-digit formatting used by every CSV and report
/// writer; output is byte-deterministic for identical inputs.
std::string format_number(double value);

extern const char* const kSweepCsvHeader;

std::string sweep_record_row(const ExperimentRecord& record);
std::string sweep_csv(const std::vector<ExperimentRecord>& records);

extern const char* const kTableCsvHeader;
std::string table_csv(const TableReport& report);

}  // namespace metroscope
