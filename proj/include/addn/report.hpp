#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "addn/trainer.hpp"

namespace addn {

/// One line of the per-epoch metrics log (JSON Lines).
struct LogRecord {
  std::string run;
  std::size_t epoch = 0;
  double train_loss = 0.0;
  std::optional<double> se, sp, score;
  bool no_aff = false;
  bool no_ddl = false;
  bool no_bias_loss = false;
};

std::string log_line(const LogRecord& record);
LogRecord parse_log_line(const std::string& line, const std::string& source, std::size_t line_number);
std::vector<LogRecord> read_log(const std::filesystem::path& path);

LogRecord make_log_record(const EpochRecord& epoch, const std::string& run, bool no_aff, bool no_ddl,
                          bool no_bias_loss);

/// One row per log: its last epoch that carries metrics. Columns follow the
/// ablation table layout: component marks, then "Sp / Se / Score" in percent
/// truncated to two decimals.
std::string render_ablation_table(const std::vector<LogRecord>& final_records);

/// Reads each log and renders its final evaluated epoch. Throws UsageError on
/// an empty path list and DataFormatError on a log without metrics.
std::string report_from_logs(const std::vector<std::filesystem::path>& logs);

}  // namespace addn
