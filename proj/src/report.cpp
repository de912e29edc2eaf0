#include "addn/report.hpp"

#include <fstream>
#include <iomanip>
#include <json.hpp>
#include <sstream>

#include "addn/error.hpp"
#include "addn/metrics.hpp"

namespace addn {

using nlohmann::json;

std::string log_line(const LogRecord& r) {
  json j;
  j["run"] = r.run;
  j["epoch"] = r.epoch;
  j["train_loss"] = r.train_loss;
  j["se"] = r.se ? json(*r.se) : json(nullptr);
  j["sp"] = r.sp ? json(*r.sp) : json(nullptr);
  j["score"] = r.score ? json(*r.score) : json(nullptr);
  j["no_aff"] = r.no_aff;
  j["no_ddl"] = r.no_ddl;
  j["no_bias_loss"] = r.no_bias_loss;
  return j.dump();
}

LogRecord parse_log_line(const std::string& line, const std::string& source, std::size_t line_number) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    throw ParseError(source, line_number, std::string("invalid JSON: ") + e.what());
  }
  LogRecord r;
  try {
    r.run = j.value("run", std::string{});
    r.epoch = j.at("epoch").get<std::size_t>();
    r.train_loss = j.at("train_loss").get<double>();
    auto opt = [&](const char* key) -> std::optional<double> {
      if (!j.contains(key) || j[key].is_null()) return std::nullopt;
      return j[key].get<double>();
    };
    r.se = opt("se");
    r.sp = opt("sp");
    r.score = opt("score");
    r.no_aff = j.value("no_aff", false);
    r.no_ddl = j.value("no_ddl", false);
    r.no_bias_loss = j.value("no_bias_loss", false);
  } catch (const json::exception& e) {
    throw ParseError(source, line_number, std::string("bad log record: ") + e.what());
  }
  return r;
}

std::vector<LogRecord> read_log(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MissingFileError("cannot open metrics log " + path.string());
  std::vector<LogRecord> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    out.push_back(parse_log_line(line, path.string(), n));
  }
  return out;
}

LogRecord make_log_record(const EpochRecord& epoch, const std::string& run, bool no_aff, bool no_ddl,
                          bool no_bias_loss) {
  LogRecord r;
  r.run = run;
  r.epoch = epoch.epoch;
  r.train_loss = epoch.train_loss;
  if (epoch.metrics) {
    r.se = epoch.metrics->se;
    r.sp = epoch.metrics->sp;
    r.score = epoch.metrics->score;
  }
  r.no_aff = no_aff;
  r.no_ddl = no_ddl;
  r.no_bias_loss = no_bias_loss;
  return r;
}

std::string render_ablation_table(const std::vector<LogRecord>& rows) {
  if (rows.empty()) throw UsageError("logs", "no runs to report");
  std::size_t name_width = 5;
  for (const auto& r : rows) name_width = std::max(name_width, r.run.size());
  std::ostringstream out;
  auto mark = [](bool on) { return on ? "  x  " : "     "; };
  out << std::left << std::setw(static_cast<int>(name_width)) << "Model"
      << " | AFF | DDL | Bias | Sp(%) / Se(%) / Score(%)\n";
  out << std::string(name_width, '-') << "-+-----+-----+------+-------------------------\n";
  for (const auto& r : rows) {
    if (!r.se || !r.sp || !r.score) throw DataFormatError("run " + r.run + " has no evaluated epoch");
    out << std::left << std::setw(static_cast<int>(name_width)) << r.run << " |" << mark(!r.no_aff) << "|"
        << mark(!r.no_ddl) << "|" << mark(!r.no_bias_loss) << " | " << format_percent(*r.sp) << " / "
        << format_percent(*r.se) << " / " << format_percent(*r.score) << "\n";
  }
  return out.str();
}

std::string report_from_logs(const std::vector<std::filesystem::path>& logs) {
  if (logs.empty()) throw UsageError("logs", "at least one metrics log is required");
  std::vector<LogRecord> rows;
  for (const auto& path : logs) {
    const auto records = read_log(path);
    const LogRecord* last = nullptr;
    for (const auto& r : records) {
      if (r.score) last = &r;
    }
    if (!last) throw DataFormatError("metrics log " + path.string() + " has no evaluated epoch");
    LogRecord row = *last;
    if (row.run.empty()) row.run = path.stem().string();
    rows.push_back(row);
  }
  return render_ablation_table(rows);
}

}  // namespace addn
