#include "wellness/analysis/run.hpp"

#include <fstream>
#include <map>
#include <ostream>

#include <fmt/format.h>

namespace wellness::analysis {

namespace {

std::string build_summary(const Report& report, const AnalysisConfig& config) {
  const auto& p = report.prepared;
  std::string s;
  s += fmt::format("submissions: {}\n", p.total);
  s += fmt::format("valid: {}\n", p.total - p.rejected.size());
  std::map<std::string, std::size_t> by_reason;
  for (const auto& r : p.rejected) ++by_reason[r.reason.to_string()];
  s += fmt::format("rejected: {}\n", p.rejected.size());
  for (const auto& [reason, count] : by_reason) s += fmt::format("  {}: {}\n", reason, count);
  if (config.include_invalid) s += fmt::format("invalid included: yes (unscorable: {})\n", p.unscorable);
  s += fmt::format("analyzed: {}\n", p.rows.size());
  std::size_t first_of_day = 0;
  for (const auto& row : p.rows) first_of_day += row.submission.is_first_of_day ? 1 : 0;
  s += fmt::format("psqi n: {}\n", first_of_day);
  std::string methods;
  for (auto m : config.methods) methods += (methods.empty() ? "" : ",") + std::string(stats::to_string(m));
  s += fmt::format("methods: {}\n", methods);
  s += "highlighted:\n";
  for (const auto& t : report.tables) {
    for (const auto& c : t.cells) {
      if (!c.highlighted) continue;
      s += fmt::format("  {} {} {}-{} r={:.4f} p={:.4e}{}\n", t.name, stats::to_string(c.method), c.row, c.column,
                       c.result->r, c.result->p_value, c.confirmed ? " confirmed" : "");
    }
  }
  return s;
}

}  // namespace

const ReportTable* Report::table(std::string_view name) const {
  for (const auto& t : tables) {
    if (t.name == name) return &t;
  }
  return nullptr;
}

Report analyze(const Dataset& dataset, const AnalysisConfig& config, const survey::QuestionBank& bank) {
  Report report;
  PrepareOptions options;
  options.experiment = config.experiment;
  options.include_invalid = config.include_invalid;
  options.revalidate = config.revalidate;
  options.scoring = config.scoring;
  report.prepared = prepare(dataset, options, bank);
  const auto& rows = report.prepared.rows;
  if (rows.size() < 3) {
    throw InsufficientData(rows.empty() ? "no valid submissions"
                                        : fmt::format("only {} valid submissions, need at least 3", rows.size()));
  }
  for (auto m : config.methods) report.tables.push_back(build_survey_matrix(rows, m));
  for (auto m : config.methods) {
    const stats::Method one[] = {m};
    report.tables.push_back(build_variable_survey_table(rows, one));
  }
  for (core::Variable v : core::kVariables) report.tables.push_back(build_histogram(rows, v, config.bins));
  mark_confirmed(report.tables);
  report.summary = build_summary(report, config);
  return report;
}

int run(const AnalysisConfig& config, std::ostream& out, std::ostream& err) {
  try {
    if (config.inputs.empty()) throw InputError("no input given");
    if (config.methods.empty()) throw InputError("no correlation method given");
    Dataset dataset;
    for (const auto& input : config.inputs) append_dataset(dataset, load_dataset(input));
    const Report report = analyze(dataset, config);

    std::error_code ec;
    std::filesystem::create_directories(config.out_dir, ec);
    if (ec) throw InputError(fmt::format("cannot create {}: {}", config.out_dir.string(), ec.message()));
    const auto write = [&](const std::string& file, const std::string& content) {
      std::ofstream f(config.out_dir / file, std::ios::binary | std::ios::trunc);
      f << content;
      if (!f) throw InputError(fmt::format("cannot write {}", (config.out_dir / file).string()));
    };
    const char* ext = config.format == OutputFormat::Csv ? ".csv" : ".txt";
    for (const auto& t : report.tables) {
      write(t.name + ext, config.format == OutputFormat::Csv ? render_csv(t) : render_text(t));
    }
    write("summary.txt", report.summary);
    out << report.summary;
    return 0;
  } catch (const InsufficientData& e) {
    err << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace wellness::analysis
