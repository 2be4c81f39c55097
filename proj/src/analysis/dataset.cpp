#include "wellness/analysis/dataset.hpp"

#include <fstream>
#include <sstream>

#include "wellness/ingest/journal.hpp"
#include "wellness/ingest/records.hpp"

namespace wellness::analysis {

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

template <typename Fn>
void for_each_line(std::string_view text, Fn fn) {
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto newline = text.find('\n');
    std::string_view line = text.substr(0, newline);
    text = newline == std::string_view::npos ? std::string_view{} : text.substr(newline + 1);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    try {
      fn(line);
    } catch (const ingest::RecordFormatError& e) {
      throw InputError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
}

}  // namespace

std::string_view label(ScoreColumn column) {
  switch (column) {
    case ScoreColumn::People: return "people";
    case ScoreColumn::Psqi: return "psqi";
    case ScoreColumn::Pss: return "pss";
    case ScoreColumn::K10: return "k10";
  }
  return "?";
}

std::string_view row_label(core::Variable variable) {
  return variable == core::Variable::Luminosity ? "light" : core::to_string(variable);
}

Dataset parse_dataset(std::string_view records) {
  Dataset out;
  for_each_line(records, [&](std::string_view line) { out.submissions.push_back(ingest::parse_submission_line(line)); });
  return out;
}

Dataset load_dataset(const std::filesystem::path& input) {
  if (!std::filesystem::exists(input)) throw InputError("input " + input.string() + " does not exist");
  if (!std::filesystem::is_directory(input)) return parse_dataset(read_file(input));

  const auto submissions = input / ingest::Journal::kSubmissionsFile;
  if (!std::filesystem::exists(submissions)) throw InputError("no " + submissions.string());
  Dataset out = parse_dataset(read_file(submissions));
  const auto samples = input / ingest::Journal::kSamplesFile;
  if (std::filesystem::exists(samples)) {
    for_each_line(read_file(samples), [&](std::string_view line) {
      auto [id, stream] = ingest::parse_samples_line(line);
      out.samples[id] = std::move(stream);
    });
  }
  return out;
}

void append_dataset(Dataset& into, Dataset more) {
  for (auto& s : more.submissions) into.submissions.push_back(std::move(s));
  for (auto& [id, stream] : more.samples) into.samples[id] = std::move(stream);
}

std::optional<double> ScoredSubmission::value(ScoreColumn column) const {
  switch (column) {
    case ScoreColumn::People: return static_cast<double>(scores.people);
    case ScoreColumn::Psqi:
      if (scores.psqi) return static_cast<double>(*scores.psqi);
      return std::nullopt;
    case ScoreColumn::Pss: return static_cast<double>(scores.pss);
    case ScoreColumn::K10: return static_cast<double>(scores.k10);
  }
  return std::nullopt;
}

PreparedDataset prepare(const Dataset& dataset, const PrepareOptions& options, const survey::QuestionBank& bank) {
  std::vector<core::Submission> selected;
  for (const auto& s : dataset.submissions) {
    if (options.experiment && s.experiment_id != *options.experiment) continue;
    core::Submission copy = s;
    if (options.revalidate) {
      const auto stream = dataset.samples.find(s.submission_id);
      copy.validity = stream != dataset.samples.end() ? core::check_validity(copy, stream->second, bank)
                                                      : core::check_validity_aggregate(copy, bank);
    }
    selected.push_back(std::move(copy));
  }

  PreparedDataset out;
  out.total = selected.size();
  auto filtered = core::filter_dataset(selected);
  out.rejected = std::move(filtered.rejected);

  std::vector<const core::Submission*> usable;
  for (const auto& s : filtered.valid) usable.push_back(&s);
  if (options.include_invalid) {
    for (const auto& r : out.rejected) {
      if (r.reason.code != core::ValidityCode::DuplicateSubmission) usable.push_back(&r.submission);
    }
  }
  for (const core::Submission* s : usable) {
    try {
      out.rows.push_back({*s, survey::score(s->response, bank, options.scoring)});
    } catch (const Error&) {
      ++out.unscorable;
    }
  }
  return out;
}

}  // namespace wellness::analysis
