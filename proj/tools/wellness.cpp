// Command-line entry point: offline analysis and the ingest server.

#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "signals.hpp"
#include "wellness/analysis/run.hpp"
#include "wellness/emu/wire.hpp"
#include "wellness/ingest/experiment.hpp"
#include "wellness/ingest/http_api.hpp"

namespace {

std::string env_or(const char* name, std::string fallback) {
  const char* v = std::getenv(name);
  return v && *v ? std::string(v) : std::move(fallback);
}

std::pair<std::string, int> split_address(const std::string& address) {
  const auto colon = address.rfind(':');
  if (colon == std::string::npos) throw CLI::ValidationError("address", "expected host:port");
  return {address.substr(0, colon), std::stoi(address.substr(colon + 1))};
}

int serve(const std::string& data_dir, const std::string& config_path, const std::string& host, int port,
          const std::string& emulator) {
  using namespace wellness;
  auto experiments = ingest::load_experiments(config_path);
  const sigset_t signals = tools::block_termination_signals();
  ingest::IngestService service(std::move(experiments), data_dir);

  ingest::SnapshotSource snapshot;
  if (!emulator.empty()) {
    const auto [emu_host, emu_port] = split_address(emulator);
    snapshot = [emu_host, emu_port]() -> std::optional<core::SensorSample> {
      try {
        emu::EmulatorClient client(emu_host, emu_port);
        return client.snapshot();
      } catch (const std::exception&) {
        return std::nullopt;
      }
    };
  }
  ingest::HttpApi api(service, snapshot);
  const int bound = api.start_background(host, port);
  if (bound < 0) {
    std::cerr << fmt::format("error: cannot bind {}:{}\n", host, port);
    return 1;
  }
  std::cout << fmt::format("listening on {}:{}\n", host, bound) << std::flush;
  tools::wait_for_signal(signals);
  api.stop();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Wellness study tools"};
  app.require_subcommand(1);

  wellness::analysis::AnalysisConfig config;
  std::vector<std::string> inputs;
  std::string experiment;
  std::vector<std::string> methods{"pearson", "spearman"};
  std::string format = "csv";
  std::string out_dir = "report";
  auto* analyze = app.add_subcommand("analyze", "Correlation tables from an export or a data directory");
  analyze->add_option("-i,--input", inputs, "Export file or data directory (repeatable)")->required();
  analyze->add_option("-e,--experiment", experiment, "Only this experiment");
  analyze->add_option("-m,--methods", methods, "pearson, spearman, kendall")->delimiter(',')
      ->check(CLI::IsMember({"pearson", "spearman", "kendall"}));
  analyze->add_option("-o,--out", out_dir, "Output directory");
  analyze->add_option("-f,--format", format, "csv or text")->check(CLI::IsMember({"csv", "text"}));
  analyze->add_flag("--include-invalid", config.include_invalid, "Keep invalid submissions");
  analyze->add_option("--bins", config.bins, "Histogram bins")->check(CLI::PositiveNumber);
  analyze->add_flag("--revalidate", config.revalidate, "Recompute validity verdicts");
  analyze->add_flag("--reverse-score-pss", config.scoring.reverse_score_pss, "Reverse-score keyed PSS items");

  std::string data_dir = env_or("WELLNESS_DATA_DIR", "data-store");
  std::string experiments_path = env_or("WELLNESS_EXPERIMENT_CONFIG", "experiments.json");
  std::string host = env_or("WELLNESS_HOST", "127.0.0.1");
  int port = std::stoi(env_or("WELLNESS_PORT", "8080"));
  std::string emulator = env_or("WELLNESS_EMULATOR", "");
  auto* serve_cmd = app.add_subcommand("serve", "Run the ingest HTTP service");
  serve_cmd->add_option("--data-dir", data_dir, "Journal directory (WELLNESS_DATA_DIR)");
  serve_cmd->add_option("--experiments", experiments_path, "Experiment config (WELLNESS_EXPERIMENT_CONFIG)");
  serve_cmd->add_option("--host", host, "Bind address (WELLNESS_HOST)");
  serve_cmd->add_option("--port", port, "Port, 0 for any (WELLNESS_PORT)");
  serve_cmd->add_option("--emulator", emulator, "host:port of a sensor emulator (WELLNESS_EMULATOR)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*serve_cmd) return serve(data_dir, experiments_path, host, port, emulator);
    for (const auto& i : inputs) config.inputs.emplace_back(i);
    if (!experiment.empty()) config.experiment = experiment;
    config.methods.clear();
    for (const auto& m : methods) config.methods.push_back(*wellness::stats::parse_method(m));
    config.format = format == "text" ? wellness::analysis::OutputFormat::Text : wellness::analysis::OutputFormat::Csv;
    config.out_dir = out_dir;
    return wellness::analysis::run(config, std::cout, std::cerr);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
