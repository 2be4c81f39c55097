// Software stand-in for the wearable environmental sensor.

#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "signals.hpp"
#include "wellness/emu/wire.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Environmental sensor emulator"};
  std::string profile = "indoor_office";
  std::string fault = "none";
  std::optional<std::uint64_t> seed;
  std::string listen = "127.0.0.1:7070";
  std::string device_id = "sensortag-emu-0";
  bool accelerated = false;
  app.add_option("-p,--profile", profile, "Built-in profile name or profile JSON file");
  app.add_option("--fault", fault, "none | zero:<var,...> | zero:all | drop:<p>");
  app.add_option("--seed", seed, "Override the profile seed");
  app.add_option("-l,--listen", listen, "host:port, port 0 for any");
  app.add_option("--device-id", device_id, "Identifier in the greeting");
  app.add_flag("--accelerated", accelerated, "Emit samples without pacing, with virtual timestamps");
  CLI11_PARSE(app, argc, argv);

  try {
    wellness::emu::EmulatorConfig config;
    config.profile = wellness::emu::resolve_profile(profile);
    if (seed) config.profile.seed = *seed;
    config.fault = wellness::emu::FaultMode::parse(fault);
    config.device_id = device_id;
    config.accelerated = accelerated;

    const auto colon = listen.rfind(':');
    if (colon == std::string::npos) throw std::invalid_argument("--listen expects host:port");
    const sigset_t signals = wellness::tools::block_termination_signals();
    wellness::emu::EmulatorServer server(config);
    const int port = server.listen(listen.substr(0, colon), std::stoi(listen.substr(colon + 1)));
    server.start_background();
    std::cout << fmt::format("{} ({}) listening on {}:{}\n", device_id, config.profile.name, listen.substr(0, colon),
                             port)
              << std::flush;
    wellness::tools::wait_for_signal(signals);
    server.stop();
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
