#include <iostream>

#include "CLI11.hpp"
#include "quantamimo/bench_cli.hpp"

int main(int argc, char** argv) {
  namespace cli = qmimo::cli;

  CLI::App app{"Quantized massive-MIMO uplink rate simulator"};
  app.require_subcommand(1);

  cli::RunOptions options;
  std::string profile = "full";
  std::uint64_t seed = 0;
  for (const std::string& name : cli::subcommands()) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", options.config, "flat key = value config file")
        ->required()
        ->check(CLI::ExistingFile);
    sub->add_option("--out", options.out, "output directory")->required();
    sub->add_option("--seed", seed, "override the config seed");
    sub->add_option("--profile", profile, "trial budget")
        ->check(CLI::IsMember({"full", "ci"}))
        ->capture_default_str();
    sub->callback([&, name, sub] {
      options.subcommand = name;
      if (sub->count("--seed")) options.seed = seed;
    });
  }
  app.footer("Worker threads: QUANTAMIMO_WORKERS (default: hardware concurrency).");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    options.profile = cli::profile_from_name(profile);
    cli::run(options, std::cerr);
  } catch (const std::exception& e) {
    std::cerr << "quantamimo: error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
