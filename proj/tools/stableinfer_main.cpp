#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "stableinfer/errors.hpp"
#include "stableinfer/experiment.hpp"
#include "stableinfer/hash.hpp"
#include "stableinfer/parallel.hpp"

namespace {

constexpr int kExitIo = 1;
constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"stableinfer: alpha-stable random fields and Bayesian well-posedness experiments"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  unsigned threads = 1;

  auto* run = app.add_subcommand("run", "run an experiment");
  run->add_option("--config", config_path, "experiment configuration (JSON)")->required();
  run->add_option("--out", out_dir, "output directory (overrides output_dir)");
  run->add_option("--seed", seed, "seed override");
  run->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);

  auto* validate = app.add_subcommand("validate", "parse and check a configuration");
  validate->add_option("--config", config_path, "experiment configuration (JSON)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitConfig;
  }

  try {
    auto config = stableinfer::load_config(config_path);
    if (validate->parsed()) {
      std::cout << config.to_text();
      return 0;
    }
    if (seed) config.set_seed(*seed);
    if (!out_dir.empty()) config.set_output_dir(out_dir);
    stableinfer::set_thread_count(threads);
    const auto m = stableinfer::run(config);
    std::cout << stableinfer::to_string(config.kind) << ": " << m.files.size() << " files in "
              << m.directory.string() << " (config " << stableinfer::hex64(m.config_hash) << ", "
              << m.wall_seconds << " s)\n";
    return 0;
  } catch (const stableinfer::ConfigParse& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const stableinfer::IoFailure& e) {
    std::cerr << "io error: " << e.what() << '\n';
    return kExitIo;
  } catch (const stableinfer::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  }
}
