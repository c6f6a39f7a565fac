// Command-line front end: runs a config-described experiment and writes its
// artifacts (control/history/Bloch/sweep CSVs, report JSON, manifest).
//
// Exit codes: 0 success, 2 config or validation error, 3 divergence,
// 4 I/O error.

#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "qec/qec.hpp"

int main(int argc, char** argv) {
  CLI::App app{"qec - learned control fields for classifying inhomogeneous quantum ensembles"};

  std::string config_path;
  int threads = 0;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string out_dir;
  bool quiet = false;

  app.add_option("--config", config_path, "experiment config (JSON)")->required();
  app.add_option("--threads", threads, "worker threads (default: available cores)");
  app.add_option("--seed", seed, "override the evaluation seed")
      ->each([&](const std::string&) { seed_set = true; });
  app.add_option("--out", out_dir, "override the output directory");
  app.add_flag("--quiet", quiet, "suppress progress output");

  CLI11_PARSE(app, argc, argv);

  qec::RunOptions opts;
  if (threads > 0) opts.threads = threads;
  if (seed_set) opts.seed = seed;
  if (!out_dir.empty()) opts.out_dir = out_dir;
  opts.verbose = !quiet;

  try {
    const qec::OutputBundle bundle = qec::run_config_file(config_path, opts);
    std::cout << "wrote " << bundle.files.size() << " file(s) to " << bundle.directory.string()
              << " (manifest: " << bundle.manifest.string() << ")\n";
    return 0;
  } catch (const qec::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const qec::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const qec::DivergenceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const qec::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
