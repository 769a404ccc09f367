#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "spatialmc/script.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Spatial model checker for multi-dimensional images"};
  app.require_subcommand(1);

  std::string script_path;
  bool verbose = false;
  int threads = 0;

  auto* run = app.add_subcommand("run", "Execute an analysis script");
  run->add_option("script", script_path, "Path to the analysis script")->required();
  run->add_flag("--verbose", verbose, "Print per-formula timings and point counts");
  run->add_option("--threads", threads, "Worker threads (performance only)");

  CLI11_PARSE(app, argc, argv);

  if (run->parsed()) {
    spatialmc::RunOptions opts;
    opts.verbose = verbose;
    opts.threads = threads;
    return spatialmc::run_script_file(script_path, opts, std::cout, std::cerr);
  }
  return 0;
}
