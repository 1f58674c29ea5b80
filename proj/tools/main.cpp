#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "commands.hpp"
#include "config.hpp"
#include "cyflow/spectral.hpp"

namespace fs = std::filesystem;
using cyflow::Error;
using cyflow::ErrorKind;
using namespace cyflow::app;

namespace {

int report(ErrorKind kind, const std::string& message,
           const std::optional<fs::path>& run_dir) {
  const json err = error_json(kind, message);
  std::cerr << err.dump() << '\n';
  if (run_dir) {
    std::FILE* out = std::fopen((*run_dir / "error.json").c_str(), "w");
    if (out != nullptr) {
      std::fprintf(out, "%s\n", err.dump(2).c_str());
      std::fclose(out);
    }
  }
  return exit_code_for(kind);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Chern-Yamabe flow simulator on flat complex tori"};
  app.require_subcommand(1);
  std::string config_path;
  std::string out_dir;
  int threads = 1;
  bool verbose = false;
  app.add_option("--config", config_path, "JSON run configuration")
      ->required();
  app.add_option("--out", out_dir, "Output directory (overrides output.dir)");
  app.add_option("--threads", threads, "Worker thread cap")
      ->check(CLI::PositiveNumber);
  app.add_flag("--verbose", verbose, "Progress on stderr");

  app.add_subcommand("flow", "Integrate the flow and record diagnostics")
      ->fallthrough();
  app.add_subcommand("steady", "Run until ||S - lambda||_inf <= tol")
      ->fallthrough();
  app.add_subcommand("unbounded", "Bump-family sweep of F")->fallthrough();
  app.add_subcommand("stability",
                     "Minimum Hessian eigenvalue, optionally the saddle run")
      ->fallthrough();
  app.add_subcommand("c0cert", "Co-evolved C0 certificate")->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return report(ErrorKind::ConfigError, e.what(), std::nullopt);
  }
  const std::string command = app.get_subcommands().front()->get_name();

  std::optional<fs::path> run_dir;
  try {
    cyflow::set_fft_threads(threads);
    const RunConfig cfg = load_config(config_path);
    const fs::path base = out_dir.empty() ? cfg.output.dir : fs::path(out_dir);
    run_dir = prepare_run_dir(cfg, command, base);
    if (verbose) std::cerr << "run directory " << run_dir->string() << '\n';
    run_command(command, cfg, *run_dir, CommandOptions{verbose});
    std::cout << run_dir->string() << '\n';
    return kExitOk;
  } catch (const Error& e) {
    return report(e.kind(), e.what(), run_dir);
  } catch (const std::exception& e) {
    return report(ErrorKind::IoError, e.what(), run_dir);
  }
}
