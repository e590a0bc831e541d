#include <CLI11.hpp>

#include "commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"OverIVA blind source separation toolkit"};
  app.require_subcommand(1);

  overiva::cli::SeparateOptions sep;
  CLI::App* separate =
      app.add_subcommand("separate", "Separate sources from a WAV mixture");
  separate->add_option("input", sep.input_wav, "multichannel input WAV")
      ->required();
  separate->add_option("--sources", sep.n_src, "number of sources to extract")
      ->required();
  separate->add_option("--algo", sep.algo, "overiva | auxiva | pca-auxiva");
  separate->add_option("--model", sep.model, "gauss | laplace");
  separate->add_option("--iters", sep.iters, "iteration count");
  separate->add_option("--frame", sep.frame, "STFT frame size in samples");
  separate->add_option("--seed", sep.seed, "recorded in the result sidecar");
  separate->add_option("--out-dir", sep.out_dir, "output directory");

  overiva::cli::SimulateOptions sim;
  CLI::App* simulate =
      app.add_subcommand("simulate", "Generate a synthetic mixture");
  simulate->add_option("spec", sim.spec_path, "mixture spec JSON")->required();
  simulate->add_option("--out-dir", sim.out_dir, "output directory");

  overiva::cli::BenchOptions bench;
  CLI::App* bench_cmd =
      app.add_subcommand("bench", "Run a benchmark suite");
  bench_cmd->add_option("suite", bench.suite_path, "suite JSON")->required();
  bench_cmd->add_option("--out-csv", bench.out_csv, "CSV results path");
  bench_cmd->add_option("--out-json", bench.out_json, "JSON results path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return overiva::cli::kExitUsage;
  }

  if (separate->parsed()) return overiva::cli::run_separate(sep);
  if (simulate->parsed()) return overiva::cli::run_simulate(sim);
  return overiva::cli::run_bench(bench);
}
