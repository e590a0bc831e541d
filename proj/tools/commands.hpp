#pragma once

#include <cstdint>
#include <string>

namespace overiva::cli {

// Exit codes shared by all subcommands.
inline constexpr int kExitOk = 0;
inline constexpr int kExitIoError = 1;
inline constexpr int kExitUsage = 2;

struct SeparateOptions {
  std::string input_wav;
  std::string out_dir = ".";
  std::string algo = "overiva";  // overiva | auxiva | pca-auxiva
  std::string model = "gauss";   // gauss | laplace
  int n_src = 1;
  int iters = 100;
  int frame = 4096;
  std::uint64_t seed = 0;
};

struct SimulateOptions {
  std::string spec_path;
  std::string out_dir = ".";
};

struct BenchOptions {
  std::string suite_path;
  std::string out_csv = "results.csv";
  std::string out_json;  // optional
};

int run_separate(const SeparateOptions& opt);
int run_simulate(const SimulateOptions& opt);
int run_bench(const BenchOptions& opt);

}  // namespace overiva::cli
