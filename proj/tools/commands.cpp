#include "commands.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <vector>

#include "json.hpp"
#include "overiva/auxiva.hpp"
#include "overiva/metrics.hpp"
#include "overiva/overiva.hpp"
#include "overiva/scaling.hpp"
#include "overiva/simulator.hpp"
#include "overiva/stft.hpp"
#include "wav_io.hpp"

namespace overiva::cli {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

// Schema violation with the offending field path, surfaced as exit code 2.
struct SpecError : std::runtime_error {
  explicit SpecError(const std::string& path, const std::string& what)
      : std::runtime_error("spec error at " + path + ": " + what) {}
};

SourceModel parse_model(const std::string& name) {
  if (name == "gauss") return SourceModel::kGauss;
  if (name == "laplace") return SourceModel::kLaplace;
  throw InvalidInputError("unknown model '" + name +
                          "' (expected gauss or laplace)");
}

double elapsed_s(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                       start).count();
}

struct AlgoOutput {
  SpectrogramTensor scaled;       // n_src outputs after projection back
  SeparationResult run;
  std::vector<int> selected;      // power selection, when it applies
  double runtime_s = 0.0;
};

AlgoOutput run_algorithm(const std::string& algo, const SpectrogramTensor& X,
                         SeparationConfig cfg) {
  AlgoOutput out;
  const auto start = std::chrono::steady_clock::now();
  if (algo == "overiva") {
    out.run = overiva_run(X, cfg);
    out.runtime_s = elapsed_s(start);
    out.scaled = projection_back(out.run.sources, X);
  } else if (algo == "auxiva") {
    out.run = auxiva_run(X, cfg);
    out.runtime_s = elapsed_s(start);
    const SpectrogramTensor all = projection_back(out.run.sources, X);
    PowerSelection sel = select_by_power(all, cfg.n_src);
    out.scaled = std::move(sel.selected);
    out.selected = std::move(sel.indices);
  } else if (algo == "pca-auxiva") {
    const PcaReduction red = pca_reduce(X, cfg.n_src);
    out.run = auxiva_run(red.reduced, cfg);
    out.runtime_s = elapsed_s(start);
    out.scaled = projection_back(out.run.sources, X);
  } else {
    throw InvalidInputError("unknown algorithm '" + algo +
                            "' (expected overiva, auxiva or pca-auxiva)");
  }
  return out;
}

json trace_json(const SeparationResult& run) {
  json objective = json::array(), orth = json::array(), norm = json::array();
  for (const IterationDiagnostics& d : run.trace) {
    objective.push_back(d.objective);
    orth.push_back(d.max_orthogonality_residual);
    norm.push_back(d.max_normalization_error);
  }
  return {{"objective", objective},
          {"max_orthogonality_residual", orth},
          {"max_normalization_error", norm}};
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const size_t lo = static_cast<size_t>(pos);
  const size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] * (1.0 - frac) + values[hi] * frac;
}

// ---------------------------------------------------------------- simulate

const json* find_field(const json& j, const std::string& key) {
  const auto it = j.find(key);
  return it == j.end() ? nullptr : &*it;
}

template <typename T>
T get_field(const json& j, const std::string& key, T fallback) {
  const json* field = find_field(j, key);
  if (field == nullptr) return fallback;
  try {
    return field->get<T>();
  } catch (const json::exception&) {
    throw SpecError("$." + key, "wrong type");
  }
}

template <typename T>
T require_field(const json& j, const std::string& key) {
  if (find_field(j, key) == nullptr) {
    throw SpecError("$." + key, "missing required field");
  }
  return get_field<T>(j, key, T{});
}

SourceKind parse_source_kind(const std::string& name) {
  if (name == "laplacian_noise") return SourceKind::kLaplacianNoise;
  if (name == "modulated_noise") return SourceKind::kModulatedNoise;
  if (name == "wav_files") return SourceKind::kWavFiles;
  throw SpecError("$.source_kind", "unknown kind '" + name + "'");
}

MixtureSpec parse_mixture_spec(const json& j, const fs::path& base_dir) {
  MixtureSpec spec;
  spec.n_mics = require_field<int>(j, "n_mics");
  spec.n_targets = require_field<int>(j, "n_targets");
  spec.n_interferers = get_field<int>(j, "n_interferers", 0);
  spec.filter_length = get_field<int>(j, "filter_length", 64);
  spec.target_snr_db = get_field<double>(j, "snr_db", 60.0);
  spec.target_sinr_db = get_field<double>(j, "sinr_db", 10.0);
  spec.seed = get_field<std::uint64_t>(j, "seed", 0);
  spec.duration_s = get_field<double>(j, "duration_s", 20.0);
  spec.sample_rate = get_field<double>(j, "sample_rate", 16000.0);
  spec.source_kind = parse_source_kind(
      get_field<std::string>(j, "source_kind", "modulated_noise"));

  if (spec.source_kind == SourceKind::kWavFiles) {
    const json* files = find_field(j, "source_files");
    if (files == nullptr || !files->is_array() || files->empty()) {
      throw SpecError("$.source_files",
                      "wav_files sources need a non-empty file list");
    }
    double rate = 0.0;
    for (size_t i = 0; i < files->size(); ++i) {
      const std::string rel = (*files)[i].get<std::string>();
      const AudioBuffer a = wav::read((base_dir / rel).string());
      if (rate == 0.0) rate = a.sample_rate;
      if (a.sample_rate != rate) {
        throw SpecError("$.source_files[" + std::to_string(i) + "]",
                        "sample rates differ between source files");
      }
      spec.wav_sources.push_back(a.samples.row(0));  // channel 0 of each
    }
    spec.sample_rate = rate;
  }
  return spec;
}

json spec_echo(const MixtureSpec& spec) {
  const char* kind = spec.source_kind == SourceKind::kLaplacianNoise
                         ? "laplacian_noise"
                         : spec.source_kind == SourceKind::kModulatedNoise
                               ? "modulated_noise"
                               : "wav_files";
  return {{"n_mics", spec.n_mics},
          {"n_targets", spec.n_targets},
          {"n_interferers", spec.n_interferers},
          {"filter_length", spec.filter_length},
          {"snr_db", spec.target_snr_db},
          {"sinr_db", spec.target_sinr_db},
          {"source_kind", kind},
          {"seed", spec.seed},
          {"duration_s", spec.duration_s},
          {"sample_rate", spec.sample_rate}};
}

// ------------------------------------------------------------------- bench

struct BenchCell {
  std::string algo = "overiva";
  std::string model = "gauss";
  int n_mics = 2;
  int n_src = 1;
  std::vector<std::uint64_t> seeds;
  int iters = 100;
  int frame = 512;
  MixtureSpec base;  // per-seed template (seed overwritten)
};

BenchCell parse_cell(const json& j, size_t index) {
  const std::string where = "$.cells[" + std::to_string(index) + "]";
  BenchCell cell;
  try {
    cell.algo = get_field<std::string>(j, "algo", cell.algo);
    cell.model = get_field<std::string>(j, "model", cell.model);
    cell.n_mics = require_field<int>(j, "n_mics");
    cell.n_src = require_field<int>(j, "n_src");
    const json* seeds = find_field(j, "seeds");
    if (seeds == nullptr || !seeds->is_array() || seeds->empty()) {
      throw SpecError(where + ".seeds", "need a non-empty seed list");
    }
    for (const json& s : *seeds) cell.seeds.push_back(s.get<std::uint64_t>());
    cell.iters = get_field<int>(j, "iters", cell.iters);
    cell.frame = get_field<int>(j, "frame", cell.frame);
    cell.base.n_mics = cell.n_mics;
    cell.base.n_targets = cell.n_src;
    cell.base.n_interferers = get_field<int>(j, "n_interferers", 5);
    cell.base.filter_length = get_field<int>(j, "filter_length", 64);
    cell.base.target_snr_db = get_field<double>(j, "snr_db", 60.0);
    cell.base.target_sinr_db = get_field<double>(j, "sinr_db", 10.0);
    cell.base.duration_s = get_field<double>(j, "duration_s", 10.0);
    cell.base.sample_rate = get_field<double>(j, "sample_rate", 8000.0);
    cell.base.source_kind = parse_source_kind(
        get_field<std::string>(j, "source_kind", "modulated_noise"));
  } catch (const SpecError&) {
    throw;
  } catch (const json::exception& e) {
    throw SpecError(where, e.what());
  }
  return cell;
}

// SDR improvement of the scaled outputs against the ground-truth reference
// images, edge frames excluded.
std::vector<double> evaluate_cell_run(const SpectrogramTensor& scaled,
                                      const AudioBuffer& mix,
                                      const GroundTruth& truth, int frame) {
  const AudioBuffer outs = stft::synthesize(scaled);
  const Eigen::Index span = outs.length();
  const Eigen::Index keep = span - 2 * frame;
  std::vector<RVec> separated, references;
  for (int k = 0; k < outs.channels(); ++k) {
    separated.push_back(outs.samples.row(k).segment(frame, keep));
  }
  for (const RVec& ref : truth.source_images_ref) {
    references.push_back(ref.segment(frame, keep));
  }
  const RVec mix_ref = mix.samples.row(0).segment(frame, keep);
  return sdr_improvement(separated, mix_ref, references).per_source_db;
}

struct CellStats {
  BenchCell cell;
  double median_runtime_s = 0.0;
  double runtime_ratio_vs_auxiva = 1.0;
  double sdr_median = 0.0, sdr_q1 = 0.0, sdr_q3 = 0.0;
};

CellStats run_cell(const BenchCell& cell) {
  CellStats stats;
  stats.cell = cell;
  std::vector<double> runtimes, auxiva_runtimes, improvements;
  for (const std::uint64_t seed : cell.seeds) {
    MixtureSpec spec = cell.base;
    spec.seed = seed;
    const auto [mix, truth] = generate_mixture(spec);
    const SpectrogramTensor X = stft::analyze(mix, cell.frame);

    SeparationConfig cfg;
    cfg.n_src = cell.n_src;
    cfg.model = parse_model(cell.model);
    cfg.max_iters = cell.iters;
    AlgoOutput out = run_algorithm(cell.algo, X, cfg);
    runtimes.push_back(out.runtime_s);
    if (cell.algo == "auxiva") {
      auxiva_runtimes.push_back(out.runtime_s);
    } else {
      const auto start = std::chrono::steady_clock::now();
      (void)auxiva_run(X, cfg);
      auxiva_runtimes.push_back(elapsed_s(start));
    }
    for (const double imp : evaluate_cell_run(out.scaled, mix, truth,
                                              cell.frame)) {
      improvements.push_back(imp);
    }
  }
  stats.median_runtime_s = quantile(runtimes, 0.5);
  stats.runtime_ratio_vs_auxiva =
      cell.algo == "auxiva"
          ? 1.0
          : stats.median_runtime_s / quantile(auxiva_runtimes, 0.5);
  stats.sdr_median = quantile(improvements, 0.5);
  stats.sdr_q1 = quantile(improvements, 0.25);
  stats.sdr_q3 = quantile(improvements, 0.75);
  return stats;
}

constexpr const char* kCsvHeader =
    "algo,model,n_mics,n_src,n_seeds,median_runtime_s,"
    "runtime_ratio_vs_auxiva,sdr_improvement_median_db,"
    "sdr_improvement_q1_db,sdr_improvement_q3_db";

}  // namespace

int run_separate(const SeparateOptions& opt) {
  AudioBuffer audio;
  try {
    audio = wav::read(opt.input_wav);
  } catch (const wav::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIoError;
  }
  if (opt.n_src < 1 || opt.n_src > audio.channels()) {
    std::cerr << "error: requested " << opt.n_src << " sources from a "
              << audio.channels() << "-channel input\n";
    return kExitUsage;
  }

  try {
    SeparationConfig cfg;
    cfg.n_src = opt.n_src;
    cfg.model = parse_model(opt.model);
    cfg.max_iters = opt.iters;

    const SpectrogramTensor X = stft::analyze(audio, opt.frame);
    const AlgoOutput out = run_algorithm(opt.algo, X, cfg);
    const AudioBuffer rendered = stft::synthesize(out.scaled);

    fs::create_directories(opt.out_dir);
    json output_files = json::array();
    for (int k = 0; k < rendered.channels(); ++k) {
      const std::string name = "source_" + std::to_string(k + 1) + ".wav";
      AudioBuffer mono;
      mono.sample_rate = rendered.sample_rate;
      mono.samples = rendered.samples.row(k);
      wav::write((fs::path(opt.out_dir) / name).string(), mono);
      output_files.push_back(name);
    }

    json sidecar = {
        {"schema_version", 1},
        {"config",
         {{"algo", opt.algo},
          {"model", opt.model},
          {"sources", opt.n_src},
          {"iters", opt.iters},
          {"frame", opt.frame},
          {"seed", opt.seed},
          {"input", opt.input_wav}}},
        {"runtime_s", out.runtime_s},
        {"iterations_run", out.run.iterations_run},
        {"trace", trace_json(out.run)},
        {"output_files", output_files},
    };
    if (!out.selected.empty()) sidecar["selected_channels"] = out.selected;
    std::ofstream((fs::path(opt.out_dir) / "separation.json").string())
        << sidecar.dump(2) << "\n";
    return kExitOk;
  } catch (const InvalidInputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIoError;
  }
}

int run_simulate(const SimulateOptions& opt) {
  json doc;
  try {
    std::ifstream in(opt.spec_path);
    if (!in) {
      std::cerr << "error: cannot open spec: " << opt.spec_path << "\n";
      return kExitIoError;
    }
    doc = json::parse(in);
  } catch (const json::exception& e) {
    std::cerr << "error: spec is not valid JSON: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    const MixtureSpec spec =
        parse_mixture_spec(doc, fs::path(opt.spec_path).parent_path());
    const auto [mix, truth] = generate_mixture(spec);

    fs::create_directories(opt.out_dir);
    wav::write((fs::path(opt.out_dir) / "mixture.wav").string(), mix);
    json reference_files = json::array();
    for (size_t k = 0; k < truth.source_images_ref.size(); ++k) {
      const std::string name =
          "source_" + std::to_string(k + 1) + "_ref.wav";
      AudioBuffer mono;
      mono.sample_rate = mix.sample_rate;
      mono.samples = truth.source_images_ref[k].transpose();
      wav::write((fs::path(opt.out_dir) / name).string(), mono);
      reference_files.push_back(name);
    }
    const json truth_doc = {{"schema_version", 1},
                            {"seed", spec.seed},
                            {"realized_snr_db", truth.realized_snr_db},
                            {"realized_sinr_db", truth.realized_sinr_db},
                            {"spec", spec_echo(spec)},
                            {"mixture_file", "mixture.wav"},
                            {"reference_files", reference_files}};
    std::ofstream((fs::path(opt.out_dir) / "truth.json").string())
        << truth_doc.dump(2) << "\n";
    return kExitOk;
  } catch (const SpecError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const InvalidInputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const wav::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIoError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIoError;
  }
}

int run_bench(const BenchOptions& opt) {
  json doc;
  try {
    std::ifstream in(opt.suite_path);
    if (!in) {
      std::cerr << "error: cannot open suite: " << opt.suite_path << "\n";
      return kExitIoError;
    }
    doc = json::parse(in);
  } catch (const json::exception& e) {
    std::cerr << "error: suite is not valid JSON: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    std::vector<CellStats> results;
    const json* cells = find_field(doc, "cells");
    if (cells != nullptr && !cells->is_array()) {
      throw SpecError("$.cells", "must be an array");
    }
    if (cells != nullptr) {
      for (size_t i = 0; i < cells->size(); ++i) {
        results.push_back(run_cell(parse_cell((*cells)[i], i)));
      }
    }

    std::ofstream csv(opt.out_csv);
    if (!csv) {
      std::cerr << "error: cannot write " << opt.out_csv << "\n";
      return kExitIoError;
    }
    csv << kCsvHeader << "\n";
    json cells_out = json::array();
    for (const CellStats& s : results) {
      csv << s.cell.algo << ',' << s.cell.model << ',' << s.cell.n_mics << ','
          << s.cell.n_src << ',' << s.cell.seeds.size() << ','
          << s.median_runtime_s << ',' << s.runtime_ratio_vs_auxiva << ','
          << s.sdr_median << ',' << s.sdr_q1 << ',' << s.sdr_q3 << "\n";
      cells_out.push_back({{"algo", s.cell.algo},
                           {"model", s.cell.model},
                           {"n_mics", s.cell.n_mics},
                           {"n_src", s.cell.n_src},
                           {"n_seeds", s.cell.seeds.size()},
                           {"median_runtime_s", s.median_runtime_s},
                           {"runtime_ratio_vs_auxiva",
                            s.runtime_ratio_vs_auxiva},
                           {"sdr_improvement_median_db", s.sdr_median},
                           {"sdr_improvement_q1_db", s.sdr_q1},
                           {"sdr_improvement_q3_db", s.sdr_q3}});
    }
    if (!opt.out_json.empty()) {
      std::ofstream out(opt.out_json);
      out << json{{"schema_version", 1}, {"cells", cells_out}}.dump(2)
          << "\n";
    }
    return kExitOk;
  } catch (const SpecError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const InvalidInputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIoError;
  }
}

}  // namespace overiva::cli
