#pragma once

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "avse/data/manifest.hpp"
#include "avse/data/mixer.hpp"
#include "avse/data/scene.hpp"
#include "avse/metrics/report.hpp"
#include "avse/model/network.hpp"
#include "avse/training/checkpoint.hpp"
#include "avse/training/gradcheck.hpp"
#include "avse/training/trainer.hpp"

namespace avse::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitNumeric = 3;

inline constexpr double kGradCheckTolerance = 1e-3;

/// A preset name ("default", "full", "tiny", "small") or a JSON file.
inline model::ModelConfig load_config(const std::string& spec) {
  model::ModelConfig c;
  if (model::ModelConfig::preset(spec, c)) return c;
  std::ifstream in(spec);
  if (!in) throw IoError("cannot open config '" + spec + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError("config '" + spec + "': " + e.what());
  }
  c = j.get<model::ModelConfig>();
  c.validate();
  return c;
}

namespace detail {

struct Args {
  // synth
  std::string out_dir;
  std::size_t scenes = 4;
  std::uint64_t seed = 0;
  double duration = 1.0;
  // mix
  std::string target, interferer, out;
  double snr = 0.0;
  // train
  std::string data_dir, manifest, config = "default";
  std::size_t epochs = 1;
  double lr = 1e-3;
  // enhance
  std::string model, audio, frames;
  // evaluate
  std::string clean, enhanced, report;
  // gradcheck
  std::size_t samples = 200;
};

inline int cmd_synth(const Args& a, std::ostream& out) {
  std::filesystem::create_directories(a.out_dir);
  Rng seeds(a.seed);
  std::vector<data::ManifestEntry> entries;
  for (std::size_t i = 0; i < a.scenes; ++i) {
    auto scene = data::synth_scene(seeds.next_u64(), a.duration);
    scene.id = data::scene_id(i);
    const auto mixture = training::scene_mixture(scene);
    auto entry = data::save_scene(a.out_dir, scene);
    data::save_wav(std::filesystem::path(a.out_dir) / (scene.id + "_mix.wav"), mixture,
                   scene.sample_rate_hz);
    entries.push_back(std::move(entry));
  }
  const auto path = std::filesystem::path(a.out_dir) / "manifest.jsonl";
  data::save_manifest(path, entries);
  out << "wrote " << entries.size() << " scenes to " << path.string() << '\n';
  return kExitOk;
}

inline int cmd_mix(const Args& a, std::ostream& out) {
  const auto t = data::load_wav(a.target);
  const auto i = data::load_wav(a.interferer);
  if (t.sample_rate_hz != i.sample_rate_hz) {
    throw UnsupportedFormatError("mix: target at " + std::to_string(t.sample_rate_hz) +
                                 " Hz, interferer at " + std::to_string(i.sample_rate_hz) + " Hz");
  }
  const auto mixed = data::mix_scene(t.samples, i.samples, a.snr, data::MixOptions{t.sample_rate_hz, a.seed});
  data::save_wav(a.out, mixed, t.sample_rate_hz);
  out << "wrote " << a.out << '\n';
  return kExitOk;
}

inline int cmd_train(const Args& a, std::ostream& out) {
  const auto config = load_config(a.config);
  const std::filesystem::path manifest =
      a.manifest.empty() ? std::filesystem::path(a.data_dir) / "manifest.jsonl" : std::filesystem::path(a.manifest);
  std::vector<data::Scene> scenes;
  for (const auto& e : data::load_manifest(manifest)) scenes.push_back(data::load_scene(e));
  for (const auto& s : scenes) {
    if (s.sample_rate_hz != config.sample_rate_hz) {
      throw UnsupportedFormatError("scene " + s.id + " is at " + std::to_string(s.sample_rate_hz) +
                                   " Hz, config expects " + std::to_string(config.sample_rate_hz));
    }
  }
  training::TrainOptions o;
  o.epochs = a.epochs;
  o.seed = a.seed;
  o.lr = a.lr;
  o.on_epoch = [&out](const training::EpochLog& e) { out << e.json() << '\n'; };
  auto r = training::train(config, scenes, o);
  training::save_checkpoint(a.out, {config, std::move(r.params), std::move(r.optimizer)});
  return kExitOk;
}

inline int cmd_enhance(const Args& a, std::ostream& out) {
  const auto ck = training::load_checkpoint(a.model);
  const auto wave = data::load_wav(a.audio);
  if (wave.sample_rate_hz != ck.config.sample_rate_hz) {
    throw UnsupportedFormatError("enhance: audio at " + std::to_string(wave.sample_rate_hz) +
                                 " Hz, model expects " + std::to_string(ck.config.sample_rate_hz));
  }
  const auto frames = data::read_tensor(a.frames);
  const auto y = model::enhance(wave.samples, frames, ck.params, ck.config);
  if (!y.all_finite()) throw NumericError("enhance: non-finite output");
  data::save_wav(a.out, y, wave.sample_rate_hz);
  out << "wrote " << a.out << '\n';
  return kExitOk;
}

inline std::map<std::string, std::filesystem::path> wavs_by_stem(const std::filesystem::path& dir) {
  std::map<std::string, std::filesystem::path> out;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".wav") out.emplace(e.path().stem().string(), e.path());
  }
  return out;
}

inline int cmd_evaluate(const Args& a, std::ostream& out, std::ostream& err) {
  std::vector<metrics::MetricReport> rows;
  const bool clean_dir = std::filesystem::is_directory(a.clean);
  const bool enhanced_dir = std::filesystem::is_directory(a.enhanced);
  if (clean_dir != enhanced_dir) throw ConfigError("evaluate: --clean and --enhanced must both be files or both be directories");
  if (clean_dir) {
    const auto clean = wavs_by_stem(a.clean), enhanced = wavs_by_stem(a.enhanced);
    for (const auto& [stem, path] : clean) {
      auto it = enhanced.find(stem);
      if (it == enhanced.end()) {
        err << "warning: no enhanced file for '" << stem << "', skipped\n";
        continue;
      }
      rows.push_back(metrics::evaluate_pair(path, it->second));
    }
    for (const auto& [stem, path] : enhanced)
      if (!clean.count(stem)) err << "warning: no clean file for '" << stem << "', skipped\n";
  } else {
    rows.push_back(metrics::evaluate_pair(a.clean, a.enhanced));
  }
  std::ofstream file(a.report, std::ios::trunc);
  if (!file) throw IoError("cannot open report '" + a.report + "' for writing");
  metrics::write_report(file, rows);
  if (!file) throw IoError("write failure on '" + a.report + "'");
  const auto s = metrics::summarize(rows);
  out << "pairs " << s.count << "  mean sisdr_db " << s.sisdr_db << "  mean stoi " << s.stoi << '\n';
  return kExitOk;
}

inline int cmd_info(const Args& a, std::ostream& out) {
  const auto c = load_config(a.config);
  c.validate();
  std::size_t total = 0;
  for (const auto& p : model::parameter_table(c)) {
    const std::size_t n = shape_size(p.shape);
    total += n;
    out << std::left << std::setw(44) << p.name << ' ' << std::setw(16) << shape_string(p.shape) << ' '
        << std::right << std::setw(9) << n << '\n';
  }
  out << "total " << total << '\n';
  return kExitOk;
}

inline int cmd_gradcheck(const Args& a, std::ostream& out) {
  training::GradCheckOptions o;
  o.samples = a.samples;
  const auto r = training::grad_check(model::ModelConfig::tiny(), a.seed, o);
  std::ostringstream line;
  line << std::setprecision(6) << r.max_rel_error;
  out << "max relative error " << line.str() << " over " << r.probes.size() << " parameters\n";
  if (!(r.max_rel_error < kGradCheckTolerance)) throw NumericError("gradient check above tolerance");
  return kExitOk;
}

}  // namespace detail

/// Parses `argv` and runs one subcommand. Returns the process exit code:
/// 0 success, 1 usage, 2 data error, 3 numeric error.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
  detail::Args a;
  CLI::App app{"Audio-visual speech enhancement toolkit", "avse"};
  app.require_subcommand(1);

  auto* synth = app.add_subcommand("synth", "Write synthetic scenes and a manifest");
  synth->add_option("--out", a.out_dir, "Output directory")->required();
  synth->add_option("--scenes", a.scenes, "Number of scenes")->check(CLI::PositiveNumber);
  synth->add_option("--seed", a.seed, "Random seed");
  synth->add_option("--duration", a.duration, "Seconds per scene")->check(CLI::Range(0.5, 3600.0));

  auto* mix = app.add_subcommand("mix", "Mix an interferer into a target at a given SNR");
  mix->add_option("--target", a.target)->required();
  mix->add_option("--interferer", a.interferer)->required();
  mix->add_option("--snr", a.snr, "SNR in dB")->required();
  mix->add_option("--out", a.out)->required();
  mix->add_option("--seed", a.seed, "Trim offset seed for a longer interferer");

  auto* train = app.add_subcommand("train", "Train a model");
  auto* data_opt = train->add_option("--data", a.data_dir, "Directory holding manifest.jsonl");
  auto* manifest_opt = train->add_option("--manifest", a.manifest, "Manifest file");
  data_opt->excludes(manifest_opt);
  train->add_option("--config", a.config, "Config file or preset name");
  train->add_option("--epochs", a.epochs)->required();
  train->add_option("--seed", a.seed);
  train->add_option("--lr", a.lr, "Adam learning rate")->check(CLI::PositiveNumber);
  train->add_option("--out", a.out, "Checkpoint path")->required();

  auto* enhance = app.add_subcommand("enhance", "Enhance one recording");
  enhance->add_option("--model", a.model)->required();
  enhance->add_option("--audio", a.audio)->required();
  enhance->add_option("--frames", a.frames)->required();
  enhance->add_option("--out", a.out)->required();

  auto* evaluate = app.add_subcommand("evaluate", "Score enhanced audio against clean references");
  evaluate->add_option("--clean", a.clean)->required();
  evaluate->add_option("--enhanced", a.enhanced)->required();
  evaluate->add_option("--report", a.report)->required();

  auto* info = app.add_subcommand("info", "Print the parameter table");
  info->add_option("--config", a.config, "Config file or preset name");

  auto* gradcheck = app.add_subcommand("gradcheck", "Finite-difference gradient check");
  gradcheck->add_option("--seed", a.seed);
  gradcheck->add_option("--samples", a.samples)->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e, out, err);
    if (argc > 1 && argv[1][0] != '-' && !app.get_subcommand_no_throw(argv[1]))
      err << "unknown subcommand '" << argv[1] << "'\n";
    else
      err << e.what() << '\n';
    const CLI::App* failing = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
    err << failing->help();
    return kExitUsage;
  }
  if (*train && a.data_dir.empty() && a.manifest.empty()) {
    err << "train: one of --data or --manifest is required\n" << train->help();
    return kExitUsage;
  }

  try {
    if (*synth) return detail::cmd_synth(a, out);
    if (*mix) return detail::cmd_mix(a, out);
    if (*train) return detail::cmd_train(a, out);
    if (*enhance) return detail::cmd_enhance(a, out);
    if (*evaluate) return detail::cmd_evaluate(a, out, err);
    if (*info) return detail::cmd_info(a, out);
    if (*gradcheck) return detail::cmd_gradcheck(a, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return e.kind() == Error::Kind::kNumeric ? kExitNumeric : kExitData;
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace avse::cli
