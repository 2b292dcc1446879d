//
// Copyright 2026 The Scorelab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

// Command-line front end: train, attack, bench, ablate, report.
//
// Every subcommand that runs an experiment accepts --config FILE (JSON, the
// schema written by ConfigToJson) and per-field flags. Flags are applied as
// a JSON merge patch on top of the file, so flags win.
//
// Exit codes: 0 success, 2 bad configuration or usage, 3 training or attack
// failure, 4 I/O or input-data failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "scorelab/attacks.h"
#include "scorelab/bench.h"
#include "scorelab/experiment.h"
#include "scorelab/report.h"
#include "scorelab/tensor_lite.h"
#include "scorelab/vfl.h"

namespace {

using nlohmann::json;
using namespace scorelab;

enum ExitCode { kOk = 0, kConfigError = 2, kTrainingError = 3, kIoError = 4 };

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// One optional flag per config field; `path` locates the field in the
// config JSON.
struct ConfigFlags {
  std::string config_file;
  std::map<std::string, std::optional<double>> numbers;
  std::map<std::string, std::optional<std::string>> strings;
  std::optional<std::string> defense_kind;
  std::optional<std::uint64_t> seed;
};

struct NumberFlag {
  const char* flag;
  const char* path;  // slash-separated JSON pointer without the leading '/'
  const char* help;
};

const NumberFlag kNumberFlags[] = {
    {"--classes", "data/classes", "synthetic class count"},
    {"--dims", "data/dims", "synthetic feature count"},
    {"--samples", "data/samples", "synthetic sample count"},
    {"--margin", "data/margin", "synthetic class-center scale"},
    {"--data-seed", "data/seed", "synthetic data seed"},
    {"--test-fraction", "data/test_fraction", "held-out fraction"},
    {"--hidden", "model/hidden_units", "NN hidden width"},
    {"--embedding", "model/embedding_dim", "NN per-party embedding width"},
    {"--epochs", "model/epochs", "training epochs"},
    {"--batch-size", "model/batch_size", "training batch size"},
    {"--lr", "model/learning_rate", "training step size"},
    {"--parties", "federation/parties", "number of parties"},
    {"--strength", "federation/attack_strength", "active party's feature share"},
    {"--epsilon", "defense/epsilon", "privacy budget"},
    {"--delta", "defense/delta", "privacy delta"},
    {"--sensitivity", "defense/sensitivity", "l2 sensitivity"},
    {"--epsilon-min", "defense/epsilon_min", "PRIVEE-DP++ smallest epsilon"},
    {"--epsilon-max", "defense/epsilon_max", "PRIVEE-DP++ largest epsilon"},
    {"--digits", "defense/digits", "rounding digits"},
    {"--key", "defense/key", "monotone-encode key"},
    {"--attack-samples", "attack/samples", "GIA rows taken from the test split"},
    {"--gia-step", "attack/gia/step_size", "GIA step size"},
    {"--gia-iters", "attack/gia/max_iters", "GIA iteration cap"},
    {"--gia-tolerance", "attack/gia/tolerance", "GIA plateau tolerance"},
    {"--gia-restarts", "attack/gia/restarts", "GIA restarts"},
    {"--grn-hidden", "attack/grn/hidden_units", "GRN hidden width"},
    {"--grn-epochs", "attack/grn/epochs", "GRN epochs"},
    {"--grn-batch", "attack/grn/batch_size", "GRN batch size"},
    {"--grn-step", "attack/grn/step_size", "GRN step size"},
    {"--grn-clip", "attack/grn/clip_norm", "GRN gradient clip norm (0 disables)"},
};

const std::map<std::string, std::string> kIntegerPaths = {
    {"data/classes", ""},        {"data/dims", ""},         {"data/samples", ""},
    {"data/seed", ""},           {"model/hidden_units", ""}, {"model/embedding_dim", ""},
    {"model/epochs", ""},        {"model/batch_size", ""},  {"federation/parties", ""},
    {"defense/digits", ""},      {"defense/key", ""},       {"attack/samples", ""},
    {"attack/gia/max_iters", ""}, {"attack/gia/restarts", ""}, {"attack/grn/hidden_units", ""},
    {"attack/grn/epochs", ""},   {"attack/grn/batch_size", ""},
};

struct StringFlag {
  const char* flag;
  const char* path;
  const char* help;
};

const StringFlag kStringFlags[] = {
    {"--csv", "data/csv", "CSV dataset instead of synthetic data"},
    {"--model", "model/kind", "lr or nn"},
    {"--transform", "defense/transform", "identity or reflection"},
    {"--sampling", "defense/sampling", "random or midpoint"},
    {"--attack", "attack/kind", "gia or grn"},
};

void AddConfigFlags(CLI::App* app, ConfigFlags& flags) {
  app->add_option("--config", flags.config_file, "JSON experiment config")
      ->check(CLI::ExistingFile);
  for (const auto& f : kNumberFlags) {
    app->add_option(f.flag, flags.numbers[f.path], f.help);
  }
  for (const auto& f : kStringFlags) {
    app->add_option(f.flag, flags.strings[f.path], f.help);
  }
  app->add_option("--defense", flags.defense_kind,
                  "none, privee-dp, privee-dp++, round, gaussian-dp, monotone-encode");
  app->add_option("--seed", flags.seed, "experiment seed");
}

json ReadJsonFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument("'" + path + "' is not valid JSON: " + e.what());
  }
}

json* Slot(json& root, const std::string& path) {
  json* node = &root;
  std::stringstream ss(path);
  std::string part;
  while (std::getline(ss, part, '/')) node = &(*node)[part];
  return node;
}

ExperimentConfig BuildConfig(const ConfigFlags& flags, std::string* output_flag) {
  json cfg = flags.config_file.empty() ? ConfigToJson(ExperimentConfig{})
                                       : ReadJsonFile(flags.config_file);
  if (!cfg.is_object()) throw std::invalid_argument("config must be a JSON object");
  json patch = json::object();
  if (flags.defense_kind) {
    const std::string current = cfg.contains("defense") && cfg["defense"].contains("kind")
                                    ? cfg["defense"]["kind"].get<std::string>()
                                    : "privee-dp";
    // Switching kinds drops the old defense's parameters.
    if (*flags.defense_kind != current) cfg["defense"] = json::object();
    (*Slot(patch, "defense/kind")) = *flags.defense_kind;
  }
  for (const auto& [path, value] : flags.numbers) {
    if (!value) continue;
    if (kIntegerPaths.count(path)) {
      if (*value < 0 || *value != static_cast<double>(static_cast<std::uint64_t>(*value))) {
        throw std::invalid_argument(path + " must be a non-negative integer");
      }
      *Slot(patch, path) = static_cast<std::uint64_t>(*value);
    } else {
      *Slot(patch, path) = *value;
    }
  }
  for (const auto& [path, value] : flags.strings) {
    if (value) *Slot(patch, path) = *value;
  }
  if (flags.seed) patch["seed"] = *flags.seed;
  if (output_flag && !output_flag->empty()) patch["output"] = *output_flag;
  cfg.merge_patch(patch);
  return ConfigFromJson(cfg);
}

void WriteText(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << text;
  if (!out) throw IoError("write to '" + path + "' failed");
}

std::vector<std::string> SplitList(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

DefenseKind DefenseByName(const std::string& name) {
  return DefenseFromJson(json{{"kind", name}});
}

int RunTrain(const ConfigFlags& flags, const std::string& out_path,
             const std::string& checkpoint_dir) {
  std::string out = out_path;
  const ExperimentConfig cfg = BuildConfig(flags, &out);
  const PreparedTask task = PrepareTask(cfg);
  Rng rng(cfg.seed);
  const double test_acc =
      EvaluateAccuracy(task.trained.model, task.data.test, defense::None{}, rng);
  json summary = {{"config", ConfigToJson(cfg)},
                  {"train_accuracy", task.trained.epoch_accuracy},
                  {"test_accuracy", test_acc},
                  {"train_seconds", task.train_seconds}};
  if (!checkpoint_dir.empty()) {
    std::filesystem::create_directories(checkpoint_dir);
    const auto& parties = task.trained.model.parties();
    for (std::size_t p = 0; p < parties.size(); ++p) {
      const std::string path = checkpoint_dir + "/party" + std::to_string(p) + ".model";
      std::ostringstream text;
      WriteModel(text, parties[p]);
      WriteText(path, text.str());
    }
    if (const auto& head = task.trained.model.head_layer()) {
      std::ostringstream text;
      WriteModel(text, Model({ModelKind::kLinear, head->in_dim(), head->out_dim(), 1}, {*head}));
      WriteText(checkpoint_dir + "/head.model", text.str());
    }
    summary["checkpoint_dir"] = checkpoint_dir;
  }
  WriteText(cfg.output_path, summary.dump(2) + "\n");
  std::fprintf(stderr, "trained %zu epochs, test accuracy %.4f\n", cfg.train.epochs, test_acc);
  return kOk;
}

int RunAttack(const ConfigFlags& flags, const std::string& out_path) {
  std::string out = out_path;
  const ExperimentConfig cfg = BuildConfig(flags, &out);
  const ExperimentRecord rec = RunExperiment(cfg);
  WriteText(cfg.output_path, RecordToJson(rec).dump(2) + "\n");
  std::fprintf(stderr,
               "%s vs %s: mse %.6g -> %.6g (guess %.6g), accuracy %.4f, delta %.4f%s\n",
               rec.attack.c_str(), rec.defense.c_str(), rec.mse_no_defense,
               rec.mse_with_defense, rec.random_guess_mse, rec.accuracy_with_defense,
               rec.delta_accuracy, rec.accuracy_budget_exceeded ? " (over budget)" : "");
  return kOk;
}

int RunBench(const std::string& defenses, const std::string& ks_text, std::size_t calls,
             std::size_t warmup, std::uint64_t seed, const std::string& out_path,
             const std::string& plot_path) {
  std::vector<DefenseKind> kinds;
  for (const auto& name : SplitList(defenses)) kinds.push_back(DefenseByName(name));
  std::vector<std::size_t> ks;
  for (const auto& k : SplitList(ks_text)) ks.push_back(std::stoul(k));
  const auto points = BenchDefenseScaling(kinds, ks, {calls, warmup, seed});

  std::ostringstream csv;
  WriteBenchCsv(csv, points);
  WriteText(out_path, csv.str());

  std::vector<ChartSeries> series;
  for (std::size_t i = 0; i < kinds.size(); ++i) {
    const std::span<const BenchPoint> block(points.data() + i * ks.size(), ks.size());
    ChartSeries s{block.front().defense, {}, {}};
    for (const auto& p : block) {
      s.x.push_back(static_cast<double>(p.k));
      s.y.push_back(p.mean_seconds);
    }
    series.push_back(s);
    if (ks.size() >= 2) {
      std::fprintf(stderr, "%-16s log-log slope %.3f\n", s.name.c_str(), LogLogSlope(block));
    }
  }
  if (!plot_path.empty()) {
    WriteText(plot_path,
              RenderSvgChart("Defense latency", "classes K", "mean seconds per call", series,
                             true, true));
  }
  return kOk;
}

int RunAblate(const ConfigFlags& flags, const std::string& eps_text,
              const std::string& clients_text, const std::string& out_path,
              const std::string& json_path, const std::string& plot_path) {
  std::string out = out_path;
  const ExperimentConfig cfg = BuildConfig(flags, &out);
  AblationGrid grid;
  for (const auto& e : SplitList(eps_text)) grid.epsilons.push_back(std::stod(e));
  for (const auto& c : SplitList(clients_text)) grid.client_counts.push_back(std::stoul(c));
  const auto records = Ablate(cfg, grid);

  std::ostringstream csv;
  WriteRecordsCsv(csv, records);
  WriteText(cfg.output_path, csv.str());
  if (!json_path.empty()) {
    json all = json::array();
    for (const auto& r : records) all.push_back(RecordToJson(r));
    WriteText(json_path, all.dump(2) + "\n");
  }
  if (!plot_path.empty()) {
    std::vector<ChartSeries> series;
    for (std::size_t c : grid.client_counts) {
      ChartSeries s{"with defense, " + std::to_string(c) + " parties", {}, {}};
      ChartSeries base{"no defense, " + std::to_string(c) + " parties", {}, {}};
      for (const auto& r : records) {
        if (r.n_parties != c) continue;
        s.x.push_back(r.epsilon);
        s.y.push_back(r.mse_with_defense);
        base.x.push_back(r.epsilon);
        base.y.push_back(r.mse_no_defense);
      }
      series.push_back(s);
      series.push_back(base);
    }
    WriteText(plot_path, RenderSvgChart("Reconstruction MSE vs epsilon", "epsilon", "MSE",
                                        series, true, true));
  }
  for (const auto& r : records) {
    std::fprintf(stderr, "eps %-6g parties %-3zu mse %.6g -> %.6g  delta acc %.4f\n",
                 r.epsilon, r.n_parties, r.mse_no_defense, r.mse_with_defense,
                 r.delta_accuracy);
  }
  return kOk;
}

int RunReport(const std::vector<std::string>& inputs, const std::string& out_path) {
  std::vector<ExperimentRecord> records;
  for (const auto& path : inputs) {
    const json j = ReadJsonFile(path);
    if (j.is_array()) {
      for (const auto& r : j) records.push_back(RecordFromJson(r));
    } else {
      records.push_back(RecordFromJson(j));
    }
  }
  std::ostringstream csv;
  WriteRecordsCsv(csv, records);
  WriteText(out_path, csv.str());
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Score-perturbation defenses and feature-inference attacks for simulated "
               "vertical federated learning"};
  app.require_subcommand(1);

  ConfigFlags train_flags, attack_flags, ablate_flags;
  std::string train_out, checkpoint_dir, attack_out, ablate_out, ablate_json, ablate_plot;
  std::string bench_out, bench_plot;
  std::string bench_defenses = "privee-dp,privee-dp++,round,gaussian-dp,monotone-encode";
  std::string bench_ks = "10,100,1000,10000";
  std::size_t bench_calls = 1000, bench_warmup = 100;
  std::uint64_t bench_seed = 7;
  std::string epsilons = "0.05,0.07,0.1,0.5,0.9", clients = "2";
  std::vector<std::string> report_inputs;
  std::string report_out;

  CLI::App* train = app.add_subcommand("train", "train the joint model and report accuracy");
  AddConfigFlags(train, train_flags);
  train->add_option("--out", train_out, "summary JSON path (default stdout)");
  train->add_option("--checkpoint-dir", checkpoint_dir, "write per-party model checkpoints");

  CLI::App* attack = app.add_subcommand("attack", "run one experiment record");
  AddConfigFlags(attack, attack_flags);
  attack->add_option("--out", attack_out, "record JSON path (default stdout)");

  CLI::App* bench = app.add_subcommand("bench", "time defenses against the class count");
  bench->add_option("--defenses", bench_defenses, "comma-separated defense kinds");
  bench->add_option("--ks", bench_ks, "ascending comma-separated class counts");
  bench->add_option("--calls", bench_calls, "timed calls per point (>= 1000)");
  bench->add_option("--warmup", bench_warmup, "untimed warm-up calls");
  bench->add_option("--seed", bench_seed, "input seed");
  bench->add_option("--out", bench_out, "CSV path")->required();
  bench->add_option("--plot", bench_plot, "SVG chart path");

  CLI::App* ablate = app.add_subcommand("ablate", "epsilon x party-count grid");
  AddConfigFlags(ablate, ablate_flags);
  ablate->add_option("--epsilons", epsilons, "comma-separated epsilons");
  ablate->add_option("--clients", clients, "comma-separated party counts");
  ablate->add_option("--out", ablate_out, "CSV path")->required();
  ablate->add_option("--json", ablate_json, "also write all records as a JSON array");
  ablate->add_option("--plot", ablate_plot, "SVG chart path");

  CLI::App* report = app.add_subcommand("report", "merge record JSON files into one CSV");
  report->add_option("inputs", report_inputs, "record JSON files")->required();
  report->add_option("--out", report_out, "CSV path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*train) return RunTrain(train_flags, train_out, checkpoint_dir);
    if (*attack) {
      if (!attack_flags.seed) throw std::invalid_argument("attack requires --seed");
      return RunAttack(attack_flags, attack_out);
    }
    if (*bench) {
      return RunBench(bench_defenses, bench_ks, bench_calls, bench_warmup, bench_seed,
                      bench_out, bench_plot);
    }
    if (*ablate) {
      if (!ablate_flags.seed) throw std::invalid_argument("ablate requires --seed");
      return RunAblate(ablate_flags, epsilons, clients, ablate_out, ablate_json, ablate_plot);
    }
    if (*report) return RunReport(report_inputs, report_out);
  } catch (const TrainingDiverged& e) {
    std::fprintf(stderr, "training failed: %s\n", e.what());
    return kTrainingError;
  } catch (const AttackFailed& e) {
    std::fprintf(stderr, "attack failed: %s\n", e.what());
    return kTrainingError;
  } catch (const CsvError& e) {
    std::fprintf(stderr, "input error: %s\n", e.what());
    return kIoError;
  } catch (const IoError& e) {
    std::fprintf(stderr, "I/O error: %s\n", e.what());
    return kIoError;
  } catch (const std::ios_base::failure& e) {
    std::fprintf(stderr, "I/O error: %s\n", e.what());
    return kIoError;
  } catch (const std::filesystem::filesystem_error& e) {
    std::fprintf(stderr, "I/O error: %s\n", e.what());
    return kIoError;
  } catch (const json::exception& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kConfigError;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kConfigError;
  } catch (const std::out_of_range& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kConfigError;
  }
  return kConfigError;
}
