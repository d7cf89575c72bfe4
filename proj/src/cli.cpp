/* Copyright 2026 The codeseg Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "codeseg/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "codeseg/checkpoint.hpp"
#include "codeseg/corpus.hpp"
#include "codeseg/error.hpp"
#include "codeseg/log.hpp"
#include "codeseg/sample_io.hpp"
#include "codeseg/segmenter.hpp"
#include "codeseg/training.hpp"
#include "codeseg/windowing.hpp"

namespace codeseg::cli {
namespace {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

constexpr std::uint64_t kDefaultSeed = 42;
constexpr const char* kSplitNames[] = {"train", "validation", "test"};

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    std::size_t end = s.find(',', pos);
    if (end == std::string_view::npos) end = s.size();
    std::string item = trim(s.substr(pos, end - pos));
    if (!item.empty()) out.push_back(item);
    pos = end + 1;
  }
  return out;
}

// Reads "key = value" lines ('#' starts a comment) and returns them as
// "--key=value" arguments.
std::vector<std::string> config_args(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read config file: " + path.string());
  std::vector<std::string> args;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    const std::string content = trim(line);
    if (content.empty()) continue;
    const auto eq = content.find('=');
    if (eq == std::string::npos) {
      throw UsageError(path.string() + ":" + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key = trim(std::string_view(content).substr(0, eq));
    const std::string value = trim(std::string_view(content).substr(eq + 1));
    if (key.empty() || key == "config") {
      throw UsageError(path.string() + ":" + std::to_string(line_no) + ": invalid key");
    }
    args.push_back("--" + key + "=" + value);
  }
  return args;
}

// Splices config-file arguments in front of the user's own flags so that the
// command line wins (every single-valued option keeps its last value).
std::vector<std::string> expand_config(std::span<const std::string> args) {
  std::vector<std::string> out(args.begin(), args.end());
  for (std::size_t i = 0; i < args.size(); ++i) {
    std::string path;
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    else if (args[i].starts_with("--config=")) path = args[i].substr(9);
    else continue;
    const auto extra = config_args(path);
    out.insert(out.begin() + 1, extra.begin(), extra.end());
    break;
  }
  return out;
}

std::string fmt_pct(double fraction) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(2) << 100.0 * fraction;
  return s.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::kIo, "cannot write " + path.string());
  out << text;
  if (!out) fail(ErrorCode::kIo, "failed writing " + path.string());
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// ---------------------------------------------------------------------------
// build-dataset

struct BuildOptions {
  std::vector<std::string> corpora;
  std::string languages = "all";
  std::string variant = "all";
  std::uint64_t seed = kDefaultSeed;
  std::string out;
  std::size_t min_lines = kDefaultMinLines;
  bool no_shuffle = false;
};

int cmd_build_dataset(const BuildOptions& o, std::ostream& out) {
  std::vector<SampleVariant> variants;
  if (o.variant == "all") {
    variants = {SampleVariant::kBag, SampleVariant::kUncentered, SampleVariant::kCentered};
  } else {
    variants = {parse_variant(o.variant)};
  }

  bool all_languages = false;
  std::vector<Language> wanted;
  for (const auto& name : split_list(o.languages)) {
    if (name == "all") all_languages = true;
    else if (parse_language(name) == Language::kOther && name != "other") {
      throw UsageError("unknown language '" + name + "'");
    } else {
      wanted.push_back(parse_language(name));
    }
  }
  if (!all_languages && wanted.empty()) throw UsageError("--languages must not be empty");

  std::vector<Snippet> snippets;
  std::size_t record_errors = 0;
  for (const auto& path : o.corpora) {
    LoadResult loaded = load_corpus(path);
    for (const auto& err : loaded.errors) {
      log::error(path + ":" + std::to_string(err.line_number) + ": " + err.message);
    }
    record_errors += loaded.errors.size();
    for (auto& s : loaded.snippets) {
      if (all_languages || std::find(wanted.begin(), wanted.end(), s.language) != wanted.end()) {
        snippets.push_back(std::move(s));
      }
    }
  }
  const std::size_t loaded_count = snippets.size();
  const std::vector<Snippet> kept = filter_snippets(snippets, o.min_lines);
  const CorpusSplit split = split_corpus(kept, o.seed);
  const std::vector<Snippet>* parts[] = {&split.train, &split.validation, &split.test};

  fs::create_directories(o.out);
  ojson stats;
  stats["seed"] = o.seed;
  stats["snippets"] = {{"loaded", loaded_count},
                       {"record_errors", record_errors},
                       {"after_filter", kept.size()},
                       {"train", split.train.size()},
                       {"validation", split.validation.size()},
                       {"test", split.test.size()}};
  auto& sample_stats_json = stats["samples"] = ojson::object();

  out << std::left << std::setw(12) << "split" << std::setw(12) << "variant" << std::setw(10)
      << "samples" << std::setw(11) << "dividing%" << "non-dividing%\n";
  for (std::size_t i = 0; i < 3; ++i) {
    std::vector<Snippet> ordered = *parts[i];
    if (!o.no_shuffle) ordered = shuffled(std::move(ordered), splitmix64(o.seed + 1 + i));
    const Block block = build_block(ordered);
    for (SampleVariant v : variants) {
      SampleSet set;
      switch (v) {
        case SampleVariant::kBag: set = gen_bag_samples(block); break;
        case SampleVariant::kUncentered: set = gen_uncentered_samples(block); break;
        case SampleVariant::kCentered: set = gen_centered_samples(block); break;
      }
      const fs::path file = fs::path(o.out) / (std::string(kSplitNames[i]) + "." +
                                               std::string(variant_name(v)) + ".cseg");
      save_samples(file, set);
      const SampleStats st = sample_stats(set);
      sample_stats_json[kSplitNames[i]][std::string(variant_name(v))] = {
          {"count", st.count}, {"positive_fraction", st.positive_fraction}};
      out << std::setw(12) << kSplitNames[i] << std::setw(12) << variant_name(v) << std::setw(10)
          << st.count << std::setw(11) << fmt_pct(st.positive_fraction)
          << fmt_pct(1.0 - st.positive_fraction) << "\n";
    }
  }
  write_text(fs::path(o.out) / "stats.json", stats.dump(2) + "\n");
  return kExitOk;
}

// ---------------------------------------------------------------------------
// train

struct TrainOptions {
  std::string arch;
  std::string data;
  std::string train_path;
  std::string val_path;
  std::string out;
  std::string history;
  std::uint64_t seed = kDefaultSeed;
  TrainConfig cfg;
  std::optional<std::size_t> embed_dim;
  std::optional<std::size_t> hidden;
  std::string dense;
  std::optional<double> dropout;
};

int cmd_train(TrainOptions o, std::ostream& out) {
  const ModelKind kind = parse_kind(o.arch);
  const std::string variant(variant_name(variant_for(kind)));
  if (o.train_path.empty() || o.val_path.empty()) {
    if (o.data.empty()) throw UsageError("train needs --data DIR or both --train and --val");
    if (o.train_path.empty()) o.train_path = (fs::path(o.data) / ("train." + variant + ".cseg")).string();
    if (o.val_path.empty()) o.val_path = (fs::path(o.data) / ("validation." + variant + ".cseg")).string();
  }
  if (o.history.empty()) o.history = o.out + ".history.json";

  ArchSpec spec = ArchSpec::defaults(kind);
  if (o.embed_dim) spec.embed_dim = *o.embed_dim;
  if (o.hidden) spec.lstm_hidden = *o.hidden;
  if (o.dropout) spec.dropout_rate = *o.dropout;
  if (!o.dense.empty()) {
    spec.dense_sizes.clear();
    for (const auto& d : split_list(o.dense)) {
      std::size_t used = 0;
      unsigned long v = 0;
      try {
        v = std::stoul(d, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != d.size()) throw UsageError("--dense expects comma-separated integers");
      spec.dense_sizes.push_back(v);
    }
  }
  spec.validate();

  const SampleSet train_set = load_samples(o.train_path);
  const SampleSet val_set = load_samples(o.val_path);
  check_variant(kind, variant_of(train_set));
  check_variant(kind, variant_of(val_set));

  o.cfg.seed = o.seed;
  Rng init_rng = Rng(o.seed).derive(0);
  const ModelParams init = init_model(spec, init_rng);
  const TrainResult result = train(init, train_set, val_set, o.cfg);

  save_model(result.model, o.out);
  write_text(o.history, history_to_json(result.history) + "\n");
  const auto& best = result.history.epochs.at(result.history.best_epoch - 1);
  out << "epochs run: " << result.history.epochs.size() << "\n"
      << "best epoch: " << result.history.best_epoch << "\n"
      << "final validation newline accuracy: " << std::setprecision(6) << best.val_accuracy
      << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// eval

struct EvalOptions {
  std::string model;
  std::vector<std::string> tests;
  bool per_language = false;
  double threshold = 0.5;
  std::string out;
};

ojson eval_entry(const ModelParams& model, const SampleSet& set, double threshold) {
  const EvalReport r = evaluate(model, set, threshold);
  ojson j = ojson::parse(report_to_json(r));
  j["baseline_accuracy"] = baseline_accuracy(set);
  return j;
}

int cmd_eval(const EvalOptions& o, std::ostream& out) {
  if (!(o.threshold > 0.0 && o.threshold < 1.0)) {
    throw UsageError("--threshold must lie strictly between 0 and 1 for eval");
  }
  const ModelParams model = load_model(o.model);
  ojson report;
  report["model"] = std::string(kind_name(model.spec.kind));
  report["threshold"] = o.threshold;
  if (!o.per_language) {
    if (o.tests.size() != 1) throw UsageError("eval takes exactly one --test unless --per-language is set");
    const SampleSet set = load_samples(o.tests.front());
    report.update(eval_entry(model, set, o.threshold));
  } else {
    auto& entries = report["languages"] = ojson::array();
    ojson row = ojson::object();
    for (const auto& spec : o.tests) {
      const auto eq = spec.find('=');
      if (eq == std::string::npos || eq == 0) {
        throw UsageError("--per-language expects --test LANGUAGE=PATH, got '" + spec + "'");
      }
      const std::string lang = spec.substr(0, eq);
      const SampleSet set = load_samples(spec.substr(eq + 1));
      ojson entry;
      entry["language"] = lang;
      entry.update(eval_entry(model, set, o.threshold));
      row[lang] = entry["newline_accuracy"];
      entries.push_back(entry);
    }
    report["row"] = row;
  }
  const std::string text = report.dump(2) + "\n";
  if (o.out.empty()) {
    out << text;
  } else {
    write_text(o.out, text);
    if (!o.per_language) {
      out << "newline accuracy: " << report["newline_accuracy"].get<double>() << "\n"
          << "baseline accuracy: " << report["baseline_accuracy"].get<double>() << "\n";
    } else {
      for (const auto& [lang, acc] : report["row"].items()) {
        out << lang << ": " << acc.get<double>() << "\n";
      }
    }
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// segment

struct SegmentOptions {
  std::string model;
  std::string input;
  std::string format = "annotated";
  double threshold = 0.5;
  std::string out;
};

int cmd_segment(const SegmentOptions& o, std::ostream& out) {
  if (o.format != "json" && o.format != "annotated") {
    throw UsageError("--format must be json or annotated");
  }
  if (!(o.threshold >= 0.0 && o.threshold <= 1.0)) throw UsageError("--threshold must lie in [0, 1]");
  const ModelParams model = load_model(o.model);
  const std::string bytes = normalize_newlines(read_text(o.input));
  const SegmentationResult result = segment_file(model, bytes, o.threshold, o.input);
  const std::string text = o.format == "json" ? result_to_json(result) + "\n"
                                              : render_annotated(bytes, result);
  if (o.out.empty()) out << text;
  else write_text(o.out, text);
  return kExitOk;
}

}  // namespace

int run(std::span<const std::string> raw_args, std::ostream& out, std::ostream& err) {
  CLI::App app{"codeseg: learn and apply logical segmentation of source code"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  std::string config_path;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "key = value file; command-line flags take precedence");
  };

  BuildOptions build;
  auto* build_cmd = app.add_subcommand("build-dataset", "Build CSEG sample files from a snippet corpus");
  build_cmd->add_option("--corpus", build.corpora, "JSON-Lines corpus file (repeatable)")
      ->required()
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  build_cmd->add_option("--languages", build.languages, "comma-separated languages or 'all'");
  build_cmd->add_option("--variant", build.variant, "bag | uncentered | centered | all");
  build_cmd->add_option("--seed", build.seed);
  build_cmd->add_option("--out", build.out, "output directory")->required();
  build_cmd->add_option("--min-lines", build.min_lines, "drop snippets shorter than this");
  build_cmd->add_flag("--no-shuffle", build.no_shuffle, "keep split order when concatenating");
  add_common(build_cmd);

  TrainOptions tr;
  auto* train_cmd = app.add_subcommand("train", "Train a model on CSEG sample files");
  train_cmd->add_option("--arch", tr.arch, "logreg | uncentered | centered")->required();
  train_cmd->add_option("--data", tr.data, "directory written by build-dataset");
  train_cmd->add_option("--train", tr.train_path);
  train_cmd->add_option("--val", tr.val_path);
  train_cmd->add_option("--out", tr.out, "checkpoint path")->required();
  train_cmd->add_option("--history", tr.history, "history JSON path (default: <out>.history.json)");
  train_cmd->add_option("--seed", tr.seed);
  train_cmd->add_option("--batch-size", tr.cfg.batch_size);
  train_cmd->add_option("--patience", tr.cfg.patience);
  train_cmd->add_option("--max-epochs", tr.cfg.max_epochs);
  train_cmd->add_option("--lr", tr.cfg.adam.lr);
  train_cmd->add_option("--beta1", tr.cfg.adam.beta1);
  train_cmd->add_option("--beta2", tr.cfg.adam.beta2);
  train_cmd->add_option("--eps", tr.cfg.adam.eps);
  train_cmd->add_option("--threshold", tr.cfg.threshold);
  train_cmd->add_option("--embed-dim", tr.embed_dim);
  train_cmd->add_option("--hidden", tr.hidden, "LSTM units per direction");
  train_cmd->add_option("--dense", tr.dense, "comma-separated dense sizes ending in 1");
  train_cmd->add_option("--dropout", tr.dropout);
  add_common(train_cmd);

  EvalOptions ev;
  auto* eval_cmd = app.add_subcommand("eval", "Report newline accuracy of a checkpoint");
  eval_cmd->add_option("--model", ev.model)->required();
  eval_cmd->add_option("--test", ev.tests, "CSEG test file, or LANGUAGE=PATH with --per-language")
      ->required()
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  eval_cmd->add_flag("--per-language", ev.per_language);
  eval_cmd->add_option("--threshold", ev.threshold);
  eval_cmd->add_option("--out", ev.out, "write the JSON report here");
  add_common(eval_cmd);

  SegmentOptions sg;
  auto* segment_cmd = app.add_subcommand("segment", "Predict segment boundaries in a source file");
  segment_cmd->add_option("--model", sg.model)->required();
  segment_cmd->add_option("--input", sg.input)->required();
  segment_cmd->add_option("--format", sg.format, "json | annotated");
  segment_cmd->add_option("--threshold", sg.threshold);
  segment_cmd->add_option("--out", sg.out);
  add_common(segment_cmd);

  try {
    const std::vector<std::string> expanded = expand_config(raw_args);
    std::vector<std::string> reversed(expanded.rbegin(), expanded.rend());
    try {
      app.parse(reversed);
    } catch (const CLI::ParseError& e) {
      const int code = app.exit(e, out, err);
      return code == 0 ? kExitOk : kExitUsage;
    }
    if (*build_cmd) return cmd_build_dataset(build, out);
    if (*train_cmd) return cmd_train(tr, out);
    if (*eval_cmd) return cmd_eval(ev, out);
    if (*segment_cmd) return cmd_segment(sg, out);
    return kExitUsage;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << "error (" << error_code_name(e.code()) << "): " << e.what() << "\n";
    return kExitFatal;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFatal;
  }
}

}  // namespace codeseg::cli
