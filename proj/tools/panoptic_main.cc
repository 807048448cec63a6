// Copyright 2026 The Panoptic Toolkit Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line front end of libpanoptic. Exit codes: 0 success, 1 usage
// error, 2 input or output error, 3 internal error.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <algorithm>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "panoptic/panoptic_c.h"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitInternal = 3;

struct Failure {
  int exit_code;
  std::string message;
};

[[noreturn]] void Usage(const std::string& message) {
  throw Failure{kExitUsage, message};
}

void Check(pq_status status) {
  if (status == PQ_OK) return;
  throw Failure{status == PQ_ERR_INTERNAL ? kExitInternal : kExitData,
                pq_last_error()};
}

template <typename T, void (*Destroy)(T*)>
struct Deleter {
  void operator()(T* p) const { Destroy(p); }
};

using Registry = std::unique_ptr<pq_registry, Deleter<pq_registry, pq_registry_destroy>>;
using Map = std::unique_ptr<pq_map, Deleter<pq_map, pq_map_destroy>>;
using Instances =
    std::unique_ptr<pq_instances, Deleter<pq_instances, pq_instances_destroy>>;
using Dataset =
    std::unique_ptr<pq_dataset, Deleter<pq_dataset, pq_dataset_destroy>>;
using EvaluationPtr = std::unique_ptr<pq_evaluation,
                                      Deleter<pq_evaluation, pq_evaluation_destroy>>;
using Bootstrap =
    std::unique_ptr<pq_bootstrap, Deleter<pq_bootstrap, pq_bootstrap_destroy>>;
using Table = std::unique_ptr<pq_table, Deleter<pq_table, pq_table_destroy>>;
using Confusion =
    std::unique_ptr<pq_confusion, Deleter<pq_confusion, pq_confusion_destroy>>;
using RunConfig = std::unique_ptr<pq_run_config,
                                  Deleter<pq_run_config, pq_run_config_destroy>>;

std::string Percent(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f", 100.0 * fraction);
  return buf;
}

std::string Pad(const std::string& s, size_t width) {
  return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
}

Registry LoadRegistry(const std::string& path) {
  if (path.empty()) Usage("--categories is required");
  pq_registry* raw = nullptr;
  Check(pq_registry_read(path.c_str(), &raw));
  return Registry(raw);
}

// Flags shared by the dataset commands. A flag given on the command line
// beats the same key in --config.
struct DatasetArgs {
  std::string config;
  std::string gt_dir;
  std::string pred_dir;
  std::string categories;
  std::string manifest;
  std::string output;
  std::string format;
  unsigned threads = 1;
  double iou_threshold = 0.5;
  double alpha = 0.5;
  double beta = 0.5;
  uint64_t seed = 0;

  std::map<std::string, CLI::Option*> options;

  void Register(CLI::App* app, bool metric_flags) {
    app->add_option("--config", config, "JSON run-config file");
    options["gt_dir"] = app->add_option("--gt-dir", gt_dir,
                                        "ground-truth PNG/JSON directory");
    options["pred_dir"] =
        app->add_option("--pred-dir", pred_dir, "prediction directory");
    options["categories"] =
        app->add_option("--categories", categories, "class registry JSON");
    options["manifest"] = app->add_option(
        "--manifest", manifest, "explicit \"gt_stem [pred_stem]\" pairing");
    options["threads"] =
        app->add_option("--threads", threads, "worker threads (>= 1)");
    if (metric_flags) {
      options["iou_threshold"] = app->add_option(
          "--iou-threshold", iou_threshold, "matching threshold in (0, 1)");
      options["alpha"] =
          app->add_option("--alpha", alpha, "false-positive weight of RQ");
      options["beta"] =
          app->add_option("--beta", beta, "false-negative weight of RQ");
    }
  }

  bool Given(const std::string& key) const {
    auto it = options.find(key);
    return it != options.end() && it->second->count() > 0;
  }

  void ApplyConfig() {
    if (config.empty()) return;
    pq_run_config* raw = nullptr;
    Check(pq_run_config_read(config.c_str(), &raw));
    RunConfig cfg(raw);
    auto text = [&](const char* key, std::string& field) {
      if (Given(key)) return;
      if (const char* v = pq_run_config_string(cfg.get(), key)) field = v;
    };
    text("gt_dir", gt_dir);
    text("pred_dir", pred_dir);
    text("categories", categories);
    text("manifest", manifest);
    text("output", output);
    text("format", format);
    double v = 0.0;
    if (!Given("threads") && pq_run_config_number(cfg.get(), "threads", &v)) {
      threads = static_cast<unsigned>(v);
    }
    if (!Given("seed") && pq_run_config_number(cfg.get(), "seed", &v)) {
      seed = static_cast<uint64_t>(v);
    }
    if (!Given("iou_threshold") &&
        pq_run_config_number(cfg.get(), "iou_threshold", &v)) {
      iou_threshold = v;
    }
    if (!Given("alpha") && pq_run_config_number(cfg.get(), "alpha", &v)) {
      alpha = v;
    }
    if (!Given("beta") && pq_run_config_number(cfg.get(), "beta", &v)) {
      beta = v;
    }
  }

  void Validate() const {
    if (gt_dir.empty()) Usage("--gt-dir is required");
    if (pred_dir.empty()) Usage("--pred-dir is required");
    if (threads < 1) Usage("--threads must be >= 1");
    if (!(iou_threshold > 0.0 && iou_threshold < 1.0)) {
      Usage("--iou-threshold must lie in (0, 1)");
    }
    if (!(alpha >= 0.0) || !(beta >= 0.0)) {
      Usage("--alpha and --beta must be >= 0");
    }
  }

  pq_options Options() const {
    pq_options o;
    pq_options_init(&o);
    o.iou_threshold = iou_threshold;
    o.alpha = alpha;
    o.beta = beta;
    o.threads = threads;
    return o;
  }
};

struct OpenedDataset {
  Registry registry;
  Dataset dataset;
};

OpenedDataset OpenDataset(const DatasetArgs& args) {
  OpenedDataset out;
  out.registry = LoadRegistry(args.categories);
  pq_dataset* raw = nullptr;
  Check(pq_dataset_open_dirs(args.gt_dir.c_str(), args.pred_dir.c_str(),
                             args.manifest.empty() ? nullptr
                                                   : args.manifest.c_str(),
                             out.registry.get(), &raw));
  out.dataset.reset(raw);
  const size_t missing = pq_dataset_missing_count(raw);
  for (size_t i = 0; i < missing; ++i) {
    std::cerr << "warning: no prediction for " << pq_dataset_missing(raw, i)
              << "; its segments count as false negatives\n";
  }
  return out;
}

void PrintSummary(const pq_evaluation* eval) {
  std::cout << "images: " << pq_evaluation_image_count(eval) << "\n";
  std::cout << "        " << Pad("PQ", 6) << Pad("SQ", 7) << Pad("RQ", 7)
            << Pad("classes", 9) << "\n";
  const std::pair<const char*, pq_scope> scopes[] = {
      {"All   ", PQ_SCOPE_ALL},
      {"Stuff ", PQ_SCOPE_STUFF},
      {"Things", PQ_SCOPE_THINGS},
  };
  for (const auto& [name, scope] : scopes) {
    pq_aggregate a;
    Check(pq_evaluation_aggregate(eval, scope, &a));
    std::cout << name << "  ";
    if (!a.defined) {
      std::cout << Pad("-", 6) << Pad("-", 7) << Pad("-", 7) << Pad("0", 9)
                << "\n";
      continue;
    }
    std::cout << Pad(Percent(a.pq), 6) << Pad(Percent(a.sq), 7)
              << Pad(Percent(a.rq), 7)
              << Pad(std::to_string(a.num_classes), 9) << "\n";
  }
}

pq_format ParseFormat(const std::string& format) {
  if (format.empty()) return PQ_FORMAT_AUTO;
  if (format == "json") return PQ_FORMAT_JSON;
  if (format == "csv") return PQ_FORMAT_CSV;
  Usage("--format must be json or csv");
}

int RunEvaluate(DatasetArgs& args, const std::string& scale_output,
                bool things_only) {
  args.ApplyConfig();
  args.Validate();
  const pq_format format = ParseFormat(args.format);
  OpenedDataset data = OpenDataset(args);
  const pq_options options = args.Options();
  pq_evaluation* raw = nullptr;
  Check(pq_evaluate(data.dataset.get(), data.registry.get(), &options, &raw));
  EvaluationPtr eval(raw);

  PrintSummary(eval.get());
  if (args.alpha != 0.5 || args.beta != 0.5) {
    std::cout << "RQ(alpha=" << args.alpha << ", beta=" << args.beta
              << ") per class:\n";
    for (size_t i = 0; i < pq_evaluation_class_count(eval.get()); ++i) {
      pq_class_metrics m;
      Check(pq_evaluation_class(eval.get(), i, &m));
      double rq = 0.0;
      std::cout << "  " << m.class_id << " " << m.name << ": ";
      if (pq_evaluation_rq_alpha_beta(eval.get(), m.class_id, &rq) == PQ_OK) {
        std::cout << Percent(rq) << "\n";
      } else {
        std::cout << "-\n";
      }
    }
  }
  if (!args.output.empty()) {
    Check(pq_evaluation_write_report(eval.get(), args.output.c_str(), format));
  }
  if (!scale_output.empty()) {
    Check(pq_evaluation_write_scale(eval.get(), things_only ? 1 : 0,
                                    scale_output.c_str()));
  }
  return kExitOk;
}

std::vector<double> ParseThresholds(const std::string& text) {
  std::vector<double> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      size_t used = 0;
      const double t = std::stod(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
      if (!(t > 0.0 && t < 1.0)) Usage("thresholds must lie in (0, 1)");
      out.push_back(t);
    } catch (const std::logic_error&) {
      Usage("bad threshold \"" + item + "\"");
    }
  }
  if (out.empty()) Usage("--thresholds is empty");
  return out;
}

int RunSweep(DatasetArgs& args, const std::string& thresholds_text) {
  args.ApplyConfig();
  args.Validate();
  const std::vector<double> thresholds = ParseThresholds(thresholds_text);
  OpenedDataset data = OpenDataset(args);
  const pq_options options = args.Options();
  pq_table* raw = nullptr;
  Check(pq_sweep(data.dataset.get(), data.registry.get(), thresholds.data(),
                 thresholds.size(), &options, &raw));
  Table sweep(raw);
  std::cout << "threshold" << Pad("PQ", 7) << Pad("SQ", 7) << Pad("RQ", 7)
            << "\n";
  for (size_t i = 0; i < pq_table_rows(sweep.get()); ++i) {
    double t = 0.0;
    pq_aggregate all;
    Check(pq_sweep_point(sweep.get(), i, &t, &all, nullptr, nullptr));
    char label[32];
    std::snprintf(label, sizeof(label), "%9.2f", t);
    std::cout << label;
    if (all.defined) {
      std::cout << Pad(Percent(all.pq), 7) << Pad(Percent(all.sq), 7)
                << Pad(Percent(all.rq), 7) << "\n";
    } else {
      std::cout << Pad("-", 7) << Pad("-", 7) << Pad("-", 7) << "\n";
    }
  }
  if (!args.output.empty()) {
    Check(pq_table_write_csv(sweep.get(), args.output.c_str()));
  }
  return kExitOk;
}

int RunBootstrap(DatasetArgs& args, int resamples) {
  args.ApplyConfig();
  args.Validate();
  if (resamples < 1) Usage("--resamples must be >= 1");
  OpenedDataset data = OpenDataset(args);
  const pq_options options = args.Options();
  pq_evaluation* raw_eval = nullptr;
  Check(pq_evaluate(data.dataset.get(), data.registry.get(), &options,
                    &raw_eval));
  EvaluationPtr eval(raw_eval);
  pq_bootstrap* raw = nullptr;
  Check(pq_bootstrap_run(eval.get(), resamples, args.seed, args.threads, &raw));
  Bootstrap boot(raw);
  std::cout << Pad("metric", 10) << Pad("point", 7) << Pad("5%", 7)
            << Pad("95%", 7) << "\n";
  for (size_t i = 0; i < pq_bootstrap_count(boot.get()); ++i) {
    pq_interval r;
    Check(pq_bootstrap_interval(boot.get(), i, &r));
    std::cout << Pad(r.metric, 10) << Pad(Percent(r.point), 7)
              << Pad(Percent(r.lo), 7) << Pad(Percent(r.hi), 7) << "\n";
  }
  if (!args.output.empty()) {
    Check(pq_bootstrap_write_csv(boot.get(), args.output.c_str()));
  }
  return kExitOk;
}

int RunCdf(DatasetArgs& args) {
  args.ApplyConfig();
  args.Validate();
  OpenedDataset data = OpenDataset(args);
  pq_table* raw = nullptr;
  Check(pq_overlap_cdf(data.dataset.get(), data.registry.get(), args.threads,
                       &raw));
  Table cdf(raw);
  const size_t rows = pq_table_rows(cdf.get());
  std::cout << "matched IoU values: " << rows << " distinct\n";
  double below = 0.0;
  for (size_t i = 0; i < rows; ++i) {
    double iou = 0.0, fraction = 0.0;
    Check(pq_cdf_point(cdf.get(), i, &iou, &fraction));
    if (iou < 0.5) below = fraction;
  }
  if (rows > 0) {
    std::cout << "share of matches with IoU below 0.5: " << Percent(below)
              << "%\n";
  }
  if (!args.output.empty()) {
    Check(pq_table_write_csv(cdf.get(), args.output.c_str()));
  }
  return kExitOk;
}

void CheckFusionFlags(double score_thresh, double keep_frac) {
  if (!(score_thresh >= 0.0 && score_thresh <= 1.0)) {
    Usage("--score-thresh must lie in [0, 1]");
  }
  if (!(keep_frac > 0.0 && keep_frac <= 1.0)) {
    Usage("--keep-frac must lie in (0, 1]");
  }
}

void WriteMap(const pq_map* map, const std::string& prefix) {
  if (prefix.empty()) Usage("--output is required");
  const std::string png = prefix + ".png";
  const std::string json = prefix + ".json";
  Check(pq_map_write(map, png.c_str(), json.c_str()));
  std::cout << "wrote " << png << " and " << json << " ("
            << pq_map_segment_count(map) << " segments)\n";
}

Map Resolve(const std::string& instances_path, int width, int height,
            const pq_registry* registry, double score_thresh,
            double keep_frac) {
  pq_instances* raw_inst = nullptr;
  Check(pq_instances_read(instances_path.c_str(), width, height, registry,
                          &raw_inst));
  Instances instances(raw_inst);
  pq_map* raw = nullptr;
  Check(pq_resolve_overlaps(width, height, instances.get(), registry,
                            score_thresh, keep_frac, &raw));
  return Map(raw);
}

Map ReadSemantic(const std::string& path, const pq_registry* registry) {
  pq_map* raw = nullptr;
  Check(pq_map_read_semantic(path.c_str(), registry, &raw));
  return Map(raw);
}

struct MiouInputs {
  std::vector<std::pair<std::string, std::string>> pairs;
};

MiouInputs PairSemanticFiles(const std::string& gt, const std::string& pred) {
  MiouInputs out;
  std::error_code ec;
  const bool gt_dir = fs::is_directory(gt, ec);
  const bool pred_dir = fs::is_directory(pred, ec);
  if (gt_dir != pred_dir) Usage("--gt and --pred must both be files or dirs");
  if (!gt_dir) {
    out.pairs.emplace_back(gt, pred);
    return out;
  }
  std::vector<std::string> stems;
  for (const auto& e : fs::directory_iterator(gt)) {
    if (e.is_regular_file() && e.path().extension() == ".png") {
      stems.push_back(e.path().stem().string());
    }
  }
  std::sort(stems.begin(), stems.end());
  std::string missing;
  for (const std::string& s : stems) {
    const fs::path p = fs::path(pred) / (s + ".png");
    if (!fs::exists(p)) {
      missing += (missing.empty() ? "" : ", ") + s;
      continue;
    }
    out.pairs.emplace_back((fs::path(gt) / (s + ".png")).string(), p.string());
  }
  if (!missing.empty()) {
    throw Failure{kExitData, "no semantic prediction for: " + missing};
  }
  return out;
}

int RunMiou(const std::string& gt, const std::string& pred,
            const std::string& categories, const std::string& output) {
  if (gt.empty() || pred.empty()) Usage("--gt and --pred are required");
  Registry registry = LoadRegistry(categories);
  const MiouInputs inputs = PairSemanticFiles(gt, pred);
  pq_confusion* raw_conf = nullptr;
  Check(pq_confusion_create(&raw_conf));
  Confusion confusion(raw_conf);
  for (const auto& [g, p] : inputs.pairs) {
    Map gm = ReadSemantic(g, registry.get());
    Map pm = ReadSemantic(p, registry.get());
    Check(pq_confusion_add(confusion.get(), gm.get(), pm.get()));
  }
  pq_table* raw = nullptr;
  double mean = 0.0;
  int num_classes = 0;
  Check(pq_mean_iou(confusion.get(), registry.get(), &raw, &mean,
                    &num_classes));
  Table table(raw);
  std::cout << "images: " << inputs.pairs.size() << "\n";
  for (size_t i = 0; i < pq_table_rows(table.get()); ++i) {
    uint32_t id = 0;
    double iou = 0.0;
    Check(pq_miou_class(table.get(), i, &id, &iou));
    std::cout << "  class " << id << ": " << Percent(iou) << "\n";
  }
  std::cout << "mean IoU: "
            << (num_classes > 0 ? Percent(mean) : std::string("-")) << " over "
            << num_classes << " classes\n";
  if (!output.empty()) Check(pq_table_write_csv(table.get(), output.c_str()));
  return kExitOk;
}

struct SynthArgs {
  std::string out_dir;
  int count = 4;
  pq_synth_spec spec;
  pq_noise noise;
  bool fusion = false;
};

std::string StemFor(int index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "img_%04d", index);
  return buf;
}

int RunSynth(const SynthArgs& args) {
  if (args.out_dir.empty()) Usage("--output-dir is required");
  if (args.count < 1) Usage("--count must be >= 1");
  const fs::path root(args.out_dir);
  std::error_code ec;
  for (const char* sub : {"gt", "pred"}) {
    fs::create_directories(root / sub, ec);
    if (ec) {
      throw Failure{kExitData, "cannot create " + (root / sub).string() +
                                   ": " + ec.message()};
    }
  }
  if (args.fusion) fs::create_directories(root / "fusion", ec);

  pq_registry* raw_reg = nullptr;
  Check(pq_registry_synth(args.spec.n_stuff_classes, args.spec.n_thing_classes,
                          &raw_reg));
  Registry registry(raw_reg);
  Check(pq_registry_write(registry.get(),
                          (root / "categories.json").string().c_str()));

  for (int i = 0; i < args.count; ++i) {
    const std::string stem = StemFor(i);
    pq_synth_spec spec = args.spec;
    spec.seed = args.spec.seed + static_cast<uint64_t>(i);
    pq_map* raw_gt = nullptr;
    Check(pq_synth_ground_truth(&spec, &raw_gt));
    Map gt(raw_gt);
    pq_noise noise = args.noise;
    noise.seed = spec.seed;
    pq_map* raw_pred = nullptr;
    Check(pq_synth_prediction(gt.get(), registry.get(), &noise, &raw_pred));
    Map pred(raw_pred);
    for (const auto& [dir, map] :
         {std::pair{"gt", gt.get()}, std::pair{"pred", pred.get()}}) {
      const fs::path base = root / dir / stem;
      Check(pq_map_write(map, (base.string() + ".png").c_str(),
                         (base.string() + ".json").c_str()));
    }
    if (args.fusion) {
      pq_instances* raw_inst = nullptr;
      pq_map* raw_sem = nullptr;
      Check(pq_synth_fusion_inputs(gt.get(), registry.get(),
                                   args.noise.jitter_radius,
                                   args.noise.spurious, spec.seed, &raw_inst,
                                   &raw_sem));
      Instances inst(raw_inst);
      Map sem(raw_sem);
      const fs::path base = root / "fusion" / stem;
      Check(pq_instances_write(inst.get(),
                               (base.string() + "_instances.json").c_str()));
      Check(pq_map_write_semantic(sem.get(),
                                  (base.string() + "_semantic.png").c_str()));
    }
  }
  std::cout << "wrote " << args.count << " pairs to " << root.string() << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Panoptic quality evaluation and fusion toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(pq_version()));

  std::function<int()> action;

  DatasetArgs eval_args;
  std::string scale_output;
  bool things_only = false;
  CLI::App* evaluate =
      app.add_subcommand("evaluate", "score predictions against ground truth");
  eval_args.Register(evaluate, true);
  eval_args.options["output"] =
      evaluate->add_option("--output", eval_args.output, "report path");
  eval_args.options["format"] = evaluate->add_option(
      "--format", eval_args.format, "json or csv (default: from extension)");
  evaluate->add_option("--scale-output", scale_output,
                       "CSV of the small/medium/large breakdown");
  evaluate->add_flag("--things-only", things_only,
                     "scale cuts and strata over thing segments only");
  evaluate->callback([&] {
    action = [&] { return RunEvaluate(eval_args, scale_output, things_only); };
  });

  DatasetArgs sweep_args;
  std::string thresholds = "0.1,0.25,0.5,0.6,0.75,0.9";
  CLI::App* sweep = app.add_subcommand("sweep", "PQ across IoU thresholds");
  sweep_args.Register(sweep, true);
  sweep_args.options["output"] =
      sweep->add_option("--output", sweep_args.output, "CSV path");
  sweep->add_option("--thresholds", thresholds, "comma-separated thresholds");
  sweep->callback(
      [&] { action = [&] { return RunSweep(sweep_args, thresholds); }; });

  DatasetArgs boot_args;
  int resamples = 1000;
  CLI::App* bootstrap =
      app.add_subcommand("bootstrap", "bootstrap intervals over images");
  boot_args.Register(bootstrap, true);
  boot_args.options["output"] =
      bootstrap->add_option("--output", boot_args.output, "CSV path");
  boot_args.options["seed"] =
      bootstrap->add_option("--seed", boot_args.seed, "resampling seed");
  bootstrap->add_option("--resamples", resamples, "number of resamples");
  bootstrap->callback(
      [&] { action = [&] { return RunBootstrap(boot_args, resamples); }; });

  DatasetArgs cdf_args;
  CLI::App* cdf = app.add_subcommand("cdf", "CDF of matched-pair IoUs");
  cdf_args.Register(cdf, false);
  cdf_args.options["output"] =
      cdf->add_option("--output", cdf_args.output, "CSV path");
  cdf->callback([&] { action = [&] { return RunCdf(cdf_args); }; });

  std::string instances_path, semantic_path, fusion_categories, fusion_output;
  int width = 0, height = 0;
  double score_thresh = 0.5, keep_frac = 0.5;
  CLI::App* resolve = app.add_subcommand(
      "resolve", "turn overlapping scored instances into a thing map");
  resolve->add_option("--instances", instances_path, "instances JSON")
      ->required();
  resolve->add_option("--width", width, "image width")->required();
  resolve->add_option("--height", height, "image height")->required();
  resolve->add_option("--categories", fusion_categories, "class registry")
      ->required();
  resolve->add_option("--score-thresh", score_thresh, "minimum score");
  resolve->add_option("--keep-frac", keep_frac, "minimum kept fraction");
  resolve->add_option("--output", fusion_output, "output path prefix")
      ->required();
  resolve->callback([&] {
    action = [&] {
      CheckFusionFlags(score_thresh, keep_frac);
      if (width < 1 || height < 1) Usage("--width and --height must be >= 1");
      Registry registry = LoadRegistry(fusion_categories);
      Map things = Resolve(instances_path, width, height, registry.get(),
                           score_thresh, keep_frac);
      WriteMap(things.get(), fusion_output);
      return kExitOk;
    };
  });

  CLI::App* fuse = app.add_subcommand(
      "fuse", "merge scored instances with a semantic map");
  fuse->add_option("--instances", instances_path, "instances JSON")
      ->required();
  fuse->add_option("--semantic", semantic_path, "16-bit semantic PNG")
      ->required();
  fuse->add_option("--categories", fusion_categories, "class registry")
      ->required();
  fuse->add_option("--score-thresh", score_thresh, "minimum score");
  fuse->add_option("--keep-frac", keep_frac, "minimum kept fraction");
  fuse->add_option("--output", fusion_output, "output path prefix")
      ->required();
  fuse->callback([&] {
    action = [&] {
      CheckFusionFlags(score_thresh, keep_frac);
      Registry registry = LoadRegistry(fusion_categories);
      Map semantic = ReadSemantic(semantic_path, registry.get());
      Map things = Resolve(instances_path, pq_map_width(semantic.get()),
                           pq_map_height(semantic.get()), registry.get(),
                           score_thresh, keep_frac);
      pq_map* raw = nullptr;
      Check(pq_fuse(things.get(), semantic.get(), registry.get(), &raw));
      Map fused(raw);
      WriteMap(fused.get(), fusion_output);
      return kExitOk;
    };
  });

  SynthArgs synth_args;
  pq_synth_spec_init(&synth_args.spec);
  pq_noise_init(&synth_args.noise);
  CLI::App* synth =
      app.add_subcommand("synth", "write synthetic ground truth/prediction pairs");
  synth->add_option("--output-dir", synth_args.out_dir, "output directory")
      ->required();
  synth->add_option("--count", synth_args.count, "number of pairs");
  synth->add_option("--width", synth_args.spec.width, "image width");
  synth->add_option("--height", synth_args.spec.height, "image height");
  synth->add_option("--stuff", synth_args.spec.n_stuff_classes,
                    "stuff classes");
  synth->add_option("--things", synth_args.spec.n_thing_classes,
                    "thing classes");
  synth->add_option("--seeds", synth_args.spec.n_seeds, "Voronoi sites");
  synth->add_option("--crowd", synth_args.spec.crowd_probability,
                    "crowd probability per thing segment");
  synth->add_option("--void", synth_args.spec.void_fraction,
                    "void pixel fraction");
  synth->add_option("--seed", synth_args.spec.seed, "base seed");
  synth->add_option("--jitter", synth_args.noise.jitter_radius,
                    "boundary jitter radius of predictions");
  synth->add_option("--drop", synth_args.noise.drop, "segments to drop");
  synth->add_option("--split", synth_args.noise.split, "segments to split");
  synth->add_option("--relabel", synth_args.noise.relabel,
                    "segments to relabel");
  synth->add_option("--spurious", synth_args.noise.spurious,
                    "spurious blobs to add");
  synth->add_option("--spurious-area", synth_args.noise.spurious_area,
                    "area of each spurious blob");
  synth->add_flag("--fusion", synth_args.fusion,
                  "also write semantic maps and scored instances");
  synth->callback([&] { action = [&] { return RunSynth(synth_args); }; });

  std::string miou_gt, miou_pred, miou_categories, miou_output;
  CLI::App* miou =
      app.add_subcommand("miou", "semantic mean IoU of 16-bit class maps");
  miou->add_option("--gt", miou_gt, "GT semantic PNG or directory")
      ->required();
  miou->add_option("--pred", miou_pred, "predicted semantic PNG or directory")
      ->required();
  miou->add_option("--categories", miou_categories, "class registry")
      ->required();
  miou->add_option("--output", miou_output, "CSV path");
  miou->callback([&] {
    action = [&] {
      return RunMiou(miou_gt, miou_pred, miou_categories, miou_output);
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    return action();
  } catch (const Failure& f) {
    std::cerr << "error: " << f.message << "\n";
    return f.exit_code;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
}
