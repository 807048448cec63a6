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

#include "panoptic/panoptic_c.h"

#include <cstring>
#include <memory>
#include <new>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "json.hpp"
#include "panoptic/evaluator.h"
#include "panoptic/fusion.h"
#include "panoptic/io.h"
#include "panoptic/metrics.h"
#include "panoptic/model.h"
#include "panoptic/stats.h"
#include "panoptic/status.h"
#include "panoptic/synth.h"

namespace pt = panoptic;

struct pq_run_config {
  pt::RunConfig config;
};

struct pq_registry {
  pt::ClassRegistry registry;
};

struct pq_map {
  pt::PanopticMap map;
};

struct pq_instances {
  std::vector<pt::ScoredInstance> items;
};

struct pq_dataset {
  std::unique_ptr<pt::ClassRegistry> registry;  // pinned for DirectoryDataset
  std::unique_ptr<pt::PairSource> source;
  pt::InMemoryDataset* memory = nullptr;
  std::vector<std::string> missing;
};

struct pq_evaluation {
  pt::ClassRegistry registry;
  pt::MetricConfig config;
  pt::Evaluation eval;
};

struct pq_bootstrap {
  std::vector<pt::BootstrapResult> results;
};

struct pq_table {
  std::vector<pt::SweepPoint> sweep;
  std::vector<pt::CdfPoint> cdf;
  pt::MeanIouResult miou;
  std::vector<std::pair<uint32_t, double>> miou_rows;
  std::string csv;
  size_t rows = 0;
};

struct pq_confusion {
  pt::SemanticConfusion confusion;
};

namespace {

thread_local std::string last_error;

pq_status Fail(pq_status status, const std::string& message) {
  last_error = message;
  return status;
}

template <typename Fn>
pq_status Guard(Fn&& fn) {
  try {
    fn();
    last_error.clear();
    return PQ_OK;
  } catch (const pt::Error& e) {
    return Fail(static_cast<pq_status>(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return Fail(PQ_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return Fail(PQ_ERR_INTERNAL, e.what());
  } catch (...) {
    return Fail(PQ_ERR_INTERNAL, "unknown error");
  }
}

void Require(bool ok, const char* what) {
  if (!ok) throw pt::InvalidArgumentError(what);
}

pt::MetricConfig ToConfig(const pq_options* options) {
  pq_options o;
  pq_options_init(&o);
  if (options != nullptr) o = *options;
  pt::MetricConfig c;
  c.iou_threshold = o.iou_threshold;
  c.alpha = o.alpha;
  c.beta = o.beta;
  c.Validate();
  Require(o.threads >= 1, "threads must be >= 1");
  return c;
}

unsigned Threads(const pq_options* options) {
  return options == nullptr ? 1u : options->threads;
}

void FillAggregate(const pt::AggregateMetrics& a, pq_aggregate* out) {
  if (out == nullptr) return;
  out->defined = a.defined() ? 1 : 0;
  out->pq = a.pq;
  out->sq = a.sq;
  out->rq = a.rq;
  out->num_classes = a.num_classes;
  out->tp = a.tp;
  out->fp = a.fp;
  out->fn = a.fn;
}

pt::ReportFormat FormatFor(pq_format format, const char* path) {
  switch (format) {
    case PQ_FORMAT_JSON:
      return pt::ReportFormat::kJson;
    case PQ_FORMAT_CSV:
      return pt::ReportFormat::kCsv;
    case PQ_FORMAT_AUTO:
      return pt::ReportFormatFor(path == nullptr ? "" : path);
  }
  throw pt::InvalidArgumentError("unknown report format");
}

pt::ScaleBreakdown Breakdown(const pq_evaluation& e, bool things_only,
                             pt::ScaleCuts* cuts) {
  *cuts = pt::ScaleThresholds(e.eval.matches, e.registry, things_only);
  return pt::ComputeScaleBreakdown(e.eval.matches, *cuts, e.registry,
                                   e.config, things_only);
}

template <typename T>
void Emit(T* handle, T** out) {
  *out = handle;
}

}  // namespace

extern "C" {

const char* pq_last_error(void) { return last_error.c_str(); }

const char* pq_version(void) { return "1.0.0"; }

// ---- Run configuration ----

pq_status pq_run_config_read(const char* path, pq_run_config** out) {
  return Guard([&] {
    Require(path && out, "path and out are required");
    auto handle = std::make_unique<pq_run_config>();
    handle->config = pt::ReadRunConfig(path);
    Emit(handle.release(), out);
  });
}

const char* pq_run_config_string(const pq_run_config* config,
                                 const char* key) {
  if (config == nullptr || key == nullptr) return nullptr;
  const pt::RunConfig& c = config->config;
  const std::string k = key;
  const std::optional<std::string>* field = nullptr;
  if (k == "gt_dir") field = &c.gt_dir;
  if (k == "pred_dir") field = &c.pred_dir;
  if (k == "categories") field = &c.categories;
  if (k == "output") field = &c.output;
  if (k == "format") field = &c.format;
  if (k == "manifest") field = &c.manifest;
  if (field == nullptr || !field->has_value()) return nullptr;
  return (*field)->c_str();
}

int pq_run_config_number(const pq_run_config* config, const char* key,
                         double* value) {
  if (config == nullptr || key == nullptr) return 0;
  const pt::RunConfig& c = config->config;
  const std::string k = key;
  std::optional<double> v;
  if (k == "threads" && c.threads) v = *c.threads;
  if (k == "seed" && c.seed) v = static_cast<double>(*c.seed);
  if (k == "iou_threshold") v = c.iou_threshold;
  if (k == "alpha") v = c.alpha;
  if (k == "beta") v = c.beta;
  if (!v) return 0;
  if (value != nullptr) *value = *v;
  return 1;
}

void pq_run_config_destroy(pq_run_config* config) { delete config; }

// ---- Registries ----

pq_status pq_registry_create(pq_registry** out) {
  return Guard([&] {
    Require(out != nullptr, "out is NULL");
    Emit(new pq_registry{}, out);
  });
}

pq_status pq_registry_add(pq_registry* registry, uint32_t id, const char* name,
                          int is_thing) {
  return Guard([&] {
    Require(registry != nullptr, "registry is NULL");
    registry->registry.Add(id, name == nullptr ? "" : name,
                           is_thing ? pt::SegmentKind::kThing
                                    : pt::SegmentKind::kStuff);
  });
}

pq_status pq_registry_read(const char* path, pq_registry** out) {
  return Guard([&] {
    Require(path != nullptr && out != nullptr, "path and out are required");
    auto handle = std::make_unique<pq_registry>();
    handle->registry = pt::ReadClassRegistry(path);
    Emit(handle.release(), out);
  });
}

pq_status pq_registry_write(const pq_registry* registry, const char* path) {
  return Guard([&] {
    Require(registry != nullptr && path != nullptr,
            "registry and path are required");
    pt::WriteClassRegistry(registry->registry, path);
  });
}

pq_status pq_registry_synth(int n_stuff, int n_thing, pq_registry** out) {
  return Guard([&] {
    Require(out != nullptr, "out is NULL");
    Require(n_stuff >= 0 && n_thing >= 0, "class counts must be >= 0");
    auto handle = std::make_unique<pq_registry>();
    handle->registry = pt::MakeSynthRegistry(n_stuff, n_thing);
    Emit(handle.release(), out);
  });
}

size_t pq_registry_size(const pq_registry* registry) {
  return registry == nullptr ? 0 : registry->registry.size();
}

void pq_registry_destroy(pq_registry* registry) { delete registry; }

// ---- Maps ----

pq_status pq_map_from_ids(int width, int height, const uint32_t* ids,
                          size_t n_segments, const uint32_t* seg_ids,
                          const uint32_t* categories, const uint8_t* iscrowd,
                          const pq_registry* registry, pq_map** out) {
  return Guard([&] {
    Require(out != nullptr && registry != nullptr, "out and registry are required");
    Require(width >= 0 && height >= 0, "dimensions must be >= 0");
    const size_t pixels = static_cast<size_t>(width) * height;
    Require(ids != nullptr || pixels == 0, "ids is NULL");
    Require(n_segments == 0 || (seg_ids != nullptr && categories != nullptr),
            "segment arrays are NULL");
    // Built as an encoded pair and decoded exactly like a file.
    pt::EncodedPanoptic encoded;
    encoded.width = width;
    encoded.height = height;
    encoded.rgb.resize(pixels * 3);
    for (size_t i = 0; i < pixels; ++i) {
      const uint32_t id = ids[i];
      if (id > pt::kMaxSegmentId) {
        throw pt::FormatError("segment id " + std::to_string(id) +
                              " at pixel (" + std::to_string(i % width) +
                              ", " + std::to_string(i / width) +
                              ") exceeds 2^24 - 1");
      }
      encoded.rgb[3 * i] = static_cast<uint8_t>(id & 0xff);
      encoded.rgb[3 * i + 1] = static_cast<uint8_t>((id >> 8) & 0xff);
      encoded.rgb[3 * i + 2] = static_cast<uint8_t>((id >> 16) & 0xff);
    }
    nlohmann::json segments = nlohmann::json::array();
    for (size_t k = 0; k < n_segments; ++k) {
      segments.push_back({{"id", seg_ids[k]},
                          {"category_id", categories[k]},
                          {"iscrowd", iscrowd != nullptr && iscrowd[k] ? 1 : 0}});
    }
    encoded.sidecar =
        nlohmann::json{{"width", width},
                       {"height", height},
                       {"segments_info", std::move(segments)}}
            .dump();
    auto handle = std::make_unique<pq_map>();
    handle->map = pt::DecodePanoptic(encoded, registry->registry);
    Emit(handle.release(), out);
  });
}

pq_status pq_map_create_void(int width, int height, pq_map** out) {
  return Guard([&] {
    Require(out != nullptr, "out is NULL");
    Require(width >= 0 && height >= 0, "dimensions must be >= 0");
    Emit(new pq_map{pt::PanopticMap(width, height)}, out);
  });
}

pq_status pq_map_read(const char* png_path, const char* json_path,
                      const pq_registry* registry, pq_map** out) {
  return Guard([&] {
    Require(png_path && json_path && registry && out,
            "paths, registry and out are required");
    auto handle = std::make_unique<pq_map>();
    handle->map = pt::ReadPanoptic({png_path, json_path}, registry->registry);
    Emit(handle.release(), out);
  });
}

pq_status pq_map_write(const pq_map* map, const char* png_path,
                       const char* json_path) {
  return Guard([&] {
    Require(map && png_path && json_path, "map and paths are required");
    pt::WritePanoptic(map->map, {png_path, json_path});
  });
}

pq_status pq_map_read_semantic(const char* path, const pq_registry* registry,
                               pq_map** out) {
  return Guard([&] {
    Require(path && registry && out, "path, registry and out are required");
    auto handle = std::make_unique<pq_map>();
    handle->map = pt::ReadSemantic(path, registry->registry);
    Emit(handle.release(), out);
  });
}

pq_status pq_map_write_semantic(const pq_map* map, const char* path) {
  return Guard([&] {
    Require(map && path, "map and path are required");
    pt::WriteSemantic(map->map, path);
  });
}

int pq_map_width(const pq_map* map) {
  return map == nullptr ? 0 : map->map.width();
}

int pq_map_height(const pq_map* map) {
  return map == nullptr ? 0 : map->map.height();
}

size_t pq_map_segment_count(const pq_map* map) {
  return map == nullptr ? 0 : map->map.Keys().size();
}

pq_status pq_map_export(const pq_map* map, uint32_t* ids, uint32_t* categories,
                        uint32_t* instance_ids, uint8_t* iscrowd) {
  return Guard([&] {
    Require(map != nullptr, "map is NULL");
    const auto labels = map->map.labels();
    std::unordered_map<uint64_t, uint32_t> assigned;
    std::vector<pt::SegmentKey> order;
    for (size_t i = 0; i < labels.size(); ++i) {
      uint32_t id = 0;
      if (!labels[i].is_void()) {
        auto [it, inserted] = assigned.try_emplace(labels[i].packed(), 0);
        if (inserted) {
          order.push_back(labels[i]);
          it->second = static_cast<uint32_t>(order.size());
        }
        id = it->second;
      }
      if (ids != nullptr) ids[i] = id;
    }
    for (size_t k = 0; k < order.size(); ++k) {
      if (categories != nullptr) categories[k] = order[k].class_id;
      if (instance_ids != nullptr) instance_ids[k] = order[k].instance_id;
      if (iscrowd != nullptr) iscrowd[k] = map->map.IsCrowd(order[k]) ? 1 : 0;
    }
  });
}

pq_status pq_map_validate(const pq_map* map, const pq_registry* registry,
                          size_t* n_violations) {
  std::string first;
  const pq_status status = Guard([&] {
    Require(map && registry && n_violations,
            "map, registry and n_violations are required");
    const auto violations = pt::ValidateMap(map->map, registry->registry);
    *n_violations = violations.size();
    if (!violations.empty()) first = violations.front().message;
  });
  if (status == PQ_OK) last_error = first;
  return status;
}

void pq_map_destroy(pq_map* map) { delete map; }

// ---- Instances and fusion ----

pq_status pq_instances_create(pq_instances** out) {
  return Guard([&] {
    Require(out != nullptr, "out is NULL");
    Emit(new pq_instances{}, out);
  });
}

pq_status pq_instances_add(pq_instances* instances, uint32_t class_id,
                           double score, int width, int height,
                           const uint8_t* mask) {
  return Guard([&] {
    Require(instances && mask, "instances and mask are required");
    Require(width >= 0 && height >= 0, "dimensions must be >= 0");
    Require(score >= 0.0 && score <= 1.0, "score must lie in [0, 1]");
    pt::ScoredInstance inst;
    inst.class_id = class_id;
    inst.score = score;
    inst.mask = pt::BinaryMask(width, height);
    for (size_t i = 0; i < inst.mask.size(); ++i) {
      if (mask[i]) inst.mask.set(i);
    }
    Require(inst.mask.area() > 0, "instance mask is empty");
    instances->items.push_back(std::move(inst));
  });
}

pq_status pq_instances_read(const char* path, int width, int height,
                            const pq_registry* registry, pq_instances** out) {
  return Guard([&] {
    Require(path && registry && out, "path, registry and out are required");
    auto handle = std::make_unique<pq_instances>();
    handle->items = pt::ReadInstances(path, width, height, registry->registry);
    Emit(handle.release(), out);
  });
}

pq_status pq_instances_write(const pq_instances* instances, const char* path) {
  return Guard([&] {
    Require(instances && path, "instances and path are required");
    pt::WriteInstances(instances->items, path);
  });
}

size_t pq_instances_size(const pq_instances* instances) {
  return instances == nullptr ? 0 : instances->items.size();
}

void pq_instances_destroy(pq_instances* instances) { delete instances; }

pq_status pq_resolve_overlaps(int width, int height,
                              const pq_instances* instances,
                              const pq_registry* registry,
                              double score_threshold, double keep_fraction,
                              pq_map** out) {
  return Guard([&] {
    Require(instances && registry && out,
            "instances, registry and out are required");
    pt::FusionConfig config;
    config.score_threshold = score_threshold;
    config.keep_fraction = keep_fraction;
    auto handle = std::make_unique<pq_map>();
    handle->map = pt::ResolveOverlaps(width, height, instances->items,
                                      registry->registry, config);
    Emit(handle.release(), out);
  });
}

pq_status pq_fuse(const pq_map* things, const pq_map* semantic,
                  const pq_registry* registry, pq_map** out) {
  return Guard([&] {
    Require(things && semantic && registry && out,
            "things, semantic, registry and out are required");
    auto handle = std::make_unique<pq_map>();
    handle->map = pt::Fuse(things->map, semantic->map, registry->registry);
    Emit(handle.release(), out);
  });
}

// ---- Datasets ----

pq_status pq_dataset_open_dirs(const char* gt_dir, const char* pred_dir,
                               const char* manifest,
                               const pq_registry* registry, pq_dataset** out) {
  return Guard([&] {
    Require(gt_dir && pred_dir && registry && out,
            "directories, registry and out are required");
    auto handle = std::make_unique<pq_dataset>();
    handle->registry = std::make_unique<pt::ClassRegistry>(registry->registry);
    auto dirs = std::make_unique<pt::DirectoryDataset>(
        gt_dir, pred_dir, *handle->registry,
        manifest == nullptr ? std::filesystem::path()
                            : std::filesystem::path(manifest));
    handle->missing = dirs->missing();
    handle->source = std::move(dirs);
    Emit(handle.release(), out);
  });
}

pq_status pq_dataset_create(pq_dataset** out) {
  return Guard([&] {
    Require(out != nullptr, "out is NULL");
    auto handle = std::make_unique<pq_dataset>();
    auto memory = std::make_unique<pt::InMemoryDataset>();
    handle->memory = memory.get();
    handle->source = std::move(memory);
    Emit(handle.release(), out);
  });
}

pq_status pq_dataset_add(pq_dataset* dataset, const char* stem,
                         const pq_map* gt, const pq_map* pred) {
  return Guard([&] {
    Require(dataset && gt, "dataset and gt are required");
    Require(dataset->memory != nullptr,
            "maps can only be added to in-memory datasets");
    if (pred != nullptr) {
      Require(pred->map.width() == gt->map.width() &&
                  pred->map.height() == gt->map.height(),
              "prediction and ground truth dimensions differ");
    }
    const std::string name =
        stem != nullptr ? stem : std::to_string(dataset->source->size());
    dataset->memory->Add(
        name, std::make_shared<const pt::PanopticMap>(gt->map),
        pred ? std::make_shared<const pt::PanopticMap>(pred->map) : nullptr);
    if (pred == nullptr) dataset->missing.push_back(name);
  });
}

size_t pq_dataset_size(const pq_dataset* dataset) {
  return dataset == nullptr ? 0 : dataset->source->size();
}

size_t pq_dataset_missing_count(const pq_dataset* dataset) {
  return dataset == nullptr ? 0 : dataset->missing.size();
}

const char* pq_dataset_missing(const pq_dataset* dataset, size_t index) {
  if (dataset == nullptr || index >= dataset->missing.size()) return nullptr;
  return dataset->missing[index].c_str();
}

void pq_dataset_destroy(pq_dataset* dataset) { delete dataset; }

// ---- Evaluation ----

void pq_options_init(pq_options* options) {
  if (options == nullptr) return;
  options->iou_threshold = 0.5;
  options->alpha = 0.5;
  options->beta = 0.5;
  options->threads = 1;
}

pq_status pq_evaluate(const pq_dataset* dataset, const pq_registry* registry,
                      const pq_options* options, pq_evaluation** out) {
  return Guard([&] {
    Require(dataset && registry && out, "dataset, registry and out are required");
    auto handle = std::make_unique<pq_evaluation>();
    handle->registry = registry->registry;
    handle->config = ToConfig(options);
    handle->eval = pt::Evaluate(*dataset->source, handle->registry,
                                handle->config, Threads(options),
                                /*keep_matches=*/true);
    Emit(handle.release(), out);
  });
}

pq_status pq_evaluate_maps(const pq_map* gt, const pq_map* pred,
                           const pq_registry* registry,
                           const pq_options* options, pq_evaluation** out) {
  return Guard([&] {
    Require(gt && registry && out, "gt, registry and out are required");
    pt::InMemoryDataset one;
    one.Add("0", std::shared_ptr<const pt::PanopticMap>(&gt->map, [](auto*) {}),
            pred ? std::shared_ptr<const pt::PanopticMap>(&pred->map,
                                                          [](auto*) {})
                 : nullptr);
    auto handle = std::make_unique<pq_evaluation>();
    handle->registry = registry->registry;
    handle->config = ToConfig(options);
    handle->eval = pt::Evaluate(one, handle->registry, handle->config, 1,
                                /*keep_matches=*/true);
    Emit(handle.release(), out);
  });
}

pq_status pq_evaluation_aggregate(const pq_evaluation* evaluation,
                                  pq_scope scope, pq_aggregate* out) {
  return Guard([&] {
    Require(evaluation && out, "evaluation and out are required");
    const pt::PQResult& r = evaluation->eval.result;
    switch (scope) {
      case PQ_SCOPE_ALL:
        return FillAggregate(r.all, out);
      case PQ_SCOPE_STUFF:
        return FillAggregate(r.stuff, out);
      case PQ_SCOPE_THINGS:
        return FillAggregate(r.things, out);
    }
    throw pt::InvalidArgumentError("unknown scope");
  });
}

size_t pq_evaluation_class_count(const pq_evaluation* evaluation) {
  return evaluation == nullptr ? 0 : evaluation->eval.result.per_class.size();
}

pq_status pq_evaluation_class(const pq_evaluation* evaluation, size_t index,
                              pq_class_metrics* out) {
  return Guard([&] {
    Require(evaluation && out, "evaluation and out are required");
    const auto& classes = evaluation->eval.result.per_class;
    Require(index < classes.size(), "class index out of range");
    const pt::ClassMetrics& m = classes[index];
    out->class_id = m.class_id;
    out->name = m.name.c_str();
    out->is_thing = m.kind == pt::SegmentKind::kThing ? 1 : 0;
    out->pq = m.pq;
    out->sq = m.sq;
    out->rq = m.rq;
    out->iou_sum = m.stat.iou_sum;
    out->tp = m.stat.tp;
    out->fp = m.stat.fp;
    out->fn = m.stat.fn;
  });
}

pq_status pq_evaluation_rq_alpha_beta(const pq_evaluation* evaluation,
                                      uint32_t class_id, double* out) {
  return Guard([&] {
    Require(evaluation && out, "evaluation and out are required");
    const auto rq = pt::RqAlphaBeta(evaluation->eval.total,
                                    evaluation->config.alpha,
                                    evaluation->config.beta);
    auto it = rq.find(class_id);
    if (it == rq.end() || !evaluation->eval.result.Find(class_id)) {
      throw pt::InvalidArgumentError("class " + std::to_string(class_id) +
                                     " has no defined RQ");
    }
    *out = it->second;
  });
}

size_t pq_evaluation_image_count(const pq_evaluation* evaluation) {
  return evaluation == nullptr ? 0 : evaluation->eval.per_image.size();
}

pq_status pq_evaluation_write_report(const pq_evaluation* evaluation,
                                     const char* path, pq_format format) {
  return Guard([&] {
    Require(evaluation && path, "evaluation and path are required");
    pt::WriteReport(evaluation->eval.result, FormatFor(format, path), path);
  });
}

pq_status pq_evaluation_format_report(const pq_evaluation* evaluation,
                                      pq_format format, char* buf,
                                      size_t capacity, size_t* needed) {
  return Guard([&] {
    Require(evaluation != nullptr, "evaluation is NULL");
    Require(format != PQ_FORMAT_AUTO, "format must be JSON or CSV");
    const std::string text =
        pt::FormatReport(evaluation->eval.result, FormatFor(format, nullptr));
    if (needed != nullptr) *needed = text.size() + 1;
    if (buf != nullptr && capacity >= text.size() + 1) {
      std::memcpy(buf, text.c_str(), text.size() + 1);
    }
  });
}

pq_status pq_evaluation_scale(const pq_evaluation* evaluation, int things_only,
                              int64_t* small_cut, int64_t* large_cut,
                              pq_aggregate* small, pq_aggregate* medium,
                              pq_aggregate* large) {
  return Guard([&] {
    Require(evaluation != nullptr, "evaluation is NULL");
    pt::ScaleCuts cuts;
    const pt::ScaleBreakdown b = Breakdown(*evaluation, things_only != 0, &cuts);
    if (small_cut != nullptr) *small_cut = cuts.small;
    if (large_cut != nullptr) *large_cut = cuts.large;
    FillAggregate(b.small.all, small);
    FillAggregate(b.medium.all, medium);
    FillAggregate(b.large.all, large);
  });
}

pq_status pq_evaluation_write_scale(const pq_evaluation* evaluation,
                                    int things_only, const char* path) {
  return Guard([&] {
    Require(evaluation && path, "evaluation and path are required");
    pt::ScaleCuts cuts;
    const pt::ScaleBreakdown b = Breakdown(*evaluation, things_only != 0, &cuts);
    pt::WriteTextFile(path, pt::FormatScaleCsv(cuts, b));
  });
}

void pq_evaluation_destroy(pq_evaluation* evaluation) { delete evaluation; }

// ---- Statistics ----

pq_status pq_bootstrap_run(const pq_evaluation* evaluation, int n_resamples,
                           uint64_t seed, unsigned threads,
                           pq_bootstrap** out) {
  return Guard([&] {
    Require(evaluation && out, "evaluation and out are required");
    auto handle = std::make_unique<pq_bootstrap>();
    handle->results =
        pt::BootstrapPQ(evaluation->eval.per_image, evaluation->registry,
                        evaluation->config, n_resamples, seed, threads);
    Emit(handle.release(), out);
  });
}

size_t pq_bootstrap_count(const pq_bootstrap* bootstrap) {
  return bootstrap == nullptr ? 0 : bootstrap->results.size();
}

pq_status pq_bootstrap_interval(const pq_bootstrap* bootstrap, size_t index,
                                pq_interval* out) {
  return Guard([&] {
    Require(bootstrap && out, "bootstrap and out are required");
    Require(index < bootstrap->results.size(), "interval index out of range");
    const pt::BootstrapResult& r = bootstrap->results[index];
    out->metric = r.metric.c_str();
    out->point = r.point;
    out->lo = r.lo;
    out->hi = r.hi;
    out->n_resamples = r.n_resamples;
    out->n_defined = r.n_defined;
    out->seed = r.seed;
  });
}

pq_status pq_bootstrap_write_csv(const pq_bootstrap* bootstrap,
                                 const char* path) {
  return Guard([&] {
    Require(bootstrap && path, "bootstrap and path are required");
    pt::WriteTextFile(path, pt::FormatBootstrapCsv(bootstrap->results));
  });
}

void pq_bootstrap_destroy(pq_bootstrap* bootstrap) { delete bootstrap; }

pq_status pq_sweep(const pq_dataset* dataset, const pq_registry* registry,
                   const double* thresholds, size_t n_thresholds,
                   const pq_options* options, pq_table** out) {
  return Guard([&] {
    Require(dataset && registry && out, "dataset, registry and out are required");
    Require(thresholds != nullptr || n_thresholds == 0, "thresholds is NULL");
    const pt::MetricConfig base = ToConfig(options);
    auto handle = std::make_unique<pq_table>();
    handle->sweep = pt::ThresholdSweep(
        *dataset->source, registry->registry,
        std::span<const double>(thresholds, n_thresholds), Threads(options),
        base);
    handle->csv = pt::FormatSweepCsv(handle->sweep);
    handle->rows = handle->sweep.size();
    Emit(handle.release(), out);
  });
}

pq_status pq_sweep_point(const pq_table* sweep, size_t index,
                         double* threshold, pq_aggregate* all,
                         pq_aggregate* stuff, pq_aggregate* things) {
  return Guard([&] {
    Require(sweep != nullptr, "sweep is NULL");
    Require(index < sweep->sweep.size(), "sweep index out of range");
    const pt::SweepPoint& p = sweep->sweep[index];
    if (threshold != nullptr) *threshold = p.threshold;
    FillAggregate(p.result.all, all);
    FillAggregate(p.result.stuff, stuff);
    FillAggregate(p.result.things, things);
  });
}

pq_status pq_overlap_cdf(const pq_dataset* dataset, const pq_registry* registry,
                         unsigned threads, pq_table** out) {
  return Guard([&] {
    Require(dataset && registry && out, "dataset, registry and out are required");
    Require(threads >= 1, "threads must be >= 1");
    auto handle = std::make_unique<pq_table>();
    handle->cdf = pt::OverlapCdf(*dataset->source, registry->registry, threads);
    handle->csv = pt::FormatCdfCsv(handle->cdf);
    handle->rows = handle->cdf.size();
    Emit(handle.release(), out);
  });
}

pq_status pq_cdf_point(const pq_table* cdf, size_t index, double* iou,
                       double* fraction) {
  return Guard([&] {
    Require(cdf != nullptr, "cdf is NULL");
    Require(index < cdf->cdf.size(), "cdf index out of range");
    if (iou != nullptr) *iou = cdf->cdf[index].iou;
    if (fraction != nullptr) *fraction = cdf->cdf[index].fraction;
  });
}

pq_status pq_confusion_create(pq_confusion** out) {
  return Guard([&] {
    Require(out != nullptr, "out is NULL");
    Emit(new pq_confusion{}, out);
  });
}

pq_status pq_confusion_add(pq_confusion* confusion, const pq_map* gt,
                           const pq_map* pred) {
  return Guard([&] {
    Require(confusion && gt && pred, "confusion, gt and pred are required");
    confusion->confusion.Add(gt->map, pred->map);
  });
}

pq_status pq_mean_iou(const pq_confusion* confusion,
                      const pq_registry* registry, pq_table** out,
                      double* mean, int* num_classes) {
  return Guard([&] {
    Require(confusion && registry, "confusion and registry are required");
    auto handle = std::make_unique<pq_table>();
    handle->miou = pt::MeanIou(confusion->confusion, registry->registry);
    for (const auto& row : handle->miou.per_class) {
      handle->miou_rows.push_back(row);
    }
    handle->csv = pt::FormatMeanIouCsv(handle->miou, registry->registry);
    handle->rows = handle->miou_rows.size();
    if (mean != nullptr) *mean = handle->miou.mean;
    if (num_classes != nullptr) *num_classes = handle->miou.num_classes;
    if (out != nullptr) Emit(handle.release(), out);
  });
}

pq_status pq_miou_class(const pq_table* miou, size_t index, uint32_t* class_id,
                        double* iou) {
  return Guard([&] {
    Require(miou != nullptr, "table is NULL");
    Require(index < miou->miou_rows.size(), "class index out of range");
    if (class_id != nullptr) *class_id = miou->miou_rows[index].first;
    if (iou != nullptr) *iou = miou->miou_rows[index].second;
  });
}

void pq_confusion_destroy(pq_confusion* confusion) { delete confusion; }

size_t pq_table_rows(const pq_table* table) {
  return table == nullptr ? 0 : table->rows;
}

pq_status pq_table_write_csv(const pq_table* table, const char* path) {
  return Guard([&] {
    Require(table && path, "table and path are required");
    pt::WriteTextFile(path, table->csv);
  });
}

void pq_table_destroy(pq_table* table) { delete table; }

// ---- Synthetic data ----

void pq_synth_spec_init(pq_synth_spec* spec) {
  if (spec == nullptr) return;
  const pt::SynthSpec d;
  spec->width = d.width;
  spec->height = d.height;
  spec->n_stuff_classes = d.n_stuff_classes;
  spec->n_thing_classes = d.n_thing_classes;
  spec->n_seeds = d.n_seeds;
  spec->crowd_probability = d.crowd_probability;
  spec->void_fraction = d.void_fraction;
  spec->seed = d.seed;
}

pq_status pq_synth_ground_truth(const pq_synth_spec* spec, pq_map** out) {
  return Guard([&] {
    Require(spec && out, "spec and out are required");
    pt::SynthSpec s;
    s.width = spec->width;
    s.height = spec->height;
    s.n_stuff_classes = spec->n_stuff_classes;
    s.n_thing_classes = spec->n_thing_classes;
    s.n_seeds = spec->n_seeds;
    s.crowd_probability = spec->crowd_probability;
    s.void_fraction = spec->void_fraction;
    s.seed = spec->seed;
    auto handle = std::make_unique<pq_map>();
    handle->map = pt::GenerateGroundTruth(s);
    Emit(handle.release(), out);
  });
}

void pq_noise_init(pq_noise* noise) {
  if (noise == nullptr) return;
  const pt::PredictionNoise d;
  noise->jitter_radius = d.jitter_radius;
  noise->drop = d.drop;
  noise->split = d.split;
  noise->relabel = d.relabel;
  noise->spurious = d.spurious;
  noise->spurious_area = d.spurious_area;
  noise->seed = d.seed;
}

pq_status pq_synth_prediction(const pq_map* gt, const pq_registry* registry,
                              const pq_noise* noise, pq_map** out) {
  return Guard([&] {
    Require(gt && registry && noise && out,
            "gt, registry, noise and out are required");
    pt::PredictionNoise n;
    n.jitter_radius = noise->jitter_radius;
    n.drop = noise->drop;
    n.split = noise->split;
    n.relabel = noise->relabel;
    n.spurious = noise->spurious;
    n.spurious_area = noise->spurious_area;
    n.seed = noise->seed;
    auto handle = std::make_unique<pq_map>();
    handle->map = pt::SynthesizePrediction(gt->map, registry->registry, n);
    Emit(handle.release(), out);
  });
}

pq_status pq_synth_fusion_inputs(const pq_map* gt, const pq_registry* registry,
                                 int jitter_radius, int spurious, uint64_t seed,
                                 pq_instances** instances, pq_map** semantic) {
  return Guard([&] {
    Require(gt && registry && instances && semantic,
            "gt, registry and outputs are required");
    pt::FusionNoise n;
    n.jitter_radius = jitter_radius;
    n.spurious = spurious;
    n.seed = seed;
    pt::FusionSample sample =
        pt::SynthesizeFusionSample(gt->map, registry->registry, n);
    auto inst = std::make_unique<pq_instances>();
    inst->items = std::move(sample.instances);
    auto sem = std::make_unique<pq_map>();
    sem->map = std::move(sample.semantic);
    Emit(inst.release(), instances);
    Emit(sem.release(), semantic);
  });
}

pq_status pq_perturb(const pq_map* map, const pq_registry* registry,
                     const pq_perturbation* perturbation, pq_map** out) {
  return Guard([&] {
    Require(map && registry && perturbation && out,
            "map, registry, perturbation and out are required");
    const pq_perturbation& p = *perturbation;
    const pt::SegmentKey target{p.target_class, p.target_instance};
    pt::Perturbation q;
    switch (p.kind) {
      case PQ_PERTURB_JITTER:
        q = pt::Perturbation::BoundaryJitter(p.radius, p.seed);
        break;
      case PQ_PERTURB_SPLIT:
        q = pt::Perturbation::SplitSegment(target);
        break;
      case PQ_PERTURB_MERGE:
        q = pt::Perturbation::MergeSegments(
            target, {p.other_class, p.other_instance});
        break;
      case PQ_PERTURB_RELABEL:
        q = pt::Perturbation::Relabel(target, p.new_class);
        break;
      case PQ_PERTURB_DROP:
        q = pt::Perturbation::DropSegment(target);
        break;
      case PQ_PERTURB_SPURIOUS:
        q = pt::Perturbation::AddSpurious(p.area, p.new_class, p.seed);
        break;
      default:
        throw pt::InvalidArgumentError("unknown perturbation kind");
    }
    auto handle = std::make_unique<pq_map>();
    handle->map = pt::Perturb(map->map, registry->registry, q);
    Emit(handle.release(), out);
  });
}

}  // extern "C"
