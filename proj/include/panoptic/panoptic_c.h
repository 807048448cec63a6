/* Copyright 2026 The Panoptic Toolkit Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/* C interface of libpanoptic.
 *
 * Every function returning pq_status reports failure through the code and
 * leaves a message retrievable with pq_last_error() on the calling thread.
 * Output handles are written only on success. Handles are opaque, owned by
 * the caller and released with the matching *_destroy function, which
 * accepts NULL. Reals are fractions in [0, 1], never percentages.
 *
 * Rasters cross the boundary as contiguous row-major buffers of
 * width * height elements.
 */

#ifndef PANOPTIC_PANOPTIC_C_H_
#define PANOPTIC_PANOPTIC_C_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define PQ_API __declspec(dllexport)
#else
#define PQ_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum pq_status {
  PQ_OK = 0,
  PQ_ERR_INVALID_ARGUMENT = 1,
  PQ_ERR_FORMAT = 2,
  PQ_ERR_INTERNAL = 3,
  PQ_ERR_IO = 4,
  PQ_ERR_VALIDATION = 5
} pq_status;

/* Message of the last failure on this thread; "" when none. */
PQ_API const char* pq_last_error(void);
PQ_API const char* pq_version(void);

/* ---- Run configuration files ---- */

typedef struct pq_run_config pq_run_config;

/* JSON object with optional keys gt_dir, pred_dir, categories, output,
 * format, manifest (strings), threads, seed (integers), iou_threshold,
 * alpha, beta (reals). Unknown keys are rejected. */
PQ_API pq_status pq_run_config_read(const char* path, pq_run_config** out);
/* NULL when the key is absent. */
PQ_API const char* pq_run_config_string(const pq_run_config* config,
                                        const char* key);
/* Returns 1 and stores the value when the numeric key is present. */
PQ_API int pq_run_config_number(const pq_run_config* config, const char* key,
                                double* value);
PQ_API void pq_run_config_destroy(pq_run_config* config);

/* ---- Class registries ---- */

typedef struct pq_registry pq_registry;

PQ_API pq_status pq_registry_create(pq_registry** out);
PQ_API pq_status pq_registry_add(pq_registry* registry, uint32_t id,
                                 const char* name, int is_thing);
PQ_API pq_status pq_registry_read(const char* path, pq_registry** out);
PQ_API pq_status pq_registry_write(const pq_registry* registry,
                                   const char* path);
/* Stuff ids 1..n_stuff, thing ids after. */
PQ_API pq_status pq_registry_synth(int n_stuff, int n_thing,
                                   pq_registry** out);
PQ_API size_t pq_registry_size(const pq_registry* registry);
PQ_API void pq_registry_destroy(pq_registry* registry);

/* ---- Panoptic maps ---- */

typedef struct pq_map pq_map;

/* Builds a map from a segment-id raster. ids[y * width + x] is a segment id,
 * 0 for void, at most 2^24 - 1. Segment seg_ids[k] has class categories[k]
 * and crowd flag iscrowd[k] (iscrowd may be NULL). Thing segments of a class
 * get instance ids 1, 2, ... in increasing segment-id order, exactly as when
 * the same data is read from a PNG/JSON pair. */
PQ_API pq_status pq_map_from_ids(int width, int height, const uint32_t* ids,
                                 size_t n_segments, const uint32_t* seg_ids,
                                 const uint32_t* categories,
                                 const uint8_t* iscrowd,
                                 const pq_registry* registry, pq_map** out);
/* All-void map. */
PQ_API pq_status pq_map_create_void(int width, int height, pq_map** out);
PQ_API pq_status pq_map_read(const char* png_path, const char* json_path,
                             const pq_registry* registry, pq_map** out);
PQ_API pq_status pq_map_write(const pq_map* map, const char* png_path,
                              const char* json_path);
/* 16-bit class-id raster; instance ids become 0. */
PQ_API pq_status pq_map_read_semantic(const char* path,
                                      const pq_registry* registry,
                                      pq_map** out);
PQ_API pq_status pq_map_write_semantic(const pq_map* map, const char* path);
PQ_API int pq_map_width(const pq_map* map);
PQ_API int pq_map_height(const pq_map* map);
PQ_API size_t pq_map_segment_count(const pq_map* map);
/* Inverse of pq_map_from_ids with segment ids 1..n in first-pixel scan
 * order. ids holds width * height entries; the three per-segment arrays hold
 * pq_map_segment_count() entries each. Any pointer may be NULL. */
PQ_API pq_status pq_map_export(const pq_map* map, uint32_t* ids,
                               uint32_t* categories, uint32_t* instance_ids,
                               uint8_t* iscrowd);
/* Number of validation problems; the first is copied into pq_last_error. */
PQ_API pq_status pq_map_validate(const pq_map* map,
                                 const pq_registry* registry,
                                 size_t* n_violations);
PQ_API void pq_map_destroy(pq_map* map);

/* ---- Scored instances and fusion ---- */

typedef struct pq_instances pq_instances;

PQ_API pq_status pq_instances_create(pq_instances** out);
/* mask holds width * height bytes, nonzero meaning set. */
PQ_API pq_status pq_instances_add(pq_instances* instances, uint32_t class_id,
                                  double score, int width, int height,
                                  const uint8_t* mask);
PQ_API pq_status pq_instances_read(const char* path, int width, int height,
                                   const pq_registry* registry,
                                   pq_instances** out);
PQ_API pq_status pq_instances_write(const pq_instances* instances,
                                    const char* path);
PQ_API size_t pq_instances_size(const pq_instances* instances);
PQ_API void pq_instances_destroy(pq_instances* instances);

PQ_API pq_status pq_resolve_overlaps(int width, int height,
                                     const pq_instances* instances,
                                     const pq_registry* registry,
                                     double score_threshold,
                                     double keep_fraction, pq_map** out);
PQ_API pq_status pq_fuse(const pq_map* things, const pq_map* semantic,
                         const pq_registry* registry, pq_map** out);

/* ---- Datasets ---- */

typedef struct pq_dataset pq_dataset;

/* Pairs <stem>.png/<stem>.json files by stem, or by a manifest of
 * "gt_stem [pred_stem]" lines when manifest is not NULL. */
PQ_API pq_status pq_dataset_open_dirs(const char* gt_dir, const char* pred_dir,
                                      const char* manifest,
                                      const pq_registry* registry,
                                      pq_dataset** out);
PQ_API pq_status pq_dataset_create(pq_dataset** out);
/* Copies both maps; pred may be NULL for a missing prediction. */
PQ_API pq_status pq_dataset_add(pq_dataset* dataset, const char* stem,
                                const pq_map* gt, const pq_map* pred);
PQ_API size_t pq_dataset_size(const pq_dataset* dataset);
/* GT stems without a prediction, for directory datasets. */
PQ_API size_t pq_dataset_missing_count(const pq_dataset* dataset);
PQ_API const char* pq_dataset_missing(const pq_dataset* dataset,
                                      size_t index);
PQ_API void pq_dataset_destroy(pq_dataset* dataset);

/* ---- Evaluation ---- */

typedef struct pq_options {
  double iou_threshold; /* in (0, 1); default 0.5 */
  double alpha;         /* default 0.5 */
  double beta;          /* default 0.5 */
  unsigned threads;     /* >= 1; default 1 */
} pq_options;

PQ_API void pq_options_init(pq_options* options);

typedef enum pq_scope {
  PQ_SCOPE_ALL = 0,
  PQ_SCOPE_STUFF = 1,
  PQ_SCOPE_THINGS = 2
} pq_scope;

typedef struct pq_aggregate {
  int defined; /* 0 when no class of the scope participates */
  double pq;
  double sq;
  double rq;
  int num_classes;
  int64_t tp;
  int64_t fp;
  int64_t fn;
} pq_aggregate;

typedef struct pq_class_metrics {
  uint32_t class_id;
  const char* name; /* valid while the evaluation lives */
  int is_thing;
  double pq;
  double sq;
  double rq;
  double iou_sum;
  int64_t tp;
  int64_t fp;
  int64_t fn;
} pq_class_metrics;

typedef struct pq_evaluation pq_evaluation;

/* registry must be the one the dataset was opened with, or compatible. */
PQ_API pq_status pq_evaluate(const pq_dataset* dataset,
                             const pq_registry* registry,
                             const pq_options* options, pq_evaluation** out);
/* Single pair; pred may be NULL for an all-void prediction. */
PQ_API pq_status pq_evaluate_maps(const pq_map* gt, const pq_map* pred,
                                  const pq_registry* registry,
                                  const pq_options* options,
                                  pq_evaluation** out);
PQ_API pq_status pq_evaluation_aggregate(const pq_evaluation* evaluation,
                                         pq_scope scope, pq_aggregate* out);
PQ_API size_t pq_evaluation_class_count(const pq_evaluation* evaluation);
PQ_API pq_status pq_evaluation_class(const pq_evaluation* evaluation,
                                     size_t index, pq_class_metrics* out);
/* RQ with the alpha and beta of the options; PQ_ERR_INVALID_ARGUMENT when
 * the class does not participate or its weighted denominator is 0. */
PQ_API pq_status pq_evaluation_rq_alpha_beta(const pq_evaluation* evaluation,
                                             uint32_t class_id, double* out);
PQ_API size_t pq_evaluation_image_count(const pq_evaluation* evaluation);

typedef enum pq_format {
  PQ_FORMAT_AUTO = 0, /* from the file extension */
  PQ_FORMAT_JSON = 1,
  PQ_FORMAT_CSV = 2
} pq_format;

PQ_API pq_status pq_evaluation_write_report(const pq_evaluation* evaluation,
                                            const char* path,
                                            pq_format format);
/* Copies the report text, NUL-terminated, into buf when it fits; *needed
 * receives the size including the terminator. buf may be NULL. */
PQ_API pq_status pq_evaluation_format_report(const pq_evaluation* evaluation,
                                             pq_format format, char* buf,
                                             size_t capacity, size_t* needed);

/* Small/medium/large breakdown with cuts at the 25th and 75th percentile of
 * non-crowd GT segment areas (thing segments only when things_only). */
PQ_API pq_status pq_evaluation_scale(const pq_evaluation* evaluation,
                                     int things_only, int64_t* small_cut,
                                     int64_t* large_cut, pq_aggregate* small,
                                     pq_aggregate* medium,
                                     pq_aggregate* large);
PQ_API pq_status pq_evaluation_write_scale(const pq_evaluation* evaluation,
                                           int things_only, const char* path);
PQ_API void pq_evaluation_destroy(pq_evaluation* evaluation);

/* ---- Statistics ---- */

typedef struct pq_interval {
  const char* metric; /* "all.pq", "stuff.sq", ... */
  double point;
  double lo;
  double hi;
  int n_resamples;
  int n_defined;
  uint64_t seed;
} pq_interval;

typedef struct pq_bootstrap pq_bootstrap;

/* Resamples the images of the evaluation. Reproducible for a given seed
 * whatever the thread count. */
PQ_API pq_status pq_bootstrap_run(const pq_evaluation* evaluation,
                                  int n_resamples, uint64_t seed,
                                  unsigned threads, pq_bootstrap** out);
PQ_API size_t pq_bootstrap_count(const pq_bootstrap* bootstrap);
PQ_API pq_status pq_bootstrap_interval(const pq_bootstrap* bootstrap,
                                       size_t index, pq_interval* out);
PQ_API pq_status pq_bootstrap_write_csv(const pq_bootstrap* bootstrap,
                                        const char* path);
PQ_API void pq_bootstrap_destroy(pq_bootstrap* bootstrap);

typedef struct pq_table pq_table;

/* Threshold sweep: one row per threshold. */
PQ_API pq_status pq_sweep(const pq_dataset* dataset,
                          const pq_registry* registry,
                          const double* thresholds, size_t n_thresholds,
                          const pq_options* options, pq_table** out);
PQ_API pq_status pq_sweep_point(const pq_table* sweep, size_t index,
                                double* threshold, pq_aggregate* all,
                                pq_aggregate* stuff, pq_aggregate* things);

/* Overlap CDF over matched pairs with any positive IoU. */
PQ_API pq_status pq_overlap_cdf(const pq_dataset* dataset,
                                const pq_registry* registry, unsigned threads,
                                pq_table** out);
PQ_API pq_status pq_cdf_point(const pq_table* cdf, size_t index, double* iou,
                              double* fraction);

/* Semantic mean IoU over pairs of semantic maps. */
typedef struct pq_confusion pq_confusion;
PQ_API pq_status pq_confusion_create(pq_confusion** out);
PQ_API pq_status pq_confusion_add(pq_confusion* confusion, const pq_map* gt,
                                  const pq_map* pred);
PQ_API pq_status pq_mean_iou(const pq_confusion* confusion,
                             const pq_registry* registry, pq_table** out,
                             double* mean, int* num_classes);
PQ_API pq_status pq_miou_class(const pq_table* miou, size_t index,
                               uint32_t* class_id, double* iou);
PQ_API void pq_confusion_destroy(pq_confusion* confusion);

PQ_API size_t pq_table_rows(const pq_table* table);
PQ_API pq_status pq_table_write_csv(const pq_table* table, const char* path);
PQ_API void pq_table_destroy(pq_table* table);

/* ---- Synthetic data ---- */

typedef struct pq_synth_spec {
  int width;
  int height;
  int n_stuff_classes;
  int n_thing_classes;
  int n_seeds;
  double crowd_probability;
  double void_fraction;
  uint64_t seed;
} pq_synth_spec;

PQ_API void pq_synth_spec_init(pq_synth_spec* spec);
PQ_API pq_status pq_synth_ground_truth(const pq_synth_spec* spec,
                                       pq_map** out);

typedef struct pq_noise {
  int jitter_radius;
  int drop;
  int split;
  int relabel;
  int spurious;
  int64_t spurious_area;
  uint64_t seed;
} pq_noise;

PQ_API void pq_noise_init(pq_noise* noise);
PQ_API pq_status pq_synth_prediction(const pq_map* gt,
                                     const pq_registry* registry,
                                     const pq_noise* noise, pq_map** out);

/* Fusion inputs for gt: a jittered semantic map and scored instances. */
PQ_API pq_status pq_synth_fusion_inputs(const pq_map* gt,
                                        const pq_registry* registry,
                                        int jitter_radius, int spurious,
                                        uint64_t seed,
                                        pq_instances** instances,
                                        pq_map** semantic);

typedef enum pq_perturbation_kind {
  PQ_PERTURB_JITTER = 0,
  PQ_PERTURB_SPLIT = 1,
  PQ_PERTURB_MERGE = 2,
  PQ_PERTURB_RELABEL = 3,
  PQ_PERTURB_DROP = 4,
  PQ_PERTURB_SPURIOUS = 5
} pq_perturbation_kind;

typedef struct pq_perturbation {
  pq_perturbation_kind kind;
  uint32_t target_class;
  uint32_t target_instance;
  uint32_t other_class;
  uint32_t other_instance;
  int radius;
  uint32_t new_class;
  int64_t area;
  uint64_t seed;
} pq_perturbation;

PQ_API pq_status pq_perturb(const pq_map* map, const pq_registry* registry,
                            const pq_perturbation* perturbation,
                            pq_map** out);

#ifdef __cplusplus
}
#endif

#endif /* PANOPTIC_PANOPTIC_C_H_ */
