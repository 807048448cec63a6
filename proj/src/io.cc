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

#include "panoptic/io.h"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

#include "json.hpp"
#include "panoptic/status.h"
#include "png_io.h"

namespace panoptic {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

json ParseJson(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw FormatError(what + ": invalid JSON: " + e.what());
  }
}

// Integer field in [lo, hi]. `record` names the element for diagnostics.
int64_t GetInt(const json& obj, const char* key, int64_t lo, int64_t hi,
               const std::string& record) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    throw FormatError(record + ": missing \"" + key + "\"");
  }
  if (!it->is_number_integer()) {
    throw FormatError(record + ": \"" + key + "\" is not an integer");
  }
  const int64_t v = it->get<int64_t>();
  if (v < lo || v > hi) {
    throw FormatError(record + ": \"" + key + "\" = " + std::to_string(v) +
                      " out of range [" + std::to_string(lo) + ", " +
                      std::to_string(hi) + "]");
  }
  return v;
}

bool GetFlag(const json& obj, const char* key, const std::string& record,
             bool fallback) {
  auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  if (it->is_boolean()) return it->get<bool>();
  if (it->is_number_integer()) {
    const int64_t v = it->get<int64_t>();
    if (v == 0 || v == 1) return v == 1;
  }
  throw FormatError(record + ": \"" + key + "\" must be 0 or 1");
}

std::string ListIds(const std::set<uint32_t>& ids) {
  std::string out;
  int shown = 0;
  for (uint32_t id : ids) {
    if (shown == 10) {
      out += ", ...";
      break;
    }
    if (shown++) out += ", ";
    out += std::to_string(id);
  }
  return out;
}

std::string Fixed4(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

std::string CsvField(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string Prefixed(const std::filesystem::path& path, const Error& e) {
  return path.string() + ": " + e.what();
}

}  // namespace

PanopticFilePair PanopticFilePair::ForStem(const std::filesystem::path& dir,
                                           const std::string& stem) {
  return {dir / (stem + ".png"), dir / (stem + ".json")};
}

EncodedPanoptic EncodePanoptic(const PanopticMap& map) {
  EncodedPanoptic out;
  out.width = map.width();
  out.height = map.height();
  out.rgb.assign(map.pixel_count() * 3, 0);
  std::unordered_map<uint64_t, uint32_t> ids;
  std::vector<SegmentKey> order;
  const auto labels = map.labels();
  uint64_t last_key = 0;
  uint32_t last_id = 0;
  for (size_t i = 0; i < labels.size(); ++i) {
    const SegmentKey& k = labels[i];
    if (k.is_void()) continue;
    uint32_t id;
    if (last_id != 0 && k.packed() == last_key) {
      id = last_id;
    } else {
      auto [it, inserted] = ids.try_emplace(k.packed(), 0);
      if (inserted) {
        if (order.size() >= kMaxSegmentId) {
          throw ValidationError("map holds more than " +
                                std::to_string(kMaxSegmentId) + " segments");
        }
        order.push_back(k);
        it->second = static_cast<uint32_t>(order.size());
      }
      id = it->second;
      last_key = k.packed();
      last_id = id;
    }
    out.rgb[3 * i] = static_cast<uint8_t>(id & 0xff);
    out.rgb[3 * i + 1] = static_cast<uint8_t>((id >> 8) & 0xff);
    out.rgb[3 * i + 2] = static_cast<uint8_t>((id >> 16) & 0xff);
  }
  ordered_json doc;
  doc["width"] = out.width;
  doc["height"] = out.height;
  ordered_json segments = ordered_json::array();
  for (size_t i = 0; i < order.size(); ++i) {
    ordered_json s;
    s["id"] = i + 1;
    s["category_id"] = order[i].class_id;
    s["instance_id"] = order[i].instance_id;
    s["iscrowd"] = map.IsCrowd(order[i]) ? 1 : 0;
    segments.push_back(std::move(s));
  }
  doc["segments_info"] = std::move(segments);
  out.sidecar = doc.dump(2) + "\n";
  return out;
}

PanopticMap DecodePanoptic(const EncodedPanoptic& encoded,
                           const ClassRegistry& registry) {
  const json doc = ParseJson(encoded.sidecar, "sidecar");
  if (!doc.is_object()) throw FormatError("sidecar: expected a JSON object");
  if (doc.contains("width") || doc.contains("height")) {
    const int64_t w = GetInt(doc, "width", 0, INT32_MAX, "sidecar");
    const int64_t h = GetInt(doc, "height", 0, INT32_MAX, "sidecar");
    if (w != encoded.width || h != encoded.height) {
      throw FormatError("dimension mismatch: sidecar declares " +
                        std::to_string(w) + "x" + std::to_string(h) +
                        ", raster is " + std::to_string(encoded.width) + "x" +
                        std::to_string(encoded.height));
    }
  }
  auto segs = doc.find("segments_info");
  if (segs == doc.end() || !segs->is_array()) {
    throw FormatError("sidecar: missing \"segments_info\" array");
  }

  struct Pending {
    uint32_t id;
    uint32_t class_id;
    std::optional<uint32_t> instance_id;
    bool crowd;
  };
  std::vector<Pending> pending;
  std::set<uint32_t> seen_ids;
  for (size_t i = 0; i < segs->size(); ++i) {
    const json& s = (*segs)[i];
    const std::string record = "segments_info[" + std::to_string(i) + "]";
    if (!s.is_object()) throw FormatError(record + ": expected an object");
    Pending p;
    p.id = static_cast<uint32_t>(GetInt(s, "id", 1, kMaxSegmentId, record));
    p.class_id = static_cast<uint32_t>(
        GetInt(s, "category_id", 1, UINT32_MAX, record));
    if (s.contains("instance_id")) {
      p.instance_id = static_cast<uint32_t>(
          GetInt(s, "instance_id", 0, kMaxInstanceId, record));
    }
    p.crowd = GetFlag(s, "iscrowd", record, false);
    if (!seen_ids.insert(p.id).second) {
      throw FormatError(record + ": duplicate segment id " +
                        std::to_string(p.id));
    }
    const ClassInfo* info = registry.Find(p.class_id);
    if (info == nullptr) {
      throw FormatError(record + ": unknown category_id " +
                        std::to_string(p.class_id));
    }
    if (p.crowd && !info->is_thing()) {
      throw FormatError(record + ": crowd flag on stuff class " +
                        std::to_string(p.class_id));
    }
    pending.push_back(p);
  }
  std::sort(pending.begin(), pending.end(),
            [](const Pending& a, const Pending& b) { return a.id < b.id; });

  std::map<uint32_t, uint32_t> next_instance;
  std::unordered_map<uint32_t, SegmentKey> id_to_key;
  std::set<SegmentKey> keys;
  std::set<SegmentKey> crowd;
  for (const Pending& p : pending) {
    SegmentKey key{p.class_id, 0};
    if (p.instance_id) {
      key.instance_id = *p.instance_id;
    } else if (registry.IsThing(p.class_id)) {
      key.instance_id = ++next_instance[p.class_id];
    }
    if (!keys.insert(key).second) {
      throw FormatError("segment id " + std::to_string(p.id) +
                        " repeats segment " + ToString(key));
    }
    id_to_key[p.id] = key;
    if (p.crowd) crowd.insert(key);
  }

  if (encoded.rgb.size() !=
      static_cast<size_t>(encoded.width) * encoded.height * 3) {
    throw FormatError("raster buffer size does not match its dimensions");
  }
  std::vector<SegmentKey> labels(static_cast<size_t>(encoded.width) *
                                 encoded.height);
  std::set<uint32_t> orphans;
  std::set<uint32_t> used;
  uint32_t last_id = 0;
  SegmentKey last_key;
  for (size_t i = 0; i < labels.size(); ++i) {
    const uint32_t id = encoded.rgb[3 * i] |
                        (static_cast<uint32_t>(encoded.rgb[3 * i + 1]) << 8) |
                        (static_cast<uint32_t>(encoded.rgb[3 * i + 2]) << 16);
    if (id == 0) continue;
    if (id != last_id) {
      auto it = id_to_key.find(id);
      if (it == id_to_key.end()) {
        orphans.insert(id);
        continue;
      }
      used.insert(id);
      last_id = id;
      last_key = it->second;
    }
    labels[i] = last_key;
  }
  if (!orphans.empty()) {
    throw FormatError("segment ids in raster without sidecar entry: " +
                      ListIds(orphans));
  }
  std::set<uint32_t> unused;
  for (uint32_t id : seen_ids) {
    if (!used.count(id)) unused.insert(id);
  }
  if (!unused.empty()) {
    throw FormatError("sidecar segment ids absent from raster: " +
                      ListIds(unused));
  }
  return PanopticMap(encoded.width, encoded.height, std::move(labels),
                     std::move(crowd));
}

PanopticMap ReadPanoptic(const PanopticFilePair& pair,
                         const ClassRegistry& registry) {
  internal::RgbImage image = internal::ReadRgbPng(pair.raster_path);
  EncodedPanoptic encoded;
  encoded.width = image.width;
  encoded.height = image.height;
  encoded.rgb = std::move(image.data);
  encoded.sidecar = ReadTextFile(pair.sidecar_path);
  try {
    return DecodePanoptic(encoded, registry);
  } catch (const FormatError& e) {
    throw FormatError(Prefixed(pair.sidecar_path, e));
  }
}

void WritePanoptic(const PanopticMap& map, const PanopticFilePair& pair) {
  EncodedPanoptic encoded = EncodePanoptic(map);
  internal::WriteRgbPng({encoded.width, encoded.height, std::move(encoded.rgb)},
                        pair.raster_path);
  WriteTextFile(pair.sidecar_path, encoded.sidecar);
}

ClassRegistry ParseClassRegistry(const std::string& text) {
  const json doc = ParseJson(text, "categories");
  const json* list = &doc;
  if (doc.is_object()) {
    auto it = doc.find("categories");
    if (it == doc.end()) {
      throw FormatError("categories: missing \"categories\" array");
    }
    list = &*it;
  }
  if (!list->is_array()) {
    throw FormatError("categories: expected an array of categories");
  }
  ClassRegistry registry;
  for (size_t i = 0; i < list->size(); ++i) {
    const json& c = (*list)[i];
    const std::string record = "categories[" + std::to_string(i) + "]";
    if (!c.is_object()) throw FormatError(record + ": expected an object");
    const int64_t id = GetInt(c, "id", 0, UINT32_MAX, record);
    if (id == 0) {
      throw FormatError(record + ": id 0 is reserved for void");
    }
    if (registry.Contains(static_cast<uint32_t>(id))) {
      throw FormatError(record + ": duplicate id " + std::to_string(id));
    }
    std::string name;
    if (auto it = c.find("name"); it != c.end()) {
      if (!it->is_string()) throw FormatError(record + ": name not a string");
      name = it->get<std::string>();
    }
    if (!c.contains("isthing")) {
      throw FormatError(record + ": missing \"isthing\"");
    }
    const bool thing = GetFlag(c, "isthing", record, false);
    registry.Add(static_cast<uint32_t>(id), std::move(name),
                 thing ? SegmentKind::kThing : SegmentKind::kStuff);
  }
  return registry;
}

ClassRegistry ReadClassRegistry(const std::filesystem::path& path) {
  try {
    return ParseClassRegistry(ReadTextFile(path));
  } catch (const FormatError& e) {
    throw FormatError(Prefixed(path, e));
  }
}

void WriteClassRegistry(const ClassRegistry& registry,
                        const std::filesystem::path& path) {
  ordered_json list = ordered_json::array();
  for (const ClassInfo& c : registry.classes()) {
    ordered_json entry;
    entry["id"] = c.id;
    entry["name"] = c.name;
    entry["isthing"] = c.is_thing() ? 1 : 0;
    list.push_back(std::move(entry));
  }
  WriteTextFile(path, list.dump(2) + "\n");
}

std::vector<int64_t> EncodeRle(const BinaryMask& mask) {
  std::vector<int64_t> counts;
  bool current = false;
  int64_t run = 0;
  for (size_t i = 0; i < mask.size(); ++i) {
    if (mask.test(i) != current) {
      counts.push_back(run);
      run = 0;
      current = !current;
    }
    ++run;
  }
  counts.push_back(run);
  return counts;
}

BinaryMask DecodeRle(std::span<const int64_t> counts, int width, int height) {
  const int64_t total = int64_t{width} * height;
  int64_t sum = 0;
  for (size_t i = 0; i < counts.size(); ++i) {
    if (counts[i] < 0) {
      throw FormatError("run " + std::to_string(i) + " has negative length");
    }
    sum += counts[i];
    if (sum > total) break;
  }
  if (sum != total) {
    throw FormatError("run lengths sum to " + std::to_string(sum) +
                      (sum > total ? "+" : "") + ", expected " +
                      std::to_string(total) + " (" + std::to_string(width) +
                      "x" + std::to_string(height) + ")");
  }
  BinaryMask mask(width, height);
  size_t pos = 0;
  for (size_t i = 0; i < counts.size(); ++i) {
    const size_t len = static_cast<size_t>(counts[i]);
    if (i % 2 == 1) {
      for (size_t k = 0; k < len; ++k) mask.set(pos + k);
    }
    pos += len;
  }
  return mask;
}

std::vector<ScoredInstance> ParseInstances(const std::string& text, int width,
                                           int height,
                                           const ClassRegistry& registry) {
  const json doc = ParseJson(text, "instances");
  const json* list = &doc;
  if (doc.is_object()) {
    auto it = doc.find("instances");
    if (it == doc.end()) {
      throw FormatError("instances: missing \"instances\" array");
    }
    list = &*it;
  }
  if (!list->is_array()) throw FormatError("instances: expected an array");
  std::vector<ScoredInstance> out;
  for (size_t i = 0; i < list->size(); ++i) {
    const json& item = (*list)[i];
    const std::string record = "instances[" + std::to_string(i) + "]";
    if (!item.is_object()) throw FormatError(record + ": expected an object");
    ScoredInstance inst;
    inst.class_id = static_cast<uint32_t>(
        GetInt(item, "category_id", 1, UINT32_MAX, record));
    if (!registry.IsThing(inst.class_id)) {
      throw FormatError(record + ": category_id " +
                        std::to_string(inst.class_id) +
                        " is not a thing class");
    }
    auto score = item.find("score");
    if (score == item.end() || !score->is_number()) {
      throw FormatError(record + ": missing numeric \"score\"");
    }
    inst.score = score->get<double>();
    if (!(inst.score >= 0.0 && inst.score <= 1.0)) {
      throw FormatError(record + ": score outside [0, 1]");
    }
    auto counts = item.find("counts");
    if (counts == item.end() || !counts->is_array()) {
      throw FormatError(record + ": missing \"counts\" array");
    }
    std::vector<int64_t> runs;
    runs.reserve(counts->size());
    for (const json& c : *counts) {
      if (!c.is_number_integer()) {
        throw FormatError(record + ": run lengths must be integers");
      }
      runs.push_back(c.get<int64_t>());
    }
    try {
      inst.mask = DecodeRle(runs, width, height);
    } catch (const FormatError& e) {
      throw FormatError(record + ": " + e.what());
    }
    if (inst.mask.area() == 0) {
      throw FormatError(record + ": empty mask");
    }
    out.push_back(std::move(inst));
  }
  return out;
}

std::vector<ScoredInstance> ReadInstances(const std::filesystem::path& path,
                                          int width, int height,
                                          const ClassRegistry& registry) {
  try {
    return ParseInstances(ReadTextFile(path), width, height, registry);
  } catch (const FormatError& e) {
    throw FormatError(Prefixed(path, e));
  }
}

void WriteInstances(std::span<const ScoredInstance> instances,
                    const std::filesystem::path& path) {
  ordered_json list = ordered_json::array();
  for (const ScoredInstance& inst : instances) {
    ordered_json entry;
    entry["category_id"] = inst.class_id;
    entry["score"] = inst.score;
    entry["counts"] = EncodeRle(inst.mask);
    list.push_back(std::move(entry));
  }
  ordered_json doc;
  doc["instances"] = std::move(list);
  WriteTextFile(path, doc.dump() + "\n");
}

PanopticMap ReadSemantic(const std::filesystem::path& path,
                         const ClassRegistry& registry) {
  const internal::Gray16Image image = internal::ReadGray16Png(path);
  std::vector<SegmentKey> labels(image.data.size());
  uint16_t last = 0;
  for (size_t i = 0; i < labels.size(); ++i) {
    const uint16_t v = image.data[i];
    if (v == 0) continue;
    if (v != last) {
      if (!registry.Contains(v)) {
        throw FormatError(path.string() + ": unknown class value " +
                          std::to_string(v) + " at pixel (" +
                          std::to_string(i % image.width) + ", " +
                          std::to_string(i / image.width) + ")");
      }
      last = v;
    }
    labels[i] = {v, 0};
  }
  return PanopticMap(image.width, image.height, std::move(labels));
}

void WriteSemantic(const PanopticMap& map, const std::filesystem::path& path) {
  internal::Gray16Image image{map.width(), map.height(), {}};
  image.data.resize(map.pixel_count());
  const auto labels = map.labels();
  for (size_t i = 0; i < labels.size(); ++i) {
    if (labels[i].class_id > 0xffff) {
      throw ValidationError("class id " + std::to_string(labels[i].class_id) +
                            " does not fit a 16-bit semantic raster");
    }
    image.data[i] = static_cast<uint16_t>(labels[i].class_id);
  }
  internal::WriteGray16Png(image, path);
}

ReportFormat ReportFormatFor(const std::filesystem::path& path) {
  return path.extension() == ".csv" ? ReportFormat::kCsv : ReportFormat::kJson;
}

std::string FormatReport(const PQResult& result, ReportFormat format) {
  std::ostringstream out;
  const std::pair<const char*, const AggregateMetrics*> aggregates[] = {
      {"all", &result.all},
      {"stuff", &result.stuff},
      {"things", &result.things},
  };
  if (format == ReportFormat::kCsv) {
    out << "scope,class_id,name,kind,pq,sq,rq,iou_sum,tp,fp,fn,num_classes\n";
    for (const ClassMetrics& m : result.per_class) {
      out << "class," << m.class_id << "," << CsvField(m.name) << ","
          << SegmentKindName(m.kind) << "," << Fixed4(m.pq) << ","
          << Fixed4(m.sq) << "," << Fixed4(m.rq) << ","
          << Fixed4(m.stat.iou_sum) << "," << m.stat.tp << "," << m.stat.fp
          << "," << m.stat.fn << ",\n";
    }
    for (const auto& [scope, agg] : aggregates) {
      if (!agg->defined()) continue;
      out << scope << ",,,," << Fixed4(agg->pq) << "," << Fixed4(agg->sq)
          << "," << Fixed4(agg->rq) << ",," << agg->tp << "," << agg->fp
          << "," << agg->fn << "," << agg->num_classes << "\n";
    }
    return out.str();
  }

  out << "{\n  \"classes\": [";
  for (size_t i = 0; i < result.per_class.size(); ++i) {
    const ClassMetrics& m = result.per_class[i];
    out << (i ? ",\n" : "\n") << "    {\"class_id\": " << m.class_id
        << ", \"name\": " << json(m.name).dump()
        << ", \"kind\": \"" << SegmentKindName(m.kind)
        << "\", \"pq\": " << Fixed4(m.pq) << ", \"sq\": " << Fixed4(m.sq)
        << ", \"rq\": " << Fixed4(m.rq)
        << ", \"iou_sum\": " << Fixed4(m.stat.iou_sum)
        << ", \"tp\": " << m.stat.tp << ", \"fp\": " << m.stat.fp
        << ", \"fn\": " << m.stat.fn << "}";
  }
  out << (result.per_class.empty() ? "]" : "\n  ]");
  for (const auto& [scope, agg] : aggregates) {
    out << ",\n  \"" << scope << "\": ";
    if (!agg->defined()) {
      out << "null";
      continue;
    }
    out << "{\"pq\": " << Fixed4(agg->pq) << ", \"sq\": " << Fixed4(agg->sq)
        << ", \"rq\": " << Fixed4(agg->rq)
        << ", \"num_classes\": " << agg->num_classes << ", \"tp\": " << agg->tp
        << ", \"fp\": " << agg->fp << ", \"fn\": " << agg->fn << "}";
  }
  out << "\n}\n";
  return out.str();
}

void WriteReport(const PQResult& result, ReportFormat format,
                 const std::filesystem::path& path) {
  WriteTextFile(path, FormatReport(result, format));
}

void WriteTextFile(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  out.flush();
  if (!out) throw IoError("failed writing " + path.string());
}

std::string ReadTextFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string() + " for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

RunConfig ParseRunConfig(const std::string& text) {
  const json doc = ParseJson(text, "run config");
  if (!doc.is_object()) throw FormatError("run config: expected an object");
  RunConfig config;
  auto text_field = [](const json& v, const std::string& key) {
    if (!v.is_string()) {
      throw FormatError("run config: \"" + key + "\" must be a string");
    }
    return v.get<std::string>();
  };
  auto real_field = [](const json& v, const std::string& key) {
    if (!v.is_number()) {
      throw FormatError("run config: \"" + key + "\" must be a number");
    }
    return v.get<double>();
  };
  for (const auto& [key, value] : doc.items()) {
    if (key == "gt_dir") {
      config.gt_dir = text_field(value, key);
    } else if (key == "pred_dir") {
      config.pred_dir = text_field(value, key);
    } else if (key == "categories") {
      config.categories = text_field(value, key);
    } else if (key == "output") {
      config.output = text_field(value, key);
    } else if (key == "format") {
      config.format = text_field(value, key);
    } else if (key == "manifest") {
      config.manifest = text_field(value, key);
    } else if (key == "threads") {
      config.threads = static_cast<unsigned>(
          GetInt(doc, "threads", 1, 4096, "run config"));
    } else if (key == "seed") {
      if (!value.is_number_unsigned() && !value.is_number_integer()) {
        throw FormatError("run config: \"seed\" must be an integer");
      }
      config.seed = value.get<uint64_t>();
    } else if (key == "iou_threshold") {
      config.iou_threshold = real_field(value, key);
    } else if (key == "alpha") {
      config.alpha = real_field(value, key);
    } else if (key == "beta") {
      config.beta = real_field(value, key);
    } else {
      throw FormatError("run config: unknown key \"" + key + "\"");
    }
  }
  return config;
}

RunConfig ReadRunConfig(const std::filesystem::path& path) {
  try {
    return ParseRunConfig(ReadTextFile(path));
  } catch (const FormatError& e) {
    throw FormatError(Prefixed(path, e));
  }
}

}  // namespace panoptic
