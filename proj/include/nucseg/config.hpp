#pragma once

// JSON parameter blocks. Parsing is strict: unknown keys and wrongly typed
// values are bad_config errors; absent keys keep the module defaults.

#include <filesystem>
#include <vector>

#include <nlohmann/json.hpp>

#include "nucseg/decode.hpp"
#include "nucseg/synth.hpp"
#include "nucseg/targets.hpp"

namespace nucseg {

using nlohmann::json;

struct EvalParams {
  std::vector<double> thresholds{0.5, 0.75};
  bool operator==(const EvalParams&) const = default;
};

struct PipelineConfig {
  DistanceParams distance;
  ContourParams contour;
  DecodeParams decode;
  EvalParams eval;
  SynthConfig synth;
  IntensityModel intensity;
  std::optional<NoiseSpec> noise;
};

json to_json(const DistanceParams& p);
json to_json(const ContourParams& p);
json to_json(const DecodeParams& p);
json to_json(const EvalParams& p);
json to_json(const SynthConfig& p);
json to_json(const IntensityModel& p);
json to_json(const NoiseSpec& p);
json to_json(const PipelineConfig& c);

void merge_json(const json& j, DistanceParams& p);
void merge_json(const json& j, ContourParams& p);
void merge_json(const json& j, DecodeParams& p);
void merge_json(const json& j, EvalParams& p);
void merge_json(const json& j, SynthConfig& p);
void merge_json(const json& j, IntensityModel& p);
void merge_json(const json& j, NoiseSpec& p);

// Top-level keys: distance, contour, decode, eval, synth, intensity, noise.
void merge_json(const json& j, PipelineConfig& c);

json load_json_file(const std::filesystem::path& path);
// Writes `j.dump(2)` plus a trailing newline.
void write_json_file(const json& j, const std::filesystem::path& path);

}  // namespace nucseg
