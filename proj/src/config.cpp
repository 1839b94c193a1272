#include "nucseg/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace nucseg {

namespace {

void require_object(const json& j, const char* block) {
  if (!j.is_object()) {
    throw Error(ErrorCode::bad_config, std::string("'") + block + "' must be a JSON object");
  }
}

void reject_unknown(const json& j, const char* block, std::initializer_list<const char*> keys) {
  require_object(j, block);
  const std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& [key, _] : j.items()) {
    if (!allowed.contains(key)) {
      throw Error(ErrorCode::bad_config,
                  std::string("unknown key '") + key + "' in '" + block + "'");
    }
  }
}

template <class T>
void read(const json& j, const char* block, const char* key, T& out) {
  if (!j.contains(key)) return;
  const json& v = j.at(key);
  bool ok = false;
  if constexpr (std::is_same_v<T, bool>) {
    ok = v.is_boolean();
  } else if constexpr (std::is_integral_v<T>) {
    ok = v.is_number_integer() && (std::is_signed_v<T> || v.is_number_unsigned());
  } else if constexpr (std::is_floating_point_v<T>) {
    ok = v.is_number();
  } else {
    ok = v.is_string();
  }
  if (!ok) {
    throw Error(ErrorCode::bad_config,
                std::string("'") + block + "." + key + "' has the wrong type");
  }
  out = v.get<T>();
}

template <class T, std::size_t N>
void read_array(const json& j, const char* block, const char* key, std::array<T, N>& out) {
  if (!j.contains(key)) return;
  const json& v = j.at(key);
  if (!v.is_array() || v.size() != N) {
    throw Error(ErrorCode::bad_config, std::string("'") + block + "." + key + "' must be a " +
                                           std::to_string(N) + "-array");
  }
  for (std::size_t i = 0; i < N; ++i) {
    if (!v[i].is_number()) {
      throw Error(ErrorCode::bad_config, std::string("'") + block + "." + key +
                                             "' entries must be numbers");
    }
    out[i] = v[i].get<T>();
  }
}

// Re-raise module validation failures as configuration errors.
template <class P>
void validated(const P& p) {
  try {
    p.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::bad_config, e.what());
  }
}

}  // namespace

json to_json(const DistanceParams& p) {
  return {{"alpha", p.alpha},
          {"beta", p.beta},
          {"clamp", p.clamp},
          {"use_anisotropy", p.use_anisotropy}};
}

json to_json(const ContourParams& p) {
  return {{"thickness", p.thickness},
          {"include_background_boundary", p.include_background_boundary}};
}

json to_json(const DecodeParams& p) {
  return {{"tau1", p.tau1},
          {"tau2", p.tau2},
          {"tau3", p.tau3},
          {"tau4", p.tau4},
          {"tau5", p.tau5},
          {"seed_connectivity", p.seed_connectivity},
          {"flood_connectivity", p.flood_connectivity},
          {"min_instance_size", p.min_instance_size}};
}

json to_json(const EvalParams& p) { return {{"thresholds", p.thresholds}}; }

json to_json(const SynthConfig& p) {
  return {{"shape", {p.shape.z, p.shape.y, p.shape.x}},
          {"voxel_size_um", {p.voxel_size.z, p.voxel_size.y, p.voxel_size.x}},
          {"instance_count", p.instance_count},
          {"radius_range", {p.radius_range[0], p.radius_range[1]}},
          {"shape_kind", to_string(p.shape_kind)},
          {"min_center_separation", p.min_center_separation},
          {"touching_pair_fraction", p.touching_pair_fraction},
          {"rng_seed", p.rng_seed}};
}

json to_json(const IntensityModel& p) {
  json j = {{"fg_mean", p.fg_mean},
            {"fg_std", p.fg_std},
            {"bg_mean", p.bg_mean},
            {"bg_std", p.bg_std},
            {"texture", to_string(p.texture)}};
  j["target_kl"] = p.target_kl ? json(*p.target_kl) : json(nullptr);
  return j;
}

json to_json(const NoiseSpec& p) {
  return {{"gaussian_std", {p.gaussian_std[0], p.gaussian_std[1], p.gaussian_std[2]}},
          {"blur_radius", p.blur_radius},
          {"dropout_fraction", p.dropout_fraction},
          {"rng_seed", p.rng_seed}};
}

json to_json(const PipelineConfig& c) {
  json j = {{"distance", to_json(c.distance)}, {"contour", to_json(c.contour)},
            {"decode", to_json(c.decode)},     {"eval", to_json(c.eval)},
            {"synth", to_json(c.synth)},       {"intensity", to_json(c.intensity)}};
  j["noise"] = c.noise ? to_json(*c.noise) : json(nullptr);
  return j;
}

void merge_json(const json& j, DistanceParams& p) {
  reject_unknown(j, "distance", {"alpha", "beta", "clamp", "use_anisotropy"});
  read(j, "distance", "alpha", p.alpha);
  read(j, "distance", "beta", p.beta);
  read(j, "distance", "clamp", p.clamp);
  read(j, "distance", "use_anisotropy", p.use_anisotropy);
  validated(p);
}

void merge_json(const json& j, ContourParams& p) {
  reject_unknown(j, "contour", {"thickness", "include_background_boundary"});
  read(j, "contour", "thickness", p.thickness);
  read(j, "contour", "include_background_boundary", p.include_background_boundary);
  validated(p);
}

void merge_json(const json& j, DecodeParams& p) {
  reject_unknown(j, "decode",
                 {"tau1", "tau2", "tau3", "tau4", "tau5", "seed_connectivity",
                  "flood_connectivity", "min_instance_size"});
  read(j, "decode", "tau1", p.tau1);
  read(j, "decode", "tau2", p.tau2);
  read(j, "decode", "tau3", p.tau3);
  read(j, "decode", "tau4", p.tau4);
  read(j, "decode", "tau5", p.tau5);
  read(j, "decode", "seed_connectivity", p.seed_connectivity);
  read(j, "decode", "flood_connectivity", p.flood_connectivity);
  read(j, "decode", "min_instance_size", p.min_instance_size);
  validated(p);
}

void merge_json(const json& j, EvalParams& p) {
  reject_unknown(j, "eval", {"thresholds"});
  if (j.contains("thresholds")) {
    const json& t = j.at("thresholds");
    if (!t.is_array() || t.empty()) {
      throw Error(ErrorCode::bad_config, "'eval.thresholds' must be a non-empty array");
    }
    p.thresholds.clear();
    for (const auto& v : t) {
      if (!v.is_number() || !(v.get<double>() > 0.0 && v.get<double>() < 1.0)) {
        throw Error(ErrorCode::bad_config, "'eval.thresholds' entries must lie in (0, 1)");
      }
      p.thresholds.push_back(v.get<double>());
    }
  }
}

void merge_json(const json& j, SynthConfig& p) {
  reject_unknown(j, "synth",
                 {"shape", "voxel_size_um", "instance_count", "radius_range", "shape_kind",
                  "min_center_separation", "touching_pair_fraction", "rng_seed"});
  std::array<std::int64_t, 3> shape{p.shape.z, p.shape.y, p.shape.x};
  read_array(j, "synth", "shape", shape);
  p.shape = {shape[0], shape[1], shape[2]};
  std::array<double, 3> vs{p.voxel_size.z, p.voxel_size.y, p.voxel_size.x};
  read_array(j, "synth", "voxel_size_um", vs);
  p.voxel_size = {vs[0], vs[1], vs[2]};
  read(j, "synth", "instance_count", p.instance_count);
  read_array(j, "synth", "radius_range", p.radius_range);
  if (j.contains("shape_kind")) {
    std::string kind;
    read(j, "synth", "shape_kind", kind);
    try {
      p.shape_kind = shape_kind_from_string(kind);
    } catch (const Error& e) {
      throw Error(ErrorCode::bad_config, e.what());
    }
  }
  read(j, "synth", "min_center_separation", p.min_center_separation);
  read(j, "synth", "touching_pair_fraction", p.touching_pair_fraction);
  read(j, "synth", "rng_seed", p.rng_seed);
  validated(p);
}

void merge_json(const json& j, IntensityModel& p) {
  reject_unknown(j, "intensity", {"fg_mean", "fg_std", "bg_mean", "bg_std", "texture", "target_kl"});
  read(j, "intensity", "fg_mean", p.fg_mean);
  read(j, "intensity", "fg_std", p.fg_std);
  read(j, "intensity", "bg_mean", p.bg_mean);
  read(j, "intensity", "bg_std", p.bg_std);
  if (j.contains("texture")) {
    std::string t;
    read(j, "intensity", "texture", t);
    try {
      p.texture = texture_from_string(t);
    } catch (const Error& e) {
      throw Error(ErrorCode::bad_config, e.what());
    }
  }
  if (j.contains("target_kl")) {
    if (j["target_kl"].is_null()) {
      p.target_kl.reset();
    } else {
      double v = 0.0;
      read(j, "intensity", "target_kl", v);
      p.target_kl = v;
    }
  }
  validated(p);
}

void merge_json(const json& j, NoiseSpec& p) {
  reject_unknown(j, "noise", {"gaussian_std", "blur_radius", "dropout_fraction", "rng_seed"});
  read_array(j, "noise", "gaussian_std", p.gaussian_std);
  read(j, "noise", "blur_radius", p.blur_radius);
  read(j, "noise", "dropout_fraction", p.dropout_fraction);
  read(j, "noise", "rng_seed", p.rng_seed);
  validated(p);
}

void merge_json(const json& j, PipelineConfig& c) {
  reject_unknown(j, "config",
                 {"distance", "contour", "decode", "eval", "synth", "intensity", "noise"});
  if (j.contains("distance")) merge_json(j["distance"], c.distance);
  if (j.contains("contour")) merge_json(j["contour"], c.contour);
  if (j.contains("decode")) merge_json(j["decode"], c.decode);
  if (j.contains("eval")) merge_json(j["eval"], c.eval);
  if (j.contains("synth")) merge_json(j["synth"], c.synth);
  if (j.contains("intensity")) merge_json(j["intensity"], c.intensity);
  if (j.contains("noise")) {
    if (j["noise"].is_null()) {
      c.noise.reset();
    } else {
      NoiseSpec n = c.noise.value_or(NoiseSpec{});
      merge_json(j["noise"], n);
      c.noise = n;
    }
  }
}

json load_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::missing_file, path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return json::parse(buf.str());
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::bad_config, path.string() + ": " + e.what());
  }
}

void write_json_file(const json& j, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::unwritable, path.string());
  out << j.dump(2) << '\n';
  if (!out) throw Error(ErrorCode::unwritable, path.string());
}

}  // namespace nucseg
