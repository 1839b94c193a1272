#include "nucseg/volume_io.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace nucseg {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

template <class T>
void swap_bytes_if_big_endian(std::span<T> values) {
  if constexpr (std::endian::native == std::endian::big && sizeof(T) > 1) {
    for (T& v : values) {
      auto* b = reinterpret_cast<unsigned char*>(&v);
      std::reverse(b, b + sizeof(T));
    }
  }
}

json parse_header(const fs::path& header) {
  std::ifstream in(header);
  if (!in) {
    throw Error(ErrorCode::missing_file, header.string());
  }
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return json::parse(buf.str());
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::malformed_header, header.string() + ": " + e.what());
  }
}

template <class T>
Volume<T> read_raw(const fs::path& raw, Shape shape, VoxelSize vs) {
  std::ifstream in(raw, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::missing_file, raw.string());
  }
  in.seekg(0, std::ios::end);
  const auto bytes = static_cast<std::uintmax_t>(in.tellg());
  const std::uintmax_t expected = shape.voxels() * sizeof(T);
  if (bytes != expected) {
    throw Error(ErrorCode::size_mismatch, raw.string() + ": " + std::to_string(bytes) +
                                              " bytes, header implies " +
                                              std::to_string(expected));
  }
  in.seekg(0);
  std::vector<T> data(shape.voxels());
  in.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(expected));
  if (!in) {
    throw Error(ErrorCode::size_mismatch, raw.string() + ": short read");
  }
  swap_bytes_if_big_endian(std::span<T>(data));
  return Volume<T>(shape, vs, std::move(data));
}

std::array<json, 3> triple(const json& h, const char* key) {
  if (!h.contains(key) || !h[key].is_array() || h[key].size() != 3) {
    throw Error(ErrorCode::malformed_header, std::string("'") + key + "' must be a 3-array");
  }
  return {h[key][0], h[key][1], h[key][2]};
}

}  // namespace

fs::path raw_path_for(const fs::path& header) {
  fs::path raw = header;
  if (header.extension() == ".json") {
    raw.replace_extension(".raw");
  } else {
    raw += ".raw";
  }
  return raw;
}

AnyVolume read_volume(const fs::path& header) {
  const json h = parse_header(header);
  if (!h.is_object()) {
    throw Error(ErrorCode::malformed_header, header.string() + ": not a JSON object");
  }
  Shape shape;
  VoxelSize vs;
  ElemKind kind{};
  fs::path raw;
  try {
    const auto s = triple(h, "shape");
    for (const auto& c : s) {
      if (!c.is_number_integer()) {
        throw Error(ErrorCode::malformed_header, "'shape' entries must be integers");
      }
    }
    shape = {s[0].get<std::int64_t>(), s[1].get<std::int64_t>(), s[2].get<std::int64_t>()};
    const auto v = triple(h, "voxel_size_um");
    for (const auto& c : v) {
      if (!c.is_number()) {
        throw Error(ErrorCode::malformed_header, "'voxel_size_um' entries must be numbers");
      }
    }
    vs = {v[0].get<double>(), v[1].get<double>(), v[2].get<double>()};
    if (!h.contains("elem") || !h["elem"].is_string()) {
      throw Error(ErrorCode::malformed_header, "'elem' missing");
    }
    if (h.value("order", std::string{}) != "C") {
      throw Error(ErrorCode::malformed_header, "'order' must be \"C\"");
    }
    if (h.value("endianness", std::string{}) != "little") {
      throw Error(ErrorCode::malformed_header, "'endianness' must be \"little\"");
    }
    if (!h.contains("data_file") || !h["data_file"].is_string()) {
      throw Error(ErrorCode::malformed_header, "'data_file' missing");
    }
    kind = elem_kind_from_string(h["elem"].get<std::string>());
    raw = header.parent_path() / h["data_file"].get<std::string>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::malformed_header, header.string() + ": " + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::unknown_elem) throw;
    throw Error(ErrorCode::malformed_header, header.string() + ": " + e.what());
  }
  if (shape.z < 1 || shape.y < 1 || shape.x < 1 || !(vs.z > 0 && vs.y > 0 && vs.x > 0)) {
    throw Error(ErrorCode::malformed_header, header.string() + ": invalid shape or voxel size");
  }
  switch (kind) {
    case ElemKind::uint8: return read_raw<std::uint8_t>(raw, shape, vs);
    case ElemKind::uint32: return read_raw<std::uint32_t>(raw, shape, vs);
    case ElemKind::float32: return read_raw<float>(raw, shape, vs);
  }
  throw Error(ErrorCode::unknown_elem, header.string());
}

template <class T>
void write_volume(const Volume<T>& v, const fs::path& header) {
  if (v.size() != v.shape().voxels()) {
    throw Error(ErrorCode::invariant_violation, "data length does not match shape");
  }
  const fs::path raw = raw_path_for(header);
  const Shape& s = v.shape();
  const VoxelSize& vs = v.voxel_size();
  json h = {
      {"shape", {s.z, s.y, s.x}},
      {"elem", to_string(v.elem())},
      {"voxel_size_um", {vs.z, vs.y, vs.x}},
      {"data_file", raw.filename().string()},
      {"order", "C"},
      {"endianness", "little"},
  };
  {
    std::ofstream out(raw, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw Error(ErrorCode::unwritable, raw.string());
    }
    if constexpr (std::endian::native == std::endian::big && sizeof(T) > 1) {
      std::vector<T> copy(v.data().begin(), v.data().end());
      swap_bytes_if_big_endian(std::span<T>(copy));
      out.write(reinterpret_cast<const char*>(copy.data()),
                static_cast<std::streamsize>(copy.size() * sizeof(T)));
    } else {
      out.write(reinterpret_cast<const char*>(v.data().data()),
                static_cast<std::streamsize>(v.size() * sizeof(T)));
    }
    if (!out) {
      throw Error(ErrorCode::unwritable, raw.string());
    }
  }
  std::ofstream out(header, std::ios::trunc);
  if (!out) {
    throw Error(ErrorCode::unwritable, header.string());
  }
  out << h.dump(2) << '\n';
  if (!out) {
    throw Error(ErrorCode::unwritable, header.string());
  }
}

template void write_volume(const Volume<std::uint8_t>&, const fs::path&);
template void write_volume(const Volume<std::uint32_t>&, const fs::path&);
template void write_volume(const Volume<float>&, const fs::path&);

void write_volume(const AnyVolume& v, const fs::path& header) {
  std::visit([&](const auto& vol) { write_volume(vol, header); }, v);
}

}  // namespace nucseg
