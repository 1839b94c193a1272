#pragma once

// Canonical on-disk format: a UTF-8 JSON header plus a raw little-endian
// C-order array next to it.
//
//   {"data_file": "labels.raw", "elem": "uint32", "endianness": "little",
//    "order": "C", "shape": [z, y, x], "voxel_size_um": [z, y, x]}
//
// `data_file` is resolved relative to the header's directory. Writing
// `foo.json` produces `foo.raw`; any other header path gets `<path>.raw`.

#include <filesystem>

#include "nucseg/volume.hpp"

namespace nucseg {

AnyVolume read_volume(const std::filesystem::path& header);

// Reads and requires a specific element kind (invalid_argument otherwise).
template <class T>
Volume<T> read_volume_as(const std::filesystem::path& header) {
  AnyVolume any = read_volume(header);
  if (auto* v = std::get_if<Volume<T>>(&any)) {
    return std::move(*v);
  }
  throw Error(ErrorCode::invalid_argument, header.string() + ": expected elem " +
                                               to_string(elem_kind_of<T>()));
}

template <class T>
void write_volume(const Volume<T>& v, const std::filesystem::path& header);
void write_volume(const AnyVolume& v, const std::filesystem::path& header);

std::filesystem::path raw_path_for(const std::filesystem::path& header);

}  // namespace nucseg
