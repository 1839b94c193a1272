#include "nucseg/volume.hpp"

namespace nucseg {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::missing_file: return "missing file";
    case ErrorCode::size_mismatch: return "size mismatch";
    case ErrorCode::unknown_elem: return "unknown element kind";
    case ErrorCode::malformed_header: return "malformed header";
    case ErrorCode::unwritable: return "unwritable destination";
    case ErrorCode::invariant_violation: return "invariant violation";
    case ErrorCode::out_of_bounds: return "out of bounds";
    case ErrorCode::shape_mismatch: return "shape mismatch";
    case ErrorCode::non_binary: return "non-binary input";
    case ErrorCode::invalid_argument: return "invalid argument";
    case ErrorCode::infeasible: return "infeasible";
    case ErrorCode::bad_config: return "bad config";
  }
  return "error";
}

const char* to_string(ElemKind kind) {
  switch (kind) {
    case ElemKind::uint8: return "uint8";
    case ElemKind::uint32: return "uint32";
    case ElemKind::float32: return "float32";
  }
  return "?";
}

ElemKind elem_kind_from_string(const std::string& name) {
  if (name == "uint8") return ElemKind::uint8;
  if (name == "uint32") return ElemKind::uint32;
  if (name == "float32") return ElemKind::float32;
  throw Error(ErrorCode::unknown_elem, "'" + name + "'");
}

Mask to_mask(const ProbVolume& binary) {
  require_binary(binary, "mask must contain only 0 and 1");
  Mask out(binary.shape(), binary.voxel_size());
  for (std::size_t i = 0; i < binary.size(); ++i) {
    out[i] = binary[i] != 0.0f ? 1 : 0;
  }
  return out;
}

ProbVolume to_prob(const Mask& mask) {
  ProbVolume out(mask.shape(), mask.voxel_size());
  for (std::size_t i = 0; i < mask.size(); ++i) {
    out[i] = mask[i] != 0 ? 1.0f : 0.0f;
  }
  return out;
}

LabelVolume apply_roi(const LabelVolume& labels, const RoiMask& roi) {
  require_same_shape(labels, roi, "apply_roi: labels and roi differ in shape");
  LabelVolume out = labels;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (roi[i] == 0) out[i] = 0;
  }
  return out;
}

}  // namespace nucseg
