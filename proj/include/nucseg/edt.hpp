#pragma once

// Exact squared Euclidean distance transform.
//
// Separable lower-envelope-of-parabolas transform (one pass per axis). Each
// zero voxel receives the squared distance to the nearest one voxel; one
// voxels receive 0. If the mask holds no one voxel at all, every voxel is
// +infinity.

#include <vector>

#include "nucseg/exec.hpp"
#include "nucseg/volume.hpp"

namespace nucseg {

// Squared distances in double precision, flat C order. With
// use_anisotropy the metric is micrometers via `voxel_size`, otherwise voxels.
std::vector<double> squared_edt_f64(const Mask& mask, bool use_anisotropy,
                                    Exec exec = Exec::parallel);

Volume<float> squared_edt(const Mask& mask, bool use_anisotropy = false,
                          Exec exec = Exec::parallel);

// Binary float input; throws non_binary otherwise.
Volume<float> squared_edt(const ProbVolume& mask, bool use_anisotropy = false,
                          Exec exec = Exec::parallel);

// 1D transform of sampled function `f` (may contain +inf) under
// d(q) = min_p weight * (q - p)^2 + f(p). Scratch vectors are resized as needed.
void parabola_envelope_1d(std::span<const double> f, double weight, std::span<double> out,
                          std::vector<std::size_t>& sites, std::vector<double>& bounds);

}  // namespace nucseg
