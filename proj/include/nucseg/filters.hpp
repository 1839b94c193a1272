#pragma once

// Separable box-window kernels. Windows are truncated at the volume border.

#include <cstdint>

#include "nucseg/exec.hpp"
#include "nucseg/volume.hpp"

namespace nucseg {

// Running min / max over a (2r+1)^3 box.
template <class T>
Volume<T> box_min(const Volume<T>& v, int radius, Exec exec = Exec::parallel);
template <class T>
Volume<T> box_max(const Volume<T>& v, int radius, Exec exec = Exec::parallel);

// Mean over a (2r+1)^3 box; each axis pass averages the in-bounds samples.
ProbVolume box_blur(const ProbVolume& v, int radius, Exec exec = Exec::parallel);

}  // namespace nucseg
