#pragma once

// Dataset characterization: instance sizes, nearest-neighbor center
// distances and foreground/background intensity KL divergence.

#include <cstdint>
#include <vector>

#include "nucseg/exec.hpp"
#include "nucseg/volume.hpp"

namespace nucseg {

struct Histogram {
  std::vector<double> bin_edges;        // strictly ascending
  std::vector<std::uint64_t> counts;    // counts.size() == bin_edges.size() - 1
  bool normalized = false;
  std::vector<double> density;          // counts / total when normalized
  std::uint64_t total = 0;              // number of samples binned

  // Index of the fullest bin (first on ties).
  std::size_t mode_bin() const;
};

// Bins are [e_i, e_{i+1}) except the last, which is closed. Values outside
// the edges are clamped into the first/last bin so counts always sum to
// values.size().
Histogram make_histogram(const std::vector<double>& values, std::vector<double> edges,
                         bool normalized);

// `bins` equal-width edges spanning [min, max] of `values` (a unit-wide
// span around a single value).
std::vector<double> linear_edges(const std::vector<double>& values, int bins);

struct InstanceSize {
  std::uint32_t id;
  std::uint64_t voxels;
};
std::vector<InstanceSize> instance_sizes(const LabelVolume& labels);

Histogram size_distribution(const LabelVolume& labels, int bins = 50, bool normalized = true);
Histogram size_distribution(const LabelVolume& labels, std::vector<double> edges,
                            bool normalized = true);

struct Centroid {
  std::uint32_t id;
  double z, y, x;  // micrometers
};
// Unweighted voxel centroids in physical coordinates, sorted by id.
std::vector<Centroid> instance_centroids(const LabelVolume& labels);

// Per-instance distance (um) to the nearest other centroid, in centroid order.
std::vector<double> nn_distances(const std::vector<Centroid>& centroids,
                                 Exec exec = Exec::parallel);

Histogram nn_center_distance(const LabelVolume& labels, int bins = 50, bool normalized = true);
Histogram nn_center_distance(const LabelVolume& labels, std::vector<double> edges,
                             bool normalized = true);

struct KlOptions {
  int bins = 256;
  double epsilon = 1e-9;  // added to every bin count before normalization
};

// D_KL(foreground || background) in nats over shared bin edges. uint8 images
// bin over [0, 256); other kinds over [min, max] of the evaluated voxels.
template <class T>
double intensity_kl(const Volume<T>& image, const LabelVolume& labels,
                    const RoiMask* roi = nullptr, const KlOptions& opt = {});
double intensity_kl(const AnyVolume& image, const LabelVolume& labels,
                    const RoiMask* roi = nullptr, const KlOptions& opt = {});

// KL divergence of two count vectors after additive smoothing.
double smoothed_kl(const std::vector<std::uint64_t>& p, const std::vector<std::uint64_t>& q,
                   double epsilon);

}  // namespace nucseg
