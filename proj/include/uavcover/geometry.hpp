#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <span>
#include <vector>

namespace uavcover {

using Position = Eigen::Vector2d;  // meters, field frame

inline double distance(const Position& a, const Position& b) {
  return (a - b).norm();
}

/// One selectable surveillance resolution. `pixel_value` is the vertical
/// pixel count (720, 1080, ...); `index` is its rank in the ordered set.
struct ResolutionLevel {
  int index = 0;
  int pixel_value = 0;
};

/// Ordered set of selectable resolutions, strictly increasing in pixels.
class ResolutionSet {
 public:
  ResolutionSet() : pixels_{720, 1080, 2160} {}
  explicit ResolutionSet(std::vector<int> pixels);

  int count() const { return static_cast<int>(pixels_.size()); }
  ResolutionLevel level(int index) const;
  int lowest_pixel() const { return pixels_.front(); }
  int highest_pixel() const { return pixels_.back(); }
  const std::vector<int>& pixels() const { return pixels_; }

  bool operator==(const ResolutionSet&) const = default;

 private:
  std::vector<int> pixels_;
};

/// Coverage radius shrinks inversely with resolution: the lowest level gets
/// `base_radius` meters, higher levels base_radius * lowest_pixel / pixels.
double coverage_radius(const ResolutionLevel& level, double base_radius,
                       int lowest_pixel);
double coverage_radius(const ResolutionSet& set, int index, double base_radius);

/// Ground coverage footprint: all points within `radius` of `center`.
struct CoverageDisk {
  Position center{0.0, 0.0};
  double radius = 0.0;  // meters, must be positive
};

/// Square field [0,size]^2 rasterized into `cell`-meter square cells.
/// Areas are measured by counting cells whose center lies inside a region,
/// times cell^2; this makes set identities exact at any cell size.
struct FieldGrid {
  double size = 2400.0;  // meters
  double cell = 5.0;     // meters

  int cells_per_side() const;
};

/// Area of the union of the disks, clipped to the field.
double union_area(std::span<const CoverageDisk> disks, const FieldGrid& grid);

/// Area covered by disk `index` and no other disk, clipped to the field.
double exclusive_area(std::span<const CoverageDisk> disks, int index,
                      const FieldGrid& grid);

/// Union, exclusive-coverage sum, and overlap ratio from a single raster
/// pass. omega = 1 - exclusive_sum / union_area, the fraction of covered
/// ground that is covered more than once. Throws ZeroUnion when no cell is
/// covered. `workspace` is a reusable per-cell counter buffer; it is resized
/// as needed and left zeroed between calls.
struct CoverageStats {
  double union_area = 0.0;
  double exclusive_sum = 0.0;
  double omega = 0.0;
};
CoverageStats coverage_stats(std::span<const CoverageDisk> disks,
                             const FieldGrid& grid,
                             std::vector<std::uint8_t>& workspace);

/// Convenience wrapper around coverage_stats. Throws ZeroUnion.
double overlap_ratio(std::span<const CoverageDisk> disks,
                     const FieldGrid& grid);

}  // namespace uavcover
