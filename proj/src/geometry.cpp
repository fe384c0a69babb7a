#include "uavcover/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "uavcover/errors.hpp"

namespace uavcover {

ResolutionSet::ResolutionSet(std::vector<int> pixels)
    : pixels_(std::move(pixels)) {
  if (pixels_.empty()) {
    throw ConfigError("resolution set must not be empty");
  }
  for (std::size_t i = 0; i < pixels_.size(); ++i) {
    if (pixels_[i] <= 0) {
      throw ConfigError("resolution pixel values must be positive");
    }
    if (i > 0 && pixels_[i] <= pixels_[i - 1]) {
      throw ConfigError("resolution pixel values must be strictly increasing");
    }
  }
}

ResolutionLevel ResolutionSet::level(int index) const {
  if (index < 0 || index >= count()) {
    throw ConfigError("resolution index out of range: " + std::to_string(index));
  }
  return {index, pixels_[static_cast<std::size_t>(index)]};
}

double coverage_radius(const ResolutionLevel& level, double base_radius,
                       int lowest_pixel) {
  if (!(base_radius > 0.0)) {
    throw InvalidRadius("base radius must be positive, got " +
                        std::to_string(base_radius));
  }
  if (level.pixel_value <= 0 || lowest_pixel <= 0) {
    throw InvalidRadius("pixel values must be positive");
  }
  return base_radius * lowest_pixel / level.pixel_value;
}

double coverage_radius(const ResolutionSet& set, int index,
                       double base_radius) {
  return coverage_radius(set.level(index), base_radius, set.lowest_pixel());
}

int FieldGrid::cells_per_side() const {
  if (!(size > 0.0) || !(cell > 0.0)) {
    throw ConfigError("field size and cell size must be positive");
  }
  return static_cast<int>(std::ceil(size / cell));
}

namespace {

void check_radii(std::span<const CoverageDisk> disks) {
  for (const auto& d : disks) {
    if (!(d.radius > 0.0)) {
      throw InvalidRadius("coverage radius must be positive, got " +
                          std::to_string(d.radius));
    }
  }
}

// Visits every raster cell whose center lies in the field and inside the
// disk. The bounding box is padded one cell outward so the exact center
// test, not index rounding, decides membership.
template <typename Visit>
void for_each_disk_cell(const CoverageDisk& disk, const FieldGrid& grid,
                        int n, Visit&& visit) {
  const double c = grid.cell;
  const auto lo_index = [&](double coord) {
    return std::max(0, static_cast<int>(std::floor(coord / c)) - 1);
  };
  const auto hi_index = [&](double coord) {
    return std::min(n - 1, static_cast<int>(std::floor(coord / c)) + 1);
  };
  const int ix_lo = lo_index(disk.center.x() - disk.radius);
  const int ix_hi = hi_index(disk.center.x() + disk.radius);
  const int iy_lo = lo_index(disk.center.y() - disk.radius);
  const int iy_hi = hi_index(disk.center.y() + disk.radius);
  const double r2 = disk.radius * disk.radius;
  for (int iy = iy_lo; iy <= iy_hi; ++iy) {
    const double cy = (iy + 0.5) * c;
    if (cy > grid.size) continue;
    const double dy = cy - disk.center.y();
    const double dy2 = dy * dy;
    for (int ix = ix_lo; ix <= ix_hi; ++ix) {
      const double cx = (ix + 0.5) * c;
      if (cx > grid.size) continue;
      const double dx = cx - disk.center.x();
      if (dx * dx + dy2 <= r2) {
        visit(static_cast<std::size_t>(iy) * static_cast<std::size_t>(n) +
              static_cast<std::size_t>(ix));
      }
    }
  }
}

bool covers_center(const CoverageDisk& disk, double cx, double cy) {
  const double dx = cx - disk.center.x();
  const double dy = cy - disk.center.y();
  return dx * dx + dy * dy <= disk.radius * disk.radius;
}

}  // namespace

double union_area(std::span<const CoverageDisk> disks, const FieldGrid& grid) {
  check_radii(disks);
  const int n = grid.cells_per_side();
  if (disks.empty()) return 0.0;
  std::vector<std::uint8_t> marked(static_cast<std::size_t>(n) * n, 0);
  long long cells = 0;
  for (const auto& disk : disks) {
    for_each_disk_cell(disk, grid, n, [&](std::size_t idx) {
      if (!marked[idx]) {
        marked[idx] = 1;
        ++cells;
      }
    });
  }
  return static_cast<double>(cells) * grid.cell * grid.cell;
}

double exclusive_area(std::span<const CoverageDisk> disks, int index,
                      const FieldGrid& grid) {
  check_radii(disks);
  if (index < 0 || index >= static_cast<int>(disks.size())) {
    throw ConfigError("exclusive_area disk index out of range: " +
                      std::to_string(index));
  }
  const int n = grid.cells_per_side();
  const double c = grid.cell;
  long long cells = 0;
  for_each_disk_cell(disks[static_cast<std::size_t>(index)], grid, n,
                     [&](std::size_t idx) {
                       const auto ix = static_cast<double>(idx % static_cast<std::size_t>(n));
                       const auto iy = static_cast<double>(idx / static_cast<std::size_t>(n));
                       const double cx = (ix + 0.5) * c;
                       const double cy = (iy + 0.5) * c;
                       for (int m = 0; m < static_cast<int>(disks.size()); ++m) {
                         if (m == index) continue;
                         if (covers_center(disks[static_cast<std::size_t>(m)], cx, cy)) return;
                       }
                       ++cells;
                     });
  return static_cast<double>(cells) * c * c;
}

CoverageStats coverage_stats(std::span<const CoverageDisk> disks,
                             const FieldGrid& grid,
                             std::vector<std::uint8_t>& workspace) {
  check_radii(disks);
  const int n = grid.cells_per_side();
  const std::size_t total = static_cast<std::size_t>(n) * n;
  if (workspace.size() < total) workspace.assign(total, 0);
  long long union_cells = 0;
  long long multi_cells = 0;
  for (const auto& disk : disks) {
    for_each_disk_cell(disk, grid, n, [&](std::size_t idx) {
      auto& count = workspace[idx];
      if (count == 0) {
        ++union_cells;
      } else if (count == 1) {
        ++multi_cells;
      }
      if (count < 255) ++count;
    });
  }
  // Leave the workspace zeroed for the next call.
  for (const auto& disk : disks) {
    for_each_disk_cell(disk, grid, n,
                       [&](std::size_t idx) { workspace[idx] = 0; });
  }
  if (union_cells == 0) {
    throw ZeroUnion("no covered cell inside the field");
  }
  const double cell_area = grid.cell * grid.cell;
  CoverageStats stats;
  stats.union_area = static_cast<double>(union_cells) * cell_area;
  stats.exclusive_sum =
      static_cast<double>(union_cells - multi_cells) * cell_area;
  stats.omega = 1.0 - stats.exclusive_sum / stats.union_area;
  return stats;
}

double overlap_ratio(std::span<const CoverageDisk> disks,
                     const FieldGrid& grid) {
  std::vector<std::uint8_t> workspace;
  return coverage_stats(disks, grid, workspace).omega;
}

}  // namespace uavcover
