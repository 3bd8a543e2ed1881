#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "simart/geometry.hpp"

namespace simart {

// Uniform grid of density values over an axis-aligned box. Cell (ix, iy, iz)
// covers origin + [i*h, (i+1)*h) per axis; the value array is laid out with x
// fastest. The value is a density, so the mass of a cell is value * h^d.
struct Raster {
  int d = 2;
  std::array<int, 3> shape{1, 1, 1};
  VecD origin;
  double h = 1.0;
  std::vector<double> v;

  Raster() = default;
  Raster(int dim, std::array<int, 3> cells, const VecD& org, double cell_edge);

  std::size_t index(int ix, int iy = 0, int iz = 0) const {
    return (static_cast<std::size_t>(iz) * shape[1] + static_cast<std::size_t>(iy)) *
               shape[0] +
           static_cast<std::size_t>(ix);
  }
  double& at(int ix, int iy = 0, int iz = 0) { return v[index(ix, iy, iz)]; }
  double at(int ix, int iy = 0, int iz = 0) const { return v[index(ix, iy, iz)]; }

  std::size_t cell_count() const { return v.size(); }
  double cell_volume() const;
  double total_mass() const;
  double max_value() const;
  Box domain() const;
};

// 16-bit binary PGM, values scaled linearly so the maximum maps to 65535.
// Only d == 2 rasters can be encoded this way.
std::string pgm16_bytes(const Raster& r);
void write_pgm16(const Raster& r, const std::string& path);

// Raw export for any dimension: <base>.bin holds the values as little endian
// float64 in storage order, <base>.json describes the grid.
void write_raw(const Raster& r, const std::string& base_path);

}  // namespace simart
