#include "simart/raster.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "simart/error.hpp"

namespace simart {

Raster::Raster(int dim, std::array<int, 3> cells, const VecD& org, double cell_edge)
    : d(dim), shape(cells), origin(org), h(cell_edge) {
  require(dim >= 1 && dim <= 3, "Raster: dimension must be 1, 2 or 3");
  require(cell_edge > 0.0, "Raster: cell edge must be positive");
  std::size_t n = 1;
  for (int i = 0; i < 3; ++i) {
    require(shape[static_cast<std::size_t>(i)] >= 1, "Raster: cell counts must be positive");
    if (i >= dim) require(shape[static_cast<std::size_t>(i)] == 1, "Raster: unused axes must have one cell");
    n *= static_cast<std::size_t>(shape[static_cast<std::size_t>(i)]);
  }
  v.assign(n, 0.0);
}

double Raster::cell_volume() const {
  double vol = 1.0;
  for (int i = 0; i < d; ++i) vol *= h;
  return vol;
}

double Raster::total_mass() const {
  double s = 0.0;
  for (double x : v) s += x;
  return s * cell_volume();
}

double Raster::max_value() const {
  double m = 0.0;
  for (double x : v) m = std::max(m, x);
  return m;
}

Box Raster::domain() const {
  Box b;
  b.lo = origin;
  b.hi = origin;
  for (int i = 0; i < d; ++i) b.hi[i] = origin[i] + h * shape[static_cast<std::size_t>(i)];
  b.lo.d = b.hi.d = d;
  return b;
}

std::string pgm16_bytes(const Raster& r) {
  require(r.d == 2, "pgm16_bytes: only 2d rasters");
  char header[64];
  int len = std::snprintf(header, sizeof(header), "P5\n%d %d\n65535\n", r.shape[0], r.shape[1]);
  std::string out(header, static_cast<std::size_t>(len));
  out.reserve(out.size() + r.v.size() * 2);
  double vmax = r.max_value();
  double scale = vmax > 0.0 ? 65535.0 / vmax : 0.0;
  for (int iy = r.shape[1] - 1; iy >= 0; --iy) {
    for (int ix = 0; ix < r.shape[0]; ++ix) {
      double t = r.at(ix, iy) * scale;
      auto q = static_cast<unsigned>(std::lround(std::clamp(t, 0.0, 65535.0)));
      out.push_back(static_cast<char>(q >> 8));
      out.push_back(static_cast<char>(q & 0xff));
    }
  }
  return out;
}

void write_pgm16(const Raster& r, const std::string& path) {
  std::string bytes = pgm16_bytes(r);
  std::ofstream out(path, std::ios::binary);
  if (!out) fail_io("write_pgm16: cannot open " + path);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail_io("write_pgm16: write failed for " + path);
}

void write_raw(const Raster& r, const std::string& base_path) {
  nlohmann::json header;
  header["d"] = r.d;
  header["shape"] = {r.shape[0], r.shape[1], r.shape[2]};
  header["origin"] = {r.origin[0], r.origin[1], r.origin[2]};
  header["cell_edge"] = r.h;
  header["dtype"] = "float64-le";
  header["order"] = "x-fastest";
  header["count"] = r.v.size();
  header["data_file"] = base_path.substr(base_path.find_last_of('/') + 1) + ".bin";

  std::ofstream meta(base_path + ".json");
  if (!meta) fail_io("write_raw: cannot open " + base_path + ".json");
  meta << header.dump(2) << "\n";
  if (!meta) fail_io("write_raw: write failed for " + base_path + ".json");

  std::ofstream bin(base_path + ".bin", std::ios::binary);
  if (!bin) fail_io("write_raw: cannot open " + base_path + ".bin");
  static_assert(sizeof(double) == 8);
  bin.write(reinterpret_cast<const char*>(r.v.data()),
            static_cast<std::streamsize>(r.v.size() * sizeof(double)));
  if (!bin) fail_io("write_raw: write failed for " + base_path + ".bin");
}

}  // namespace simart
