#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <openssl/evp.h>

#include "errors.hpp"
#include "grid.hpp"
#include "vec3.hpp"

namespace platemorph {

inline std::string fmt17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_csv_row(std::ostream& out, const std::vector<double>& values) {
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (k) out << ',';
    out << fmt17(values[k]);
  }
  out << '\n';
}

struct PointArray {
  std::string name;
  const Grid2<double>* values;
};

// Legacy ASCII VTK structured grid with scalar point data.
inline void write_vtk_structured(std::ostream& out, const std::string& title, const Grid2<Vec3d>& points,
                                 const std::vector<PointArray>& arrays) {
  out << "# vtk DataFile Version 3.0\n" << title << "\nASCII\nDATASET STRUCTURED_GRID\n";
  out << "DIMENSIONS " << points.nx << ' ' << points.ny << " 1\n";
  out << "POINTS " << points.data.size() << " double\n";
  for (const auto& p : points.data) out << fmt17(p[0]) << ' ' << fmt17(p[1]) << ' ' << fmt17(p[2]) << '\n';
  if (arrays.empty()) return;
  out << "POINT_DATA " << points.data.size() << '\n';
  for (const auto& a : arrays) {
    out << "SCALARS " << a.name << " double 1\nLOOKUP_TABLE default\n";
    for (double v : a.values->data) out << fmt17(v) << '\n';
  }
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  out << content;
  if (!out) throw Error(ErrorKind::Io, "write failed for " + path.string());
}

inline std::string sha256_hex(const std::string& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr))
    throw Error(ErrorKind::Io, "sha256 failed");
  std::ostringstream s;
  for (unsigned int k = 0; k < len; ++k) s << std::hex << std::setw(2) << std::setfill('0') << int(md[k]);
  return s.str();
}

}  // namespace platemorph
