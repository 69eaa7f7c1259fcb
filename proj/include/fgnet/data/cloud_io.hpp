// Copyright (c) 2026 fgnet contributors
// SPDX-License-Identifier: Apache-2.0
//
// ASCII point-cloud files: PLY (x,y,z[,red,green,blue][,label]) and plain
// xyz text (`x y z [r g b] [label]` per line). RGB maps to [0,1] features.

#ifndef FGNET_DATA_CLOUD_IO_HPP
#define FGNET_DATA_CLOUD_IO_HPP

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "fgnet/core/point_cloud.hpp"

namespace fgnet {

enum class CloudFormat { ply_ascii, xyz_text };

inline CloudFormat format_from_path(const std::string& path) {
  const auto dot = path.rfind('.');
  const std::string ext = dot == std::string::npos ? "" : path.substr(dot + 1);
  if (ext == "ply") return CloudFormat::ply_ascii;
  return CloudFormat::xyz_text;
}

namespace detail {

[[noreturn]] inline void line_error(const std::string& path, int line, const std::string& what) {
  throw std::runtime_error(path + ":" + std::to_string(line) + ": " + what);
}

inline std::string trim_ws(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline PointCloud read_ply(const std::string& path, std::istream& in) {
  std::string line;
  int lineno = 0;
  auto next_line = [&]() -> bool {
    while (std::getline(in, line)) {
      ++lineno;
      return true;
    }
    return false;
  };

  if (!next_line() || line.substr(0, 3) != "ply") line_error(path, lineno, "not a PLY file");

  long vertex_count = -1;
  // column roles in property order: x=0, y=1, z=2, r=3, g=4, b=5, label=6, skip=-1
  std::vector<int> roles;
  bool ascii = false;
  while (next_line()) {
    std::istringstream ss(line);
    std::string tok;
    ss >> tok;
    if (tok == "end_header") break;
    if (tok == "format") {
      std::string fmt;
      ss >> fmt;
      ascii = fmt == "ascii";
      if (!ascii) line_error(path, lineno, "only ascii PLY is supported");
    } else if (tok == "element") {
      std::string what;
      long n;
      ss >> what >> n;
      if (what == "vertex") vertex_count = n;
      else if (n != 0) line_error(path, lineno, "unsupported element '" + what + "'");
    } else if (tok == "property") {
      std::string type, name;
      ss >> type >> name;
      int role = -1;
      if (name == "x") role = 0;
      else if (name == "y") role = 1;
      else if (name == "z") role = 2;
      else if (name == "red") role = 3;
      else if (name == "green") role = 4;
      else if (name == "blue") role = 5;
      else if (name == "label" || name == "class" || name == "scalar_label") role = 6;
      else std::cerr << "warning: " << path << ": skipping unknown property '" << name << "'\n";
      roles.push_back(role);
    }
  }
  if (vertex_count < 0) line_error(path, lineno, "missing vertex element");

  bool has_rgb = false, has_label = false;
  for (int r : roles) {
    if (r >= 3 && r <= 5) has_rgb = true;
    if (r == 6) has_label = true;
  }

  PointCloud cloud;
  cloud.feature_width = has_rgb ? 3 : 0;
  for (long i = 0; i < vertex_count; ++i) {
    if (!next_line()) line_error(path, lineno + 1, "unexpected end of file");
    std::istringstream ss(line);
    double x = 0, y = 0, z = 0, r = 0, g = 0, b = 0;
    long label = 0;
    for (int role : roles) {
      double v;
      if (!(ss >> v)) line_error(path, lineno, "malformed vertex line");
      switch (role) {
        case 0: x = v; break;
        case 1: y = v; break;
        case 2: z = v; break;
        case 3: r = v; break;
        case 4: g = v; break;
        case 5: b = v; break;
        case 6: label = static_cast<long>(v); break;
        default: break;
      }
    }
    cloud.push_point(x, y, z);
    if (has_rgb) {
      cloud.features.push_back(r / 255.0);
      cloud.features.push_back(g / 255.0);
      cloud.features.push_back(b / 255.0);
    }
    if (has_label) cloud.labels.push_back(static_cast<int>(label));
  }
  return cloud;
}

inline PointCloud read_xyz(const std::string& path, std::istream& in) {
  PointCloud cloud;
  std::string line;
  int lineno = 0;
  int columns = -1;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim_ws(line);
    if (t.empty() || t[0] == '#') continue;
    std::istringstream ss(t);
    std::vector<double> vals;
    double v;
    while (ss >> v) vals.push_back(v);
    if (vals.size() < 3 || (columns >= 0 && static_cast<int>(vals.size()) != columns))
      line_error(path, lineno, "malformed line: expected x y z [r g b] [label]");
    if (columns < 0) {
      columns = static_cast<int>(vals.size());
      if (columns != 3 && columns != 4 && columns != 6 && columns != 7)
        line_error(path, lineno, "unsupported column count " + std::to_string(columns));
      cloud.feature_width = columns >= 6 ? 3 : 0;
    }
    cloud.push_point(vals[0], vals[1], vals[2]);
    if (columns >= 6) {
      cloud.features.push_back(vals[3] / 255.0);
      cloud.features.push_back(vals[4] / 255.0);
      cloud.features.push_back(vals[5] / 255.0);
    }
    if (columns == 4) cloud.labels.push_back(static_cast<int>(vals[3]));
    if (columns == 7) cloud.labels.push_back(static_cast<int>(vals[6]));
  }
  return cloud;
}

}  // namespace detail

inline PointCloud read_cloud(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  const CloudFormat fmt = format_from_path(path);
  return fmt == CloudFormat::ply_ascii ? detail::read_ply(path, in)
                                       : detail::read_xyz(path, in);
}

/// Writes coordinates with 17 significant digits so a read round-trips to
/// bit-identical doubles. Feature width 3 is emitted as 0-255 RGB.
inline void write_cloud(const std::string& path, const PointCloud& cloud) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  const CloudFormat fmt = format_from_path(path);
  const bool rgb = cloud.feature_width == 3;
  const bool labels = cloud.has_labels();
  char buf[128];

  auto rgb_of = [&](std::size_t i, int c) {
    int v = static_cast<int>(std::lround(cloud.features[3 * i + c] * 255.0));
    if (v < 0) v = 0;
    if (v > 255) v = 255;
    return v;
  };

  if (fmt == CloudFormat::ply_ascii) {
    out << "ply\nformat ascii 1.0\nelement vertex " << cloud.size() << "\n";
    out << "property double x\nproperty double y\nproperty double z\n";
    if (rgb)
      out << "property uchar red\nproperty uchar green\nproperty uchar blue\n";
    if (labels) out << "property int label\n";
    out << "end_header\n";
  }
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g %.17g %.17g", cloud.coords[3 * i],
                  cloud.coords[3 * i + 1], cloud.coords[3 * i + 2]);
    out << buf;
    if (rgb) out << " " << rgb_of(i, 0) << " " << rgb_of(i, 1) << " " << rgb_of(i, 2);
    if (labels) out << " " << cloud.labels[i];
    out << "\n";
  }
  if (!out) throw std::runtime_error("write failed for " + path);
}

}  // namespace fgnet

#endif  // FGNET_DATA_CLOUD_IO_HPP
