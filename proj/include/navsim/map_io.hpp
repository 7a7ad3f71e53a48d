#pragma once

// Map files: an 8-bit binary portable graymap (P5) holding raw costs, plus a
// plain-text sidecar next to it (same stem, ".meta" extension):
//
//   resolution: 0.1
//   origin_x: 0.0
//   origin_y: 0.0
//   lethal_min: 253
//
// Image row 0 is the top of the map, i.e. grid row height-1.

#include <cctype>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "navsim/errors.hpp"
#include "navsim/grid.hpp"

namespace navsim {

namespace detail {

inline void skip_pnm_space(std::istream& in) {
  for (;;) {
    const int ch = in.peek();
    if (ch == '#') {
      std::string line;
      std::getline(in, line);
    } else if (ch != EOF && std::isspace(ch)) {
      in.get();
    } else {
      return;
    }
  }
}

inline int read_pnm_int(std::istream& in) {
  skip_pnm_space(in);
  int v = -1;
  if (!(in >> v)) throw MapFormatError("malformed graymap header");
  return v;
}

}  // namespace detail

/// Raw 8-bit image, row-major, row 0 at the top.
struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;
};

inline GrayImage read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MapFormatError("cannot open " + path.string());
  std::string magic(2, '\0');
  in.read(magic.data(), 2);
  if (magic != "P5" && magic != "P2") throw MapFormatError(path.string() + ": not a P5/P2 graymap");
  GrayImage img;
  img.width = detail::read_pnm_int(in);
  img.height = detail::read_pnm_int(in);
  const int maxval = detail::read_pnm_int(in);
  if (img.width < 1 || img.height < 1) throw MapFormatError(path.string() + ": bad dimensions");
  if (maxval < 1 || maxval > 255) throw MapFormatError(path.string() + ": only 8-bit graymaps supported");
  img.pixels.resize(static_cast<std::size_t>(img.width) * static_cast<std::size_t>(img.height));
  if (magic == "P5") {
    in.get();  // single whitespace byte after maxval
    in.read(reinterpret_cast<char*>(img.pixels.data()), static_cast<std::streamsize>(img.pixels.size()));
    if (in.gcount() != static_cast<std::streamsize>(img.pixels.size()))
      throw MapFormatError(path.string() + ": truncated pixel data");
  } else {
    for (auto& p : img.pixels) p = static_cast<std::uint8_t>(detail::read_pnm_int(in));
  }
  return img;
}

inline void write_pgm(const std::filesystem::path& path, const GrayImage& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw MapFormatError("cannot write " + path.string());
  out << "P5\n" << img.width << ' ' << img.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.pixels.data()), static_cast<std::streamsize>(img.pixels.size()));
}

inline std::filesystem::path sidecar_path(const std::filesystem::path& map_path) {
  auto p = map_path;
  p.replace_extension(".meta");
  return p;
}

struct MapSidecar {
  double resolution = 0.05;
  double origin_x = 0.0;
  double origin_y = 0.0;
  int lethal_min = kInscribedCost;
};

inline MapSidecar read_sidecar(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MapFormatError("cannot open sidecar " + path.string());
  MapSidecar sc;
  std::string line;
  while (std::getline(in, line)) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    for (auto& ch : line)
      if (ch == ':' || ch == '=') ch = ' ';
    std::istringstream ls(line);
    std::string key;
    if (!(ls >> key)) continue;
    double value = 0.0;
    if (!(ls >> value)) throw MapFormatError(path.string() + ": missing value for " + key);
    if (key == "resolution") sc.resolution = value;
    else if (key == "origin_x") sc.origin_x = value;
    else if (key == "origin_y") sc.origin_y = value;
    else if (key == "lethal_min") sc.lethal_min = static_cast<int>(value);
    else throw MapFormatError(path.string() + ": unknown key " + key);
  }
  if (!(sc.resolution > 0.0)) throw MapFormatError(path.string() + ": resolution must be > 0");
  if (sc.lethal_min < 0 || sc.lethal_min > 255) throw MapFormatError(path.string() + ": lethal_min out of range");
  return sc;
}

inline void write_sidecar(const std::filesystem::path& path, const MapSidecar& sc) {
  std::ofstream out(path);
  if (!out) throw MapFormatError("cannot write " + path.string());
  out.precision(17);
  out << "resolution: " << sc.resolution << "\norigin_x: " << sc.origin_x << "\norigin_y: " << sc.origin_y
      << "\nlethal_min: " << sc.lethal_min << '\n';
}

inline CostMap costmap_from_image(const GrayImage& img, const MapSidecar& sc) {
  GridMeta meta{img.width, img.height, sc.resolution, {sc.origin_x, sc.origin_y}};
  CostMap cm(meta, kUnknownCost, CostMap::lethal_from(sc.lethal_min));
  for (int row = 0; row < img.height; ++row)
    for (int col = 0; col < img.width; ++col)
      cm.set({col, img.height - 1 - row}, img.pixels[static_cast<std::size_t>(row) * img.width + col]);
  return cm;
}

inline GrayImage image_from_costmap(const CostMap& cm) {
  GrayImage img{cm.width(), cm.height(), {}};
  img.pixels.resize(cm.meta().size());
  for (int row = 0; row < img.height; ++row)
    for (int col = 0; col < img.width; ++col)
      img.pixels[static_cast<std::size_t>(row) * img.width + col] = cm[{col, img.height - 1 - row}];
  return img;
}

inline CostMap load_map(const std::filesystem::path& pgm) {
  return costmap_from_image(read_pgm(pgm), read_sidecar(sidecar_path(pgm)));
}

inline void save_map(const std::filesystem::path& pgm, const CostMap& cm) {
  write_pgm(pgm, image_from_costmap(cm));
  int lethal_min = 255;
  for (int v = 254; v >= 0 && cm.is_lethal_value(static_cast<std::uint8_t>(v)); --v) lethal_min = v;
  write_sidecar(sidecar_path(pgm), {cm.meta().resolution, cm.meta().origin.x, cm.meta().origin.y, lethal_min});
}

}  // namespace navsim
