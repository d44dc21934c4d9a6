/*
 * Copyright 2026 The kvis Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <png.h>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "kvis/grid.hpp"

namespace kvis {

/// 8-bit single-channel raster, row-major from the top-left.
struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;
};

// Trinary intensity convention shared by every grayscale map in this library:
// dark pixels are walls, bright pixels are free space, and the band around
// mid-gray is unknown.
inline constexpr int kWallIntensityBelow = 100;  // pixel < 100  -> wall
inline constexpr int kFreeIntensityAbove = 155;  // pixel > 155  -> free

namespace detail {

inline int next_pnm_token(std::istream& in, const std::string& path) {
  // Whitespace-delimited integer; '#' starts a comment that runs to newline.
  for (;;) {
    int c = in.peek();
    if (c == EOF) {
      throw std::runtime_error(path + ": truncated PGM header");
    }
    if (c == '#') {
      std::string skip;
      std::getline(in, skip);
      continue;
    }
    if (std::isspace(c)) {
      in.get();
      continue;
    }
    break;
  }
  int value = 0;
  if (!(in >> value)) {
    throw std::runtime_error(path + ": malformed PGM header token");
  }
  return value;
}

}  // namespace detail

/// Reads a PGM file in either the ASCII (P2) or binary (P5) encoding.
inline GrayImage read_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error(path + ": cannot open for reading");
  }
  std::string magic;
  in >> magic;
  if (magic != "P2" && magic != "P5") {
    throw std::runtime_error(path + ": not a PGM file (magic '" + magic +
                             "')");
  }
  GrayImage img;
  img.width = detail::next_pnm_token(in, path);
  img.height = detail::next_pnm_token(in, path);
  const int maxval = detail::next_pnm_token(in, path);
  if (img.width < 1 || img.height < 1) {
    throw std::runtime_error(path + ": zero-area image");
  }
  if (maxval < 1 || maxval > 255) {
    throw std::runtime_error(path + ": unsupported PGM maxval " +
                             std::to_string(maxval));
  }
  const std::size_t n =
      static_cast<std::size_t>(img.width) * static_cast<std::size_t>(img.height);
  img.pixels.resize(n);
  if (magic == "P5") {
    in.get();  // single whitespace byte after maxval
    in.read(reinterpret_cast<char*>(img.pixels.data()),
            static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in.gcount()) != n) {
      throw std::runtime_error(path + ": truncated PGM pixel data");
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      const int v = detail::next_pnm_token(in, path);
      if (v < 0 || v > maxval) {
        throw std::runtime_error(path + ": PGM sample out of range");
      }
      img.pixels[i] = static_cast<std::uint8_t>(v);
    }
  }
  return img;
}

/// Writes a PGM file; binary (P5) by default, ASCII (P2) on request.
inline void write_pgm(const GrayImage& img, const std::string& path,
                      bool ascii = false) {
  detail::check_dims(img.width, img.height);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw std::runtime_error(path + ": cannot open for writing");
  }
  out << (ascii ? "P2" : "P5") << "\n"
      << img.width << " " << img.height << "\n255\n";
  if (ascii) {
    for (int y = 0; y < img.height; ++y) {
      for (int x = 0; x < img.width; ++x) {
        out << int(img.pixels[static_cast<std::size_t>(y) * img.width + x]);
        out << (x + 1 == img.width ? '\n' : ' ');
      }
    }
  } else {
    out.write(reinterpret_cast<const char*>(img.pixels.data()),
              static_cast<std::streamsize>(img.pixels.size()));
  }
  if (!out) {
    throw std::runtime_error(path + ": write failed");
  }
}

/// Reads an 8-bit grayscale PNG. Any other color type or depth is rejected.
inline GrayImage read_png_gray(const std::string& path) {
  std::unique_ptr<std::FILE, int (*)(std::FILE*)> fp(
      std::fopen(path.c_str(), "rb"), &std::fclose);
  if (!fp) {
    throw std::runtime_error(path + ": cannot open for reading");
  }
  png_byte header[8] = {};
  if (std::fread(header, 1, 8, fp.get()) != 8 ||
      png_sig_cmp(header, 0, 8) != 0) {
    throw std::runtime_error(path + ": not a PNG file");
  }
  png_structp png =
      png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw std::runtime_error(path + ": libpng allocation failure");
  }
  GrayImage img;
  std::vector<png_bytep> rows;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw std::runtime_error(path + ": PNG decode error");
  }
  png_init_io(png, fp.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);
  if (png_get_color_type(png, info) != PNG_COLOR_TYPE_GRAY ||
      png_get_bit_depth(png, info) != 8) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw std::runtime_error(path + ": PNG is not 8-bit grayscale");
  }
  img.width = static_cast<int>(png_get_image_width(png, info));
  img.height = static_cast<int>(png_get_image_height(png, info));
  if (img.width < 1 || img.height < 1) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw std::runtime_error(path + ": zero-area image");
  }
  img.pixels.resize(static_cast<std::size_t>(img.width) * img.height);
  rows.resize(img.height);
  for (int y = 0; y < img.height; ++y) {
    rows[y] = img.pixels.data() + static_cast<std::size_t>(y) * img.width;
  }
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return img;
}

/// Writes an 8-bit grayscale PNG.
inline void write_png_gray(const GrayImage& img, const std::string& path) {
  detail::check_dims(img.width, img.height);
  std::unique_ptr<std::FILE, int (*)(std::FILE*)> fp(
      std::fopen(path.c_str(), "wb"), &std::fclose);
  if (!fp) {
    throw std::runtime_error(path + ": cannot open for writing");
  }
  png_structp png =
      png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw std::runtime_error(path + ": libpng allocation failure");
  }
  std::vector<png_bytep> rows(img.height);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw std::runtime_error(path + ": PNG encode error");
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(img.width),
               static_cast<png_uint_32>(img.height), 8, PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int y = 0; y < img.height; ++y) {
    rows[y] = const_cast<png_bytep>(img.pixels.data() +
                                    static_cast<std::size_t>(y) * img.width);
  }
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

inline bool has_suffix(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() &&
         s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

/// Reads a grayscale raster, dispatching on the file's magic bytes.
inline GrayImage read_gray(const std::string& path) {
  std::ifstream probe(path, std::ios::binary);
  if (!probe) {
    throw std::runtime_error(path + ": cannot open for reading");
  }
  char magic[2] = {};
  probe.read(magic, 2);
  probe.close();
  if (magic[0] == 'P' && (magic[1] == '2' || magic[1] == '5')) {
    return read_pgm(path);
  }
  return read_png_gray(path);
}

/// Writes a grayscale raster, dispatching on the file extension
/// (.pgm -> binary PGM, .png -> PNG).
inline void write_gray(const GrayImage& img, const std::string& path) {
  if (has_suffix(path, ".pgm")) {
    write_pgm(img, path);
  } else if (has_suffix(path, ".png")) {
    write_png_gray(img, path);
  } else {
    throw std::runtime_error(path + ": unsupported image extension");
  }
}

/// Quantizes a belief map to 8 bits: pixel = round(prob_free * 255), so walls
/// tend to 0, free space to 255, and unknown (0.5) lands on 128.
inline GrayImage belief_to_gray(const BeliefMap& map) {
  GrayImage img;
  img.width = map.width();
  img.height = map.height();
  img.pixels.resize(static_cast<std::size_t>(img.width) * img.height);
  std::size_t i = 0;
  for (double p : map.probs()) {
    img.pixels[i++] = static_cast<std::uint8_t>(std::lround(p * 255.0));
  }
  return img;
}

/// Exports a belief map as an 8-bit grayscale image (.pgm or .png).
inline void export_grayscale(const BeliefMap& map, const std::string& path) {
  write_gray(belief_to_gray(map), path);
}

/// Imports a belief map previously exported with export_grayscale. Pixels
/// within one count of mid-gray decode to exactly 0.5 so that unknown cells
/// survive a round trip through the 8-bit quantization.
inline BeliefMap import_belief(const std::string& path) {
  const GrayImage img = read_gray(path);
  BeliefMap map(img.width, img.height);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      const double v =
          img.pixels[static_cast<std::size_t>(y) * img.width + x];
      if (std::abs(v - 127.5) < 1.0) {
        continue;  // unknown; BeliefMap cells start at 0.5
      }
      map.set({x, y}, v / 255.0, 1.0);
    }
  }
  return map;
}

/// Builds a ground-truth plan from a raster: dark pixels become walls, bright
/// pixels free space. Intermediate (unknown) intensities are treated as walls
/// so that unsurveyed space is never claimed free.
inline Floorplan floorplan_from_image(const GrayImage& img, double resolution) {
  Floorplan plan(img.width, img.height, resolution);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      const int v = img.pixels[static_cast<std::size_t>(y) * img.width + x];
      if (v < kWallIntensityBelow) {
        plan.set_wall({x, y});
      } else if (v <= kFreeIntensityAbove) {
        plan.set_wall({x, y});  // unknown intensity: never claim free
      }
    }
  }
  return plan;
}

/// Loads a floorplan raster (.pgm or .png), wrapping failures with the path.
inline Floorplan load_floorplan(const std::string& path, double resolution) {
  try {
    return floorplan_from_image(read_gray(path), resolution);
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

/// Renders a floorplan as a raster: walls 0, free space 255.
inline GrayImage floorplan_to_gray(const Floorplan& plan) {
  GrayImage img;
  img.width = plan.width();
  img.height = plan.height();
  img.pixels.resize(static_cast<std::size_t>(img.width) * img.height);
  std::size_t i = 0;
  for (std::uint8_t w : plan.walls().cells()) {
    img.pixels[i++] = w ? 0 : 255;
  }
  return img;
}

/// Writes a floorplan raster (format chosen by extension, as in write_gray).
inline void save_floorplan(const Floorplan& plan, const std::string& path) {
  write_gray(floorplan_to_gray(plan), path);
}

}  // namespace kvis
