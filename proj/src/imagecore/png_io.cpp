// Copyright (c) 2026 the asmo authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "asmo/png_io.hpp"

#include <png.h>

#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <fstream>

namespace asmo {

namespace {

struct ReadCursor {
  const std::uint8_t* data;
  std::size_t size;
  std::size_t pos;
};

void read_fn(png_structp png, png_bytep out, png_size_t len) {
  auto* cur = static_cast<ReadCursor*>(png_get_io_ptr(png));
  if (cur->pos + len > cur->size) png_error(png, "unexpected end of stream");
  std::memcpy(out, cur->data + cur->pos, len);
  cur->pos += len;
}

void write_fn(png_structp png, png_bytep data, png_size_t len) {
  auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
  out->insert(out->end(), data, data + len);
}

void flush_fn(png_structp) {}

// Decodes into an interleaved 8-bit buffer with `channels` components per
// pixel (1 = gray, 3 = rgb). No C++ objects with destructors may live
// between setjmp and the png_* calls; the buffers live in the caller.
void decode_common(const std::vector<std::uint8_t>& bytes, int want_channels, int& width,
                   int& height, std::vector<std::uint8_t>& out) {
  if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0)
    throw MalformedFile("not a PNG stream");

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw IoError("png_create_read_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw IoError("png_create_info_struct failed");
  }

  std::string error;
  bool unsupported = false;
  {
    ReadCursor cur{bytes.data(), bytes.size(), 0};
    png_bytep* rows = nullptr;
    if (setjmp(png_jmpbuf(png))) {
      delete[] rows;
      png_destroy_read_struct(&png, &info, nullptr);
      throw MalformedFile("invalid or truncated PNG stream");
    }
    png_set_read_fn(png, &cur, read_fn);
    png_read_info(png, info);

    const int bit_depth = png_get_bit_depth(png, info);
    const int color_type = png_get_color_type(png, info);
    width = static_cast<int>(png_get_image_width(png, info));
    height = static_cast<int>(png_get_image_height(png, info));

    if (bit_depth != 8) {
      error = "bit depth " + std::to_string(bit_depth) + " (only 8-bit supported)";
      unsupported = true;
    } else if (color_type == PNG_COLOR_TYPE_PALETTE) {
      error = "palette PNG (only gray/RGB supported)";
      unsupported = true;
    } else if (want_channels == 1 && color_type != PNG_COLOR_TYPE_GRAY &&
               color_type != PNG_COLOR_TYPE_GRAY_ALPHA) {
      error = "saliency maps must be grayscale PNG";
      unsupported = true;
    }
    if (unsupported) {
      png_destroy_read_struct(&png, &info, nullptr);
      throw UnsupportedFormat(error);
    }

    if (color_type & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
    if (want_channels == 3 && (color_type == PNG_COLOR_TYPE_GRAY ||
                               color_type == PNG_COLOR_TYPE_GRAY_ALPHA))
      png_set_gray_to_rgb(png);
    png_read_update_info(png, info);

    const std::size_t rowbytes = png_get_rowbytes(png, info);
    if (rowbytes != static_cast<std::size_t>(width) * want_channels) {
      png_destroy_read_struct(&png, &info, nullptr);
      throw MalformedFile("unexpected row size after transforms");
    }

    out.resize(static_cast<std::size_t>(width) * height * want_channels);
    rows = new png_bytep[height];
    for (int y = 0; y < height; ++y)
      rows[y] = out.data() + static_cast<std::size_t>(y) * rowbytes;
    png_read_image(png, rows);
    png_read_end(png, nullptr);
    delete[] rows;
  }
  png_destroy_read_struct(&png, &info, nullptr);
}

std::vector<std::uint8_t> encode_common(const std::uint8_t* pixels, int width, int height,
                                        int channels) {
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw IoError("png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw IoError("png_create_info_struct failed");
  }

  std::vector<std::uint8_t> bytes;
  {
    png_bytep* rows = nullptr;
    if (setjmp(png_jmpbuf(png))) {
      delete[] rows;
      png_destroy_write_struct(&png, &info);
      throw IoError("PNG encoding failed");
    }
    png_set_write_fn(png, &bytes, write_fn, flush_fn);
    // Pinned settings keep encoding bit-reproducible.
    png_set_compression_level(png, 6);
    png_set_filter(png, 0, PNG_FILTER_SUB);
    png_set_IHDR(png, info, width, height, 8,
                 channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);

    rows = new png_bytep[height];
    for (int y = 0; y < height; ++y)
      rows[y] = const_cast<png_bytep>(pixels + static_cast<std::size_t>(y) * width * channels);
    png_write_image(png, rows);
    png_write_end(png, nullptr);
    delete[] rows;
  }
  png_destroy_write_struct(&png, &info);
  return bytes;
}

}  // namespace

Image decode_image(const std::vector<std::uint8_t>& bytes) {
  Image img;
  decode_common(bytes, 3, img.width, img.height, img.pixels);
  return img;
}

std::vector<std::uint8_t> encode_image(const Image& img) {
  return encode_common(img.pixels.data(), img.width, img.height, 3);
}

SaliencyMap decode_map(const std::vector<std::uint8_t>& bytes) {
  int w = 0, h = 0;
  std::vector<std::uint8_t> gray;
  decode_common(bytes, 1, w, h, gray);
  SaliencyMap map(w, h);
  for (std::size_t i = 0; i < gray.size(); ++i) map.values[i] = gray[i] / 255.0f;
  return map;
}

std::vector<std::uint8_t> encode_map(const SaliencyMap& map) {
  std::vector<std::uint8_t> gray(map.size());
  for (std::size_t i = 0; i < gray.size(); ++i)
    gray[i] = static_cast<std::uint8_t>(std::lround(map.values[i] * 255.0f));
  return encode_common(gray.data(), map.width, map.height, 1);
}

std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failed: " + path);
  return bytes;
}

void write_file(const std::string& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot create " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed: " + path);
}

Image load_image(const std::string& path) { return decode_image(read_file(path)); }

void save_image(const Image& img, const std::string& path) {
  write_file(path, encode_image(img));
}

SaliencyMap load_map(const std::string& path) { return decode_map(read_file(path)); }

void save_map(const SaliencyMap& map, const std::string& path) {
  write_file(path, encode_map(map));
}

}  // namespace asmo
