// Copyright (c) the SELIC Project Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#include "selic/io/image_io.h"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <memory>
#include <string>
#include <vector>

// jpeglib.h needs FILE and size_t declared first.
#include <jpeglib.h>

#include "selic/core/error.h"

namespace selic::io {
namespace {

std::vector<uint8_t> ReadBytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  Require(static_cast<bool>(in), ErrorKind::kIo, "cannot open " + path.string());
  return std::vector<uint8_t>(std::istreambuf_iterator<char>(in), {});
}

ImagePlane DecodePng(const std::vector<uint8_t>& bytes, const std::filesystem::path& path) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  Require(png_image_begin_read_from_memory(&image, bytes.data(), bytes.size()) != 0, ErrorKind::kIo,
          "invalid PNG " + path.string() + ": " + image.message);
  image.format = PNG_FORMAT_RGB;
  std::vector<uint8_t> rgb(PNG_IMAGE_SIZE(image));
  const bool ok = png_image_finish_read(&image, nullptr, rgb.data(), 0, nullptr) != 0;
  const std::string message = image.message;
  png_image_free(&image);
  Require(ok, ErrorKind::kIo, "cannot decode PNG " + path.string() + ": " + message);
  return ImagePlane::FromInterleaved8(static_cast<int>(image.height), static_cast<int>(image.width), rgb);
}

struct JpegErrorManager {
  jpeg_error_mgr base;
  std::jmp_buf jump;
  char message[JMSG_LENGTH_MAX];
};

void OnJpegError(j_common_ptr info) {
  auto* err = reinterpret_cast<JpegErrorManager*>(info->err);
  (*info->err->format_message)(info, err->message);
  std::longjmp(err->jump, 1);
}

// Decodes into `rgb`; returns false with `message` set on failure. Kept free
// of C++ objects with destructors because of longjmp.
bool DecodeJpegRaw(const std::vector<uint8_t>& bytes, std::vector<uint8_t>& rgb, int& height, int& width,
                   std::string& message) {
  jpeg_decompress_struct info;
  JpegErrorManager err;
  info.err = jpeg_std_error(&err.base);
  err.base.error_exit = OnJpegError;
  if (setjmp(err.jump)) {
    message = err.message;
    jpeg_destroy_decompress(&info);
    return false;
  }
  jpeg_create_decompress(&info);
  jpeg_mem_src(&info, bytes.data(), static_cast<unsigned long>(bytes.size()));
  jpeg_read_header(&info, TRUE);
  info.out_color_space = JCS_RGB;
  jpeg_start_decompress(&info);
  height = static_cast<int>(info.output_height);
  width = static_cast<int>(info.output_width);
  rgb.resize(static_cast<size_t>(height) * width * 3);
  while (info.output_scanline < info.output_height) {
    JSAMPROW row = rgb.data() + static_cast<size_t>(info.output_scanline) * width * 3;
    jpeg_read_scanlines(&info, &row, 1);
  }
  jpeg_finish_decompress(&info);
  jpeg_destroy_decompress(&info);
  return true;
}

ImagePlane DecodeJpeg(const std::vector<uint8_t>& bytes, const std::filesystem::path& path) {
  std::vector<uint8_t> rgb;
  int height = 0;
  int width = 0;
  std::string message;
  Require(DecodeJpegRaw(bytes, rgb, height, width, message), ErrorKind::kIo,
          "cannot decode JPEG " + path.string() + ": " + message);
  return ImagePlane::FromInterleaved8(height, width, rgb);
}

ImagePlane DecodePpm(const std::vector<uint8_t>& bytes, const std::filesystem::path& path) {
  size_t pos = 2;
  auto next_int = [&]() -> long {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(bytes[pos])) {
        ++pos;
      } else {
        break;
      }
    }
    long v = 0;
    const size_t start = pos;
    while (pos < bytes.size() && std::isdigit(bytes[pos]) && v < (1l << 24)) v = v * 10 + (bytes[pos++] - '0');
    Require(pos > start, ErrorKind::kIo, "malformed PPM header in " + path.string());
    return v;
  };
  const long width = next_int();
  const long height = next_int();
  const long maxval = next_int();
  Require(maxval == 255, ErrorKind::kIo, "only 8-bit PPM is supported: " + path.string());
  Require(width > 0 && height > 0 && width < (1l << 16) && height < (1l << 16), ErrorKind::kIo,
          "PPM dimensions out of range in " + path.string());
  ++pos;  // single whitespace byte before the raster
  const size_t need = static_cast<size_t>(width) * height * 3;
  Require(pos <= bytes.size() && bytes.size() - pos >= need, ErrorKind::kIo, "truncated PPM " + path.string());
  return ImagePlane::FromInterleaved8(static_cast<int>(height), static_cast<int>(width),
                                      std::span<const uint8_t>(bytes.data() + pos, need));
}

std::string LowerExtension(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext;
}

}  // namespace

ImagePlane ReadImage(const std::filesystem::path& path) {
  const std::vector<uint8_t> bytes = ReadBytes(path);
  static constexpr uint8_t kPng[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  if (bytes.size() >= 8 && std::memcmp(bytes.data(), kPng, 8) == 0) return DecodePng(bytes, path);
  if (bytes.size() >= 3 && bytes[0] == 0xff && bytes[1] == 0xd8 && bytes[2] == 0xff) return DecodeJpeg(bytes, path);
  if (bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] == '6') return DecodePpm(bytes, path);
  Fail(ErrorKind::kIo, "unrecognized image format: " + path.string());
}

void WriteImage(const std::filesystem::path& path, const ImagePlane& image) {
  Require(!image.empty(), ErrorKind::kInvalidInput, "cannot write an empty image");
  const std::vector<uint8_t> rgb = image.ToInterleaved8();
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  if (LowerExtension(path) == ".ppm") {
    std::ofstream out(path, std::ios::binary);
    Require(static_cast<bool>(out), ErrorKind::kIo, "cannot write " + path.string());
    out << "P6\n" << image.width() << ' ' << image.height() << "\n255\n";
    out.write(reinterpret_cast<const char*>(rgb.data()), static_cast<std::streamsize>(rgb.size()));
    Require(static_cast<bool>(out), ErrorKind::kIo, "failed writing " + path.string());
    return;
  }
  png_image png;
  std::memset(&png, 0, sizeof(png));
  png.version = PNG_IMAGE_VERSION;
  png.width = static_cast<png_uint_32>(image.width());
  png.height = static_cast<png_uint_32>(image.height());
  png.format = PNG_FORMAT_RGB;
  const bool ok = png_image_write_to_file(&png, path.c_str(), 0, rgb.data(), 0, nullptr) != 0;
  const std::string message = png.message;
  png_image_free(&png);
  Require(ok, ErrorKind::kIo, "cannot write PNG " + path.string() + ": " + message);
}

bool HasImageExtension(const std::filesystem::path& path) {
  const std::string ext = LowerExtension(path);
  return ext == ".png" || ext == ".jpg" || ext == ".jpeg" || ext == ".ppm";
}

}  // namespace selic::io
