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
#ifndef SELIC_IO_IMAGE_IO_H_
#define SELIC_IO_IMAGE_IO_H_

#include <filesystem>

#include "selic/core/image.h"

namespace selic::io {

// Decodes PNG, JPEG or binary PPM (P6, maxval 255), detected from the file
// signature. Gray and alpha inputs are converted to RGB. kIo when the file
// cannot be read or decoded.
ImagePlane ReadImage(const std::filesystem::path& path);

// 8-bit RGB; PNG unless the extension is .ppm.
void WriteImage(const std::filesystem::path& path, const ImagePlane& image);

// True for extensions ReadImage is expected to handle (.png, .jpg, .jpeg,
// .ppm; case-insensitive).
bool HasImageExtension(const std::filesystem::path& path);

}  // namespace selic::io

#endif  // SELIC_IO_IMAGE_IO_H_
