// Copyright 2026 The vsim Authors
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

#ifndef VSIM_IO_H_
#define VSIM_IO_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "vsim/image.h"

namespace vsim {

enum class ImageCodec : std::uint8_t { kPng = 1, kJpeg = 2 };

inline constexpr int kDefaultJpegQuality = 90;

// Sniffs PNG / JPEG signatures. Throws ParseError for anything else.
ImageCodec detect_codec(std::span<const std::uint8_t> bytes);

// Decodes to 8-bit RGB (gray is expanded, alpha dropped). Throws ParseError
// on undecodable data.
Frame decode_image(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> encode_png(const Frame& frame);
std::vector<std::uint8_t> encode_jpeg(const Frame& frame, int quality = kDefaultJpegQuality);
std::vector<std::uint8_t> encode_image(const Frame& frame, ImageCodec codec,
                                       int quality = kDefaultJpegQuality);

// Codec implied by a file extension (.png, .jpg, .jpeg; case-insensitive).
// Throws IoError for other extensions.
ImageCodec codec_for_path(const std::filesystem::path& path);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

// Throws IoError when the file cannot be read, ParseError when it cannot be
// decoded.
Frame read_image(const std::filesystem::path& path);
void write_image(const std::filesystem::path& path, const Frame& frame,
                 int quality = kDefaultJpegQuality);

}  // namespace vsim

#endif  // VSIM_IO_H_
