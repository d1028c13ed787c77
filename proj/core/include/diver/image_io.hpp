#pragma once

#include <string>

#include "diver/image.hpp"

namespace diver::io {

/// Decodes an 8-bit PNG or JPEG; values map to [0,1] by v/255.
ImagePlanar load_image(const std::string& path);

/// Encodes 8-bit PNG or JPEG (by extension); samples are clamped to [0,1]
/// and quantized by round(v*255). PNG output is deterministic.
void save_image(const std::string& path, const ImagePlanar& img);

/// Loads a 16-bit (or 8-bit) grayscale PNG as raw depth samples scaled to
/// [0,1] by v/65535 (v/255 for 8-bit inputs). No range normalization here.
DepthMap load_depth_png(const std::string& path);

/// Writes a 16-bit grayscale PNG from samples clamped to [0,1].
void save_depth_png16(const std::string& path, const DepthMap& depth);

}  // namespace diver::io
