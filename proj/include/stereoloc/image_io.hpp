#pragma once

#include <string>

#include "stereoloc/image.hpp"

namespace stereoloc {

/// Reads a PGM image (binary P5 with 8- or 16-bit samples, or ASCII P2) and
/// promotes intensities to float. 16-bit binary samples are big-endian per
/// the Netpbm convention.
GrayImage readPgm(const std::string& path);

/// Writes an 8-bit binary (P5) PGM. Values are clamped to [0, 255] and
/// rounded.
void writePgm(const std::string& path, const GrayImage& image);

/// Reads a single-channel PFM raster. Negative samples decode to the invalid
/// marker.
Image<float> readPfm(const std::string& path);

/// Writes a single-channel little-endian PFM (scale -1.0, bottom-up rows).
/// Invalid pixels are stored as -1.0.
void writePfm(const std::string& path, const Image<float>& image);

/// 8-bit visualization of a float raster: valid pixels map linearly onto
/// [1, 255] over the observed valid range, invalid pixels to 0.
GrayImage visualize(const Image<float>& image);

}  // namespace stereoloc
