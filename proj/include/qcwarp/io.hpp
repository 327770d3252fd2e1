#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "qcwarp/beltrami.hpp"
#include "qcwarp/image.hpp"
#include "qcwarp/mesh.hpp"

namespace qcwarp::io {

using Bytes = std::vector<std::uint8_t>;

// QCM1: "QCM1", u32 width_v, u32 height_v, then (x, y) float64 pairs per
// vertex in row-major order. All little-endian.
Bytes encode_map(const DeformationMap& map);
DeformationMap decode_map(std::span<const std::uint8_t> bytes);

// QCB1: "QCB1", u32 width_v, u32 height_v of the owning mesh, then (rho, tau)
// float64 pairs per face in canonical order. All little-endian.
Bytes encode_field(const BeltramiField& field);
BeltramiField decode_field(std::span<const std::uint8_t> bytes);

Bytes read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

DeformationMap read_map(const std::filesystem::path& path);
void write_map(const std::filesystem::path& path, const DeformationMap& map);
BeltramiField read_field(const std::filesystem::path& path);
void write_field(const std::filesystem::path& path, const BeltramiField& field);

// Images: PNG (8/16-bit gray, gray+alpha, RGB, RGBA, palette) and binary
// PGM/PPM (P5/P6, maxval up to 65535), detected by content. Samples are
// divided by the type maximum; alpha is dropped. Writing quantises with
// round-half-to-even; the format follows the extension (.pgm/.ppm/.pnm,
// otherwise PNG).
RasterImage decode_image(std::span<const std::uint8_t> bytes);
Bytes encode_png(const RasterImage& image, int bit_depth = 8);
Bytes encode_pnm(const RasterImage& image, int bit_depth = 8);

RasterImage read_image(const std::filesystem::path& path);
void write_image(const std::filesystem::path& path, const RasterImage& image, int bit_depth = 8);

/// Round-half-to-even quantisation of a [0, 1] sample to [0, maxval].
std::uint32_t quantize(double sample, std::uint32_t maxval);

}  // namespace qcwarp::io
