#pragma once

#include <cstdint>

#include "qcwarp/image.hpp"
#include "qcwarp/mesh.hpp"

namespace qcwarp {

/// Backward warp: out(p) = image(map(p)), bilinear with border clamping.
/// The map's vertex grid must match the image's pixel grid. With
/// require_bijective, a map with flipped faces raises FoldError.
RasterImage warp_image(const RasterImage& image, const DeformationMap& map,
                       bool require_bijective = false);

/// warp_image followed by seeded Gaussian noise of standard deviation
/// noise_sigma and clamping to [0, 1].
RasterImage compose_displacement(const RasterImage& image, const DeformationMap& map,
                                 double noise_sigma, std::uint64_t seed,
                                 bool require_bijective = false);

/// RNG stream used for additive sensor noise.
inline constexpr std::uint64_t kNoiseStream = 0x4E4F495345ULL;

}  // namespace qcwarp
