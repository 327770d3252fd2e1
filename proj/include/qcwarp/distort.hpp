#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "qcwarp/image.hpp"
#include "qcwarp/mesh.hpp"

namespace qcwarp {

enum class DistortionKind { Affine, Elastic, Combined, Ripple, OceanLike, AirLike };

std::string_view to_string(DistortionKind kind) noexcept;
DistortionKind parse_distortion_kind(std::string_view name);

/// Parametric synthetic distortion plus additive noise level.
struct DistortionSpec {
  struct Parameters {
    double rotation = 0.0;    // radians, about the image centre
    double scale = 1.0;
    double tx = 0.0;          // px
    double ty = 0.0;          // px
    double amplitude = 0.0;   // elastic max displacement, px
    double smoothness = 8.0;  // elastic Gaussian sigma, px
    double wave_amplitude = 0.0;
    double wave_frequency = 1.0;  // cycles across the image
    double wave_phase = 0.0;
    double strength = 0.0;  // air-like max displacement, px
  };

  DistortionKind kind = DistortionKind::Affine;
  Parameters parameters;
  std::uint64_t seed = 0;
  double noise_sigma = 0.0;

  /// Throws invalid-argument when a parameter is out of range.
  void validate() const;
};

/// Air-turbulence stand-in presets: "weak" (1 px) and "strong" (2.5 px).
DistortionSpec air_preset(std::string_view name, std::uint64_t seed = 0);

/// Deterministic vertex positions of the distortion on `mesh`.
DeformationMap generate_field(const DistortionSpec& spec, const MeshPtr& mesh);

struct DistortedPair {
  RasterImage distorted;
  DeformationMap truth;
};

/// distorted = image o field + noise, with the generating field as ground truth.
DistortedPair make_pair(const RasterImage& image, const DistortionSpec& spec);

/// Seeded band-limited texture in [0.1, 0.9]: a test pattern with
/// gradients everywhere, for synthetic pairs.
RasterImage synthetic_texture(int width, int height, int channels, std::uint64_t seed);

/// JSON with members kind, parameters{...}, seed, noise_sigma.
std::string to_json_string(const DistortionSpec& spec);
DistortionSpec parse_distortion_spec(std::string_view json_text);
/// A JSON array of specs, or a single spec object.
std::vector<DistortionSpec> parse_manifest(std::string_view json_text);

}  // namespace qcwarp
