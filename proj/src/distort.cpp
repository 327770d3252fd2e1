#include "qcwarp/distort.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "gaussian.hpp"
#include "json.hpp"
#include "qcwarp/error.hpp"
#include "qcwarp/rng.hpp"
#include "qcwarp/warp.hpp"

namespace qcwarp {

namespace {

constexpr std::uint64_t kElasticStream = 0x454C4153ULL;  // "ELAS"
constexpr std::uint64_t kOceanStream = 0x4F43454EULL;    // "OCEN"
constexpr std::uint64_t kAirStream = 0x41495200ULL;      // "AIR"
constexpr std::uint64_t kTextureStream = 0x54455854ULL;  // "TEXT"

constexpr std::array<std::pair<DistortionKind, std::string_view>, 6> kKindNames{{
    {DistortionKind::Affine, "affine"},
    {DistortionKind::Elastic, "elastic"},
    {DistortionKind::Combined, "combined"},
    {DistortionKind::Ripple, "ripple"},
    {DistortionKind::OceanLike, "ocean-like"},
    {DistortionKind::AirLike, "air-like"},
}};

// Displacement field on the vertex grid, two row-major planes.
struct Displacement {
  std::vector<double> dx;
  std::vector<double> dy;
};

// Seeded white noise, Gaussian-blurred, rescaled so max |d| equals `peak`.
Displacement smooth_noise(const TriMesh& mesh, const CounterRng& rng, std::uint64_t offset,
                          double sigma, double peak) {
  const std::size_t n = mesh.vertex_count();
  Displacement d{std::vector<double>(n), std::vector<double>(n)};
  for (std::size_t v = 0; v < n; ++v) {
    d.dx[v] = rng.normal(offset + 2 * v);
    d.dy[v] = rng.normal(offset + 2 * v + 1);
  }
  detail::gaussian_blur(d.dx, mesh.width_v(), mesh.height_v(), sigma);
  detail::gaussian_blur(d.dy, mesh.width_v(), mesh.height_v(), sigma);
  double max_mag = 0.0;
  for (std::size_t v = 0; v < n; ++v) max_mag = std::max(max_mag, std::hypot(d.dx[v], d.dy[v]));
  const double s = max_mag > 0.0 ? peak / max_mag : 0.0;
  for (std::size_t v = 0; v < n; ++v) {
    d.dx[v] *= s;
    d.dy[v] *= s;
  }
  return d;
}

Vec2 affine_apply(const DistortionSpec::Parameters& p, Vec2 centre, Vec2 q) {
  const double c = std::cos(p.rotation);
  const double s = std::sin(p.rotation);
  const Vec2 d = q - centre;
  return {centre.x + p.scale * (c * d.x - s * d.y) + p.tx,
          centre.y + p.scale * (s * d.x + c * d.y) + p.ty};
}

void require(bool ok, const char* what) {
  if (!ok) throw Error(ErrorKind::InvalidArgument, std::string("distortion spec: ") + what);
}

}  // namespace

std::string_view to_string(DistortionKind kind) noexcept {
  for (const auto& [k, name] : kKindNames) {
    if (k == kind) return name;
  }
  return "unknown";
}

DistortionKind parse_distortion_kind(std::string_view name) {
  for (const auto& [k, n] : kKindNames) {
    if (n == name) return k;
  }
  throw Error(ErrorKind::InvalidArgument, "unknown distortion kind '" + std::string(name) + "'");
}

void DistortionSpec::validate() const {
  const auto& p = parameters;
  for (double v : {p.rotation, p.scale, p.tx, p.ty, p.amplitude, p.smoothness, p.wave_amplitude,
                   p.wave_frequency, p.wave_phase, p.strength, noise_sigma}) {
    require(std::isfinite(v), "parameters must be finite");
  }
  require(p.scale > 0.0, "scale must be positive");
  require(p.smoothness > 0.0, "elastic smoothness must be positive");
  require(p.amplitude >= 0.0, "amplitude must be non-negative");
  require(p.wave_amplitude >= 0.0, "wave amplitude must be non-negative");
  require(p.wave_frequency >= 0.0, "wave frequency must be non-negative");
  require(p.strength >= 0.0, "turbulence strength must be non-negative");
  require(noise_sigma >= 0.0, "noise sigma must be non-negative");
}

DistortionSpec air_preset(std::string_view name, std::uint64_t seed) {
  DistortionSpec spec;
  spec.kind = DistortionKind::AirLike;
  spec.seed = seed;
  if (name == "weak") {
    spec.parameters.strength = 1.0;
  } else if (name == "strong") {
    spec.parameters.strength = 2.5;
  } else {
    throw Error(ErrorKind::InvalidArgument, "unknown turbulence preset '" + std::string(name) + "'");
  }
  return spec;
}

DeformationMap generate_field(const DistortionSpec& spec, const MeshPtr& mesh) {
  spec.validate();
  const auto& p = spec.parameters;
  const auto ref = mesh->vertices();
  const std::size_t n = mesh->vertex_count();
  const Vec2 centre{0.5 * (mesh->width_v() - 1), 0.5 * (mesh->height_v() - 1)};
  std::vector<Vec2> pos(ref.begin(), ref.end());

  switch (spec.kind) {
    case DistortionKind::Affine:
      for (std::size_t v = 0; v < n; ++v) pos[v] = affine_apply(p, centre, ref[v]);
      break;
    case DistortionKind::Elastic:
    case DistortionKind::Combined: {
      if (p.amplitude > 0.0) {
        const auto d = smooth_noise(*mesh, CounterRng(spec.seed, kElasticStream), 0, p.smoothness,
                                    p.amplitude);
        for (std::size_t v = 0; v < n; ++v) pos[v] = ref[v] + Vec2{d.dx[v], d.dy[v]};
      }
      if (spec.kind == DistortionKind::Combined) {
        for (auto& q : pos) q = affine_apply(p, centre, q);
      }
      break;
    }
    case DistortionKind::Ripple: {
      const double w = mesh->width_v();
      const double h = mesh->height_v();
      const double two_pi_f = 2.0 * std::numbers::pi * p.wave_frequency;
      for (std::size_t v = 0; v < n; ++v) {
        const Vec2 q = ref[v];
        pos[v] = q + Vec2{p.wave_amplitude * std::sin(two_pi_f * q.y / h + p.wave_phase),
                          p.wave_amplitude * std::sin(two_pi_f * q.x / w + p.wave_phase)};
      }
      break;
    }
    case DistortionKind::OceanLike: {
      // Superposed travelling waves; each displaces along its own direction.
      constexpr int kWaves = 4;
      const CounterRng rng(spec.seed, kOceanStream);
      const double extent = std::max(mesh->width_v(), mesh->height_v());
      std::array<Vec2, kWaves> dir{};
      std::array<double, kWaves> freq{};
      std::array<double, kWaves> phase{};
      for (int j = 0; j < kWaves; ++j) {
        const double theta = 2.0 * std::numbers::pi * rng.uniform(3 * j);
        dir[j] = {std::cos(theta), std::sin(theta)};
        freq[j] = p.wave_frequency * (0.5 + rng.uniform(3 * j + 1));
        phase[j] = p.wave_phase + 2.0 * std::numbers::pi * rng.uniform(3 * j + 2);
      }
      for (std::size_t v = 0; v < n; ++v) {
        Vec2 d{};
        for (int j = 0; j < kWaves; ++j) {
          const double t = 2.0 * std::numbers::pi * freq[j] *
                               (dir[j].x * ref[v].x + dir[j].y * ref[v].y) / extent +
                           phase[j];
          d = d + (p.wave_amplitude / kWaves * std::sin(t)) * dir[j];
        }
        pos[v] = ref[v] + d;
      }
      break;
    }
    case DistortionKind::AirLike: {
      if (p.strength > 0.0) {
        const CounterRng rng(spec.seed, kAirStream);
        Displacement total{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
        constexpr std::array<double, 4> kScales{2.0, 4.0, 8.0, 16.0};
        for (std::size_t s = 0; s < kScales.size(); ++s) {
          // larger scales carry more energy
          const auto d = smooth_noise(*mesh, rng, s * 2 * n, kScales[s], kScales[s] / kScales.back());
          for (std::size_t v = 0; v < n; ++v) {
            total.dx[v] += d.dx[v];
            total.dy[v] += d.dy[v];
          }
        }
        double max_mag = 0.0;
        for (std::size_t v = 0; v < n; ++v) max_mag = std::max(max_mag, std::hypot(total.dx[v], total.dy[v]));
        const double k = max_mag > 0.0 ? p.strength / max_mag : 0.0;
        for (std::size_t v = 0; v < n; ++v) pos[v] = ref[v] + Vec2{k * total.dx[v], k * total.dy[v]};
      }
      break;
    }
  }
  return DeformationMap(mesh, std::move(pos));
}

DistortedPair make_pair(const RasterImage& image, const DistortionSpec& spec) {
  const auto mesh = build_grid_mesh(image.width(), image.height());
  auto truth = generate_field(spec, mesh);
  auto distorted = compose_displacement(image, truth, spec.noise_sigma, spec.seed);
  return {std::move(distorted), std::move(truth)};
}

RasterImage synthetic_texture(int width, int height, int channels, std::uint64_t seed) {
  RasterImage out(width, height, channels);
  const std::size_t n = static_cast<std::size_t>(width) * height;
  const CounterRng rng(seed, kTextureStream);
  for (int ch = 0; ch < channels; ++ch) {
    std::vector<double> acc(n, 0.0);
    constexpr std::array<double, 3> kSigmas{1.5, 3.0, 6.0};
    for (std::size_t j = 0; j < kSigmas.size(); ++j) {
      const double sigma = kSigmas[j];
      std::vector<double> plane(n);
      const std::uint64_t offset = (static_cast<std::uint64_t>(ch) * kSigmas.size() + j) * n;
      for (std::size_t i = 0; i < n; ++i) plane[i] = rng.normal(offset + i);
      detail::gaussian_blur(plane, width, height, sigma);
      for (std::size_t i = 0; i < n; ++i) acc[i] += sigma * plane[i];
    }
    const auto [lo, hi] = std::minmax_element(acc.begin(), acc.end());
    const double span = *hi > *lo ? *hi - *lo : 1.0;
    const double base = *lo;
    for (int r = 0; r < height; ++r) {
      for (int c = 0; c < width; ++c) {
        out.at(r, c, ch) = 0.1 + 0.8 * (acc[static_cast<std::size_t>(r) * width + c] - base) / span;
      }
    }
  }
  return out;
}

namespace {

nlohmann::json spec_to_json(const DistortionSpec& spec) {
  const auto& p = spec.parameters;
  return {
      {"kind", std::string(to_string(spec.kind))},
      {"parameters",
       {{"rotation", p.rotation},
        {"scale", p.scale},
        {"tx", p.tx},
        {"ty", p.ty},
        {"amplitude", p.amplitude},
        {"smoothness", p.smoothness},
        {"wave_amplitude", p.wave_amplitude},
        {"wave_frequency", p.wave_frequency},
        {"wave_phase", p.wave_phase},
        {"strength", p.strength}}},
      {"seed", spec.seed},
      {"noise_sigma", spec.noise_sigma},
  };
}

DistortionSpec spec_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorKind::InvalidArgument, "distortion spec must be a JSON object");
  DistortionSpec spec;
  try {
    if (j.contains("preset")) {
      spec = air_preset(j.at("preset").get<std::string>());
    }
    if (j.contains("kind")) spec.kind = parse_distortion_kind(j.at("kind").get<std::string>());
    spec.seed = j.value("seed", std::uint64_t{0});
    spec.noise_sigma = j.value("noise_sigma", 0.0);
    if (j.contains("parameters")) {
      const auto& jp = j.at("parameters");
      if (!jp.is_object()) throw Error(ErrorKind::InvalidArgument, "'parameters' must be an object");
      auto& p = spec.parameters;
      const std::pair<const char*, double*> fields[] = {
          {"rotation", &p.rotation},         {"scale", &p.scale},
          {"tx", &p.tx},                     {"ty", &p.ty},
          {"amplitude", &p.amplitude},       {"smoothness", &p.smoothness},
          {"wave_amplitude", &p.wave_amplitude}, {"wave_frequency", &p.wave_frequency},
          {"wave_phase", &p.wave_phase},     {"strength", &p.strength},
      };
      for (const auto& [key, value] : jp.items()) {
        const auto* hit = std::find_if(std::begin(fields), std::end(fields),
                                       [&](const auto& f) { return key == f.first; });
        if (hit == std::end(fields)) {
          throw Error(ErrorKind::InvalidArgument, "unknown distortion parameter '" + key + "'");
        }
        *hit->second = value.get<double>();
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::InvalidArgument, std::string("distortion spec: ") + e.what());
  }
  spec.validate();
  return spec;
}

nlohmann::json parse_json(std::string_view text) {
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::InvalidArgument, std::string("malformed JSON: ") + e.what());
  }
}

}  // namespace

std::string to_json_string(const DistortionSpec& spec) { return spec_to_json(spec).dump(2); }

DistortionSpec parse_distortion_spec(std::string_view json_text) {
  return spec_from_json(parse_json(json_text));
}

std::vector<DistortionSpec> parse_manifest(std::string_view json_text) {
  const auto j = parse_json(json_text);
  std::vector<DistortionSpec> out;
  if (j.is_array()) {
    for (const auto& item : j) out.push_back(spec_from_json(item));
  } else {
    out.push_back(spec_from_json(j));
  }
  return out;
}

}  // namespace qcwarp
