#include "qcwarp/warp.hpp"

#include <algorithm>
#include <string>

#include "qcwarp/error.hpp"
#include "qcwarp/rng.hpp"

namespace qcwarp {

RasterImage warp_image(const RasterImage& image, const DeformationMap& map, bool require_bijective) {
  const auto& mesh = map.mesh();
  if (mesh.width_v() != image.width() || mesh.height_v() != image.height()) {
    throw Error(ErrorKind::InvalidArgument,
                "map grid " + std::to_string(mesh.width_v()) + "x" + std::to_string(mesh.height_v()) +
                    " does not match image " + std::to_string(image.width()) + "x" +
                    std::to_string(image.height()));
  }
  if (require_bijective) {
    auto folds = flipped_faces(map, 10);
    if (!folds.empty()) {
      std::string list;
      for (auto f : folds) list += (list.empty() ? "" : ",") + std::to_string(f);
      throw FoldError(std::move(folds), "map folds over; flipped faces include " + list);
    }
  }
  RasterImage out(image.width(), image.height(), image.channels());
  const auto pos = map.positions();
  for (int r = 0; r < image.height(); ++r) {
    for (int c = 0; c < image.width(); ++c) {
      const Vec2 p = pos[mesh.vertex_index(r, c)];
      for (int ch = 0; ch < image.channels(); ++ch) {
        out.at(r, c, ch) = std::clamp(image.sample(p.x, p.y, ch), 0.0, 1.0);
      }
    }
  }
  return out;
}

RasterImage compose_displacement(const RasterImage& image, const DeformationMap& map,
                                 double noise_sigma, std::uint64_t seed, bool require_bijective) {
  if (!(noise_sigma >= 0.0)) throw Error(ErrorKind::InvalidArgument, "noise sigma must be >= 0");
  RasterImage out = warp_image(image, map, require_bijective);
  if (noise_sigma > 0.0) {
    const CounterRng rng(seed, kNoiseStream);
    auto data = out.data();
    for (std::size_t i = 0; i < data.size(); ++i) {
      data[i] = std::clamp(data[i] + noise_sigma * rng.normal(i), 0.0, 1.0);
    }
  }
  return out;
}

}  // namespace qcwarp
