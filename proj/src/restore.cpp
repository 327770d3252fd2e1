#include "qcwarp/restore.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "gaussian.hpp"
#include "json.hpp"
#include "qcwarp/error.hpp"
#include "qcwarp/metrics.hpp"
#include "qcwarp/warp.hpp"

namespace qcwarp {

void RestoreConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw Error(ErrorKind::InvalidArgument, std::string("restore config: ") + what);
  };
  require(weight_est >= 0.0, "weight_est must be >= 0");
  require(weight_bsnet >= 0.0, "weight_bsnet must be >= 0");
  require(levels >= 1, "levels must be >= 1");
  require(iterations >= 1, "iterations must be >= 1");
  require(step > 0.0 && std::isfinite(step), "step must be > 0");
  require(mu_sigma >= 0.0, "mu_sigma must be >= 0");
  require(margin > 0.0 && margin < 1.0, "margin must lie in (0, 1)");
  require(!fourier_k || *fourier_k >= 1, "fourier_k must be >= 1");
  require(max_halvings >= 0, "max_halvings must be >= 0");
  require(update_sigma >= 0.0, "update_sigma must be >= 0");
}

double estimation_loss(const RasterImage& distorted, const RasterImage& reference,
                       const DeformationMap& map) {
  return mse(warp_image(distorted, map), reference);
}

namespace {

// Central-difference gradients of every channel, one-sided at the border.
struct GradientImages {
  RasterImage gx;
  RasterImage gy;
};

GradientImages gradients(const RasterImage& img) {
  GradientImages g{RasterImage(img.width(), img.height(), img.channels()),
                   RasterImage(img.width(), img.height(), img.channels())};
  const int w = img.width();
  const int h = img.height();
  for (int r = 0; r < h; ++r) {
    const int r0 = std::max(r - 1, 0);
    const int r1 = std::min(r + 1, h - 1);
    for (int c = 0; c < w; ++c) {
      const int c0 = std::max(c - 1, 0);
      const int c1 = std::min(c + 1, w - 1);
      for (int ch = 0; ch < img.channels(); ++ch) {
        g.gx.at(r, c, ch) = (img.at(r, c1, ch) - img.at(r, c0, ch)) / std::max(c1 - c0, 1);
        g.gy.at(r, c, ch) = (img.at(r1, c, ch) - img.at(r0, c, ch)) / std::max(r1 - r0, 1);
      }
    }
  }
  return g;
}

struct Level {
  RasterImage distorted;
  RasterImage reference;
  GradientImages grad;
  MeshPtr mesh;
};

struct Projection {
  DeformationMap map;
  BeltramiField field;
  double residual;
};

// Scale entries above 1 - margin back onto that circle, keeping phase.
BeltramiField clamp_magnitude(const BeltramiField& field, double margin) {
  std::vector<Complex> out(field.values().begin(), field.values().end());
  for (auto& mu : out) {
    const double r = std::abs(mu);
    if (r > 1.0 - margin) mu *= (1.0 - margin) / r;
  }
  return BeltramiField(field.mesh_ptr(), std::move(out));
}

// Beltrami projection: mu(f) -> smooth -> squash -> (truncate) -> LBS.
// Returns nothing when the trial map is degenerate or the result folds.
std::optional<Projection> project(const DeformationMap& trial, const RestoreConfig& cfg,
                                  double mu_sigma) {
  std::optional<BeltramiField> mu;
  try {
    mu = compute_beltrami(trial);
  } catch (const DegenerateMapError&) {
    return std::nullopt;
  }
  auto field = squash_activation(smooth_field(*mu, mu_sigma), cfg.margin);
  if (cfg.fourier_k) {
    const auto& m = field.mesh();
    const int k = std::min(*cfg.fourier_k, std::min(m.cells_x(), m.cells_y()));
    field = clamp_magnitude(fourier_truncate(field, k), cfg.margin);
  }
  const auto& mesh = trial.mesh_ptr();
  const auto system = assemble(mesh, field, BoundaryCondition::identity_boundary(*mesh));
  auto map = solve(system, trial);
  if (face_orientation_count(map).flipped != 0) return std::nullopt;
  const double residual = residual_loss(system, map);
  return Projection{std::move(map), std::move(field), residual};
}

// Demons-style Gauss-Newton direction per vertex, |d| <= 0.5 px before
// smoothing; boundary vertices do not move.
std::vector<Vec2> intensity_step(const Level& lv, const DeformationMap& map, double sigma) {
  const auto& mesh = *lv.mesh;
  const int w = mesh.width_v();
  const int h = mesh.height_v();
  const std::size_t n = mesh.vertex_count();
  const auto pos = map.positions();
  std::vector<double> dx(n, 0.0);
  std::vector<double> dy(n, 0.0);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const auto v = mesh.vertex_index(r, c);
      const Vec2 q = pos[v];
      double num_x = 0.0;
      double num_y = 0.0;
      double den = 1e-12;
      for (int ch = 0; ch < lv.distorted.channels(); ++ch) {
        const double res = lv.distorted.sample(q.x, q.y, ch) - lv.reference.at(r, c, ch);
        const double gx = lv.grad.gx.sample(q.x, q.y, ch);
        const double gy = lv.grad.gy.sample(q.x, q.y, ch);
        num_x += res * gx;
        num_y += res * gy;
        den += gx * gx + gy * gy + res * res;
      }
      dx[v] = -num_x / den;
      dy[v] = -num_y / den;
    }
  }
  detail::gaussian_blur(dx, w, h, sigma);
  detail::gaussian_blur(dy, w, h, sigma);
  std::vector<Vec2> d(n);
  for (std::uint32_t v = 0; v < n; ++v) {
    if (!mesh.is_boundary(v)) d[v] = {dx[v], dy[v]};
  }
  return d;
}

// Carry a coarse-level map to the next finer level: displacement is
// interpolated at the matching coarse location and doubled.
DeformationMap upsample(const DeformationMap& coarse, const MeshPtr& fine) {
  const auto ref = fine->vertices();
  std::vector<Vec2> pos(ref.begin(), ref.end());
  for (std::uint32_t v = 0; v < pos.size(); ++v) {
    if (fine->is_boundary(v)) continue;
    const Vec2 q{(ref[v].x - 0.5) / 2.0, (ref[v].y - 0.5) / 2.0};
    const Vec2 d = coarse.evaluate(q) - q;
    pos[v] = ref[v] + 2.0 * d;
  }
  return DeformationMap(fine, std::move(pos));
}

}  // namespace

RestoreResult restore_pair(const RasterImage& distorted, const RasterImage& reference,
                           const RestoreConfig& config) {
  config.validate();
  if (!distorted.same_shape(reference)) {
    throw Error(ErrorKind::InvalidArgument, "distorted and reference images differ in shape");
  }
  if (distorted.width() < 2 || distorted.height() < 2) {
    throw Error(ErrorKind::InvalidArgument, "images must be at least 2x2");
  }

  // Pyramid, finest first; stop halving before a side drops below 8 px.
  std::vector<Level> levels;
  {
    RasterImage d = distorted;
    RasterImage r = reference;
    for (int l = 0; l < config.levels; ++l) {
      if (l > 0) {
        if (d.width() / 2 < 8 || d.height() / 2 < 8) break;
        d = downsample2(d);
        r = downsample2(r);
      }
      auto g = gradients(d);
      levels.push_back({d, r, std::move(g), build_grid_mesh(d.width(), d.height())});
    }
  }

  std::vector<TraceRow> trace;
  int accepted = 0;
  std::optional<DeformationMap> map;
  std::optional<BeltramiField> field;

  for (int l = static_cast<int>(levels.size()) - 1; l >= 0; --l) {
    const Level& lv = levels[static_cast<std::size_t>(l)];
    if (!map) {
      map = identity_map(lv.mesh);
      field = BeltramiField(lv.mesh);
    } else {
      auto up = upsample(*map, lv.mesh);
      auto proj = project(up, config, 0.0);
      if (proj) {
        map = std::move(proj->map);
        field = std::move(proj->field);
      } else {
        map = identity_map(lv.mesh);
        field = BeltramiField(lv.mesh);
      }
    }
    double loss = estimation_loss(lv.distorted, lv.reference, *map);
    double eta = config.step;

    for (int it = 0; it < config.iterations; ++it) {
      const auto dir = intensity_step(lv, *map, config.update_sigma);
      bool stepped = false;
      for (int half = 0; half <= config.max_halvings; ++half, eta *= 0.5) {
        std::vector<Vec2> pos(map->positions().begin(), map->positions().end());
        for (std::size_t v = 0; v < pos.size(); ++v) pos[v] = pos[v] + (2.0 * eta) * dir[v];
        const DeformationMap trial(lv.mesh, std::move(pos));
        std::optional<Projection> proj;
        try {
          proj = project(trial, config, config.mu_sigma);
        } catch (const NumericalFailure& e) {
          throw NumericalFailure(e.residual(), "restore level " + std::to_string(l) +
                                                   " iteration " + std::to_string(it) + ": " +
                                                   e.what());
        }
        if (!proj) continue;
        const double trial_loss = estimation_loss(lv.distorted, lv.reference, proj->map);
        if (trial_loss <= loss) {
          loss = trial_loss;
          map = std::move(proj->map);
          field = std::move(proj->field);
          trace.push_back({accepted++, l, loss, proj->residual,
                           face_orientation_count(*map).flipped, sup_norm(*field)});
          stepped = true;
          break;
        }
      }
      if (!stepped) break;  // no admissible descent left at this level
      eta = std::min(config.step, 2.0 * eta);
    }
  }

  auto restored = warp_image(distorted, *map);
  return RestoreResult{std::move(*map), std::move(*field), std::move(restored), std::move(trace)};
}

double map_error(const DeformationMap& recovered, const DeformationMap& truth) {
  if (!(recovered.mesh() == truth.mesh())) {
    throw Error(ErrorKind::InvalidArgument, "recovered and ground-truth maps use different meshes");
  }
  const auto ref = recovered.mesh().vertices();
  const auto pos = recovered.positions();
  double acc = 0.0;
  for (std::size_t v = 0; v < ref.size(); ++v) {
    const Vec2 e = truth.evaluate(pos[v]) - ref[v];
    acc += e.x * e.x + e.y * e.y;
  }
  return std::sqrt(acc / static_cast<double>(ref.size()));
}

double composite_loss(const RasterImage& distorted, const RasterImage& reference,
                      const DeformationMap& map, const BeltramiField& field,
                      const LbsSystem& system, const RestoreConfig& config) {
  if (!(field.mesh() == map.mesh()) || !(*system.mesh == map.mesh())) {
    throw Error(ErrorKind::InvalidArgument, "map, field and system use different meshes");
  }
  double total = 0.0;
  if (config.weight_est != 0.0) total += config.weight_est * estimation_loss(distorted, reference, map);
  if (config.weight_bsnet != 0.0) total += config.weight_bsnet * residual_loss(system, map);
  return total;
}

std::string trace_csv(const std::vector<TraceRow>& trace) {
  std::string out = "iteration,level,l_est,residual,folds,sup_norm\n";
  char buf[256];
  for (const auto& row : trace) {
    std::snprintf(buf, sizeof buf, "%d,%d,%.17g,%.17g,%zu,%.17g\n", row.iteration, row.level,
                  row.l_est, row.residual, row.folds, row.sup_norm);
    out += buf;
  }
  return out;
}

RestoreConfig parse_restore_config(std::string_view json_text) {
  RestoreConfig cfg;
  try {
    const auto j = nlohmann::json::parse(json_text);
    if (!j.is_object()) throw Error(ErrorKind::InvalidArgument, "restore config must be a JSON object");
    for (const auto& [key, value] : j.items()) {
      if (key == "weight_est") cfg.weight_est = value.get<double>();
      else if (key == "weight_bsnet") cfg.weight_bsnet = value.get<double>();
      else if (key == "levels") cfg.levels = value.get<int>();
      else if (key == "iterations") cfg.iterations = value.get<int>();
      else if (key == "step") cfg.step = value.get<double>();
      else if (key == "mu_sigma") cfg.mu_sigma = value.get<double>();
      else if (key == "margin") cfg.margin = value.get<double>();
      else if (key == "fourier_k") {
        if (value.is_null()) cfg.fourier_k.reset();
        else cfg.fourier_k = value.get<int>();
      }
      else if (key == "max_halvings") cfg.max_halvings = value.get<int>();
      else if (key == "update_sigma") cfg.update_sigma = value.get<double>();
      else throw Error(ErrorKind::InvalidArgument, "unknown restore config key '" + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::InvalidArgument, std::string("restore config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

std::string to_json_string(const RestoreConfig& cfg) {
  nlohmann::json j = {
      {"weight_est", cfg.weight_est}, {"weight_bsnet", cfg.weight_bsnet},
      {"levels", cfg.levels},         {"iterations", cfg.iterations},
      {"step", cfg.step},             {"mu_sigma", cfg.mu_sigma},
      {"margin", cfg.margin},         {"max_halvings", cfg.max_halvings},
      {"update_sigma", cfg.update_sigma},
  };
  j["fourier_k"] = cfg.fourier_k ? nlohmann::json(*cfg.fourier_k) : nlohmann::json(nullptr);
  return j.dump(2);
}

}  // namespace qcwarp
