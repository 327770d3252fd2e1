#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qcwarp/beltrami.hpp"
#include "qcwarp/image.hpp"
#include "qcwarp/lbs.hpp"
#include "qcwarp/mesh.hpp"

namespace qcwarp {

/// Weights and schedule of the alternating restoration. The task-loss
/// weight is not represented: no downstream task is modelled.
struct RestoreConfig {
  double weight_est = 1.0;    // alpha
  double weight_bsnet = 0.0;  // beta; diagnostic only, the solver is exact
  int levels = 3;
  int iterations = 50;
  double step = 0.5;       // px, max vertex move per intensity step
  double mu_sigma = 2.0;   // cells
  double margin = 1e-3;    // admissibility margin of the activation
  std::optional<int> fourier_k;
  int max_halvings = 8;
  double update_sigma = 3.0;  // px, smoothing of the intensity step

  /// Throws invalid-argument when a field is out of range.
  void validate() const;
};

struct TraceRow {
  int iteration = 0;  // global, counting accepted steps
  int level = 0;      // 0 = finest
  double l_est = 0.0;
  double residual = 0.0;
  std::size_t folds = 0;
  double sup_norm = 0.0;
};

struct RestoreResult {
  DeformationMap map;
  BeltramiField field;
  RasterImage restored;
  std::vector<TraceRow> trace;
};

/// Image term: mean squared difference between distorted o map and reference.
double estimation_loss(const RasterImage& distorted, const RasterImage& reference,
                       const DeformationMap& map);

/// Find a fold-free map f with distorted o f close to reference.
RestoreResult restore_pair(const RasterImage& distorted, const RasterImage& reference,
                           const RestoreConfig& config = {});

/// RMS over vertices of |truth(f(p)) - p| in pixels, where f is the
/// recovered map: zero when f inverts the ground-truth distortion.
double map_error(const DeformationMap& recovered, const DeformationMap& truth);
inline double map_error(const RestoreResult& result, const DeformationMap& truth) {
  return map_error(result.map, truth);
}

/// weight_est * estimation_loss + weight_bsnet * residual_loss.
double composite_loss(const RasterImage& distorted, const RasterImage& reference,
                      const DeformationMap& map, const BeltramiField& field,
                      const LbsSystem& system, const RestoreConfig& config);

std::string trace_csv(const std::vector<TraceRow>& trace);

RestoreConfig parse_restore_config(std::string_view json_text);
std::string to_json_string(const RestoreConfig& config);

}  // namespace qcwarp
