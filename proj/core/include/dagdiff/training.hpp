#pragma once

#include <cstdint>
#include <vector>

#include "dagdiff/diffusion.hpp"
#include "dagdiff/mesh.hpp"
#include "dagdiff/model.hpp"
#include "dagdiff/point_cloud.hpp"

namespace dagdiff {

/// One training object: surface cloud and mesh in the same centered frame.
struct TrainObject {
  PointCloud cloud;
  TriMesh mesh;
};

/// One labeled dual-arm grasp record. `collision_only` marks deliberately
/// colliding poses that exist for the collision head and are excluded from
/// stage 1.
struct GraspSample {
  int object_id = 0;
  DualPose pose;
  int y_fc = 0;
  std::array<int, 2> y_col = {0, 0};
  bool collision_only = false;
};

struct TrainDataset {
  std::vector<TrainObject> objects;
  std::vector<GraspSample> samples;
};

struct TrainConfig {
  int epochs_stage1 = 30;  // upper bound; plateau may stop earlier
  int epochs_stage2 = 8;
  int posthoc_epochs = 8;
  int batch_size = 32;
  double lr = 1e-3;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  int patience = 5;           // epochs without val improvement
  double val_fraction = 0.1;
  double sdf_loss_weight = 1.0;
  /// Post-hoc variant: stage 1 runs without the FC loss, then the FC head is
  /// fitted on the frozen trunk before the collision stage.
  bool posthoc_fc = false;
  std::uint64_t seed = 0;
};

struct LossCurvePoint {
  int stage = 1;  // 1 = joint, 15 = post-hoc FC fit, 2 = collision head
  int epoch = 0;
  double train_loss = 0;
  double val_loss = 0;
};

struct TrainResult {
  ModelParams params;
  std::vector<LossCurvePoint> curve;
  bool diverged = false;  // params hold the last finite state when set
};

/// Staged training. Stage 1 minimizes L_diff + L_fc + w * L_sdf over the
/// encoder, trunk, energy, FC and SDF heads until the validation loss
/// plateaus; stage 2 freezes everything but the collision head and minimizes
/// L_col over the collision-labeled set.
TrainResult train(const TrainDataset& dataset, ModelParams params,
                  const NoiseSchedule& schedule, const TrainConfig& config);

}  // namespace dagdiff
