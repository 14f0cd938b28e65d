#pragma once

#include <Eigen/Core>
#include <array>
#include <string>
#include <vector>

#include "dagdiff/geometry.hpp"
#include "dagdiff/point_cloud.hpp"
#include "dagdiff/rng.hpp"

namespace dagdiff {

/// Fixed architecture hyperparameters. `query_points` is the 30-point probe
/// template copied from the gripper model; it travels with the checkpoint so
/// sampling never depends on an external gripper file.
struct ModelConfig {
  int grid_size = 32;    // G, nodes per plane axis
  int channels = 16;     // C, feature channels per plane
  double extent = 0.75;  // plane coverage in meters, centered on the origin
  int time_embed_dim = 16;
  int encoder_hidden = 64;
  int trunk_width = 256;
  int sdf_hidden = 64;
  int total_steps = 250;  // normalizes the noise step for the time embedding
  std::vector<Vec3> query_points;

  int trunk_input_dim() const { return 60 * channels + time_embed_dim; }
  double cell_size() const { return extent / grid_size; }
};

/// Three axis-aligned feature grids (XY, XZ, YZ). Each plane is stored as a
/// channels x (G*G) matrix, cell index = iy * G + ix, node (ix, iy) centered
/// at -extent/2 + (i + 0.5) * cell.
struct TriplaneFeatures {
  std::array<Eigen::MatrixXd, 3> planes;
  double extent = 0;
  int grid_size = 0;
  int channels = 0;
};

/// All learnable tensors. Double precision in memory; checkpoints quantize
/// to f32.
struct ModelParams {
  ModelConfig config;

  Eigen::MatrixXd enc_w1;  // hidden x 3
  Eigen::VectorXd enc_b1;
  Eigen::MatrixXd enc_w2;  // C x hidden
  Eigen::VectorXd enc_b2;
  std::array<Eigen::MatrixXd, 3> conv_w;  // C x (C*9), plane-specific 3x3 conv
  std::array<Eigen::VectorXd, 3> conv_b;

  Eigen::MatrixXd trunk_w1;  // width x trunk_input_dim
  Eigen::VectorXd trunk_b1;
  Eigen::MatrixXd trunk_w2;  // width x width
  Eigen::VectorXd trunk_b2;

  Eigen::VectorXd energy_w;  // width
  double energy_b = 0;
  Eigen::VectorXd fc_w;  // width
  double fc_b = 0;
  Eigen::MatrixXd col_w;  // 2 x width
  Eigen::VectorXd col_b;  // 2

  Eigen::MatrixXd sdf_w1;  // sdf_hidden x (C + time_embed_dim)
  Eigen::VectorXd sdf_b1;
  Eigen::VectorXd sdf_w2;  // sdf_hidden
  double sdf_b2 = 0;

  /// Seeded uniform init, ranges scaled by 1/sqrt(fan_in).
  static ModelParams init(const ModelConfig& config, Rng& rng);

  /// Visits every tensor as (name, pointer, rows, cols) for serialization
  /// and optimizer state. Scalars are reported as 1x1.
  template <typename Fn>
  void for_each_tensor(Fn&& fn);
};

struct HeadOutputs {
  double energy = 0;
  double fc_prob = 0.5;
  std::array<double, 2> col_probs = {0.5, 0.5};
  Eigen::VectorXd sdf_pred;  // 60 values, query-point order
};

enum class PoseObjective {
  Energy,         // E
  LogFcProb,      // log C_fc
  LogNoCollision  // sum over arms of log(1 - C_col[arm])
};

/// Per-point bilinear lookup record, kept so gradients can be replayed.
struct BilinearRecord {
  // For each plane: 4 corner cell indices, weights, and weight gradients
  // against the two projected coordinates (already clamped at the border).
  std::array<std::array<int, 4>, 3> corner;
  std::array<std::array<double, 4>, 3> weight;
  std::array<std::array<double, 4>, 3> dw_du;
  std::array<std::array<double, 4>, 3> dw_dv;
};

/// Intermediates of encode(), kept only when training needs to push plane
/// gradients back into the encoder.
struct EncodeTape {
  Eigen::MatrixXd pts;         // 3 x n input points
  Eigen::MatrixXd enc_a1;      // hidden x n pre-activations
  Eigen::MatrixXd enc_h1;      // hidden x n
  Eigen::MatrixXd feats;       // C x n per-point features
  std::array<std::vector<int>, 3> cell_of_point;
  std::array<Eigen::VectorXd, 3> cell_count;
  std::array<Eigen::MatrixXd, 3> raw_planes;  // pre-conv scatter averages
};

/// Intermediates of a trunk evaluation.
struct ForwardTape {
  std::vector<Vec3> query_world;  // 60 points
  Eigen::MatrixXd z;              // C x 60 sampled plane features
  std::vector<BilinearRecord> bilinear;
  Eigen::VectorXd temb;
  Eigen::VectorXd x;   // trunk input
  Eigen::VectorXd a1, h1, a2, h2;
  double fc_logit = 0;
  Eigen::Vector2d col_logits;
  Eigen::MatrixXd sdf_a1, sdf_h1;  // sdf_hidden x 60
  HeadOutputs out;
};

Eigen::VectorXd time_embedding(int t, const ModelConfig& config);

/// im2col for the 3x3 zero-padded plane conv: (C*9) x (G*G) patches.
Eigen::MatrixXd conv_patches(const Eigen::MatrixXd& raw, int channels, int grid);

/// Trunk backward from a dObjective/dh2 seed to the per-point feature
/// gradients (C x 60).
Eigen::MatrixXd backprop_to_features(const ForwardTape& tape,
                                     const ModelParams& params,
                                     const Eigen::VectorXd& dh2);

/// Chain rule through the bilinear lookups: world-position gradient (3 x 60).
Eigen::MatrixXd feature_grads_to_positions(const ForwardTape& tape,
                                           const TriplaneFeatures& tp,
                                           const Eigen::MatrixXd& gz);

/// Accumulates per-point position gradients into the 12 twist coordinates.
Twist12 positions_to_twist(const ForwardTape& tape, const Eigen::MatrixXd& u);

/// Scatter-average stage of the encoder (pre-conv planes), exposed for
/// probing.
void encode_scatter(const PointCloud& cloud, const ModelParams& params,
                    EncodeTape& tape);

/// Point cloud -> tri-plane features. The cloud must be centered. Throws
/// EmptyCloudError.
TriplaneFeatures encode(const PointCloud& cloud, const ModelParams& params,
                        EncodeTape* tape = nullptr);

/// Bilinear lookup of the summed plane features at each point.
/// Out-of-extent points clamp to the border.
Eigen::MatrixXd sample_features(const TriplaneFeatures& tp,
                                const std::vector<Vec3>& pts,
                                std::vector<BilinearRecord>* records = nullptr);

/// Full evaluation from pre-encoded features.
HeadOutputs forward(const TriplaneFeatures& tp, const DualPose& h, int t,
                    const ModelParams& params, ForwardTape* tape = nullptr);

/// Convenience overload that encodes the (centered) cloud first.
HeadOutputs forward(const DualPose& h, const PointCloud& cloud, int t,
                    const ModelParams& params);

/// Gradient of the selected objective with respect to left-perturbation
/// twists of both poses. Throws NonFiniteGradientError.
Twist12 pose_gradient(const TriplaneFeatures& tp, const DualPose& h, int t,
                      const ModelParams& params, PoseObjective objective);

Twist12 pose_gradient(const DualPose& h, const PointCloud& cloud, int t,
                      const ModelParams& params, PoseObjective objective);

/// All objective gradients from one shared forward pass; used by the guided
/// sampler. With `with_collision` false the collision head is never read and
/// `log_no_col` stays zero.
struct PoseGradients {
  Twist12 energy = Twist12::Zero();
  Twist12 log_fc = Twist12::Zero();
  Twist12 log_no_col = Twist12::Zero();
  HeadOutputs out;
};
PoseGradients pose_gradients_all(const TriplaneFeatures& tp, const DualPose& h,
                                 int t, const ModelParams& params,
                                 bool with_collision = true);

template <typename Fn>
void ModelParams::for_each_tensor(Fn&& fn) {
  fn("enc_w1", enc_w1.data(), enc_w1.rows(), enc_w1.cols());
  fn("enc_b1", enc_b1.data(), enc_b1.size(), 1);
  fn("enc_w2", enc_w2.data(), enc_w2.rows(), enc_w2.cols());
  fn("enc_b2", enc_b2.data(), enc_b2.size(), 1);
  for (int p = 0; p < 3; ++p) {
    const std::string suffix = std::to_string(p);
    fn(("conv_w" + suffix).c_str(), conv_w[p].data(), conv_w[p].rows(), conv_w[p].cols());
    fn(("conv_b" + suffix).c_str(), conv_b[p].data(), conv_b[p].size(), 1);
  }
  fn("trunk_w1", trunk_w1.data(), trunk_w1.rows(), trunk_w1.cols());
  fn("trunk_b1", trunk_b1.data(), trunk_b1.size(), 1);
  fn("trunk_w2", trunk_w2.data(), trunk_w2.rows(), trunk_w2.cols());
  fn("trunk_b2", trunk_b2.data(), trunk_b2.size(), 1);
  fn("energy_w", energy_w.data(), energy_w.size(), 1);
  fn("energy_b", &energy_b, 1, 1);
  fn("fc_w", fc_w.data(), fc_w.size(), 1);
  fn("fc_b", &fc_b, 1, 1);
  fn("col_w", col_w.data(), col_w.rows(), col_w.cols());
  fn("col_b", col_b.data(), col_b.size(), 1);
  fn("sdf_w1", sdf_w1.data(), sdf_w1.rows(), sdf_w1.cols());
  fn("sdf_b1", sdf_b1.data(), sdf_b1.size(), 1);
  fn("sdf_w2", sdf_w2.data(), sdf_w2.size(), 1);
  fn("sdf_b2", &sdf_b2, 1, 1);
}

}  // namespace dagdiff
