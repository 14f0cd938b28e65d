#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "dagdiff/geometry.hpp"
#include "dagdiff/model.hpp"
#include "dagdiff/point_cloud.hpp"
#include "dagdiff/rng.hpp"

namespace dagdiff {

/// Geometric noise schedule indexed by noise level: t = 0 is cleanest,
/// denoising walks t = T-1 down to 0. The collision threshold t_c counts
/// denoising steps remaining, so "last 50 steps" means steps-remaining <= 50.
struct NoiseSchedule {
  int steps = 250;  // T
  Eigen::VectorXd sigma;
  Eigen::VectorXd eta;
  int collision_threshold = 50;  // t_c

  bool collision_active(int t) const { return t + 1 <= collision_threshold; }
};

/// sigma_t = sigma_min * (sigma_max/sigma_min)^(t/(T-1)); eta_t = c_eta * sigma_t.
NoiseSchedule make_schedule(int steps, double sigma_min, double sigma_max, int t_c,
                            double eta_coeff = 0.1);

struct GuidanceConfig {
  double fc_weight = 1.0;
  double col_weight = 1.0;
  double gradient_clip = 1.0;    // max twist norm of the combined score
  bool skip_final_noise = true;  // omit the stochastic term at t = 0
};

/// Forward perturbation: adds N(0, sigma_t^2 I12) in the tangent space and
/// re-exponentiates. Returns the noisy pose pair and the drawn noise.
/// Propagates AngleNearPiError from the log map (caller resamples).
std::pair<DualPose, Twist12> perturb(const DualPose& h, int t,
                                     const NoiseSchedule& schedule, Rng& rng);

/// L1 between the predicted vector field and the normalized noise.
double diffusion_loss(const Twist12& score_pred, const Twist12& noise, double sigma_t);

/// Binary cross-entropy with probabilities clamped to [1e-7, 1-1e-7].
double bce(double p, int y);

/// (L_fc, L_col): BCE on the force-closure head and the mean per-arm BCE on
/// the collision head.
std::pair<double, double> classifier_losses(const HeadOutputs& out, int y_fc,
                                            const std::array<int, 2>& y_col);

/// Assembled guidance score: -grad E + fc_weight * grad log C_fc, plus the
/// collision term once within the activation window, clipped to the
/// configured twist norm.
Twist12 guided_score(const TriplaneFeatures& tp, const DualPose& h, int t,
                     const ModelParams& params, const NoiseSchedule& schedule,
                     const GuidanceConfig& guidance);

/// One Langevin reverse step: left-multiplies by exp((eta^2/2) score + eta eps).
DualPose reverse_step(const DualPose& h_t, const Twist12& score, int t,
                      const NoiseSchedule& schedule, Rng& rng,
                      bool skip_final_noise = true);

/// Generic reverse chain driver; `score_fn(h, t)` supplies the vector field.
using ScoreFn = std::function<Twist12(const DualPose&, int)>;
DualPose run_reverse_chain(DualPose h, const NoiseSchedule& schedule,
                           const ScoreFn& score_fn, Rng& rng,
                           bool skip_final_noise = true);

struct SampleResult {
  DualPose pose;
  double energy = 0;
  double fc_prob = 0;
  std::array<double, 2> col_probs = {0, 0};
};

struct SampleStats {
  int requested = 0;
  int completed = 0;
  int dropped = 0;
};

/// Runs `batch` guided chains from random initializations (rotations uniform
/// on SO(3)^2, translations uniform in the 1.5x cloud bounding box) and
/// returns the survivors sorted by ascending energy at t = 0. The cloud must
/// be centered; chain i draws from stream "chain<i>" of `seed`.
std::vector<SampleResult> sample(const PointCloud& centered_cloud, int batch,
                                 const ModelParams& params,
                                 const NoiseSchedule& schedule,
                                 const GuidanceConfig& guidance,
                                 std::uint64_t seed, SampleStats* stats = nullptr);

}  // namespace dagdiff
