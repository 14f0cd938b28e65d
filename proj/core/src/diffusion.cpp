#include "dagdiff/diffusion.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <thread>
#include <vector>

#include "dagdiff/errors.hpp"
#include "dagdiff/parallel.hpp"

namespace dagdiff {

int worker_count(int requested) {
  int n = static_cast<int>(std::thread::hardware_concurrency());
  if (n <= 0) n = 1;
  if (const char* env = std::getenv("DAGDIFF_THREADS")) {
    const int cap = std::atoi(env);
    if (cap > 0) n = std::min(n, cap);
  }
  if (requested > 0) n = std::min(n, requested);
  return n;
}

void parallel_chunks(int n, int chunk_size,
                     const std::function<void(int, int, int)>& fn) {
  if (n <= 0) return;
  const int n_chunks = (n + chunk_size - 1) / chunk_size;
  const int workers = std::min(worker_count(), n_chunks);
  if (workers <= 1) {
    for (int c = 0; c < n_chunks; ++c) {
      fn(c, c * chunk_size, std::min(n, (c + 1) * chunk_size));
    }
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&]() {
      while (true) {
        const int c = next.fetch_add(1);
        if (c >= n_chunks) return;
        fn(c, c * chunk_size, std::min(n, (c + 1) * chunk_size));
      }
    });
  }
  for (auto& t : pool) t.join();
}

NoiseSchedule make_schedule(int steps, double sigma_min, double sigma_max, int t_c,
                            double eta_coeff) {
  if (steps < 2) throw InvalidScheduleError("schedule needs at least 2 steps");
  if (!(sigma_min > 0) || !(sigma_min < sigma_max)) {
    throw InvalidScheduleError("require 0 < sigma_min < sigma_max");
  }
  if (t_c < 0 || t_c > steps) {
    throw InvalidScheduleError("collision threshold must lie in [0, T]");
  }
  if (eta_coeff < 0) throw InvalidScheduleError("eta coefficient must be >= 0");

  NoiseSchedule s;
  s.steps = steps;
  s.collision_threshold = t_c;
  s.sigma.resize(steps);
  s.eta.resize(steps);
  const double ratio = sigma_max / sigma_min;
  for (int t = 0; t < steps; ++t) {
    s.sigma(t) = sigma_min * std::pow(ratio, static_cast<double>(t) / (steps - 1));
    s.eta(t) = eta_coeff * s.sigma(t);
  }
  return s;
}

std::pair<DualPose, Twist12> perturb(const DualPose& h, int t,
                                     const NoiseSchedule& schedule, Rng& rng) {
  const double sigma_t = schedule.sigma(t);
  Twist12 eps;
  for (int i = 0; i < 12; ++i) eps(i) = sigma_t * rng.normal();
  const Twist12 v = logmap2(h);
  return {expmap2(v + eps), eps};
}

double diffusion_loss(const Twist12& score_pred, const Twist12& noise,
                      double sigma_t) {
  if (!(sigma_t > 0)) throw InvalidScheduleError("sigma_t must be positive");
  return (score_pred - noise / sigma_t).cwiseAbs().sum();
}

double bce(double p, int y) {
  const double q = std::clamp(p, 1e-7, 1.0 - 1e-7);
  return y ? -std::log(q) : -std::log(1.0 - q);
}

std::pair<double, double> classifier_losses(const HeadOutputs& out, int y_fc,
                                            const std::array<int, 2>& y_col) {
  const double l_fc = bce(out.fc_prob, y_fc);
  const double l_col =
      0.5 * (bce(out.col_probs[0], y_col[0]) + bce(out.col_probs[1], y_col[1]));
  return {l_fc, l_col};
}

Twist12 guided_score(const TriplaneFeatures& tp, const DualPose& h, int t,
                     const ModelParams& params, const NoiseSchedule& schedule,
                     const GuidanceConfig& guidance) {
  // Outside the activation window the collision gradient is never formed, so
  // the trajectory is bitwise independent of the collision head.
  const bool col = schedule.collision_active(t);
  const PoseGradients g = pose_gradients_all(tp, h, t, params, col);
  Twist12 s = -g.energy + guidance.fc_weight * g.log_fc;
  if (col) s += guidance.col_weight * g.log_no_col;
  const double norm = s.norm();
  if (!std::isfinite(norm)) throw NonFiniteGradientError("guided score not finite");
  if (guidance.gradient_clip > 0 && norm > guidance.gradient_clip) {
    s *= guidance.gradient_clip / norm;
  }
  return s;
}

DualPose reverse_step(const DualPose& h_t, const Twist12& score, int t,
                      const NoiseSchedule& schedule, Rng& rng,
                      bool skip_final_noise) {
  const double eta = schedule.eta(t);
  Twist12 u = (eta * eta / 2.0) * score;
  if (!(skip_final_noise && t == 0)) {
    for (int i = 0; i < 12; ++i) u(i) += eta * rng.normal();
  }
  return left_update(h_t, u);
}

DualPose run_reverse_chain(DualPose h, const NoiseSchedule& schedule,
                           const ScoreFn& score_fn, Rng& rng,
                           bool skip_final_noise) {
  for (int t = schedule.steps - 1; t >= 0; --t) {
    h = reverse_step(h, score_fn(h, t), t, schedule, rng, skip_final_noise);
  }
  return h;
}

namespace {

Mat3 random_rotation(Rng& rng) {
  // Uniform on SO(3) via normalized 4-Gaussian quaternion.
  Eigen::Vector4d q;
  for (int i = 0; i < 4; ++i) q(i) = rng.normal();
  q.normalize();
  return Eigen::Quaterniond(q(0), q(1), q(2), q(3)).toRotationMatrix();
}

}  // namespace

std::vector<SampleResult> sample(const PointCloud& centered_cloud, int batch,
                                 const ModelParams& params,
                                 const NoiseSchedule& schedule,
                                 const GuidanceConfig& guidance,
                                 std::uint64_t seed, SampleStats* stats) {
  if (batch < 1) throw ConfigError("sample: batch must be >= 1");
  const TriplaneFeatures tp = encode(centered_cloud, params);

  Vec3 lo, hi;
  centered_cloud.bounding_box(lo, hi);
  const Vec3 center = 0.5 * (lo + hi);
  const Vec3 half = 0.75 * (hi - lo);  // 1.5x the box

  std::vector<std::optional<SampleResult>> slots(batch);
  parallel_chunks(batch, 1, [&](int chunk, int begin, int) {
    (void)chunk;
    const int i = begin;
    Rng rng = Rng::stream(seed, "chain" + std::to_string(i));
    DualPose h;
    for (Pose* arm : {&h.first, &h.second}) {
      arm->rotation = random_rotation(rng);
      for (int a = 0; a < 3; ++a) {
        arm->translation(a) = center(a) + rng.uniform(-half(a), half(a));
      }
    }
    try {
      h = run_reverse_chain(
          h, schedule,
          [&](const DualPose& cur, int t) {
            return guided_score(tp, cur, t, params, schedule, guidance);
          },
          rng, guidance.skip_final_noise);
      ForwardTape ft;
      const HeadOutputs out = forward(tp, h, 0, params, &ft);
      slots[i] = SampleResult{h, out.energy, out.fc_prob, out.col_probs};
    } catch (const Error&) {
      slots[i] = std::nullopt;  // dropped chain
    }
  });

  std::vector<SampleResult> results;
  results.reserve(batch);
  int dropped = 0;
  for (auto& s : slots) {
    if (s) {
      results.push_back(*s);
    } else {
      ++dropped;
    }
  }
  std::stable_sort(results.begin(), results.end(),
                   [](const SampleResult& a, const SampleResult& b) {
                     return a.energy < b.energy;
                   });
  if (stats) *stats = {batch, static_cast<int>(results.size()), dropped};
  return results;
}

}  // namespace dagdiff
