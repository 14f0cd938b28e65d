#include "dagdiff/model.hpp"

#include <cmath>

#include "dagdiff/errors.hpp"

namespace dagdiff {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

// Projected world axes per plane: XY, XZ, YZ.
constexpr int kPlaneAxes[3][2] = {{0, 1}, {0, 2}, {1, 2}};

Eigen::MatrixXd uniform_matrix(Eigen::Index rows, Eigen::Index cols, double scale,
                               Rng& rng) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = rng.uniform(-scale, scale);
  }
  return m;
}

Eigen::VectorXd uniform_vector(Eigen::Index n, double scale, Rng& rng) {
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = rng.uniform(-scale, scale);
  return v;
}

}  // namespace

ModelParams ModelParams::init(const ModelConfig& config, Rng& rng) {
  ModelParams p;
  p.config = config;
  const int c = config.channels;
  const int hid = config.encoder_hidden;
  const int width = config.trunk_width;
  const int in_dim = config.trunk_input_dim();

  auto fan = [](int n) { return 1.0 / std::sqrt(static_cast<double>(n)); };

  p.enc_w1 = uniform_matrix(hid, 3, fan(3), rng);
  p.enc_b1 = uniform_vector(hid, fan(3), rng);
  p.enc_w2 = uniform_matrix(c, hid, fan(hid), rng);
  p.enc_b2 = uniform_vector(c, fan(hid), rng);
  for (int k = 0; k < 3; ++k) {
    p.conv_w[k] = uniform_matrix(c, c * 9, fan(c * 9), rng);
    p.conv_b[k] = uniform_vector(c, fan(c * 9), rng);
  }
  p.trunk_w1 = uniform_matrix(width, in_dim, fan(in_dim), rng);
  p.trunk_b1 = uniform_vector(width, fan(in_dim), rng);
  p.trunk_w2 = uniform_matrix(width, width, fan(width), rng);
  p.trunk_b2 = uniform_vector(width, fan(width), rng);
  p.energy_w = uniform_vector(width, fan(width), rng);
  p.energy_b = rng.uniform(-fan(width), fan(width));
  p.fc_w = uniform_vector(width, fan(width), rng);
  p.fc_b = rng.uniform(-fan(width), fan(width));
  p.col_w = uniform_matrix(2, width, fan(width), rng);
  p.col_b = uniform_vector(2, fan(width), rng);
  const int sdf_in = c + config.time_embed_dim;
  p.sdf_w1 = uniform_matrix(config.sdf_hidden, sdf_in, fan(sdf_in), rng);
  p.sdf_b1 = uniform_vector(config.sdf_hidden, fan(sdf_in), rng);
  p.sdf_w2 = uniform_vector(config.sdf_hidden, fan(config.sdf_hidden), rng);
  p.sdf_b2 = rng.uniform(-fan(config.sdf_hidden), fan(config.sdf_hidden));
  return p;
}

Eigen::VectorXd time_embedding(int t, const ModelConfig& config) {
  const double tau = static_cast<double>(t) / config.total_steps;
  Eigen::VectorXd emb(config.time_embed_dim);
  for (int i = 0; i < config.time_embed_dim / 2; ++i) {
    const double freq = kPi * std::pow(2.0, i);
    emb(2 * i) = std::sin(freq * tau);
    emb(2 * i + 1) = std::cos(freq * tau);
  }
  return emb;
}

void encode_scatter(const PointCloud& cloud, const ModelParams& params,
                    EncodeTape& tape) {
  if (cloud.points.empty()) throw EmptyCloudError("encode: empty point cloud");
  const auto& cfg = params.config;
  const int n = cloud.size();
  const int c = cfg.channels;
  const int g = cfg.grid_size;
  const double cell = cfg.cell_size();
  const double lo = -cfg.extent / 2;

  tape.pts.resize(3, n);
  for (int i = 0; i < n; ++i) tape.pts.col(i) = cloud.points[i];

  tape.enc_a1 = params.enc_w1 * tape.pts;
  tape.enc_a1.colwise() += params.enc_b1;
  tape.enc_h1 = tape.enc_a1.array().tanh();
  tape.feats = params.enc_w2 * tape.enc_h1;
  tape.feats.colwise() += params.enc_b2;

  for (int p = 0; p < 3; ++p) {
    tape.cell_of_point[p].assign(n, 0);
    tape.cell_count[p] = Eigen::VectorXd::Zero(g * g);
    tape.raw_planes[p] = Eigen::MatrixXd::Zero(c, g * g);
    for (int i = 0; i < n; ++i) {
      const double u = (tape.pts(kPlaneAxes[p][0], i) - lo) / cell - 0.5;
      const double v = (tape.pts(kPlaneAxes[p][1], i) - lo) / cell - 0.5;
      const int ix = std::clamp(static_cast<int>(std::lround(u)), 0, g - 1);
      const int iy = std::clamp(static_cast<int>(std::lround(v)), 0, g - 1);
      const int cell_idx = iy * g + ix;
      tape.cell_of_point[p][i] = cell_idx;
      tape.cell_count[p](cell_idx) += 1.0;
      tape.raw_planes[p].col(cell_idx) += tape.feats.col(i);
    }
    for (int idx = 0; idx < g * g; ++idx) {
      if (tape.cell_count[p](idx) > 0) {
        tape.raw_planes[p].col(idx) /= tape.cell_count[p](idx);
      }
    }
  }
}

// im2col for the 3x3 zero-padded conv: patches is (C*9) x (G*G).
Eigen::MatrixXd conv_patches(const Eigen::MatrixXd& raw, int c, int g) {
  Eigen::MatrixXd patches = Eigen::MatrixXd::Zero(c * 9, g * g);
  for (int iy = 0; iy < g; ++iy) {
    for (int ix = 0; ix < g; ++ix) {
      const int cell = iy * g + ix;
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          const int nx = ix + dx, ny = iy + dy;
          if (nx < 0 || nx >= g || ny < 0 || ny >= g) continue;
          const int tap = (dy + 1) * 3 + (dx + 1);
          patches.block(tap * c, cell, c, 1) = raw.col(ny * g + nx);
        }
      }
    }
  }
  return patches;
}

TriplaneFeatures encode(const PointCloud& cloud, const ModelParams& params,
                        EncodeTape* tape) {
  EncodeTape local;
  EncodeTape& tp = tape ? *tape : local;
  encode_scatter(cloud, params, tp);

  const auto& cfg = params.config;
  TriplaneFeatures features;
  features.extent = cfg.extent;
  features.grid_size = cfg.grid_size;
  features.channels = cfg.channels;
  for (int p = 0; p < 3; ++p) {
    const Eigen::MatrixXd patches =
        conv_patches(tp.raw_planes[p], cfg.channels, cfg.grid_size);
    features.planes[p] = params.conv_w[p] * patches;
    features.planes[p].colwise() += params.conv_b[p];
  }
  return features;
}

namespace {

// Conv weight layout note: tap index (dy+1)*3+(dx+1) selects input block
// rows [tap*C, (tap+1)*C).
void bilinear_record_for_point(const TriplaneFeatures& tp, const Vec3& pt,
                               BilinearRecord& rec) {
  const int g = tp.grid_size;
  const double cell = tp.extent / g;
  const double lo = -tp.extent / 2;
  for (int p = 0; p < 3; ++p) {
    double u = (pt[kPlaneAxes[p][0]] - lo) / cell - 0.5;
    double v = (pt[kPlaneAxes[p][1]] - lo) / cell - 0.5;
    double du_dx = 1.0 / cell;  // derivative of grid coord per meter
    double dv_dx = 1.0 / cell;
    if (u <= 0.0) {
      u = 0.0;
      du_dx = 0.0;
    } else if (u >= g - 1) {
      u = g - 1;
      du_dx = 0.0;
    }
    if (v <= 0.0) {
      v = 0.0;
      dv_dx = 0.0;
    } else if (v >= g - 1) {
      v = g - 1;
      dv_dx = 0.0;
    }
    const int i0 = std::min(static_cast<int>(u), g - 2);
    const int j0 = std::min(static_cast<int>(v), g - 2);
    const double fu = u - i0;
    const double fv = v - j0;

    rec.corner[p] = {j0 * g + i0, j0 * g + i0 + 1, (j0 + 1) * g + i0,
                     (j0 + 1) * g + i0 + 1};
    rec.weight[p] = {(1 - fu) * (1 - fv), fu * (1 - fv), (1 - fu) * fv, fu * fv};
    // Gradients in meters (grid-coordinate gradient times du/dx).
    rec.dw_du[p] = {-(1 - fv) * du_dx, (1 - fv) * du_dx, -fv * du_dx, fv * du_dx};
    rec.dw_dv[p] = {-(1 - fu) * dv_dx, -fu * dv_dx, (1 - fu) * dv_dx, fu * dv_dx};
  }
}

}  // namespace

Eigen::MatrixXd sample_features(const TriplaneFeatures& tp,
                                const std::vector<Vec3>& pts,
                                std::vector<BilinearRecord>* records) {
  const int n = static_cast<int>(pts.size());
  Eigen::MatrixXd z = Eigen::MatrixXd::Zero(tp.channels, n);
  if (records) records->resize(n);
  BilinearRecord local;
  for (int i = 0; i < n; ++i) {
    BilinearRecord& rec = records ? (*records)[i] : local;
    bilinear_record_for_point(tp, pts[i], rec);
    for (int p = 0; p < 3; ++p) {
      for (int k = 0; k < 4; ++k) {
        z.col(i) += rec.weight[p][k] * tp.planes[p].col(rec.corner[p][k]);
      }
    }
  }
  return z;
}

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

HeadOutputs forward(const TriplaneFeatures& tp, const DualPose& h, int t,
                    const ModelParams& params, ForwardTape* tape) {
  const auto& cfg = params.config;
  if (static_cast<int>(cfg.query_points.size()) != 30) {
    throw ConfigError("model config requires exactly 30 query points");
  }

  ForwardTape local;
  ForwardTape& ft = tape ? *tape : local;

  ft.query_world = transform_points(h.first, cfg.query_points);
  const auto second = transform_points(h.second, cfg.query_points);
  ft.query_world.insert(ft.query_world.end(), second.begin(), second.end());

  ft.z = sample_features(tp, ft.query_world, &ft.bilinear);
  ft.temb = time_embedding(t, cfg);

  const int c = cfg.channels;
  ft.x.resize(cfg.trunk_input_dim());
  for (int i = 0; i < 60; ++i) ft.x.segment(i * c, c) = ft.z.col(i);
  ft.x.tail(cfg.time_embed_dim) = ft.temb;

  ft.a1 = params.trunk_w1 * ft.x + params.trunk_b1;
  ft.h1 = ft.a1.array().tanh();
  ft.a2 = params.trunk_w2 * ft.h1 + params.trunk_b2;
  ft.h2 = ft.a2.array().tanh();

  ft.out.energy = params.energy_w.dot(ft.h2) + params.energy_b;
  ft.fc_logit = params.fc_w.dot(ft.h2) + params.fc_b;
  ft.out.fc_prob = sigmoid(ft.fc_logit);
  ft.col_logits = params.col_w * ft.h2 + params.col_b;
  ft.out.col_probs = {sigmoid(ft.col_logits(0)), sigmoid(ft.col_logits(1))};

  // Per-point SDF: [plane features ; time embedding] -> hidden -> scalar.
  Eigen::MatrixXd sdf_in(c + cfg.time_embed_dim, 60);
  for (int i = 0; i < 60; ++i) {
    sdf_in.col(i).head(c) = ft.z.col(i);
    sdf_in.col(i).tail(cfg.time_embed_dim) = ft.temb;
  }
  ft.sdf_a1 = params.sdf_w1 * sdf_in;
  ft.sdf_a1.colwise() += params.sdf_b1;
  ft.sdf_h1 = ft.sdf_a1.array().tanh();
  ft.out.sdf_pred = ft.sdf_h1.transpose() * params.sdf_w2;
  ft.out.sdf_pred.array() += params.sdf_b2;

  return ft.out;
}

HeadOutputs forward(const DualPose& h, const PointCloud& cloud, int t,
                    const ModelParams& params) {
  return forward(encode(cloud, params), h, t, params);
}

namespace {

// dObjective/dh2 for each pose objective, from head weights and outputs.
Eigen::VectorXd objective_seed_impl(const ForwardTape& ft, const ModelParams& params,
                               PoseObjective objective) {
  switch (objective) {
    case PoseObjective::Energy:
      return params.energy_w;
    case PoseObjective::LogFcProb:
      // d log sigma(l) / dl = 1 - sigma(l)
      return (1.0 - ft.out.fc_prob) * params.fc_w;
    case PoseObjective::LogNoCollision:
      // d log(1 - sigma(l_a)) / dl_a = -sigma(l_a)
      return -ft.out.col_probs[0] * params.col_w.row(0).transpose() -
             ft.out.col_probs[1] * params.col_w.row(1).transpose();
  }
  throw ConfigError("unknown pose objective");
}

}  // namespace

// Backprops a scalar (seeded at dObj/dh2) to the per-point feature
// gradients, returns C x 60.
Eigen::MatrixXd backprop_to_features(const ForwardTape& ft,
                                     const ModelParams& params,
                                     const Eigen::VectorXd& dh2) {
  const Eigen::VectorXd d2 = 1.0 - ft.h2.array().square();
  const Eigen::VectorXd ga2 = dh2.cwiseProduct(d2);
  const Eigen::VectorXd gh1 = params.trunk_w2.transpose() * ga2;
  const Eigen::VectorXd d1v = 1.0 - ft.h1.array().square();
  const Eigen::VectorXd ga1 = gh1.cwiseProduct(d1v);
  const Eigen::VectorXd gx = params.trunk_w1.transpose() * ga1;

  const int c = params.config.channels;
  Eigen::MatrixXd gz(c, 60);
  for (int i = 0; i < 60; ++i) gz.col(i) = gx.segment(i * c, c);
  return gz;
}

// Chain rule through the bilinear lookups: world-position gradient of the
// objective at each query point.
Eigen::MatrixXd feature_grads_to_positions(const ForwardTape& ft,
                                           const TriplaneFeatures& tp,
                                           const Eigen::MatrixXd& gz) {
  Eigen::MatrixXd u = Eigen::MatrixXd::Zero(3, 60);
  for (int i = 0; i < 60; ++i) {
    const BilinearRecord& rec = ft.bilinear[i];
    for (int p = 0; p < 3; ++p) {
      double du = 0, dv = 0;
      for (int k = 0; k < 4; ++k) {
        const double s = gz.col(i).dot(tp.planes[p].col(rec.corner[p][k]));
        du += rec.dw_du[p][k] * s;
        dv += rec.dw_dv[p][k] * s;
      }
      u(kPlaneAxes[p][0], i) += du;
      u(kPlaneAxes[p][1], i) += dv;
    }
  }
  return u;
}

// Sums per-point position gradients into the 12 twist coordinates:
// J^T u = [u ; y x u] per point, accumulated into the owning arm's block.
Twist12 positions_to_twist(const ForwardTape& ft, const Eigen::MatrixXd& u) {
  Twist12 grad = Twist12::Zero();
  for (int i = 0; i < 60; ++i) {
    const int block = i < 30 ? 0 : 6;
    const Vec3 ui = u.col(i);
    const Vec3& y = ft.query_world[i];
    grad.segment<3>(block) += ui;
    grad.segment<3>(block + 3) += y.cross(ui);
  }
  return grad;
}

namespace {

Twist12 twist_gradient(const ForwardTape& ft, const TriplaneFeatures& tp,
                       const ModelParams& params, PoseObjective objective) {
  const Eigen::MatrixXd gz =
      backprop_to_features(ft, params, objective_seed_impl(ft, params, objective));
  const Eigen::MatrixXd u = feature_grads_to_positions(ft, tp, gz);
  Twist12 g = positions_to_twist(ft, u);
  if (!g.allFinite()) {
    throw NonFiniteGradientError("pose gradient is not finite");
  }
  return g;
}

}  // namespace

Twist12 pose_gradient(const TriplaneFeatures& tp, const DualPose& h, int t,
                      const ModelParams& params, PoseObjective objective) {
  ForwardTape ft;
  forward(tp, h, t, params, &ft);
  return twist_gradient(ft, tp, params, objective);
}

Twist12 pose_gradient(const DualPose& h, const PointCloud& cloud, int t,
                      const ModelParams& params, PoseObjective objective) {
  return pose_gradient(encode(cloud, params), h, t, params, objective);
}

PoseGradients pose_gradients_all(const TriplaneFeatures& tp, const DualPose& h,
                                 int t, const ModelParams& params,
                                 bool with_collision) {
  ForwardTape ft;
  forward(tp, h, t, params, &ft);
  PoseGradients g;
  g.energy = twist_gradient(ft, tp, params, PoseObjective::Energy);
  g.log_fc = twist_gradient(ft, tp, params, PoseObjective::LogFcProb);
  if (with_collision) {
    g.log_no_col = twist_gradient(ft, tp, params, PoseObjective::LogNoCollision);
  }
  g.out = ft.out;
  return g;
}

}  // namespace dagdiff
