#include "posegraph/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace posegraph {

namespace {

std::string camera_label(int index) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "cam%03d", index);
  return buf;
}

void build_visibility(SyntheticScene* scene) {
  scene->visibility.assign(scene->cameras.size(), {});
  for (std::size_t c = 0; c < scene->cameras.size(); ++c) {
    auto& visible = scene->visibility[c];
    for (int p = 0; p < scene->num_points(); ++p) {
      if (project_point(scene->cameras[c], scene->points[p])) {
        visible.push_back(p);
      }
    }
  }
}

std::uint64_t mix_pair_seed(std::uint64_t seed, int i, int j) {
  const std::uint64_t a = static_cast<std::uint64_t>(std::min(i, j));
  const std::uint64_t b = static_cast<std::uint64_t>(std::max(i, j));
  std::uint64_t h = seed ^ 0x9e3779b97f4a7c15ULL;
  h ^= (a + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2));
  h *= 0xff51afd7ed558ccdULL;
  h ^= (b + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2));
  h *= 0xc4ceb9fe1a85ec53ULL;
  return h;
}

SyntheticScene ring_scene(std::mt19937_64& rng, int num_cameras,
                          int num_points) {
  constexpr double kCameraRadius = 3.0;
  constexpr double kPointRadius = 9.0;
  SyntheticScene scene;
  CameraIntrinsics intr;
  intr.focal = 400.0;
  for (int i = 0; i < num_cameras; ++i) {
    const double theta = 2.0 * M_PI * i / num_cameras;
    const Eigen::Vector3d forward(std::cos(theta), std::sin(theta), 0.0);
    scene.cameras.push_back(
        make_camera(camera_label(i), kCameraRadius * forward, forward, intr));
  }
  std::uniform_real_distribution<double> angle(0.0, 2.0 * M_PI);
  std::uniform_real_distribution<double> radius(kPointRadius - 0.5,
                                                kPointRadius + 0.5);
  std::uniform_real_distribution<double> height(-3.0, 3.0);
  for (int p = 0; p < num_points; ++p) {
    const double phi = angle(rng);
    const double r = radius(rng);
    scene.points.emplace_back(r * std::cos(phi), r * std::sin(phi),
                              height(rng));
  }
  return scene;
}

SyntheticScene corridor_scene(std::mt19937_64& rng, int num_cameras,
                              int num_points) {
  constexpr double kWallY = 6.0;
  SyntheticScene scene;
  CameraIntrinsics intr;
  intr.focal = 750.0;
  for (int i = 0; i < num_cameras; ++i) {
    scene.cameras.push_back(make_camera(camera_label(i),
                                        Eigen::Vector3d(i, 0.0, 0.0),
                                        Eigen::Vector3d(0.0, 1.0, 0.0), intr));
  }
  std::uniform_real_distribution<double> along(-4.0, num_cameras - 1 + 4.0);
  std::uniform_real_distribution<double> depth(kWallY - 0.5, kWallY + 0.5);
  std::uniform_real_distribution<double> height(-2.0, 2.0);
  for (int p = 0; p < num_points; ++p) {
    scene.points.emplace_back(along(rng), depth(rng), height(rng));
  }
  return scene;
}

SyntheticScene two_cluster_scene(std::mt19937_64& rng, int num_cameras,
                                 int num_points) {
  constexpr double kWallY = 6.0;
  constexpr double kGap = 6.0;
  const int left = (num_cameras + 1) / 2;
  const int right = num_cameras - left;
  SyntheticScene scene;
  CameraIntrinsics intr;
  intr.focal = 750.0;
  for (int i = 0; i < num_cameras; ++i) {
    const double x = i < left ? static_cast<double>(i)
                              : static_cast<double>(i - 1) + kGap;
    scene.cameras.push_back(make_camera(camera_label(i),
                                        Eigen::Vector3d(x, 0.0, 0.0),
                                        Eigen::Vector3d(0.0, 1.0, 0.0), intr));
  }
  // Dense wall texture behind each camera group, plus a thin set of bridge
  // points inside the gap that only the boundary cameras of both groups see.
  const double left_hi = left - 1.0;
  const double right_lo = left - 1.0 + kGap;
  const double right_hi = right_lo + std::max(right - 1, 0);
  const int bridge = std::max(2, num_points / 40);
  const int dense = num_points - bridge;
  const int dense_left = dense / 2;
  std::uniform_real_distribution<double> depth(kWallY - 0.5, kWallY + 0.5);
  std::uniform_real_distribution<double> height(-2.0, 2.0);
  std::uniform_real_distribution<double> left_along(-4.0, left_hi + 1.0);
  std::uniform_real_distribution<double> right_along(right_lo - 1.0,
                                                     right_hi + 4.0);
  std::uniform_real_distribution<double> bridge_along(left_hi + 1.0,
                                                      right_lo - 1.0);
  for (int p = 0; p < dense_left; ++p) {
    scene.points.emplace_back(left_along(rng), depth(rng), height(rng));
  }
  for (int p = dense_left; p < dense; ++p) {
    scene.points.emplace_back(right_along(rng), depth(rng), height(rng));
  }
  for (int p = 0; p < bridge; ++p) {
    scene.points.emplace_back(bridge_along(rng), depth(rng), height(rng));
  }
  return scene;
}

}  // namespace

std::vector<std::string> SyntheticScene::camera_names() const {
  std::vector<std::string> names;
  names.reserve(cameras.size());
  for (const Camera& c : cameras) names.push_back(c.name);
  return names;
}

Camera make_camera(const std::string& name, const Eigen::Vector3d& position,
                   const Eigen::Vector3d& forward,
                   const CameraIntrinsics& intrinsics) {
  const double norm = forward.norm();
  if (norm < 1e-12) {
    throw std::invalid_argument("make_camera: zero forward direction");
  }
  const Eigen::Vector3d f = forward / norm;
  const Eigen::Vector3d up(0.0, 0.0, 1.0);
  Eigen::Vector3d right = f.cross(up);
  if (right.norm() < 1e-9) {
    throw std::invalid_argument("make_camera: forward parallel to world up");
  }
  right.normalize();
  const Eigen::Vector3d down = f.cross(right);
  Camera camera;
  camera.name = name;
  camera.rotation.row(0) = right;
  camera.rotation.row(1) = down;
  camera.rotation.row(2) = f;
  camera.translation = -camera.rotation * position;
  camera.intrinsics = intrinsics;
  return camera;
}

SceneLayout parse_layout(const std::string& name) {
  if (name == "ring") return SceneLayout::kRing;
  if (name == "corridor") return SceneLayout::kCorridor;
  if (name == "two-cluster") return SceneLayout::kTwoCluster;
  throw std::invalid_argument("unknown layout: " + name);
}

std::string layout_name(SceneLayout layout) {
  switch (layout) {
    case SceneLayout::kRing:
      return "ring";
    case SceneLayout::kCorridor:
      return "corridor";
    case SceneLayout::kTwoCluster:
      return "two-cluster";
  }
  throw std::invalid_argument("unknown layout enum value");
}

SyntheticScene generate_synthetic_scene(std::uint64_t seed, int num_cameras,
                                        int num_points, SceneLayout layout) {
  if (num_cameras < 2) {
    throw std::invalid_argument(
        "generate_synthetic_scene: need at least 2 cameras");
  }
  if (num_points < 1) {
    throw std::invalid_argument(
        "generate_synthetic_scene: need at least 1 point");
  }
  std::mt19937_64 rng(seed ^ 0x5deece66dULL);
  SyntheticScene scene;
  switch (layout) {
    case SceneLayout::kRing:
      scene = ring_scene(rng, num_cameras, num_points);
      break;
    case SceneLayout::kCorridor:
      scene = corridor_scene(rng, num_cameras, num_points);
      break;
    case SceneLayout::kTwoCluster:
      scene = two_cluster_scene(rng, num_cameras, num_points);
      break;
  }
  build_visibility(&scene);
  return scene;
}

bool project_point(const Camera& camera, const Eigen::Vector3d& point,
                   Eigen::Vector2d* pixel) {
  const Eigen::Vector3d x = camera.rotation * point + camera.translation;
  if (x.z() <= 0.0) return false;
  const CameraIntrinsics& intr = camera.intrinsics;
  const double px = intr.focal * x.x() / x.z() + intr.cx;
  const double py = intr.focal * x.y() / x.z() + intr.cy;
  if (pixel) *pixel = Eigen::Vector2d(px, py);
  return px >= 0.0 && px <= intr.width && py >= 0.0 && py <= intr.height;
}

int count_covisible(const SyntheticScene& scene, int i, int j) {
  const int n = scene.num_cameras();
  if (i < 0 || j < 0 || i >= n || j >= n) {
    throw std::invalid_argument("count_covisible: camera index out of range");
  }
  if (i == j) return static_cast<int>(scene.visibility[i].size());
  const auto& a = scene.visibility[i];
  const auto& b = scene.visibility[j];
  std::size_t ia = 0, ib = 0;
  int shared = 0;
  while (ia < a.size() && ib < b.size()) {
    if (a[ia] < b[ib]) {
      ++ia;
    } else if (b[ib] < a[ia]) {
      ++ib;
    } else {
      ++shared;
      ++ia;
      ++ib;
    }
  }
  return shared;
}

void NoiseConfig::validate() const {
  if (!(outlier_rate >= 0.0 && outlier_rate < 1.0)) {
    throw std::invalid_argument("NoiseConfig: outlier_rate must be in [0,1)");
  }
  if (!(detection_rate >= 0.0 && detection_rate <= 1.0)) {
    throw std::invalid_argument(
        "NoiseConfig: detection_rate must be in [0,1]");
  }
  if (!(jitter >= 0.0 && jitter <= 1.0)) {
    throw std::invalid_argument("NoiseConfig: jitter must be in [0,1]");
  }
}

int simulate_inliers(const SyntheticScene& scene, int i, int j,
                     const NoiseConfig& noise) {
  noise.validate();
  const int covisible = count_covisible(scene, i, j);
  double expected =
      covisible * (1.0 - noise.outlier_rate) * noise.detection_rate;
  if (noise.jitter > 0.0) {
    std::mt19937_64 rng(mix_pair_seed(noise.seed, i, j));
    std::uniform_real_distribution<double> factor(1.0 - noise.jitter,
                                                  1.0 + noise.jitter);
    expected *= factor(rng);
  }
  const long long u = std::llround(expected);
  return static_cast<int>(std::clamp<long long>(u, 0, covisible));
}

void NormalizeConfig::validate() const {
  if (!(breakpoint > 0.0)) {
    throw std::invalid_argument("NormalizeConfig: breakpoint must be > 0");
  }
  if (!(low_fraction > 0.0 && low_fraction < 1.0)) {
    throw std::invalid_argument(
        "NormalizeConfig: low_fraction must be in (0,1)");
  }
  if (!(cap > breakpoint)) {
    throw std::invalid_argument("NormalizeConfig: cap must exceed breakpoint");
  }
}

double normalize_count(double count, const NormalizeConfig& config) {
  config.validate();
  if (count <= 0.0) return 0.0;
  if (count <= config.breakpoint) {
    return config.low_fraction * (count / config.breakpoint);
  }
  const double over =
      std::min(1.0, (count - config.breakpoint) / (config.cap - config.breakpoint));
  return config.low_fraction + (1.0 - config.low_fraction) * over;
}

Eigen::MatrixXd covisibility_counts(const SyntheticScene& scene) {
  const int n = scene.num_cameras();
  Eigen::MatrixXd v = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double c = count_covisible(scene, i, j);
      v(i, j) = c;
      v(j, i) = c;
    }
  }
  return v;
}

Eigen::MatrixXd inlier_counts(const SyntheticScene& scene,
                              const NoiseConfig& noise) {
  const int n = scene.num_cameras();
  Eigen::MatrixXd u = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double c = simulate_inliers(scene, i, j, noise);
      u(i, j) = c;
      u(j, i) = c;
    }
  }
  return u;
}

ScoreMatrix combine_scores(const Eigen::MatrixXd& u, const Eigen::MatrixXd& v,
                           const NormalizeConfig& config) {
  config.validate();
  if (u.rows() != u.cols() || v.rows() != v.cols() || u.rows() != v.rows()) {
    throw std::invalid_argument("combine_scores: dimension mismatch");
  }
  const int n = static_cast<int>(u.rows());
  ScoreMatrix ranks(n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      ranks.set(i, j, 0.5 * (normalize_count(u(i, j), config) +
                             normalize_count(v(i, j), config)));
    }
  }
  return ranks;
}

ScoreMatrix ground_truth_ranks(const SyntheticScene& scene,
                               const NoiseConfig& noise,
                               const NormalizeConfig& config) {
  return combine_scores(inlier_counts(scene, noise),
                        covisibility_counts(scene), config);
}

int apply_min_inlier_filter(ScoreMatrix* ranks, const Eigen::MatrixXd& u,
                            int min_inliers) {
  if (!ranks) throw std::invalid_argument("apply_min_inlier_filter: null");
  const int n = ranks->size();
  if (u.rows() != n || u.cols() != n) {
    throw std::invalid_argument("apply_min_inlier_filter: dimension mismatch");
  }
  int masked = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (!ranks->masked(i, j) && u(i, j) < min_inliers) {
        ranks->mask(i, j);
        ++masked;
      }
    }
  }
  return masked;
}

}  // namespace posegraph
