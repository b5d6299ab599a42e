#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "posegraph/score_matrix.hpp"

namespace posegraph {

// Pinhole camera with the convention x_cam = R * X_world + t. A point is
// visible when its depth is positive and its projection lands inside
// [0, width] x [0, height].
struct CameraIntrinsics {
  double focal = 500.0;
  double cx = 500.0;
  double cy = 500.0;
  double width = 1000.0;
  double height = 1000.0;
};

struct Camera {
  std::string name;
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();
  CameraIntrinsics intrinsics;
};

// Builds a camera at `position` whose optical axis points along `forward`.
// World up is +z; throws std::invalid_argument when forward is (anti)parallel
// to up or near zero.
Camera make_camera(const std::string& name, const Eigen::Vector3d& position,
                   const Eigen::Vector3d& forward,
                   const CameraIntrinsics& intrinsics);

struct SyntheticScene {
  std::vector<Camera> cameras;
  std::vector<Eigen::Vector3d> points;
  // Per camera, the sorted indices of points that project inside the image
  // with positive depth.
  std::vector<std::vector<int>> visibility;

  int num_cameras() const { return static_cast<int>(cameras.size()); }
  int num_points() const { return static_cast<int>(points.size()); }
  std::vector<std::string> camera_names() const;
};

enum class SceneLayout { kRing, kCorridor, kTwoCluster };

SceneLayout parse_layout(const std::string& name);
std::string layout_name(SceneLayout layout);

// Deterministic desk-scale scene generator. Layouts:
//   ring        cameras on a circle looking outward at a point cylinder;
//               covisibility is banded in angular distance
//   corridor    cameras along a line looking at a textured wall; banded
//               covisibility in camera index
//   two-cluster two corridor segments separated by a gap that only a sparse
//               set of bridge points spans; block-structured covisibility
SyntheticScene generate_synthetic_scene(std::uint64_t seed, int num_cameras,
                                        int num_points, SceneLayout layout);

// True when the point has positive depth and projects inside the image;
// writes the pixel when requested.
bool project_point(const Camera& camera, const Eigen::Vector3d& point,
                   Eigen::Vector2d* pixel = nullptr);

// Size of the visibility intersection; i == j gives |visibility(i)|.
int count_covisible(const SyntheticScene& scene, int i, int j);

struct NoiseConfig {
  double outlier_rate = 0.2;
  double detection_rate = 0.9;
  // Relative spread of a deterministic per-pair perturbation; 0 disables it.
  double jitter = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
};

// Deterministic stand-in for two-view verification:
// u = round(covisible * (1 - outlier_rate) * detection_rate), optionally
// jittered, clamped to [0, covisible].
int simulate_inliers(const SyntheticScene& scene, int i, int j,
                     const NoiseConfig& noise);

struct NormalizeConfig {
  double breakpoint = 1000.0;
  double low_fraction = 0.8;
  double cap = 10000.0;

  void validate() const;
};

// Piecewise-linear count squashing: counts up to `breakpoint` map onto
// [0, low_fraction], larger counts saturate toward 1 at `cap`.
double normalize_count(double count, const NormalizeConfig& config = {});

Eigen::MatrixXd covisibility_counts(const SyntheticScene& scene);
Eigen::MatrixXd inlier_counts(const SyntheticScene& scene,
                              const NoiseConfig& noise);

// Elementwise 0.5 * (normalize(u) + normalize(v)).
ScoreMatrix combine_scores(const Eigen::MatrixXd& u, const Eigen::MatrixXd& v,
                           const NormalizeConfig& config = {});

ScoreMatrix ground_truth_ranks(const SyntheticScene& scene,
                               const NoiseConfig& noise = {},
                               const NormalizeConfig& config = {});

// Masks every pair whose inlier count falls below `min_inliers`; returns the
// number of pairs masked.
int apply_min_inlier_filter(ScoreMatrix* ranks, const Eigen::MatrixXd& u,
                            int min_inliers);

}  // namespace posegraph
