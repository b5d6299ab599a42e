#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Geometry>

namespace posegraph {

// Camera pose with the convention x_cam = R * X_world + t.
struct PoseRecord {
  std::string name;
  Eigen::Quaterniond rotation = Eigen::Quaterniond::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();
  bool registered = true;
};

using PoseSet = std::vector<PoseRecord>;

// Text format, one camera per line:
//   name qw qx qy qz tx ty tz registered
// whitespace-delimited, registered is 0 or 1. Quaternions are normalized on
// read (already-unit input is kept bitwise so files round-trip); a
// non-normalizable quaternion is a format error.
PoseSet read_pose_file(const std::filesystem::path& path);
void write_pose_file(const std::filesystem::path& path, const PoseSet& poses);

PoseSet parse_pose_text(const std::string& text, const std::string& origin);
std::string format_pose_text(const PoseSet& poses);

}  // namespace posegraph
