#include "posegraph/pose_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "posegraph/error.hpp"

namespace posegraph {

PoseSet parse_pose_text(const std::string& text, const std::string& origin) {
  PoseSet poses;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream fields(line);
    PoseRecord record;
    double qw, qx, qy, qz;
    int registered;
    if (!(fields >> record.name >> qw >> qx >> qy >> qz >>
          record.translation.x() >> record.translation.y() >>
          record.translation.z() >> registered)) {
      throw FormatError(origin + ": malformed pose at line " +
                        std::to_string(line_no));
    }
    std::string extra;
    if (fields >> extra) {
      throw FormatError(origin + ": trailing fields at line " +
                        std::to_string(line_no));
    }
    if (registered != 0 && registered != 1) {
      throw FormatError(origin + ": registered flag must be 0 or 1 at line " +
                        std::to_string(line_no));
    }
    record.rotation = Eigen::Quaterniond(qw, qx, qy, qz);
    const double norm = record.rotation.norm();
    if (!std::isfinite(norm) || norm < 1e-9) {
      throw FormatError(origin + ": degenerate quaternion at line " +
                        std::to_string(line_no));
    }
    // Unit-norm input is kept bit-for-bit so write->read->write round-trips.
    if (std::abs(norm - 1.0) > 1e-12) record.rotation.normalize();
    record.registered = registered == 1;
    poses.push_back(std::move(record));
  }
  return poses;
}

std::string format_pose_text(const PoseSet& poses) {
  std::string out;
  char buf[256];
  for (const PoseRecord& pose : poses) {
    std::snprintf(buf, sizeof(buf),
                  " %.17g %.17g %.17g %.17g %.17g %.17g %.17g %d\n",
                  pose.rotation.w(), pose.rotation.x(), pose.rotation.y(),
                  pose.rotation.z(), pose.translation.x(),
                  pose.translation.y(), pose.translation.z(),
                  pose.registered ? 1 : 0);
    out += pose.name;
    out += buf;
  }
  return out;
}

PoseSet read_pose_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open pose file: " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_pose_text(buffer.str(), path.string());
}

void write_pose_file(const std::filesystem::path& path, const PoseSet& poses) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write pose file: " + path.string());
  out << format_pose_text(poses);
  if (!out) throw FormatError("failed writing pose file: " + path.string());
}

}  // namespace posegraph
