#pragma once

#include <Eigen/Dense>
#include <Eigen/Geometry>

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace terrafollow {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

constexpr double kPi = 3.14159265358979323846;

inline double deg2rad(double deg) { return deg * kPi / 180.0; }
inline double rad2deg(double rad) { return rad * 180.0 / kPi; }

/// Rigid body transform: p_out = rotation * p_in + translation.
/// Rotation is kept as an orthonormal matrix; composition is exact
/// matrix/vector arithmetic, no renormalization between calls.
struct RigidTransform {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  static RigidTransform identity() { return {}; }

  static RigidTransform from_quaternion(const Eigen::Quaterniond& q, const Vec3& t) {
    return {q.normalized().toRotationMatrix(), t};
  }

  static RigidTransform rotation_z(double angle_rad) {
    return {Eigen::AngleAxisd(angle_rad, Vec3::UnitZ()).toRotationMatrix(), Vec3::Zero()};
  }

  Vec3 apply(const Vec3& p) const { return rotation * p + translation; }

  RigidTransform inverse() const {
    Mat3 rt = rotation.transpose();
    return {rt, -(rt * translation)};
  }

  /// Orthonormality defect: max of |R^T R - I| entries and |det(R) - 1|.
  double orthonormality_error() const {
    double e = (rotation.transpose() * rotation - Mat3::Identity()).cwiseAbs().maxCoeff();
    return std::max(e, std::abs(rotation.determinant() - 1.0));
  }
  bool is_orthonormal(double tol = 1e-9) const { return orthonormality_error() <= tol; }
};

/// Applying the result equals applying b first, then a.
inline RigidTransform compose(const RigidTransform& a, const RigidTransform& b) {
  return {a.rotation * b.rotation, a.rotation * b.translation + a.translation};
}

inline Vec3 transform_point(const RigidTransform& t, const Vec3& p) { return t.apply(p); }

/// Encoder-quantized rotation angle of the radar about the motor spin axis.
struct EncoderAngle {
  double theta = 0.0;  // radians, [0, 2*pi)

  static EncoderAngle from_step_index(long index, double step_rad) {
    long per_rev = static_cast<long>(std::llround(2.0 * kPi / step_rad));
    long wrapped = ((index % per_rev) + per_rev) % per_rev;
    return {static_cast<double>(wrapped) * step_rad};
  }
};

/// Rotation of the radar frame into the motor frame at encoder angle theta.
/// The spin axis is the motor +z axis.
inline RigidTransform encoder_spin(const EncoderAngle& theta) {
  return RigidTransform::rotation_z(theta.theta);
}

/// Full registration chain: radar -> motor (encoder spin) -> body (mount)
/// -> world (UAV pose).
inline Vec3 radar_to_world(const Vec3& p_radar, const EncoderAngle& theta,
                           const RigidTransform& mount, const RigidTransform& body_pose) {
  return compose(body_pose, compose(mount, encoder_spin(theta))).apply(p_radar);
}

struct PoseSample {
  double timestamp = 0.0;  // seconds, monotonic within a track
  RigidTransform body_to_world;
};

enum class PoseLookupError { None, OutOfRange, GapTooLarge };

class PoseError : public std::runtime_error {
 public:
  PoseError(PoseLookupError kind, const std::string& msg)
      : std::runtime_error(msg), kind_(kind) {}
  PoseLookupError kind() const { return kind_; }

 private:
  PoseLookupError kind_;
};

/// Timestamped sequence of body poses with interpolating lookup.
/// Translation is interpolated linearly, rotation along the geodesic
/// (constant angular velocity) between the bracketing samples.
class PoseTrack {
 public:
  PoseTrack() = default;
  explicit PoseTrack(std::vector<PoseSample> samples, double max_gap = 0.1);

  const std::vector<PoseSample>& samples() const { return samples_; }
  double max_gap() const { return max_gap_; }
  bool empty() const { return samples_.empty(); }
  double t_first() const { return samples_.front().timestamp; }
  double t_last() const { return samples_.back().timestamp; }

  /// Interpolated pose at t. Exact sample timestamps return the stored
  /// sample unchanged.
  std::optional<RigidTransform> try_pose_at(double t, PoseLookupError* err = nullptr) const;

  /// Throwing variant of try_pose_at.
  RigidTransform pose_at(double t) const;

 private:
  std::vector<PoseSample> samples_;
  double max_gap_ = 0.1;
};

/// Pose log: one sample per line, `t qx qy qz qw px py pz`, unit quaternion
/// (Hamilton, body-to-world), `#` comment lines ignored.
PoseTrack read_pose_file(const std::string& path, double max_gap = 0.1);
void write_pose_file(const std::string& path, const PoseTrack& track);

class MissingFile : public std::runtime_error {
 public:
  explicit MissingFile(const std::string& path)
      : std::runtime_error("missing file: " + path), path_(path) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

class MalformedRecord : public std::runtime_error {
 public:
  MalformedRecord(const std::string& path, long line, const std::string& what)
      : std::runtime_error(path + ":" + std::to_string(line) + ": " + what),
        path_(path), line_(line) {}
  const std::string& path() const { return path_; }
  long line() const { return line_; }

 private:
  std::string path_;
  long line_;
};

}  // namespace terrafollow
