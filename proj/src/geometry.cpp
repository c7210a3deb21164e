#include "terrafollow/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "terrafollow/io_util.hpp"

namespace terrafollow {

PoseTrack::PoseTrack(std::vector<PoseSample> samples, double max_gap)
    : samples_(std::move(samples)), max_gap_(max_gap) {
  for (size_t i = 1; i < samples_.size(); ++i) {
    if (!(samples_[i].timestamp > samples_[i - 1].timestamp)) {
      throw std::invalid_argument("pose track timestamps must be strictly increasing");
    }
  }
}

std::optional<RigidTransform> PoseTrack::try_pose_at(double t, PoseLookupError* err) const {
  auto set_err = [&](PoseLookupError e) {
    if (err) *err = e;
  };
  set_err(PoseLookupError::None);
  if (samples_.empty() || t < t_first() || t > t_last()) {
    set_err(PoseLookupError::OutOfRange);
    return std::nullopt;
  }
  auto it = std::lower_bound(samples_.begin(), samples_.end(), t,
                             [](const PoseSample& s, double v) { return s.timestamp < v; });
  if (it != samples_.end() && it->timestamp == t) return it->body_to_world;

  const PoseSample& hi = *it;
  const PoseSample& lo = *(it - 1);
  double gap = hi.timestamp - lo.timestamp;
  if (gap > max_gap_) {
    set_err(PoseLookupError::GapTooLarge);
    return std::nullopt;
  }
  double u = (t - lo.timestamp) / gap;

  Eigen::Quaterniond qa(lo.body_to_world.rotation);
  Eigen::Quaterniond qb(hi.body_to_world.rotation);
  Eigen::Quaterniond q = qa.slerp(u, qb);

  RigidTransform out;
  out.rotation = q.toRotationMatrix();
  out.translation =
      (1.0 - u) * lo.body_to_world.translation + u * hi.body_to_world.translation;
  return out;
}

RigidTransform PoseTrack::pose_at(double t) const {
  PoseLookupError err;
  auto pose = try_pose_at(t, &err);
  if (pose) return *pose;
  if (err == PoseLookupError::GapTooLarge) {
    throw PoseError(err, "pose gap exceeds max_gap at t=" + std::to_string(t));
  }
  throw PoseError(PoseLookupError::OutOfRange,
                  "pose query t=" + std::to_string(t) + " outside track span");
}

PoseTrack read_pose_file(const std::string& path, double max_gap) {
  std::ifstream in(path);
  if (!in) throw MissingFile(path);
  std::vector<PoseSample> samples;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    double t, qx, qy, qz, qw, px, py, pz;
    if (!(ss >> t >> qx >> qy >> qz >> qw >> px >> py >> pz)) {
      throw MalformedRecord(path, line_no, "expected `t qx qy qz qw px py pz`");
    }
    Eigen::Quaterniond q(qw, qx, qy, qz);
    if (std::abs(q.norm() - 1.0) > 1e-6) {
      throw MalformedRecord(path, line_no, "quaternion is not unit length");
    }
    samples.push_back({t, RigidTransform::from_quaternion(q, {px, py, pz})});
  }
  return PoseTrack(std::move(samples), max_gap);
}

void write_pose_file(const std::string& path, const PoseTrack& track) {
  std::string body = "# t qx qy qz qw px py pz\n";
  for (const auto& s : track.samples()) {
    Eigen::Quaterniond q(s.body_to_world.rotation);
    if (q.w() < 0) q.coeffs() = -q.coeffs();  // canonical sign for stable files
    const Vec3& p = s.body_to_world.translation;
    body += format_double(s.timestamp);
    for (double v : {q.x(), q.y(), q.z(), q.w(), p.x(), p.y(), p.z()}) {
      body += ' ';
      body += format_double(v);
    }
    body += '\n';
  }
  write_text_atomic(path, body);
}

}  // namespace terrafollow
