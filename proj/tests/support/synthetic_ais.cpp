#include "synthetic_ais.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sigconf/rng.hpp"

namespace testsup {

namespace {

using sigconf::Rng;
using sigconf::VesselRecord;

constexpr double kPi = 3.14159265358979323846;
constexpr double kMetersPerDegLat = 111195.0;  // mean-radius arc length of one degree

void step_position(double& lat, double& lon, double heading, double meters) {
  lat += meters * std::cos(heading) / kMetersPerDegLat;
  lon += meters * std::sin(heading) / (kMetersPerDegLat * std::cos(lat * kPi / 180.0));
}

// A voyage of a few gently curving legs: heading and speed drift slowly,
// turns between legs are spread over many reports, and reports are
// occasionally missed so the time differences carry real variation.
VesselRecord smooth_voyage(Rng& rng, const std::string& id, double base_epoch) {
  VesselRecord rec;
  rec.vessel_id = id;
  rec.length_m = rng.uniform(150.0, 300.0);
  rec.track.id = id;
  rec.track.dim = 2;

  double lat = 36.0 + rng.uniform(-1.0, 1.0);
  double lon = -75.0 + rng.uniform(-1.0, 1.0);
  double heading = rng.uniform(0.0, 2.0 * kPi);
  double curvature = rng.uniform(-0.006, 0.006);  // radians per report
  double speed = rng.uniform(6.0, 14.0);          // m/s
  double target_speed = speed;
  const double interval = rng.uniform(20.0, 50.0);
  std::size_t leg_left = 40 + rng.below(61);
  const std::size_t n = 160 + rng.below(141);
  double t = base_epoch;
  for (std::size_t i = 0; i < n; ++i) {
    rec.track.data.push_back(lat);
    rec.track.data.push_back(lon);
    rec.track.timestamps.push_back(t);
    if (leg_left-- == 0) {
      curvature = rng.uniform(-0.006, 0.006);
      target_speed = rng.uniform(6.0, 14.0);
      heading += rng.uniform(-0.6, 0.6);  // gentle course change into the next leg
      leg_left = 40 + rng.below(61);
    }
    heading += curvature + rng.uniform(-0.003, 0.003);
    speed += 0.05 * (target_speed - speed) + rng.uniform(-0.2, 0.2);
    speed = std::clamp(speed, 5.0, 15.0);
    double dt = interval * rng.uniform(0.85, 1.15);
    if (rng.below(10) == 0) dt *= 2.0;  // dropped report
    step_position(lat, lon, heading, speed * dt);
    t += dt;
  }
  return rec;
}

VesselRecord jittery_path(Rng& rng, const std::string& id, double base_epoch) {
  VesselRecord rec;
  rec.vessel_id = id;
  rec.length_m = rng.uniform(10.0, 45.0);
  rec.track.id = id;
  rec.track.dim = 2;

  double lat = 36.0 + rng.uniform(-1.0, 1.0);
  double lon = -75.0 + rng.uniform(-1.0, 1.0);
  double base_heading = rng.uniform(0.0, 2.0 * kPi);
  const std::size_t n = 200 + rng.below(151);
  double t = base_epoch;
  for (std::size_t i = 0; i < n; ++i) {
    rec.track.data.push_back(lat);
    rec.track.data.push_back(lon);
    rec.track.timestamps.push_back(t);
    base_heading += rng.uniform(-0.05, 0.05);
    const double heading = base_heading + rng.uniform(-1.5, 1.5);  // sharp turn
    const double speed = rng.uniform(2.0, 12.0);
    const double dt = rng.uniform(10.0, 60.0);
    step_position(lat, lon, heading, speed * dt);
    t += dt;
  }
  return rec;
}

}  // namespace

std::vector<VesselRecord> synthetic_ais(const SyntheticAisConfig& config) {
  std::vector<VesselRecord> out;
  out.reserve(config.normal_vessels + config.anomaly_vessels);
  for (std::size_t i = 0; i < config.normal_vessels; ++i) {
    Rng rng(Rng::derive(config.seed, i));
    out.push_back(smooth_voyage(rng, "N" + std::to_string(i), 1.6e9 + 1e5 * double(i)));
  }
  for (std::size_t i = 0; i < config.anomaly_vessels; ++i) {
    Rng rng(Rng::derive(config.seed, 1'000'000 + i));
    out.push_back(
        jittery_path(rng, "A" + std::to_string(i), 1.7e9 + 1e5 * double(i)));
  }
  return out;
}

}  // namespace testsup
