#pragma once

#include <array>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "core/ingest.hpp"

namespace gaitscreen::synth {

struct SeverityLevel {
  double asymmetry;    // odd steps carry (1 - asymmetry) of the step energy
  double motion_duty;  // fraction of time walking
  double step_rate_hz;
};

// Sensor groups in channel order: accel, gravity, gyro, attitude.
inline constexpr std::size_t kGroups = 4;

struct GaitSpec {
  double step_energy = 2.0;  // peak step burst amplitude, m/s^2
  double noise_sigma = 0.05;
  // Indexed by lameness score - 1; higher score means more asymmetry, less walking.
  std::array<SeverityLevel, ingest::kScoreLevels> severity_map{{
      {0.0, 0.60, 1.00},
      {0.2, 0.50, 0.90},
      {0.4, 0.42, 0.80},
      {0.6, 0.35, 0.70},
      {0.8, 0.28, 0.60},
  }};
  // Relative per-cow jitter of rate, energy, asymmetry and duty.
  double individual_variation = 0.10;
  // Groups whose gait follows the cow's score; the rest follow `neutral`.
  std::array<bool, kGroups> informative{true, true, true, true};
  SeverityLevel neutral{0.4, 0.45, 0.80};
  // Every group follows `neutral`: labels carry no signal.
  bool label_independent = false;
  // Mounting offsets of roll and yaw are drawn from +-this; near pi the
  // wrapped angles jump across the branch cut.
  double attitude_offset_range = 3.141592653589793;
  double sample_rate_hz = 100.0;
  std::size_t samples_per_file = 9000;
  std::uint64_t seed = 1;

  void validate() const;
};

GaitSpec default_spec();
// Healthy vs lame asymmetry gap >= 0.7, attitude kept clear of the wrap.
GaitSpec easy_spec();
// easy_spec with every cow following `neutral`.
GaitSpec null_spec();
// Class signal only in the gyro channels.
GaitSpec gyro_only_spec();

using ScoreCounts = std::array<std::size_t, ingest::kScoreLevels>;
ScoreCounts paper_shape_counts();  // 19/7/6/6/5
ScoreCounts easy_counts();         // 10 healthy, 10 lame

struct CowSignals {
  ingest::Signals signals;
  std::vector<bool> walking;
};

// Continuous recording of n_samples for one cow; deterministic per
// (spec.seed, cow_id).
CowSignals render_cow(const GaitSpec& spec, int score, std::size_t n_samples, const std::string& cow_id);

struct CowRequest {
  std::string cow_id;
  int score = 1;
  std::size_t n_files = 1;
  std::chrono::sys_seconds start_time{};
};

// Consecutive files of spec.samples_per_file samples each.
std::vector<ingest::SampleFile> gen_cow(const GaitSpec& spec, const CowRequest& request);

struct DatasetRequest {
  ScoreCounts cows_per_score{};
  std::size_t files_per_cow = 2;
  std::string out_dir;
  int significant_digits = 9;
  unsigned jobs = 1;
};

// Writes canonical-named sample files plus manifest.csv under out_dir.
ingest::DatasetManifest gen_dataset(const GaitSpec& spec, const DatasetRequest& request);

}  // namespace gaitscreen::synth
