#include "core/synth.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>

#include "core/error.hpp"
#include "core/parallel.hpp"
#include "core/text.hpp"

namespace gaitscreen::synth {

namespace {

constexpr double kGravity = 9.81;
constexpr double kPi = std::numbers::pi;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Engine-defined sequences only, so streams match across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * kPi * u2);
    has_spare_ = true;
    return r * std::cos(2.0 * kPi * u2);
  }
  std::uint64_t next() { return engine_(); }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

struct StreamParams {
  double asymmetry;
  double duty;
  double rate;
  double energy;
};

StreamParams jitter(const SeverityLevel& level, const GaitSpec& spec, Rng& rng) {
  const double v = spec.individual_variation;
  StreamParams p;
  p.rate = std::max(0.2, level.step_rate_hz * (1.0 + v * rng.normal()));
  p.energy = std::max(0.05, spec.step_energy * (1.0 + v * rng.normal()));
  p.asymmetry = std::clamp(level.asymmetry + 0.5 * v * rng.normal(), 0.0, 1.0);
  p.duty = level.motion_duty <= 0.0 ? 0.0 : std::clamp(level.motion_duty + 0.5 * v * rng.normal(), 0.02, 1.0);
  return p;
}

// Step-driven motion of one gait stream: damped accelerometer bursts, a
// half-sine gyroscope swing per step and a tilt bump for the gravity vector.
struct Stream {
  std::array<std::vector<double>, 3> accel;
  std::array<std::vector<double>, 3> gyro;
  std::vector<double> sway;
  std::vector<bool> walking;
};

Stream render_stream(const StreamParams& p, std::size_t n, double fs, Rng& rng) {
  Stream s;
  for (auto& a : s.accel) a.assign(n, 0.0);
  for (auto& g : s.gyro) g.assign(n, 0.0);
  s.sway.assign(n, 0.0);
  s.walking.assign(n, false);

  constexpr std::array<double, 3> accel_gain{1.0, 0.5, 0.8};
  constexpr std::array<double, 3> accel_phase{0.0, 1.1, 2.3};
  constexpr std::array<double, 3> gyro_gain{0.3, 1.0, 0.4};
  constexpr double burst_hz = 6.0;
  constexpr double burst_decay_s = 0.08;
  constexpr double swing_s = 0.35;

  auto add_step = [&](double t0, double amp) {
    const auto start = static_cast<std::size_t>(std::ceil(t0 * fs));
    const auto stop = std::min(n, static_cast<std::size_t>(std::ceil((t0 + 0.6) * fs)));
    for (std::size_t i = start; i < stop; ++i) {
      const double tau = static_cast<double>(i) / fs - t0;
      const double env = amp * std::exp(-tau / burst_decay_s);
      for (int a = 0; a < 3; ++a) s.accel[a][i] += accel_gain[a] * env * std::sin(2.0 * kPi * burst_hz * tau + accel_phase[a]);
      if (tau < swing_s) {
        const double swing = 0.4 * amp * std::sin(kPi * tau / swing_s);
        for (int a = 0; a < 3; ++a) s.gyro[a][i] += gyro_gain[a] * swing;
        s.sway[i] += 0.02 * amp * std::sin(kPi * tau / swing_s);
      }
    }
  };

  const double duration = static_cast<double>(n) / fs;
  double t = 0.0;
  bool walking = p.duty >= 1.0 || (p.duty > 0.0 && rng.uniform() < p.duty);
  std::size_t step_index = 0;
  while (t < duration) {
    const double walk_len = rng.uniform(10.0, 30.0);
    if (walking) {
      const double end = std::min(duration, t + walk_len);
      for (auto i = static_cast<std::size_t>(t * fs); i < std::min(n, static_cast<std::size_t>(end * fs)); ++i)
        s.walking[i] = true;
      double ts = t + rng.uniform(0.0, 1.0 / p.rate);
      while (ts < end) {
        const double limp = (step_index % 2 == 1) ? (1.0 - p.asymmetry) : 1.0;
        add_step(ts, p.energy * limp * (1.0 + 0.1 * rng.normal()));
        ++step_index;
        ts += (1.0 / p.rate) * (1.0 + 0.05 * rng.normal());
      }
      t = end;
      walking = p.duty < 1.0 ? false : true;
    } else {
      if (p.duty <= 0.0) break;
      const double mean_rest = 20.0 * (1.0 - p.duty) / p.duty;
      t += mean_rest * rng.uniform(0.5, 1.5);
      walking = true;
    }
  }
  return s;
}

}  // namespace

void GaitSpec::validate() const {
  auto bad = [](const std::string& what) { fail(ErrorCode::BadSpec, what); };
  if (!(step_energy >= 0.0)) bad("step_energy must be >= 0");
  if (!(noise_sigma >= 0.0)) bad("noise_sigma must be >= 0");
  if (!(individual_variation >= 0.0)) bad("individual_variation must be >= 0");
  if (!(sample_rate_hz > 0.0)) bad("sample rate must be positive");
  if (!(attitude_offset_range >= 0.0 && attitude_offset_range <= kPi)) bad("attitude_offset_range must lie in [0, pi]");
  if (samples_per_file < 2) bad("files need at least two samples");
  auto check_level = [&](const SeverityLevel& l) {
    if (!(l.asymmetry >= 0.0 && l.asymmetry <= 1.0)) bad("asymmetry must lie in [0, 1]");
    if (!(l.motion_duty >= 0.0 && l.motion_duty <= 1.0)) bad("motion_duty must lie in [0, 1]");
    if (!(l.step_rate_hz > 0.0)) bad("step rate must be positive");
  };
  for (const auto& l : severity_map) check_level(l);
  check_level(neutral);
  for (std::size_t i = 1; i < severity_map.size(); ++i) {
    if (severity_map[i].asymmetry < severity_map[i - 1].asymmetry ||
        severity_map[i].motion_duty > severity_map[i - 1].motion_duty)
      bad("severity map must be monotone in score");
  }
}

GaitSpec default_spec() { return GaitSpec{}; }

GaitSpec easy_spec() {
  GaitSpec s;
  s.severity_map = {{
      {0.0, 0.60, 1.00},
      {0.7, 0.30, 0.60},
      {0.75, 0.28, 0.58},
      {0.8, 0.26, 0.56},
      {0.85, 0.24, 0.54},
  }};
  s.noise_sigma = 0.05;
  s.individual_variation = 0.05;
  s.attitude_offset_range = 1.5;
  return s;
}

GaitSpec null_spec() {
  GaitSpec s = easy_spec();
  s.label_independent = true;
  return s;
}

GaitSpec gyro_only_spec() {
  GaitSpec s = easy_spec();
  s.informative = {false, false, true, false};
  return s;
}

ScoreCounts paper_shape_counts() { return {19, 7, 6, 6, 5}; }
ScoreCounts easy_counts() { return {10, 3, 3, 2, 2}; }

CowSignals render_cow(const GaitSpec& spec, int score, std::size_t n, const std::string& cow_id) {
  spec.validate();
  if (score < ingest::kMinScore || score > ingest::kMaxScore)
    fail(ErrorCode::BadSpec, "score " + std::to_string(score) + " outside 1..5");
  const double fs = spec.sample_rate_hz;
  Rng rng(splitmix64(spec.seed ^ splitmix64(fnv1a(cow_id))));

  // Placement of the watch on the leg.
  const double base_tilt = rng.uniform(0.2, 0.6);
  const double azimuth0 = rng.uniform(-kPi, kPi);
  const double drift_phase = rng.uniform(0.0, 2.0 * kPi);

  const SeverityLevel& own = spec.label_independent ? spec.neutral : spec.severity_map[score - 1];
  const StreamParams informative_params = jitter(own, spec, rng);
  const StreamParams neutral_params = jitter(spec.neutral, spec, rng);
  const Stream informative = render_stream(informative_params, n, fs, rng);
  bool need_neutral = false;
  for (bool b : spec.informative) need_neutral = need_neutral || !b;
  const Stream neutral = need_neutral ? render_stream(neutral_params, n, fs, rng) : Stream{};
  auto pick = [&](std::size_t group) -> const Stream& { return spec.informative[group] ? informative : neutral; };

  CowSignals out;
  out.walking = informative.walking;
  for (auto& ch : out.signals) ch.assign(n, 0.0);
  const double sigma = spec.noise_sigma;

  const Stream& acc = pick(0);
  for (int a = 0; a < 3; ++a)
    for (std::size_t i = 0; i < n; ++i) out.signals[a][i] = acc.accel[a][i] + sigma * rng.normal();

  const Stream& grav = pick(1);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / fs;
    const double tilt = base_tilt + 0.15 * std::sin(2.0 * kPi * 0.01 * t + drift_phase) + grav.sway[i] +
                        0.01 * sigma * rng.normal();
    const double az = azimuth0 + 0.3 * std::sin(2.0 * kPi * 0.003 * t) + 0.01 * sigma * rng.normal();
    out.signals[3][i] = kGravity * std::sin(tilt) * std::cos(az);
    out.signals[4][i] = kGravity * std::sin(tilt) * std::sin(az);
    out.signals[5][i] = kGravity * std::cos(tilt);
  }

  const Stream& gyr = pick(2);
  for (int a = 0; a < 3; ++a)
    for (std::size_t i = 0; i < n; ++i) out.signals[6 + a][i] = gyr.gyro[a][i] + sigma * rng.normal();

  // Attitude: leaky integral of the (noise-free) swing, wrapped to (-pi, pi].
  const Stream& att = pick(3);
  const double r = spec.attitude_offset_range;
  const std::array<double, 3> offset{rng.uniform(-r, r), rng.uniform(-1.0, 1.0), rng.uniform(-r, r)};
  for (int a = 0; a < 3; ++a) {
    double angle = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      angle = 0.995 * angle + att.gyro[a][i] / fs;
      double v = offset[a] + 4.0 * angle + 0.01 * sigma * rng.normal();
      v = std::remainder(v, 2.0 * kPi);
      if (v <= -kPi) v += 2.0 * kPi;
      out.signals[9 + a][i] = v;
    }
  }
  return out;
}

std::vector<ingest::SampleFile> gen_cow(const GaitSpec& spec, const CowRequest& request) {
  if (request.n_files < 1) fail(ErrorCode::BadSpec, "a cow needs at least one file");
  const std::size_t per_file = spec.samples_per_file;
  const CowSignals cow = render_cow(spec, request.score, per_file * request.n_files, request.cow_id);

  Rng leg_rng(splitmix64(spec.seed + 0x51ed270b27ULL) ^ fnv1a(request.cow_id));
  const auto leg = static_cast<ingest::Leg>(leg_rng.next() % 4);
  const auto file_seconds = static_cast<long long>(std::llround(static_cast<double>(per_file) / spec.sample_rate_hz));

  std::vector<ingest::SampleFile> files;
  for (std::size_t f = 0; f < request.n_files; ++f) {
    ingest::SampleFile file;
    file.meta.cow_id = request.cow_id;
    file.meta.lameness_score = request.score;
    file.meta.leg = leg;
    file.meta.start_time = request.start_time + std::chrono::seconds(file_seconds * static_cast<long long>(f));
    file.sample_rate_hz = spec.sample_rate_hz;
    file.time.resize(per_file);
    for (std::size_t i = 0; i < per_file; ++i) file.time[i] = static_cast<double>(i) / spec.sample_rate_hz;
    for (std::size_t c = 0; c < ingest::kSignalChannels; ++c)
      file.signals[c].assign(cow.signals[c].begin() + static_cast<std::ptrdiff_t>(f * per_file),
                             cow.signals[c].begin() + static_cast<std::ptrdiff_t>((f + 1) * per_file));
    file.meta.source_path = ingest::render_metadata(file.meta);
    files.push_back(std::move(file));
  }
  return files;
}

ingest::DatasetManifest gen_dataset(const GaitSpec& spec, const DatasetRequest& request) {
  spec.validate();
  std::size_t total = 0;
  for (auto c : request.cows_per_score) total += c;
  if (total < 2) fail(ErrorCode::BadSpec, "a dataset needs at least two cows");
  if (request.files_per_cow < 1) fail(ErrorCode::BadSpec, "files_per_cow must be >= 1");

  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(request.out_dir, ec);
  if (ec) fail(ErrorCode::Io, "cannot create '" + request.out_dir + "': " + ec.message());

  using namespace std::chrono;
  const sys_seconds base = sys_days{year{2022} / May / 15} + hours{8};
  std::vector<CowRequest> cows;
  for (int s = 0; s < ingest::kScoreLevels; ++s) {
    for (std::size_t k = 0; k < request.cows_per_score[s]; ++k) {
      CowRequest r;
      char id[16];
      std::snprintf(id, sizeof(id), "%03zu", cows.size() + 1);
      r.cow_id = id;
      r.score = s + ingest::kMinScore;
      r.n_files = request.files_per_cow;
      r.start_time = base + days{static_cast<int>(cows.size())};
      cows.push_back(std::move(r));
    }
  }

  std::vector<std::vector<ingest::ManifestEntry>> per_cow(cows.size());
  parallel_for(cows.size(), request.jobs, [&](std::size_t i) {
    for (auto& file : gen_cow(spec, cows[i])) {
      const fs::path path = fs::path(request.out_dir) / ingest::render_metadata(file.meta);
      text::write_file_atomic(path.string(), ingest::serialize_sample_file(file, request.significant_digits));
      ingest::ManifestEntry e;
      e.meta = file.meta;
      e.meta.source_path = path.string();
      e.rows = file.rows();
      e.duration_s = file.duration_s();
      per_cow[i].push_back(std::move(e));
    }
  });
  std::vector<ingest::ManifestEntry> entries;
  for (auto& v : per_cow) entries.insert(entries.end(), v.begin(), v.end());
  auto manifest = ingest::make_manifest(std::move(entries));
  // The index lists paths relative to out_dir so the dataset can move.
  auto index = manifest;
  for (auto& e : index.entries) e.meta.source_path = fs::path(e.meta.source_path).filename().string();
  text::write_file_atomic((fs::path(request.out_dir) / ingest::kManifestFileName).string(), ingest::manifest_csv(index));
  return manifest;
}

}  // namespace gaitscreen::synth
