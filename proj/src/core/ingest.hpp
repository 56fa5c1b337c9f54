#pragma once

#include <array>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <regex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace gaitscreen::ingest {

enum class Leg { FL, FR, RL, RR };

std::string_view leg_name(Leg leg);
std::optional<Leg> parse_leg(std::string_view s);

// Healthy is the positive class (+1), matching the sign convention of the
// decision function.
enum class BinaryLabel : int { Healthy = 1, Lame = -1 };

inline constexpr int kMinScore = 1;
inline constexpr int kMaxScore = 5;
inline constexpr int kScoreLevels = kMaxScore - kMinScore + 1;

BinaryLabel label_for_score(int score);

// The 12 signal channels of a recording (CSV columns 2..13), in file order.
enum class SignalChannel : std::size_t {
  AccelX, AccelY, AccelZ,
  GravityX, GravityY, GravityZ,
  GyroX, GyroY, GyroZ,
  Roll, Pitch, Yaw,
};
inline constexpr std::size_t kSignalChannels = 12;
inline constexpr std::size_t kCsvColumns = 13;

std::string_view channel_name(std::size_t signal_index);

using Signals = std::array<std::vector<double>, kSignalChannels>;

struct SampleMeta {
  std::string cow_id;
  int lameness_score = kMinScore;
  Leg leg = Leg::FL;
  std::chrono::sys_seconds start_time{};
  std::string source_path;

  BinaryLabel label() const { return label_for_score(lameness_score); }
  friend bool operator==(const SampleMeta&, const SampleMeta&) = default;
};

struct SampleFile {
  SampleMeta meta;
  std::vector<double> time;  // seconds
  Signals signals;           // accel m/s^2, gravity m/s^2, gyro rad/s, attitude rad
  double sample_rate_hz = 100.0;
  std::size_t rejected_rows = 0;
  bool length_flagged = false;

  std::size_t rows() const { return time.size(); }
  double duration_s() const { return time.empty() ? 0.0 : time.back() - time.front(); }
  const std::vector<double>& channel(SignalChannel c) const {
    return signals[static_cast<std::size_t>(c)];
  }
};

struct ParseOptions {
  double nominal_rate_hz = 100.0;
  double nominal_seconds = 90.0;
  double length_tolerance = 0.10;
  // Filenames carry naive local time; start_time = local - offset.
  int utc_offset_minutes = 0;
};

SampleFile parse_sample_file(std::string_view content, SampleMeta meta,
                             const ParseOptions& options = {});

// CSV rendering with `significant_digits` digits per value (>= 12 keeps the
// parse/serialize round trip within 12 significant digits).
std::string serialize_sample_file(const SampleFile& file, int significant_digits = 12,
                                  bool header = false);

// cow<ID>_S<score>_<leg>_<YYYYMMDD>T<HHMMSS>.csv
SampleMeta parse_metadata(std::string_view filename, int utc_offset_minutes = 0);
std::string render_metadata(const SampleMeta& meta, int utc_offset_minutes = 0);

// Rewrites a non-canonical filename into the canonical grammar. Adapters are
// tried in order; the first whose pattern fully matches is applied with
// std::regex_replace formatting ($1, $2, ...).
struct NameAdapter {
  std::regex pattern;
  std::string replacement;
};
std::string canonical_name(std::string_view raw, std::span<const NameAdapter> adapters);

struct ManifestEntry {
  SampleMeta meta;
  std::size_t rows = 0;
  double duration_s = 0.0;
  std::size_t rejected_rows = 0;
  bool length_flagged = false;
};

struct CowSummary {
  int lameness_score = kMinScore;
  std::size_t file_count = 0;
  double total_duration_s = 0.0;
};

struct SkipRecord {
  std::string path;
  std::string reason;
};

struct DatasetManifest {
  std::vector<ManifestEntry> entries;  // sorted by cow_id, then start_time
  std::map<std::string, CowSummary> cows;
  std::vector<SkipRecord> skipped;
};

// Aggregates entries into a manifest; throws ConflictingScore / EmptyDataset.
DatasetManifest make_manifest(std::vector<ManifestEntry> entries,
                              std::vector<SkipRecord> skipped = {});

struct ManifestOptions {
  ParseOptions parse;
  std::vector<NameAdapter> adapters;
  unsigned jobs = 1;
};

// The generator writes its own index as manifest.csv; it is never a sample.
inline constexpr std::string_view kManifestFileName = "manifest.csv";

DatasetManifest build_manifest(const std::string& root, const ManifestOptions& options = {});

std::string manifest_csv(const DatasetManifest& manifest);
std::string format_timestamp(std::chrono::sys_seconds t);

struct CowRecord {
  std::string cow_id;
  int lameness_score = kMinScore;
  Signals signals;
  std::vector<std::size_t> boundaries;  // start index of every file after the first
  double duration_s = 0.0;
  double sample_rate_hz = 100.0;

  std::size_t length() const { return signals[0].size(); }
  BinaryLabel label() const { return label_for_score(lameness_score); }
};

// Serial concatenation in start_time order. `files` must all belong to
// `cow_id`; their order does not matter.
CowRecord concat_cow(const DatasetManifest& manifest, std::span<const SampleFile> files,
                     const std::string& cow_id);

// Reads and concatenates the cow's files listed in the manifest.
CowRecord load_cow(const DatasetManifest& manifest, const std::string& cow_id,
                   const ParseOptions& options = {});

struct DatasetStats {
  std::size_t n_cows = 0;
  std::size_t n_sensors = 0;
  std::size_t n_observations = 0;
  std::array<std::size_t, kScoreLevels> cows_per_score{};
  std::array<std::size_t, kScoreLevels> samples_per_score{};
  std::uint64_t product = 0;  // n_cows * n_observations

  std::string summary() const;  // "N_C (N_S x N_DO)"
};

DatasetStats dataset_stats(const DatasetManifest& manifest, std::size_t n_sensors = kSignalChannels);
std::string stats_text(const DatasetStats& stats);
std::string stats_csv(const DatasetStats& stats);

}  // namespace gaitscreen::ingest
