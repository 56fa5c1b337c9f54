#include "core/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <sstream>

#include "core/error.hpp"
#include "core/parallel.hpp"
#include "core/text.hpp"

namespace gaitscreen::ingest {

namespace {

constexpr std::array<std::string_view, kSignalChannels> kChannelNames = {
    "accel_x", "accel_y", "accel_z", "gravity_x", "gravity_y", "gravity_z",
    "gyro_x",  "gyro_y",  "gyro_z",  "roll",      "pitch",     "yaw",
};

const std::regex& canonical_pattern() {
  static const std::regex re(R"(cow([A-Za-z0-9-]+)_S(\d+)_([A-Z]{2})_(\d{8})T(\d{6})\.csv)");
  return re;
}

int digits_to_int(std::string_view s) {
  int v = 0;
  for (char ch : s) v = v * 10 + (ch - '0');
  return v;
}

std::string basename_of(std::string_view path) {
  return std::filesystem::path(std::string(path)).filename().string();
}

}  // namespace

std::string_view leg_name(Leg leg) {
  switch (leg) {
    case Leg::FL: return "FL";
    case Leg::FR: return "FR";
    case Leg::RL: return "RL";
    case Leg::RR: return "RR";
  }
  return "??";
}

std::optional<Leg> parse_leg(std::string_view s) {
  if (s == "FL") return Leg::FL;
  if (s == "FR") return Leg::FR;
  if (s == "RL") return Leg::RL;
  if (s == "RR") return Leg::RR;
  return std::nullopt;
}

BinaryLabel label_for_score(int score) {
  if (score < kMinScore || score > kMaxScore)
    fail(ErrorCode::ScoreOutOfRange, "lameness score " + std::to_string(score) + " outside 1..5");
  return score == kMinScore ? BinaryLabel::Healthy : BinaryLabel::Lame;
}

std::string_view channel_name(std::size_t signal_index) {
  return signal_index < kSignalChannels ? kChannelNames[signal_index] : "unknown";
}

SampleFile parse_sample_file(std::string_view content, SampleMeta meta, const ParseOptions& options) {
  SampleFile file;
  file.meta = std::move(meta);

  std::size_t line_no = 0;
  bool seen_first = false;
  std::size_t pos = 0;
  std::array<double, kCsvColumns> row{};
  while (pos < content.size()) {
    std::size_t nl = content.find('\n', pos);
    std::string_view line = content.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = (nl == std::string_view::npos) ? content.size() : nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (text::trim(line).empty()) continue;

    auto cells = text::split(line, ',');
    bool numeric = cells.size() == kCsvColumns;
    bool finite = true;
    if (numeric) {
      for (std::size_t c = 0; c < kCsvColumns; ++c) {
        if (!text::parse_double(cells[c], row[c])) {
          numeric = false;
          break;
        }
        if (!std::isfinite(row[c])) finite = false;
      }
    }
    if (!seen_first) {
      seen_first = true;
      // A single leading header row is allowed: any non-numeric first line.
      bool any_numeric = false;
      double ignored;
      for (auto cell : cells) any_numeric = any_numeric || text::parse_double(cell, ignored);
      if (!numeric && !any_numeric) continue;
    }
    if (cells.size() != kCsvColumns) {
      fail(ErrorCode::WrongColumnCount, "line " + std::to_string(line_no) + " has " +
                                            std::to_string(cells.size()) + " columns, expected 13");
    }
    if (!numeric || !finite) {
      ++file.rejected_rows;
      continue;
    }
    if (!file.time.empty() && row[0] <= file.time.back()) {
      fail(ErrorCode::NonMonotonicTime, "line " + std::to_string(line_no) + ": time " +
                                            text::format_double(row[0]) + " does not increase");
    }
    file.time.push_back(row[0]);
    for (std::size_t c = 0; c < kSignalChannels; ++c) file.signals[c].push_back(row[c + 1]);
  }

  if (file.time.empty()) fail(ErrorCode::EmptyFile, "no data rows in '" + file.meta.source_path + "'");

  const std::size_t n = file.time.size();
  file.sample_rate_hz = (n > 1 && file.duration_s() > 0.0)
                            ? static_cast<double>(n - 1) / file.duration_s()
                            : options.nominal_rate_hz;
  const double nominal_rows = options.nominal_rate_hz * options.nominal_seconds;
  file.length_flagged = std::abs(static_cast<double>(n) - nominal_rows) > options.length_tolerance * nominal_rows;
  return file;
}

std::string serialize_sample_file(const SampleFile& file, int significant_digits, bool header) {
  std::string out;
  out.reserve(file.rows() * 13 * 12);
  if (header) {
    out += "time";
    for (auto name : kChannelNames) {
      out += ',';
      out += name;
    }
    out += '\n';
  }
  for (std::size_t r = 0; r < file.rows(); ++r) {
    out += text::format_double(file.time[r], significant_digits);
    for (std::size_t c = 0; c < kSignalChannels; ++c) {
      out += ',';
      out += text::format_double(file.signals[c][r], significant_digits);
    }
    out += '\n';
  }
  return out;
}

SampleMeta parse_metadata(std::string_view filename, int utc_offset_minutes) {
  using namespace std::chrono;
  const std::string base = basename_of(filename);
  std::smatch m;
  if (!std::regex_match(base, m, canonical_pattern()))
    fail(ErrorCode::MalformedName, "'" + base + "' does not match cow<ID>_S<score>_<leg>_<YYYYMMDD>T<HHMMSS>.csv");

  SampleMeta meta;
  meta.cow_id = m[1].str();
  const std::string score_digits = m[2].str();
  if (score_digits.size() > 2 || digits_to_int(score_digits) < kMinScore || digits_to_int(score_digits) > kMaxScore)
    fail(ErrorCode::ScoreOutOfRange, "score '" + score_digits + "' in '" + base + "' outside 1..5");
  meta.lameness_score = digits_to_int(score_digits);

  auto leg = parse_leg(m[3].str());
  if (!leg) fail(ErrorCode::MalformedName, "unknown leg '" + m[3].str() + "' in '" + base + "'");
  meta.leg = *leg;

  const std::string date = m[4].str();
  const std::string clock = m[5].str();
  year_month_day ymd{year{digits_to_int(std::string_view(date).substr(0, 4))},
                     month{static_cast<unsigned>(digits_to_int(std::string_view(date).substr(4, 2)))},
                     day{static_cast<unsigned>(digits_to_int(std::string_view(date).substr(6, 2)))}};
  const int hh = digits_to_int(std::string_view(clock).substr(0, 2));
  const int mi = digits_to_int(std::string_view(clock).substr(2, 2));
  const int ss = digits_to_int(std::string_view(clock).substr(4, 2));
  if (!ymd.ok() || hh > 23 || mi > 59 || ss > 59)
    fail(ErrorCode::BadTimestamp, "invalid timestamp '" + date + "T" + clock + "' in '" + base + "'");
  meta.start_time = sys_seconds{sys_days{ymd}} + hours{hh} + minutes{mi} + seconds{ss} - minutes{utc_offset_minutes};
  meta.source_path = std::string(filename);
  return meta;
}

std::string render_metadata(const SampleMeta& meta, int utc_offset_minutes) {
  using namespace std::chrono;
  const sys_seconds local = meta.start_time + minutes{utc_offset_minutes};
  const sys_days day_point = floor<days>(local);
  const year_month_day ymd{day_point};
  const hh_mm_ss<seconds> hms{local - day_point};
  char buf[64];
  std::snprintf(buf, sizeof(buf), "_S%d_%s_%04d%02u%02uT%02d%02d%02d.csv", meta.lameness_score,
                std::string(leg_name(meta.leg)).c_str(), static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<int>(hms.hours().count()), static_cast<int>(hms.minutes().count()),
                static_cast<int>(hms.seconds().count()));
  return "cow" + meta.cow_id + buf;
}

std::string canonical_name(std::string_view raw, std::span<const NameAdapter> adapters) {
  const std::string base = basename_of(raw);
  if (std::regex_match(base, canonical_pattern())) return base;
  for (const auto& adapter : adapters) {
    if (std::regex_match(base, adapter.pattern))
      return std::regex_replace(base, adapter.pattern, adapter.replacement);
  }
  return base;
}

DatasetManifest make_manifest(std::vector<ManifestEntry> entries, std::vector<SkipRecord> skipped) {
  if (entries.empty()) fail(ErrorCode::EmptyDataset, "no parseable sample files");
  std::sort(entries.begin(), entries.end(), [](const ManifestEntry& a, const ManifestEntry& b) {
    if (a.meta.cow_id != b.meta.cow_id) return a.meta.cow_id < b.meta.cow_id;
    if (a.meta.start_time != b.meta.start_time) return a.meta.start_time < b.meta.start_time;
    return a.meta.source_path < b.meta.source_path;
  });
  DatasetManifest manifest;
  for (const auto& e : entries) {
    auto [it, inserted] = manifest.cows.try_emplace(e.meta.cow_id);
    CowSummary& cow = it->second;
    if (inserted) {
      cow.lameness_score = e.meta.lameness_score;
    } else if (cow.lameness_score != e.meta.lameness_score) {
      fail(ErrorCode::ConflictingScore, "cow " + e.meta.cow_id + " has scores " +
                                            std::to_string(cow.lameness_score) + " and " +
                                            std::to_string(e.meta.lameness_score));
    }
    ++cow.file_count;
    cow.total_duration_s += e.duration_s;
  }
  manifest.entries = std::move(entries);
  std::sort(skipped.begin(), skipped.end(), [](const SkipRecord& a, const SkipRecord& b) { return a.path < b.path; });
  manifest.skipped = std::move(skipped);
  return manifest;
}

DatasetManifest build_manifest(const std::string& root, const ManifestOptions& options) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (!fs::is_directory(root, ec)) fail(ErrorCode::Io, "'" + root + "' is not a readable directory");

  std::vector<fs::path> paths;
  for (auto it = fs::recursive_directory_iterator(root, ec); !ec && it != fs::recursive_directory_iterator();
       it.increment(ec)) {
    if (!it->is_regular_file()) continue;
    const auto& p = it->path();
    if (p.extension() != ".csv" || p.filename() == kManifestFileName) continue;
    paths.push_back(p);
  }
  if (ec) fail(ErrorCode::Io, "cannot list '" + root + "': " + ec.message());
  std::sort(paths.begin(), paths.end());

  struct Slot {
    std::optional<ManifestEntry> entry;
    std::string skip_reason;
  };
  std::vector<Slot> slots(paths.size());
  parallel_for(paths.size(), options.jobs, [&](std::size_t i) {
    const std::string path = paths[i].string();
    try {
      const std::string name = canonical_name(path, options.adapters);
      SampleMeta meta = parse_metadata(name, options.parse.utc_offset_minutes);
      meta.source_path = path;
      SampleFile file = parse_sample_file(text::read_file(path), meta, options.parse);
      ManifestEntry e;
      e.meta = std::move(file.meta);
      e.rows = file.rows();
      e.duration_s = file.duration_s();
      e.rejected_rows = file.rejected_rows;
      e.length_flagged = file.length_flagged;
      slots[i].entry = std::move(e);
    } catch (const Error& err) {
      slots[i].skip_reason = err.what();
    }
  });

  std::vector<ManifestEntry> entries;
  std::vector<SkipRecord> skipped;
  for (std::size_t i = 0; i < slots.size(); ++i) {
    if (slots[i].entry) entries.push_back(std::move(*slots[i].entry));
    else skipped.push_back({paths[i].string(), slots[i].skip_reason});
  }
  if (entries.empty()) fail(ErrorCode::EmptyDataset, "no parseable sample files under '" + root + "'");
  return make_manifest(std::move(entries), std::move(skipped));
}

std::string format_timestamp(std::chrono::sys_seconds t) {
  using namespace std::chrono;
  const sys_days day_point = floor<days>(t);
  const year_month_day ymd{day_point};
  const hh_mm_ss<seconds> hms{t - day_point};
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<int>(hms.hours().count()), static_cast<int>(hms.minutes().count()),
                static_cast<int>(hms.seconds().count()));
  return buf;
}

std::string manifest_csv(const DatasetManifest& manifest) {
  std::string out = "cow_id,score,leg,start_time,path,rows\n";
  for (const auto& e : manifest.entries) {
    out += e.meta.cow_id + ',' + std::to_string(e.meta.lameness_score) + ',' + std::string(leg_name(e.meta.leg)) +
           ',' + format_timestamp(e.meta.start_time) + ',' + e.meta.source_path + ',' + std::to_string(e.rows) + '\n';
  }
  return out;
}

CowRecord concat_cow(const DatasetManifest& manifest, std::span<const SampleFile> files, const std::string& cow_id) {
  auto cow = manifest.cows.find(cow_id);
  if (cow == manifest.cows.end()) fail(ErrorCode::UnknownCow, "cow '" + cow_id + "' not in manifest");
  if (files.empty()) fail(ErrorCode::EmptyDataset, "cow '" + cow_id + "' has no files");

  std::vector<const SampleFile*> ordered;
  for (const auto& f : files) {
    if (f.meta.cow_id != cow_id)
      fail(ErrorCode::InvalidArgument, "file '" + f.meta.source_path + "' belongs to cow " + f.meta.cow_id);
    ordered.push_back(&f);
  }
  std::stable_sort(ordered.begin(), ordered.end(), [](const SampleFile* a, const SampleFile* b) {
    if (a->meta.start_time != b->meta.start_time) return a->meta.start_time < b->meta.start_time;
    return a->meta.source_path < b->meta.source_path;
  });

  CowRecord rec;
  rec.cow_id = cow_id;
  rec.lameness_score = cow->second.lameness_score;
  std::size_t total = 0;
  for (const auto* f : ordered) total += f->rows();
  for (auto& ch : rec.signals) ch.reserve(total);
  double rate_weighted = 0.0;
  for (const auto* f : ordered) {
    if (!rec.signals[0].empty()) rec.boundaries.push_back(rec.signals[0].size());
    for (std::size_t c = 0; c < kSignalChannels; ++c)
      rec.signals[c].insert(rec.signals[c].end(), f->signals[c].begin(), f->signals[c].end());
    rec.duration_s += f->duration_s();
    rate_weighted += f->sample_rate_hz * static_cast<double>(f->rows());
  }
  rec.sample_rate_hz = rate_weighted / static_cast<double>(total);
  return rec;
}

CowRecord load_cow(const DatasetManifest& manifest, const std::string& cow_id, const ParseOptions& options) {
  if (!manifest.cows.contains(cow_id)) fail(ErrorCode::UnknownCow, "cow '" + cow_id + "' not in manifest");
  std::vector<SampleFile> files;
  for (const auto& e : manifest.entries) {
    if (e.meta.cow_id != cow_id) continue;
    files.push_back(parse_sample_file(text::read_file(e.meta.source_path), e.meta, options));
  }
  CowRecord rec = concat_cow(manifest, files, cow_id);
  // Nominal rate keeps filter design identical across cows.
  rec.sample_rate_hz = options.nominal_rate_hz;
  return rec;
}

std::string DatasetStats::summary() const {
  return std::to_string(n_cows) + " (" + std::to_string(n_sensors) + "x" + std::to_string(n_observations) + ")";
}

DatasetStats dataset_stats(const DatasetManifest& manifest, std::size_t n_sensors) {
  if (manifest.entries.empty() || manifest.cows.empty()) fail(ErrorCode::EmptyDataset, "manifest is empty");
  DatasetStats s;
  s.n_cows = manifest.cows.size();
  s.n_sensors = n_sensors;
  s.n_observations = manifest.entries.size();
  for (const auto& [id, cow] : manifest.cows) ++s.cows_per_score[cow.lameness_score - kMinScore];
  for (const auto& e : manifest.entries) ++s.samples_per_score[e.meta.lameness_score - kMinScore];
  s.product = static_cast<std::uint64_t>(s.n_cows) * s.n_observations;
  return s;
}

std::string stats_text(const DatasetStats& s) {
  std::ostringstream out;
  out << "S_S = " << s.summary() << "\n";
  out << "cows: " << s.n_cows << "  observations: " << s.n_observations << "  product: " << s.product << "\n";
  out << "score  cows  samples\n";
  for (int i = 0; i < kScoreLevels; ++i) {
    char line[64];
    std::snprintf(line, sizeof(line), "%5d %5zu %8zu\n", i + kMinScore, s.cows_per_score[i], s.samples_per_score[i]);
    out << line;
  }
  std::size_t healthy = s.cows_per_score[0];
  out << "healthy/lame cows: " << healthy << "/" << (s.n_cows - healthy) << "\n";
  return out.str();
}

std::string stats_csv(const DatasetStats& s) {
  std::string out = "key,value\n";
  out += "n_cows," + std::to_string(s.n_cows) + "\n";
  out += "n_sensors," + std::to_string(s.n_sensors) + "\n";
  out += "n_observations," + std::to_string(s.n_observations) + "\n";
  out += "product," + std::to_string(s.product) + "\n";
  out += "summary," + s.summary() + "\n";
  for (int i = 0; i < kScoreLevels; ++i) {
    out += "cows_score_" + std::to_string(i + kMinScore) + "," + std::to_string(s.cows_per_score[i]) + "\n";
    out += "samples_score_" + std::to_string(i + kMinScore) + "," + std::to_string(s.samples_per_score[i]) + "\n";
  }
  return out;
}

}  // namespace gaitscreen::ingest
