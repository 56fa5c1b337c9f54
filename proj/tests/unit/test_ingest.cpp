#include <doctest.h>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <unistd.h>

#include "core/error.hpp"
#include "core/ingest.hpp"

namespace ig = gaitscreen::ingest;
using gaitscreen::Error;
using gaitscreen::ErrorCode;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::InvalidArgument;
}

std::string row(double t, double base) {
  std::string s = std::to_string(t);
  for (int c = 0; c < 12; ++c) s += "," + std::to_string(base + c);
  return s + "\n";
}

ig::SampleMeta meta(const std::string& cow, int score, int hour) {
  using namespace std::chrono;
  ig::SampleMeta m;
  m.cow_id = cow;
  m.lameness_score = score;
  m.start_time = sys_days{2022y / May / 15} + hours{hour};
  m.source_path = cow + "_" + std::to_string(hour);
  return m;
}

}  // namespace

TEST_CASE("parses rows with an optional header and CRLF endings") {
  std::string text = "time,ax,ay,az,gx,gy,gz,wx,wy,wz,roll,pitch,yaw\r\n";
  for (int i = 0; i < 5; ++i) text += row(i * 0.01, i);
  const auto f = ig::parse_sample_file(text, {});
  CHECK(f.rows() == 5);
  CHECK(f.channel(ig::SignalChannel::AccelX)[3] == 3.0);
  CHECK(f.channel(ig::SignalChannel::Yaw)[4] == 15.0);
  CHECK(f.sample_rate_hz == doctest::Approx(100.0));
  CHECK(f.length_flagged);
  CHECK(f.rejected_rows == 0);
}

TEST_CASE("non-finite and non-numeric rows are rejected, structural errors are fatal") {
  std::string text = row(0.0, 1) + "0.01,nan,1,1,1,1,1,1,1,1,1,1,1\n" + "0.02,x,1,1,1,1,1,1,1,1,1,1,1\n" + row(0.03, 1);
  const auto f = ig::parse_sample_file(text, {});
  CHECK(f.rows() == 2);
  CHECK(f.rejected_rows == 2);

  CHECK(code_of([] { ig::parse_sample_file(row(0.0, 1) + "0.01,1,2\n", {}); }) == ErrorCode::WrongColumnCount);
  CHECK(code_of([] { ig::parse_sample_file(row(0.5, 1) + row(0.5, 1), {}); }) == ErrorCode::NonMonotonicTime);
  CHECK(code_of([] { ig::parse_sample_file("\n\n", {}); }) == ErrorCode::EmptyFile);
  CHECK(code_of([] { ig::parse_sample_file("time,a,b,c,d,e,f,g,h,i,j,k,l\n", {}); }) == ErrorCode::EmptyFile);
}

TEST_CASE("a 90 s file at 100 Hz is not flagged") {
  std::string text;
  for (int i = 0; i < 9000; ++i) text += row(i * 0.01, 0);
  CHECK_FALSE(ig::parse_sample_file(text, {}).length_flagged);
}

TEST_CASE("serialize then parse keeps 12 significant digits") {
  ig::SampleFile f;
  for (int i = 0; i < 4; ++i) {
    f.time.push_back(i * 0.01);
    for (auto& ch : f.signals) ch.push_back(1.0 / 3.0 + i * 1e-7);
  }
  const auto back = ig::parse_sample_file(ig::serialize_sample_file(f, 12, true), {});
  REQUIRE(back.rows() == 4);
  for (std::size_t c = 0; c < ig::kSignalChannels; ++c)
    for (std::size_t r = 0; r < 4; ++r) CHECK(back.signals[c][r] == doctest::Approx(f.signals[c][r]).epsilon(1e-11));
}

TEST_CASE("filename metadata round trip and UTC offset") {
  using namespace std::chrono;
  const auto m = ig::parse_metadata("data/x/cow042_S3_RL_20220515T081530.csv");
  CHECK(m.cow_id == "042");
  CHECK(m.lameness_score == 3);
  CHECK(m.leg == ig::Leg::RL);
  CHECK(m.start_time == sys_days{2022y / May / 15} + hours{8} + minutes{15} + seconds{30});
  CHECK(ig::render_metadata(m) == "cow042_S3_RL_20220515T081530.csv");
  CHECK(m.label() == ig::BinaryLabel::Lame);

  const auto shifted = ig::parse_metadata("cow042_S3_RL_20220515T081530.csv", 120);
  CHECK(m.start_time - shifted.start_time == minutes{120});
  CHECK(ig::render_metadata(shifted, 120) == "cow042_S3_RL_20220515T081530.csv");
  CHECK(ig::format_timestamp(shifted.start_time) == "2022-05-15T06:15:30Z");
}

TEST_CASE("malformed filenames") {
  CHECK(code_of([] { ig::parse_metadata("cow1_S6_FL_20220515T080000.csv"); }) == ErrorCode::ScoreOutOfRange);
  CHECK(code_of([] { ig::parse_metadata("cow1_S0_FL_20220515T080000.csv"); }) == ErrorCode::ScoreOutOfRange);
  CHECK(code_of([] { ig::parse_metadata("cow1_S2_FL_20220231T080000.csv"); }) == ErrorCode::BadTimestamp);
  CHECK(code_of([] { ig::parse_metadata("cow1_S2_FL_20220515T250000.csv"); }) == ErrorCode::BadTimestamp);
  CHECK(code_of([] { ig::parse_metadata("sheep1_S2_FL_20220515T080000.csv"); }) == ErrorCode::MalformedName);
}

TEST_CASE("name adapters rewrite foreign names") {
  const std::vector<ig::NameAdapter> adapters{{std::regex(R"(([0-9]+)-score([1-5])-(FL|FR|RL|RR)-([0-9]{8})-([0-9]{6})\.csv)"),
                                               "cow$1_S$2_$3_$4T$5.csv"}};
  CHECK(ig::canonical_name("17-score2-FR-20220601-120000.csv", adapters) == "cow17_S2_FR_20220601T120000.csv");
}

TEST_CASE("manifest aggregation, conflicts and stats") {
  std::vector<ig::ManifestEntry> entries;
  for (auto [cow, score, hour] : {std::tuple{"b", 2, 9}, {"a", 1, 10}, {"a", 1, 8}, {"b", 2, 7}, {"c", 1, 8}})
    entries.push_back({meta(cow, score, hour), 9000, 89.99, 0, false});
  const auto m = ig::make_manifest(entries);
  CHECK(m.cows.size() == 3);
  CHECK(m.entries.front().meta.cow_id == "a");
  CHECK(m.entries.front().meta.start_time < m.entries[1].meta.start_time);
  CHECK(m.cows.at("b").file_count == 2);
  CHECK(m.cows.at("b").total_duration_s == doctest::Approx(179.98));

  const auto s = ig::dataset_stats(m);
  CHECK(s.summary() == "3 (12x5)");
  CHECK(s.product == 15);
  CHECK(s.cows_per_score[0] == 2);
  CHECK(s.samples_per_score[1] == 2);
  CHECK(ig::stats_text(s).find("S_S = 3 (12x5)") != std::string::npos);

  entries.push_back({meta("a", 4, 12), 9000, 90.0, 0, false});
  CHECK(code_of([&] { ig::make_manifest(entries); }) == ErrorCode::ConflictingScore);
  CHECK(code_of([] { ig::make_manifest({}); }) == ErrorCode::EmptyDataset);
}

TEST_CASE("concatenation follows start time, not argument order") {
  std::vector<ig::ManifestEntry> entries{{meta("a", 1, 8), 2, 0.01, 0, false}, {meta("a", 1, 9), 3, 0.02, 0, false}};
  const auto m = ig::make_manifest(entries);
  std::vector<ig::SampleFile> files(2);
  files[0].meta = meta("a", 1, 9);
  files[1].meta = meta("a", 1, 8);
  files[0].time = {0.0, 0.01, 0.02};
  files[1].time = {0.0, 0.01};
  for (auto& ch : files[0].signals) ch = {9, 9, 9};
  for (auto& ch : files[1].signals) ch = {8, 8};
  const auto rec = ig::concat_cow(m, files, "a");
  CHECK(rec.signals[4] == std::vector<double>{8, 8, 9, 9, 9});
  CHECK(rec.boundaries == std::vector<std::size_t>{2});
  CHECK(rec.duration_s == doctest::Approx(0.03));
  CHECK(code_of([&] { ig::concat_cow(m, files, "zz"); }) == ErrorCode::UnknownCow);
}

TEST_CASE("build_manifest scans a directory and skips bad files") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / ("gs_ingest_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir / "sub");
  std::ofstream(dir / "cow1_S1_FL_20220515T080000.csv") << row(0, 0) << row(0.01, 0);
  std::ofstream(dir / "sub" / "cow2_S4_RR_20220515T080000.csv") << row(0, 0) << row(0.01, 0) << row(0.02, 0);
  std::ofstream(dir / "cow3_S9_FL_20220515T080000.csv") << row(0, 0);
  std::ofstream(dir / "manifest.csv") << "cow_id,score\n";
  const auto m = ig::build_manifest(dir.string());
  CHECK(m.entries.size() == 2);
  CHECK(m.skipped.size() == 1);
  CHECK(m.cows.at("2").lameness_score == 4);
  const auto rec = ig::load_cow(m, "2");
  CHECK(rec.length() == 3);
  CHECK(ig::manifest_csv(m).rfind("cow_id,score,leg,start_time,path,rows\n", 0) == 0);
  fs::remove_all(dir);
}
