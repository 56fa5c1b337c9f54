#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numbers>
#include <unistd.h>

#include "core/error.hpp"
#include "core/ingest.hpp"
#include "core/synth.hpp"

namespace sy = gaitscreen::synth;
namespace ig = gaitscreen::ingest;

namespace {

double mean_abs(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += std::abs(x);
  return s / static_cast<double>(v.size());
}

}  // namespace

TEST_CASE("rendering is deterministic per seed and cow") {
  const auto spec = sy::default_spec();
  const auto a = sy::render_cow(spec, 3, 2000, "017");
  const auto b = sy::render_cow(spec, 3, 2000, "017");
  const auto c = sy::render_cow(spec, 3, 2000, "018");
  CHECK(a.signals == b.signals);
  CHECK(a.walking == b.walking);
  CHECK(a.signals[0] != c.signals[0]);
  auto other = spec;
  other.seed = 2;
  CHECK(sy::render_cow(other, 3, 2000, "017").signals[0] != a.signals[0]);
}

TEST_CASE("gravity has unit-g norm and attitude stays wrapped") {
  const auto s = sy::render_cow(sy::default_spec(), 2, 3000, "001").signals;
  for (std::size_t i = 0; i < 3000; ++i) {
    const double g = std::hypot(s[3][i], s[4][i], s[5][i]);
    CHECK(g == doctest::Approx(9.81).epsilon(1e-12));
    for (std::size_t c = 9; c < 12; ++c) {
      CHECK(s[c][i] > -std::numbers::pi);
      CHECK(s[c][i] <= std::numbers::pi);
    }
  }
}

TEST_CASE("lame cows walk less than healthy ones") {
  const auto spec = sy::easy_spec();
  double healthy = 0.0, lame = 0.0;
  for (int i = 0; i < 6; ++i) {
    const auto id = std::to_string(100 + i);
    const auto h = sy::render_cow(spec, 1, 9000, id).walking;
    const auto l = sy::render_cow(spec, 5, 9000, id).walking;
    healthy += static_cast<double>(std::count(h.begin(), h.end(), true));
    lame += static_cast<double>(std::count(l.begin(), l.end(), true));
  }
  CHECK(healthy > 1.3 * lame);
}

TEST_CASE("label-independent spec ignores the score") {
  const auto spec = sy::null_spec();
  const auto a = sy::render_cow(spec, 1, 1500, "042");
  const auto b = sy::render_cow(spec, 5, 1500, "042");
  CHECK(a.signals == b.signals);
}

TEST_CASE("gyro-only spec ties walking to the score but not the accelerometer") {
  // Non-gyro groups follow the neutral gait, so their energy does not track
  // the score; the walking mask follows the informative gyro stream.
  const auto spec = sy::gyro_only_spec();
  double accel_h = 0.0, accel_l = 0.0, walk_h = 0.0, walk_l = 0.0;
  for (int i = 0; i < 8; ++i) {
    const auto id = std::to_string(200 + i);
    const auto h = sy::render_cow(spec, 1, 6000, id);
    const auto l = sy::render_cow(spec, 5, 6000, id);
    accel_h += mean_abs(h.signals[0]);
    accel_l += mean_abs(l.signals[0]);
    walk_h += static_cast<double>(std::count(h.walking.begin(), h.walking.end(), true));
    walk_l += static_cast<double>(std::count(l.walking.begin(), l.walking.end(), true));
  }
  CHECK(accel_h / accel_l == doctest::Approx(1.0).epsilon(0.15));
  CHECK(walk_h > 1.3 * walk_l);
}

TEST_CASE("spec validation") {
  auto spec = sy::default_spec();
  spec.attitude_offset_range = 4.0;
  CHECK_THROWS_AS(spec.validate(), gaitscreen::Error);
  spec = sy::default_spec();
  spec.samples_per_file = 0;
  CHECK_THROWS_AS(spec.validate(), gaitscreen::Error);
}

TEST_CASE("preset cohort shapes") {
  CHECK(sy::paper_shape_counts() == sy::ScoreCounts{19, 7, 6, 6, 5});
  CHECK(sy::easy_counts() == sy::ScoreCounts{10, 3, 3, 2, 2});
}

TEST_CASE("gen_cow splits one recording into consecutive files") {
  auto spec = sy::default_spec();
  spec.samples_per_file = 400;
  sy::CowRequest req{"007", 2, 3, std::chrono::sys_seconds{std::chrono::hours{24 * 19000}}};
  const auto files = sy::gen_cow(spec, req);
  REQUIRE(files.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(files[i].rows() == 400);
    CHECK(files[i].meta.cow_id == "007");
    CHECK(files[i].meta.lameness_score == 2);
    CHECK(files[i].meta.start_time == req.start_time + std::chrono::seconds{4 * static_cast<long>(i)});
    CHECK(files[i].sample_rate_hz == doctest::Approx(100.0));
  }
  CHECK(files[0].meta.leg == files[2].meta.leg);
}

TEST_CASE("gen_dataset writes a loadable dataset") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / ("gs_synth_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  auto spec = sy::default_spec();
  spec.samples_per_file = 300;
  sy::DatasetRequest req;
  req.cows_per_score = {2, 1, 0, 0, 1};
  req.files_per_cow = 2;
  req.out_dir = dir.string();
  req.jobs = 2;
  const auto m = sy::gen_dataset(spec, req);
  CHECK(m.cows.size() == 4);
  CHECK(m.entries.size() == 8);
  CHECK(fs::exists(dir / "manifest.csv"));

  const auto scanned = ig::build_manifest(dir.string());
  CHECK(scanned.entries.size() == 8);
  CHECK(scanned.skipped.empty());
  CHECK(scanned.cows.at("004").lameness_score == 5);
  CHECK(ig::load_cow(scanned, "001").length() == 600);
  fs::remove_all(dir);
}
