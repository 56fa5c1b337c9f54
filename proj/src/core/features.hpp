#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "core/dsp.hpp"
#include "core/ingest.hpp"

namespace gaitscreen::features {

inline constexpr std::size_t kProfileLength = 90;
inline constexpr std::size_t kStatsLength = 3;
inline constexpr std::size_t kPowerLength = 2;
inline constexpr std::size_t kBlockLength = 2 * kProfileLength + 2 * kStatsLength + 2 * kPowerLength + 2 * kProfileLength;
static_assert(kBlockLength == 370);

// Contour z_k = A * W^{-k} with A = a0 e^{j theta0}, W = w0 e^{-j phi0}.
// An unset phi0 means 2*pi/M, which with a0 = w0 = 1 and theta0 = 0 makes
// the transform a DFT of M points.
struct CztParams {
  double a0 = 1.0;
  double theta0 = 0.0;
  double w0 = 1.0;
  std::optional<double> phi0;
  // M. Zero selects M from the signal: with scale_with_length,
  // M = 90 * ceil(N / 90); otherwise M = 90 * decimation.
  std::size_t bins = 0;
  std::size_t decimation = 100;  // DF
  bool scale_with_length = true;

  void validate() const;
};

// Resolved (M, DF) for a signal of length n.
struct CztLayout {
  std::size_t bins;
  std::size_t decimation;
};
CztLayout resolve_layout(const CztParams& p, std::size_t n);

std::vector<std::complex<double>> czt(const dsp::Signal& x, const CztParams& p, std::size_t bins);

struct Profile {
  std::array<double, kProfileLength> values{};
  bool degenerate = false;
};

// |CZT| block-averaged over DF bins, then min-max normalized.
Profile czt_profile(const dsp::Signal& x, const CztParams& p);

struct Stats {
  double mean = 0.0;
  double std_dev = 0.0;  // population
  double icv = 0.0;      // mean / std, 0 when std < 1e-12
};
Stats stats_features(std::span<const double> profile);

struct Ratio {
  double value = 0.0;
  bool degenerate = false;
};

// sum(seg^2) / sum(unseg^2); 0 (degenerate) when the denominator is 0.
Ratio power_percentage(const dsp::Signal& seg, const dsp::Signal& unseg);

// First above-to-at-or-below transition through the profile mean, linearly
// interpolated and divided by (length - 1). 1.0 when there is none.
double power_crossing(std::span<const double> profile);

double motion_percentage(const dsp::SegmentMask& mask);

// Normalized cumulative sum of |x| read at 90 evenly spaced positions.
// Shorter inputs are padded by repeating the last sample (flagged).
struct CdfProfile {
  Profile profile;
  bool padded = false;
};
CdfProfile cdf_profile(const dsp::Signal& x);

enum class Slice { CztOrig, CztSeg, StatsOrig, StatsSeg, PowerOrig, PowerSeg, CdfOrig, CdfSeg };
inline constexpr std::array<Slice, 8> kSlices = {Slice::CztOrig,   Slice::CztSeg,   Slice::StatsOrig, Slice::StatsSeg,
                                                 Slice::PowerOrig, Slice::PowerSeg, Slice::CdfOrig,   Slice::CdfSeg};

struct SliceRange {
  std::size_t offset;
  std::size_t length;
};
SliceRange slice_range(Slice s);
std::string_view slice_name(Slice s);

struct FeatureBlock {
  std::array<double, kProfileLength> czt_orig{}, czt_seg{};
  std::array<double, kStatsLength> stats_orig{}, stats_seg{};
  // orig: (motion percentage, power crossing); seg: (power percentage, power crossing)
  std::array<double, kPowerLength> power_orig{}, power_seg{};
  std::array<double, kProfileLength> cdf_orig{}, cdf_seg{};
  bool degenerate = false;

  std::array<double, kBlockLength> assembled() const;
  static FeatureBlock from_assembled(std::span<const double> values);
  std::span<const double> slice(Slice s) const;
};

struct FeatureConfig {
  dsp::FilterSpec filter;
  CztParams czt;
};

FeatureBlock channel_features(const dsp::Signal& channel, const FeatureConfig& config);

enum class ChannelGroup { Accel, Gravity, Gyro, Attitude, All };
std::string_view group_name(ChannelGroup g);
std::optional<ChannelGroup> parse_group(std::string_view s);
std::vector<std::size_t> group_channels(ChannelGroup g);

// Per-axis feature blocks of the group, concatenated in channel order.
std::vector<double> assemble_cow_features(const ingest::CowRecord& rec, ChannelGroup group,
                                          const FeatureConfig& config, unsigned jobs = 1);

// Which columns of a block a feature family keeps.
enum class FeatureFamily { All, Czt, Cdf };
std::string_view family_name(FeatureFamily f);
std::optional<FeatureFamily> parse_family(std::string_view s);
std::vector<std::size_t> family_block_columns(FeatureFamily f);

// Column indices into a 12-channel (4440-wide) vector for a group and family.
std::vector<std::size_t> select_columns(ChannelGroup group, FeatureFamily family);

struct FeatureRow {
  std::string cow_id;
  int score = 1;
  std::vector<double> values;
};

// cow_id,score,label,f0001..fNNNN
std::string feature_matrix_csv(std::span<const FeatureRow> rows);
// Inverse of feature_matrix_csv; the label column is recomputed from the score.
std::vector<FeatureRow> parse_feature_matrix_csv(std::string_view content);

}  // namespace gaitscreen::features
