#include "core/features.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "core/error.hpp"
#include "core/fft.hpp"
#include "core/parallel.hpp"
#include "core/text.hpp"

namespace gaitscreen::features {

namespace {

Profile normalize_profile(const std::array<double, kProfileLength>& raw) {
  dsp::Signal s{std::vector<double>(raw.begin(), raw.end()), 1.0};
  auto n = dsp::minmax_normalize(s);
  Profile p;
  std::copy(n.signal.samples.begin(), n.signal.samples.end(), p.values.begin());
  p.degenerate = n.degenerate;
  return p;
}

}  // namespace

void CztParams::validate() const {
  if (!(a0 > 0.0)) fail(ErrorCode::InvalidArgument, "czt a0 must be positive");
  if (!(w0 > 0.0)) fail(ErrorCode::InvalidArgument, "czt w0 must be positive");
  if (decimation < 1) fail(ErrorCode::InvalidArgument, "decimation factor must be >= 1");
  if (bins != 0 && bins % kProfileLength != 0)
    fail(ErrorCode::BadDimensions, std::to_string(bins) + " bins do not split into 90 blocks");
}

CztLayout resolve_layout(const CztParams& p, std::size_t n) {
  p.validate();
  if (p.bins != 0) return {p.bins, p.bins / kProfileLength};
  std::size_t df = p.decimation;
  if (p.scale_with_length) df = std::max<std::size_t>(1, (n + kProfileLength - 1) / kProfileLength);
  return {kProfileLength * df, df};
}

std::vector<std::complex<double>> czt(const dsp::Signal& x, const CztParams& p, std::size_t bins) {
  if (x.empty()) fail(ErrorCode::EmptySignal, "czt of an empty signal");
  if (bins == 0) fail(ErrorCode::BadDimensions, "czt needs at least one output bin");
  if (!(p.a0 > 0.0) || !(p.w0 > 0.0)) fail(ErrorCode::InvalidArgument, "czt radii must be positive");
  fft::Contour contour;
  contour.a0 = p.a0;
  contour.theta0 = p.theta0;
  contour.w0 = p.w0;
  contour.phi0 = p.phi0.value_or(2.0 * std::numbers::pi / static_cast<double>(bins));
  std::vector<fft::cplx> data(x.samples.begin(), x.samples.end());
  return fft::chirp_z(data, contour, bins);
}

Profile czt_profile(const dsp::Signal& x, const CztParams& p) {
  const CztLayout layout = resolve_layout(p, x.size());
  const auto spectrum = czt(x, p, layout.bins);
  std::array<double, kProfileLength> blocks{};
  for (std::size_t b = 0; b < kProfileLength; ++b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < layout.decimation; ++i) acc += std::abs(spectrum[b * layout.decimation + i]);
    blocks[b] = acc / static_cast<double>(layout.decimation);
  }
  return normalize_profile(blocks);
}

Stats stats_features(std::span<const double> profile) {
  Stats s;
  if (profile.empty()) return s;
  double sum = 0.0;
  for (double v : profile) sum += v;
  s.mean = sum / static_cast<double>(profile.size());
  double ss = 0.0;
  for (double v : profile) ss += (v - s.mean) * (v - s.mean);
  s.std_dev = std::sqrt(ss / static_cast<double>(profile.size()));
  s.icv = s.std_dev < 1e-12 ? 0.0 : s.mean / s.std_dev;
  return s;
}

Ratio power_percentage(const dsp::Signal& seg, const dsp::Signal& unseg) {
  double ps = 0.0;
  double pus = 0.0;
  for (double v : seg.samples) ps += v * v;
  for (double v : unseg.samples) pus += v * v;
  if (!(pus > 0.0)) return {0.0, true};
  return {std::min(1.0, ps / pus), false};
}

double power_crossing(std::span<const double> profile) {
  if (profile.size() < 2) return 1.0;
  double mean = 0.0;
  for (double v : profile) mean += v;
  mean /= static_cast<double>(profile.size());
  for (std::size_t k = 1; k < profile.size(); ++k) {
    const double prev = profile[k - 1];
    const double cur = profile[k];
    if (prev > mean && cur <= mean) {
      const double pos = static_cast<double>(k - 1) + (prev - mean) / (prev - cur);
      return pos / static_cast<double>(profile.size() - 1);
    }
  }
  return 1.0;
}

double motion_percentage(const dsp::SegmentMask& mask) {
  if (mask.motion.empty()) return 0.0;
  return static_cast<double>(mask.motion_count()) / static_cast<double>(mask.motion.size());
}

CdfProfile cdf_profile(const dsp::Signal& x) {
  CdfProfile out;
  if (x.empty()) {
    out.profile.degenerate = true;
    return out;
  }
  std::vector<double> mag(x.samples.size());
  std::transform(x.samples.begin(), x.samples.end(), mag.begin(), [](double v) { return std::abs(v); });
  if (mag.size() < kProfileLength) {
    out.padded = true;
    mag.resize(kProfileLength, mag.back());
  }
  std::vector<double> cumulative(mag.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < mag.size(); ++i) {
    acc += mag[i];
    cumulative[i] = acc;
  }
  std::array<double, kProfileLength> sampled{};
  const double last = static_cast<double>(cumulative.size() - 1);
  for (std::size_t j = 0; j < kProfileLength; ++j) {
    const double t = last * static_cast<double>(j) / static_cast<double>(kProfileLength - 1);
    const auto lo = static_cast<std::size_t>(std::floor(t));
    const std::size_t hi = std::min(lo + 1, cumulative.size() - 1);
    const double frac = t - static_cast<double>(lo);
    sampled[j] = cumulative[lo] + frac * (cumulative[hi] - cumulative[lo]);
  }
  out.profile = normalize_profile(sampled);
  return out;
}

SliceRange slice_range(Slice s) {
  constexpr std::size_t P = kProfileLength, S = kStatsLength, W = kPowerLength;
  switch (s) {
    case Slice::CztOrig: return {0, P};
    case Slice::CztSeg: return {P, P};
    case Slice::StatsOrig: return {2 * P, S};
    case Slice::StatsSeg: return {2 * P + S, S};
    case Slice::PowerOrig: return {2 * P + 2 * S, W};
    case Slice::PowerSeg: return {2 * P + 2 * S + W, W};
    case Slice::CdfOrig: return {2 * P + 2 * S + 2 * W, P};
    case Slice::CdfSeg: return {3 * P + 2 * S + 2 * W, P};
  }
  return {0, 0};
}

std::string_view slice_name(Slice s) {
  switch (s) {
    case Slice::CztOrig: return "czt_orig";
    case Slice::CztSeg: return "czt_seg";
    case Slice::StatsOrig: return "stats_orig";
    case Slice::StatsSeg: return "stats_seg";
    case Slice::PowerOrig: return "power_orig";
    case Slice::PowerSeg: return "power_seg";
    case Slice::CdfOrig: return "cdf_orig";
    case Slice::CdfSeg: return "cdf_seg";
  }
  return "?";
}

std::span<const double> FeatureBlock::slice(Slice s) const {
  switch (s) {
    case Slice::CztOrig: return czt_orig;
    case Slice::CztSeg: return czt_seg;
    case Slice::StatsOrig: return stats_orig;
    case Slice::StatsSeg: return stats_seg;
    case Slice::PowerOrig: return power_orig;
    case Slice::PowerSeg: return power_seg;
    case Slice::CdfOrig: return cdf_orig;
    case Slice::CdfSeg: return cdf_seg;
  }
  return {};
}

std::array<double, kBlockLength> FeatureBlock::assembled() const {
  std::array<double, kBlockLength> out{};
  for (Slice s : kSlices) {
    auto src = slice(s);
    std::copy(src.begin(), src.end(), out.begin() + static_cast<std::ptrdiff_t>(slice_range(s).offset));
  }
  return out;
}

FeatureBlock FeatureBlock::from_assembled(std::span<const double> values) {
  if (values.size() != kBlockLength)
    fail(ErrorCode::DimensionMismatch, "feature block needs 370 values, got " + std::to_string(values.size()));
  FeatureBlock b;
  auto take = [&](Slice s, auto& dst) {
    auto r = slice_range(s);
    std::copy_n(values.begin() + static_cast<std::ptrdiff_t>(r.offset), r.length, dst.begin());
  };
  take(Slice::CztOrig, b.czt_orig);
  take(Slice::CztSeg, b.czt_seg);
  take(Slice::StatsOrig, b.stats_orig);
  take(Slice::StatsSeg, b.stats_seg);
  take(Slice::PowerOrig, b.power_orig);
  take(Slice::PowerSeg, b.power_seg);
  take(Slice::CdfOrig, b.cdf_orig);
  take(Slice::CdfSeg, b.cdf_seg);
  return b;
}

FeatureBlock channel_features(const dsp::Signal& channel, const FeatureConfig& config) {
  if (channel.empty()) fail(ErrorCode::EmptySignal, "channel has no samples");
  FeatureBlock block;
  if (std::all_of(channel.samples.begin(), channel.samples.end(), [](double v) { return v == 0.0; })) {
    block.degenerate = true;
    return block;
  }

  const dsp::SegmentationTrace trace = dsp::segment_signal(channel, config.filter);
  const dsp::Signal segmented = dsp::apply_mask(channel, trace.mask);

  auto fill_stats = [](const Profile& p, std::array<double, kStatsLength>& dst) {
    const Stats s = stats_features(p.values);
    dst = {s.mean, s.std_dev, s.icv};
  };

  const Profile czt_orig = czt_profile(channel, config.czt);
  block.czt_orig = czt_orig.values;
  fill_stats(czt_orig, block.stats_orig);
  block.power_orig = {motion_percentage(trace.mask), power_crossing(czt_orig.values)};
  block.cdf_orig = cdf_profile(channel).profile.values;

  if (segmented.empty()) {
    // No motion: segmented halves stay zero except the no-crossing convention.
    block.power_seg = {0.0, power_crossing(block.czt_seg)};
  } else {
    const Profile czt_seg = czt_profile(segmented, config.czt);
    block.czt_seg = czt_seg.values;
    fill_stats(czt_seg, block.stats_seg);
    block.power_seg = {power_percentage(segmented, channel).value, power_crossing(czt_seg.values)};
    block.cdf_seg = cdf_profile(segmented).profile.values;
  }
  return block;
}

std::string_view group_name(ChannelGroup g) {
  switch (g) {
    case ChannelGroup::Accel: return "accel";
    case ChannelGroup::Gravity: return "gravity";
    case ChannelGroup::Gyro: return "gyro";
    case ChannelGroup::Attitude: return "attitude";
    case ChannelGroup::All: return "all";
  }
  return "?";
}

std::optional<ChannelGroup> parse_group(std::string_view s) {
  for (auto g : {ChannelGroup::Accel, ChannelGroup::Gravity, ChannelGroup::Gyro, ChannelGroup::Attitude, ChannelGroup::All})
    if (group_name(g) == s) return g;
  return std::nullopt;
}

std::vector<std::size_t> group_channels(ChannelGroup g) {
  switch (g) {
    case ChannelGroup::Accel: return {0, 1, 2};
    case ChannelGroup::Gravity: return {3, 4, 5};
    case ChannelGroup::Gyro: return {6, 7, 8};
    case ChannelGroup::Attitude: return {9, 10, 11};
    case ChannelGroup::All: return {0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11};
  }
  return {};
}

std::vector<double> assemble_cow_features(const ingest::CowRecord& rec, ChannelGroup group,
                                          const FeatureConfig& config, unsigned jobs) {
  const auto channels = group_channels(group);
  std::vector<std::array<double, kBlockLength>> blocks(channels.size());
  parallel_for(channels.size(), jobs, [&](std::size_t i) {
    const dsp::Signal s{rec.signals[channels[i]], rec.sample_rate_hz};
    blocks[i] = channel_features(s, config).assembled();
  });
  std::vector<double> out;
  out.reserve(channels.size() * kBlockLength);
  for (const auto& b : blocks) out.insert(out.end(), b.begin(), b.end());
  return out;
}

std::string_view family_name(FeatureFamily f) {
  switch (f) {
    case FeatureFamily::All: return "all";
    case FeatureFamily::Czt: return "czt";
    case FeatureFamily::Cdf: return "cdf";
  }
  return "?";
}

std::optional<FeatureFamily> parse_family(std::string_view s) {
  for (auto f : {FeatureFamily::All, FeatureFamily::Czt, FeatureFamily::Cdf})
    if (family_name(f) == s) return f;
  return std::nullopt;
}

std::vector<std::size_t> family_block_columns(FeatureFamily f) {
  std::vector<Slice> keep;
  switch (f) {
    case FeatureFamily::All: keep.assign(kSlices.begin(), kSlices.end()); break;
    case FeatureFamily::Czt: keep = {Slice::CztOrig, Slice::CztSeg, Slice::StatsOrig, Slice::StatsSeg}; break;
    case FeatureFamily::Cdf: keep = {Slice::CdfOrig, Slice::CdfSeg}; break;
  }
  std::vector<std::size_t> cols;
  for (Slice s : keep) {
    auto r = slice_range(s);
    for (std::size_t i = 0; i < r.length; ++i) cols.push_back(r.offset + i);
  }
  std::sort(cols.begin(), cols.end());
  return cols;
}

std::vector<std::size_t> select_columns(ChannelGroup group, FeatureFamily family) {
  const auto block_cols = family_block_columns(family);
  std::vector<std::size_t> cols;
  for (std::size_t c : group_channels(group))
    for (std::size_t b : block_cols) cols.push_back(c * kBlockLength + b);
  return cols;
}

std::string feature_matrix_csv(std::span<const FeatureRow> rows) {
  std::size_t width = 0;
  for (const auto& r : rows) width = std::max(width, r.values.size());
  std::string out = "cow_id,score,label";
  const std::size_t digits = std::max<std::size_t>(4, std::to_string(width).size());
  for (std::size_t i = 0; i < width; ++i) {
    const std::string num = std::to_string(i + 1);
    out += ",f" + std::string(digits - num.size(), '0') + num;
  }
  out += '\n';
  for (const auto& r : rows) {
    out += r.cow_id + ',' + std::to_string(r.score) + ',' +
           std::to_string(static_cast<int>(ingest::label_for_score(r.score)));
    for (double v : r.values) {
      out += ',';
      out += text::format_double(v);
    }
    out += '\n';
  }
  return out;
}

std::vector<FeatureRow> parse_feature_matrix_csv(std::string_view content) {
  std::vector<FeatureRow> rows;
  std::size_t width = 0;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  bool header = true;
  while (pos < content.size()) {
    std::size_t nl = content.find('\n', pos);
    if (nl == std::string_view::npos) nl = content.size();
    std::string_view line = text::trim(content.substr(pos, nl - pos));
    pos = nl + 1;
    ++line_no;
    if (line.empty()) continue;
    const auto cells = text::split(line, ',');
    const std::string where = "feature matrix line " + std::to_string(line_no);
    if (header) {
      if (cells.size() < 3 || text::trim(cells[0]) != "cow_id") fail(ErrorCode::Format, where + ": missing header");
      width = cells.size() - 3;
      header = false;
      continue;
    }
    if (cells.size() != width + 3) fail(ErrorCode::Format, where + ": expected " + std::to_string(width + 3) + " cells");
    FeatureRow r;
    r.cow_id = std::string(text::trim(cells[0]));
    long long score = 0;
    if (!text::parse_int(text::trim(cells[1]), score)) fail(ErrorCode::Format, where + ": bad score");
    ingest::label_for_score(static_cast<int>(score));
    r.score = static_cast<int>(score);
    r.values.resize(width);
    for (std::size_t i = 0; i < width; ++i)
      if (!text::parse_double(text::trim(cells[i + 3]), r.values[i])) fail(ErrorCode::Format, where + ": bad value");
    rows.push_back(std::move(r));
  }
  if (header) fail(ErrorCode::Format, "feature matrix is empty");
  return rows;
}

}  // namespace gaitscreen::features
