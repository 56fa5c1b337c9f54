#include "core/dsp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "core/error.hpp"
#include "core/fft.hpp"

namespace gaitscreen::dsp {

void FilterSpec::validate(double sample_rate_hz) const {
  if (median_order < 1 || median_order % 2 == 0)
    fail(ErrorCode::EvenOrder, "median order must be odd and >= 1, got " + std::to_string(median_order));
  if (lowpass_order < 2 || lowpass_order % 2 != 0)
    fail(ErrorCode::InvalidArgument, "low-pass order must be even and >= 2, got " + std::to_string(lowpass_order));
  if (!(lowpass_cutoff_hz > 0.0) || !(lowpass_cutoff_hz < sample_rate_hz / 2.0))
    fail(ErrorCode::CutoffOutOfRange, "cutoff must lie in (0, fs/2)");
  if (!(log_floor > 0.0)) fail(ErrorCode::InvalidArgument, "log floor must be positive");
  if (!(motion_threshold >= 0.0) || motion_threshold > 1.0)
    fail(ErrorCode::InvalidArgument, "motion threshold must lie in [0, 1]");
}

Signal moving_median(const Signal& x, int order) {
  if (order < 1 || order % 2 == 0) fail(ErrorCode::EvenOrder, "median order " + std::to_string(order));
  const std::size_t n = x.size();
  if (static_cast<std::size_t>(order) > n)
    fail(ErrorCode::OrderExceedsLength, "median order " + std::to_string(order) + " exceeds length " + std::to_string(n));
  const std::size_t half = static_cast<std::size_t>(order / 2);
  Signal out{std::vector<double>(n), x.sample_rate_hz};
  std::vector<double> window;
  window.reserve(static_cast<std::size_t>(order));
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t h = std::min({half, i, n - 1 - i});
    window.assign(x.samples.begin() + static_cast<std::ptrdiff_t>(i - h),
                  x.samples.begin() + static_cast<std::ptrdiff_t>(i + h + 1));
    auto mid = window.begin() + static_cast<std::ptrdiff_t>(h);
    std::nth_element(window.begin(), mid, window.end());
    out.samples[i] = *mid;
  }
  return out;
}

Signal analytic_envelope(const Signal& x) {
  const std::size_t n = x.size();
  if (n < 4) fail(ErrorCode::TooShort, "analytic envelope needs at least 4 samples");
  std::vector<fft::cplx> data(x.samples.begin(), x.samples.end());
  auto spectrum = fft::dft(data, false);
  // One-sided spectrum: keep DC (and Nyquist for even n), double positive
  // frequencies, zero the negative ones.
  const std::size_t positive_end = (n % 2 == 0) ? n / 2 : (n + 1) / 2;
  for (std::size_t k = 1; k < positive_end; ++k) spectrum[k] *= 2.0;
  for (std::size_t k = (n % 2 == 0) ? n / 2 + 1 : positive_end; k < n; ++k) spectrum[k] = 0.0;
  auto analytic = fft::dft(spectrum, true);
  Signal out{std::vector<double>(n), x.sample_rate_hz};
  for (std::size_t i = 0; i < n; ++i) out.samples[i] = std::abs(analytic[i]);
  return out;
}

std::vector<Biquad> butterworth_lowpass(int order, double cutoff_hz, double sample_rate_hz) {
  if (order < 1) fail(ErrorCode::InvalidArgument, "filter order must be >= 1");
  if (!(cutoff_hz > 0.0) || !(cutoff_hz < sample_rate_hz / 2.0))
    fail(ErrorCode::CutoffOutOfRange, "cutoff must lie in (0, fs/2)");
  // Bilinear transform s = K (1 - z^-1)/(1 + z^-1) against a prototype with
  // unit cutoff; K prewarps the cutoff.
  const double k = 1.0 / std::tan(std::numbers::pi * cutoff_hz / sample_rate_hz);
  const double k2 = k * k;
  std::vector<Biquad> sections;
  for (int i = 0; i < order / 2; ++i) {
    const double zeta = std::sin(std::numbers::pi * (2.0 * i + 1.0) / (2.0 * order));
    const double a0 = k2 + 2.0 * zeta * k + 1.0;
    sections.push_back({1.0 / a0, 2.0 / a0, 1.0 / a0, 2.0 * (1.0 - k2) / a0, (k2 - 2.0 * zeta * k + 1.0) / a0});
  }
  if (order % 2 == 1) {
    const double a0 = k + 1.0;
    sections.push_back({1.0 / a0, 1.0 / a0, 0.0, (1.0 - k) / a0, 0.0});
  }
  return sections;
}

namespace {

// Runs the cascade in place, each section starting from the steady state of
// its first input sample so a constant prefix passes without a transient.
void run_cascade(const std::vector<Biquad>& sections, std::vector<double>& data) {
  if (data.empty()) return;
  for (const auto& s : sections) {
    const double u = data.front();
    const double gain = (s.b0 + s.b1 + s.b2) / (1.0 + s.a1 + s.a2);
    double z2 = s.b2 * u - s.a2 * gain * u;
    double z1 = s.b1 * u - s.a1 * gain * u + z2;
    for (double& v : data) {
      const double in = v;
      const double y = s.b0 * in + z1;
      z1 = s.b1 * in - s.a1 * y + z2;
      z2 = s.b2 * in - s.a2 * y;
      v = y;
    }
  }
}

}  // namespace

Signal zero_phase_lowpass(const Signal& x, const FilterSpec& spec) {
  if (!(spec.lowpass_cutoff_hz > 0.0) || !(spec.lowpass_cutoff_hz < x.sample_rate_hz / 2.0))
    fail(ErrorCode::CutoffOutOfRange, "cutoff " + std::to_string(spec.lowpass_cutoff_hz) +
                                          " Hz outside (0, " + std::to_string(x.sample_rate_hz / 2.0) + ")");
  if (spec.lowpass_order < 2 || spec.lowpass_order % 2 != 0)
    fail(ErrorCode::InvalidArgument, "low-pass order must be even and >= 2");
  const std::size_t n = x.size();
  if (n == 0) return x;

  const int stage_order = spec.lowpass_order / 2;
  const auto sections = butterworth_lowpass(stage_order, spec.lowpass_cutoff_hz, x.sample_rate_hz);

  const std::size_t pad = std::min<std::size_t>(3 * static_cast<std::size_t>(stage_order), n - 1);
  std::vector<double> ext;
  ext.reserve(n + 2 * pad);
  for (std::size_t i = pad; i >= 1; --i) ext.push_back(x.samples[i]);
  ext.insert(ext.end(), x.samples.begin(), x.samples.end());
  for (std::size_t i = 1; i <= pad; ++i) ext.push_back(x.samples[n - 1 - i]);

  run_cascade(sections, ext);
  std::reverse(ext.begin(), ext.end());
  run_cascade(sections, ext);
  std::reverse(ext.begin(), ext.end());

  return Signal{std::vector<double>(ext.begin() + static_cast<std::ptrdiff_t>(pad),
                                    ext.begin() + static_cast<std::ptrdiff_t>(pad + n)),
                x.sample_rate_hz};
}

HomomorphicResult homomorphic_baseline(const Signal& x, const FilterSpec& spec) {
  HomomorphicResult r;
  r.envelope = analytic_envelope(x);
  const std::size_t n = x.size();
  const double eps = spec.log_floor;

  r.log_envelope = Signal{std::vector<double>(n), x.sample_rate_hz};
  r.degenerate = true;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = r.envelope.samples[i];
    if (e > eps) r.degenerate = false;
    r.log_envelope.samples[i] = std::log(std::max(e, eps));
  }

  Signal smoothed = zero_phase_lowpass(r.log_envelope, spec);
  r.baseline = Signal{std::vector<double>(n), x.sample_rate_hz};
  r.ripple = Signal{std::vector<double>(n), x.sample_rate_hz};
  for (std::size_t i = 0; i < n; ++i) {
    const double f = std::exp(smoothed.samples[i]);
    r.baseline.samples[i] = f;
    // Floored envelope keeps h = 1 on silent input.
    r.ripple.samples[i] = std::max(r.envelope.samples[i], eps) / std::max(f, eps);
  }
  return r;
}

Normalized minmax_normalize(const Signal& x) {
  Normalized out{Signal{std::vector<double>(x.size(), 0.0), x.sample_rate_hz}, false};
  if (x.empty()) {
    out.degenerate = true;
    return out;
  }
  auto [lo_it, hi_it] = std::minmax_element(x.samples.begin(), x.samples.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  const double range = hi - lo;
  // Constant to within rounding: collapse to zeros rather than amplify noise.
  if (!(range > 1e-12 * std::max(std::abs(lo), std::abs(hi))) || range == 0.0) {
    out.degenerate = true;
    return out;
  }
  for (std::size_t i = 0; i < x.size(); ++i)
    out.signal.samples[i] = std::clamp((x.samples[i] - lo) / range, 0.0, 1.0);
  return out;
}

std::size_t SegmentMask::motion_count() const {
  return static_cast<std::size_t>(std::count(motion.begin(), motion.end(), true));
}

SegmentMask segment_motion(const Signal& f_norm, double threshold) {
  SegmentMask mask;
  mask.threshold = threshold;
  mask.motion.resize(f_norm.size());
  std::size_t run_start = 0;
  bool in_run = false;
  for (std::size_t i = 0; i < f_norm.size(); ++i) {
    const double v = f_norm.samples[i];
    const bool m = v * v > threshold;
    mask.motion[i] = m;
    if (m && !in_run) {
      run_start = i;
      in_run = true;
    } else if (!m && in_run) {
      mask.runs.emplace_back(run_start, i);
      in_run = false;
    }
  }
  if (in_run) mask.runs.emplace_back(run_start, f_norm.size());
  return mask;
}

Signal apply_mask(const Signal& x, const SegmentMask& mask) {
  if (mask.motion.size() != x.size())
    fail(ErrorCode::DimensionMismatch, "mask length differs from signal length");
  Signal out{{}, x.sample_rate_hz};
  out.samples.reserve(mask.motion_count());
  for (const auto& [start, end] : mask.runs)
    out.samples.insert(out.samples.end(), x.samples.begin() + static_cast<std::ptrdiff_t>(start),
                       x.samples.begin() + static_cast<std::ptrdiff_t>(end));
  return out;
}

SegmentationTrace segment_signal(const Signal& x, const FilterSpec& spec) {
  spec.validate(x.sample_rate_hz);
  SegmentationTrace t;
  t.despiked = moving_median(x, spec.median_order);
  t.homomorphic = homomorphic_baseline(t.despiked, spec);
  t.normalized = minmax_normalize(t.homomorphic.baseline);
  t.mask = segment_motion(t.normalized.signal, spec.motion_threshold);
  return t;
}

}  // namespace gaitscreen::dsp
