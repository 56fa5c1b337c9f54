#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace gaitscreen::dsp {

struct Signal {
  std::vector<double> samples;
  double sample_rate_hz = 100.0;

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
};

struct FilterSpec {
  int median_order = 3;            // N_M, odd
  double lowpass_cutoff_hz = 3.0;
  int lowpass_order = 8;           // N_H, effective order after the forward-backward pass
  double log_floor = 1e-12;
  double motion_threshold = 0.10;  // fraction of normalized baseline power

  // Throws on an invalid spec. `sample_rate_hz` bounds the cutoff.
  void validate(double sample_rate_hz) const;
};

// Edges use symmetric shrinking windows, so every output is the median of
// an odd-length window centered on its sample.
Signal moving_median(const Signal& x, int order);

// |x + j H(x)| via the frequency-domain analytic signal.
Signal analytic_envelope(const Signal& x);

// Second-order section, transposed direct form II, a0 normalized to 1.
struct Biquad {
  double b0, b1, b2, a1, a2;
};

// Butterworth low-pass of `order` poles as cascaded sections (bilinear
// transform with prewarping). An odd order ends in a first-order section
// stored with b2 = a2 = 0.
std::vector<Biquad> butterworth_lowpass(int order, double cutoff_hz, double sample_rate_hz);

// Forward-backward application of a Butterworth stage of order N_H/2, so the
// magnitude response is squared and the phase is zero.
Signal zero_phase_lowpass(const Signal& x, const FilterSpec& spec);

struct HomomorphicResult {
  Signal envelope;      // e
  Signal log_envelope;  // ln(max(e, eps))
  Signal baseline;      // f, low-frequency factor
  Signal ripple;        // h = e / max(f, eps)
  bool degenerate = false;
};

HomomorphicResult homomorphic_baseline(const Signal& x, const FilterSpec& spec);

struct Normalized {
  Signal signal;
  bool degenerate = false;  // constant input, mapped to all zeros
};

Normalized minmax_normalize(const Signal& x);

struct SegmentMask {
  std::vector<bool> motion;
  double threshold = 0.10;
  std::vector<std::pair<std::size_t, std::size_t>> runs;  // half-open [start, end)

  std::size_t motion_count() const;
};

// motion[n] <=> f_norm[n]^2 > threshold.
SegmentMask segment_motion(const Signal& f_norm, double threshold);

// Concatenation of the motion samples of `x`, in order.
Signal apply_mask(const Signal& x, const SegmentMask& mask);

// Every intermediate of the segmentation chain, for inspection and the
// dsp-trace command.
struct SegmentationTrace {
  Signal despiked;
  HomomorphicResult homomorphic;
  Normalized normalized;
  SegmentMask mask;
};

// median -> homomorphic baseline -> [0,1] normalization -> threshold.
SegmentationTrace segment_signal(const Signal& x, const FilterSpec& spec);

}  // namespace gaitscreen::dsp
