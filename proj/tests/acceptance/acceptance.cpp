// Acceptance checks. Prints one PASS/FAIL line per criterion.
//
//   acceptance              run every criterion
//   acceptance 3 7          run the listed criteria
//
// Exit status is non-zero when any selected criterion fails.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "core/dsp.hpp"
#include "core/eval.hpp"
#include "core/features.hpp"
#include "core/ingest.hpp"
#include "core/model.hpp"
#include "core/report.hpp"
#include "core/synth.hpp"
#include "core/text.hpp"

namespace fs = std::filesystem;
using namespace gaitscreen;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
};

struct Criterion {
  int id;
  const char* title;
  double budget_s;
  std::function<Outcome()> run;
};

// Scratch directory removed on scope exit.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    path_ = fs::temp_directory_path() / ("gaitscreen_acc_" + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, v);
  return buf;
}

// ---------------------------------------------------------------- 1

struct PrintedTable {
  std::string name;
  // Per column: TP, FP, FN, TN, Pre, Sen, Spe, Acc. Every third column is
  // the average of the two before it.
  std::vector<std::array<double, 8>> columns;
};

std::vector<PrintedTable> printed_tables() {
  // rows_by_metric[m][c]: 8 metric rows, columns grouped as (H, L, Avg).
  auto table = [](std::string name, std::vector<std::vector<double>> rows_by_metric) {
    PrintedTable t{std::move(name), {}};
    t.columns.resize(rows_by_metric[0].size());
    for (std::size_t m = 0; m < 8; ++m)
      for (std::size_t c = 0; c < t.columns.size(); ++c) t.columns[c][m] = rows_by_metric[m][c];
    return t;
  };
  return {
      table("protocol I",
            {{4, 2, 3, 3, 4, 3.5, 5, 5, 5},
             {4, 3, 3.5, 2, 4, 3, 1, 2, 1.5},
             {3, 4, 3.5, 4, 2, 3, 2, 1, 1.5},
             {2, 4, 3, 4, 3, 3.5, 5, 5, 5},
             {50, 40, 46, 60, 50, 54, 83, 71, 77},
             {57, 33, 46, 43, 67, 54, 71, 83, 77},
             {33, 57, 46, 67, 43, 54, 83, 71, 77},
             {46, 46, 46, 54, 54, 54, 77, 77, 77}}),
      table("ablation: acceleration, gravity, angular position",
            {{1, 6, 3.5, 0, 5, 2.5, 3, 3, 3},
             {0, 6, 3, 1, 7, 4, 3, 4, 3.5},
             {6, 0, 3, 7, 1, 4, 4, 3, 3.5},
             {6, 1, 3.5, 5, 0, 2.5, 3, 3, 3},
             {100, 50, 54, 0, 42, 38, 50, 43, 46},
             {14, 100, 54, 0, 83, 38, 43, 50, 46},
             {100, 14, 54, 83, 0, 38, 50, 43, 46},
             {54, 54, 54, 38, 38, 38, 46, 46, 46}}),
      table("ablation: angular velocity",
            {{6, 2, 4},
             {4, 1, 2.5},
             {1, 4, 2.5},
             {2, 6, 4},
             {60, 67, 62},
             {86, 33, 62},
             {33, 86, 62},
             {62, 62, 62}}),
      table("ablation: CZT features",
            {{3, 2, 2.5, 3, 3, 3, 4, 5, 4.5},
             {4, 4, 4, 3, 4, 3.5, 1, 3, 2},
             {4, 4, 4, 4, 3, 3.5, 3, 1, 2},
             {2, 3, 2.5, 3, 3, 3, 5, 4, 4.5},
             {43, 33, 38, 50, 43, 46, 80, 63, 69},
             {43, 33, 38, 43, 50, 46, 57, 83, 69},
             {33, 43, 38, 50, 43, 46, 83, 57, 69},
             {38, 38, 38, 46, 46, 46, 69, 69, 69}}),
      table("ablation: CDF features",
            {{3, 2, 2.5, 4, 3, 3.5, 6, 2, 4},
             {4, 4, 4, 3, 3, 3, 4, 1, 2.5},
             {4, 4, 4, 3, 3, 3, 1, 4, 2.5},
             {2, 3, 2.5, 3, 4, 3.5, 2, 6, 4},
             {43, 33, 38, 57, 50, 54, 60, 67, 62},
             {40, 33, 38, 57, 50, 54, 86, 33, 62},
             {33, 43, 38, 50, 57, 54, 33, 86, 62},
             {38, 38, 38, 54, 54, 54, 62, 62, 62}}),
  };
}

Outcome metric_parity() {
  Outcome out;
  const char* metric_names[] = {"Pre", "Sen", "Spe", "Acc"};
  std::size_t cells = 0;

  auto compare = [&](const std::string& where, const eval::ConfusionCounts& c, const std::array<double, 4>& printed) {
    const auto r = eval::metrics(c).rounded();
    const std::array<long, 4> got{r.precision, r.sensitivity, r.specificity, r.accuracy};
    for (std::size_t m = 0; m < 4; ++m) {
      ++cells;
      if (got[m] != static_cast<long>(printed[m]))
        out.require(false, where + " " + metric_names[m] + ": printed " + std::to_string(static_cast<long>(printed[m])) +
                               ", counts give " + std::to_string(got[m]));
    }
  };

  compare("worked example", {4, 4, 3, 2}, {50, 57, 33, 46});

  for (const auto& t : printed_tables()) {
    for (std::size_t c = 0; c < t.columns.size(); ++c) {
      const auto& col = t.columns[c];
      eval::ConfusionCounts counts{col[0], col[1], col[2], col[3]};
      const char* orient[] = {"H", "L", "Avg"};
      if (c % 3 == 2) {
        // Average column: metrics of the mean H/L counts, which must also
        // equal the printed average counts.
        const auto& h = t.columns[c - 2];
        const auto& l = t.columns[c - 1];
        const auto mean = eval::mean_counts({h[0], h[1], h[2], h[3]}, {l[0], l[1], l[2], l[3]});
        if (!(mean == counts)) out.require(false, t.name + " scenario " + std::to_string(c / 3 + 1) + " Avg counts");
        counts = mean;
      }
      compare(t.name + " scenario " + std::to_string(c / 3 + 1) + " " + orient[c % 3], counts,
              {col[4], col[5], col[6], col[7]});
    }
  }
  if (out.pass) out.detail = std::to_string(cells) + " printed cells reproduced";
  else out.detail = std::to_string(cells) + " cells checked; " + out.detail;
  return out;
}

// ---------------------------------------------------------------- 2

Outcome feature_dimensionality() {
  Outcome out;
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g;
  dsp::Signal x{std::vector<double>(9000), 100.0};
  for (std::size_t i = 0; i < x.size(); ++i)
    x.samples[i] = std::sin(2.0 * std::numbers::pi * 1.3 * static_cast<double>(i) / 100.0) * (i % 3000 < 1500 ? 1.0 : 0.1) + 0.1 * g(rng);

  const features::FeatureConfig cfg;
  const auto block = features::channel_features(x, cfg);
  const auto flat = block.assembled();
  out.require(flat.size() == 370, "block length " + std::to_string(flat.size()));

  const std::array<std::size_t, 8> lengths{90, 90, 3, 3, 2, 2, 90, 90};
  std::size_t offset = 0;
  for (std::size_t s = 0; s < features::kSlices.size(); ++s) {
    const auto r = features::slice_range(features::kSlices[s]);
    out.require(r.offset == offset && r.length == lengths[s],
                std::string(features::slice_name(features::kSlices[s])) + " misplaced");
    const auto view = block.slice(features::kSlices[s]);
    out.require(view.size() == lengths[s] && std::equal(view.begin(), view.end(), flat.begin() + static_cast<long>(offset)),
                std::string(features::slice_name(features::kSlices[s])) + " disagrees with the assembled vector");
    offset += lengths[s];
  }
  out.require(offset == 370, "slices do not tile the block");

  ingest::CowRecord rec;
  rec.cow_id = "x";
  for (std::size_t c = 0; c < ingest::kSignalChannels; ++c) {
    rec.signals[c] = x.samples;
    for (double& v : rec.signals[c]) v *= 1.0 + 0.1 * static_cast<double>(c);
  }
  const auto group = features::assemble_cow_features(rec, features::ChannelGroup::Gyro, cfg);
  const auto all = features::assemble_cow_features(rec, features::ChannelGroup::All, cfg);
  out.require(group.size() == 1110, "group width " + std::to_string(group.size()));
  out.require(all.size() == 4440, "all-channel width " + std::to_string(all.size()));
  // The gyro group equals channels 6..8 of the full vector.
  out.require(std::equal(group.begin(), group.end(), all.begin() + 6 * 370), "group block is not a slice of the full vector");
  if (out.pass) out.detail = "370 per channel, 1110 per group, 4440 total";
  return out;
}

// ---------------------------------------------------------------- 3

Outcome czt_correctness() {
  Outcome out;
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<std::size_t> len(8, 1024);
  std::normal_distribution<double> g;
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = trial == 0 ? 8 : trial == 1 ? 1024 : len(rng);
    // Mostly M = N; a few trials evaluate a different number of points.
    const std::size_t m = trial % 10 == 9 ? n / 2 + 3 : n;
    dsp::Signal x{std::vector<double>(n), 100.0};
    for (double& v : x.samples) v = g(rng);

    features::CztParams p;
    const auto got = features::czt(x, p, m);

    double err = 0.0, scale = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      std::complex<long double> acc = 0;
      for (std::size_t i = 0; i < n; ++i) {
        const long double ang = -2.0L * std::numbers::pi_v<long double> * static_cast<long double>((k * i) % m) /
                                static_cast<long double>(m);
        acc += static_cast<long double>(x.samples[i]) * std::complex<long double>(std::cos(ang), std::sin(ang));
      }
      const std::complex<double> ref(static_cast<double>(acc.real()), static_cast<double>(acc.imag()));
      err = std::max(err, std::abs(got[k] - ref));
      scale = std::max(scale, std::abs(ref));
    }
    worst = std::max(worst, err / scale);
  }
  out.require(worst <= 1e-9, "max relative error " + fmt("%.3g", worst));
  if (out.pass) out.detail = "50 signals, max relative error " + fmt("%.3g", worst);
  return out;
}

// ---------------------------------------------------------------- 4

Outcome zero_phase() {
  Outcome out;
  dsp::FilterSpec spec;  // 3 Hz cutoff, order 8
  const double fs = 100.0;

  // Symmetric pulse: raised-cosine bump centered off the array middle.
  const std::size_t n = 2001;
  const double center = 737.0;
  dsp::Signal pulse{std::vector<double>(n, 0.0), fs};
  for (std::size_t i = 0; i < n; ++i) {
    const double d = (static_cast<double>(i) - center) / 60.0;
    if (std::abs(d) < 1.0) pulse.samples[i] = 0.5 * (1.0 + std::cos(std::numbers::pi * d));
  }
  const auto y = dsp::zero_phase_lowpass(pulse, spec);
  const auto peak = static_cast<double>(std::max_element(y.samples.begin(), y.samples.end()) - y.samples.begin());
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    num += static_cast<double>(i) * y.samples[i];
    den += y.samples[i];
  }
  const double centroid = num / den;
  out.require(std::abs(peak - center) <= 1.0, "peak moved to " + fmt("%.1f", peak));
  out.require(std::abs(centroid - center) <= 1.0, "centroid moved to " + fmt("%.3f", centroid));
  // Mirror symmetry about the center.
  double asym = 0.0;
  for (std::size_t k = 1; k < 400; ++k) {
    asym = std::max(asym, std::abs(y.samples[static_cast<std::size_t>(center) + k] - y.samples[static_cast<std::size_t>(center) - k]));
  }
  out.require(asym < 1e-6, "output asymmetric by " + fmt("%.3g", asym));

  dsp::Signal dc{std::vector<double>(3000, 2.5), fs};
  const auto ydc = dsp::zero_phase_lowpass(dc, spec);
  double dc_err = 0.0;
  for (double v : ydc.samples) dc_err = std::max(dc_err, std::abs(v / 2.5 - 1.0));
  out.require(dc_err <= 1e-6, "DC gain off by " + fmt("%.3g", dc_err));

  dsp::Signal tone{std::vector<double>(6000), fs};
  for (std::size_t i = 0; i < tone.size(); ++i) tone.samples[i] = std::sin(2.0 * std::numbers::pi * 25.0 * static_cast<double>(i) / fs);
  const auto yt = dsp::zero_phase_lowpass(tone, spec);
  double in_rms = 0.0, out_rms = 0.0;
  for (std::size_t i = 0; i < tone.size(); ++i) {
    in_rms += tone.samples[i] * tone.samples[i];
    out_rms += yt.samples[i] * yt.samples[i];
  }
  const double ratio = std::sqrt(out_rms / in_rms);
  out.require(ratio < 0.01, "25 Hz amplitude ratio " + fmt("%.3g", ratio));
  if (out.pass)
    out.detail = "centroid shift " + fmt("%.2g", centroid - center) + ", DC error " + fmt("%.2g", dc_err) +
                 ", 25 Hz ratio " + fmt("%.2g", ratio);
  return out;
}

// ---------------------------------------------------------------- 5

Outcome homomorphic_identity() {
  Outcome out;
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  std::uniform_int_distribution<std::size_t> len(64, 4000);
  double worst = 0.0;
  dsp::FilterSpec spec;
  for (int trial = 0; trial < 100; ++trial) {
    dsp::Signal x{std::vector<double>(len(rng)), 100.0};
    const double f0 = 0.5 + 3.0 * (trial % 7);
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double t = static_cast<double>(i) / 100.0;
      x.samples[i] = (1.0 + 0.8 * std::sin(0.3 * t + trial)) * std::sin(2.0 * std::numbers::pi * f0 * t) + 0.3 * g(rng);
    }
    const auto h = dsp::homomorphic_baseline(x, spec);
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double e = h.envelope.samples[i];
      const double rel = std::abs(h.baseline.samples[i] * h.ripple.samples[i] - e) / std::max(std::abs(e), 1e-300);
      worst = std::max(worst, rel);
    }
  }
  out.require(worst <= 1e-9, "max relative error " + fmt("%.3g", worst));
  if (out.pass) out.detail = "100 signals, max relative error " + fmt("%.3g", worst);
  return out;
}

// ---------------------------------------------------------------- 6

double oracle_kernel(const std::vector<double>& u, const std::vector<double>& v, const model::KernelParams& k) {
  double dot = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) dot += u[i] * v[i];
  return std::pow(k.gamma * dot + k.coef0, k.degree);
}

// Solves a small dense system by Gaussian elimination with partial pivoting.
bool solve(std::vector<std::vector<double>> a, std::vector<double> b, std::vector<double>& x) {
  const std::size_t n = b.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
    if (std::abs(a[piv][c]) < 1e-12) return false;
    std::swap(a[c], a[piv]);
    std::swap(b[c], b[piv]);
    for (std::size_t r = c + 1; r < n; ++r) {
      const double f = a[r][c] / a[c][c];
      for (std::size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
      b[r] -= f * b[c];
    }
  }
  x.assign(n, 0.0);
  for (std::size_t r = n; r-- > 0;) {
    double s = b[r];
    for (std::size_t k = r + 1; k < n; ++k) s -= a[r][k] * x[k];
    x[r] = s / a[r][r];
  }
  return true;
}

// Maximum of sum(a) - a'Qa/2 over 0 <= a <= C, y'a = 0, by enumerating
// every (lower, upper, free) assignment and solving the free block exactly.
double qp_oracle(const std::vector<std::vector<double>>& q, const std::vector<int>& y, double c) {
  const std::size_t n = y.size();
  std::size_t states = 1;
  for (std::size_t i = 0; i < n; ++i) states *= 3;
  double best = -INFINITY;
  for (std::size_t code = 0; code < states; ++code) {
    std::vector<int> st(n);
    std::size_t rest = code;
    for (std::size_t i = 0; i < n; ++i) {
      st[i] = static_cast<int>(rest % 3);
      rest /= 3;
    }
    std::vector<double> a(n, 0.0);
    std::vector<std::size_t> free;
    for (std::size_t i = 0; i < n; ++i) {
      if (st[i] == 1) a[i] = c;
      if (st[i] == 2) free.push_back(i);
    }
    if (free.empty()) {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += y[i] * a[i];
      if (std::abs(s) > 1e-12) continue;
    } else {
      // [Q_FF y_F; y_F' 0] [a_F; nu] = [1 - Q_FB a_B; -y_B' a_B]
      const std::size_t m = free.size();
      std::vector<std::vector<double>> sys(m + 1, std::vector<double>(m + 1, 0.0));
      std::vector<double> rhs(m + 1, 0.0), sol;
      for (std::size_t r = 0; r < m; ++r) {
        const std::size_t i = free[r];
        for (std::size_t k = 0; k < m; ++k) sys[r][k] = q[i][free[k]];
        sys[r][m] = y[i];
        sys[m][r] = y[i];
        rhs[r] = 1.0;
        for (std::size_t j = 0; j < n; ++j)
          if (st[j] == 1) rhs[r] -= q[i][j] * a[j];
      }
      for (std::size_t j = 0; j < n; ++j)
        if (st[j] == 1) rhs[m] -= y[j] * a[j];
      if (!solve(sys, rhs, sol)) continue;
      bool feasible = true;
      for (std::size_t r = 0; r < m; ++r) {
        if (sol[r] < -1e-12 || sol[r] > c + 1e-12) feasible = false;
        a[free[r]] = std::clamp(sol[r], 0.0, c);
      }
      if (!feasible) continue;
    }
    double obj = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      obj += a[i];
      for (std::size_t j = 0; j < n; ++j) obj -= 0.5 * a[i] * a[j] * q[i][j];
    }
    best = std::max(best, obj);
  }
  return best;
}

Outcome svm_oracle() {
  Outcome out;
  std::mt19937_64 rng(6);
  std::normal_distribution<double> g;
  const std::array<double, 3> cs{0.5, 1.0, 10.0};
  double worst_gap = 0.0, worst_kkt = 0.0;
  for (int inst = 0; inst < 20; ++inst) {
    const std::size_t n = 2 + static_cast<std::size_t>(inst % 5);  // 2..6 points
    const std::size_t dim = 2 + static_cast<std::size_t>(inst % 2);
    model::Matrix x(n, std::vector<double>(dim));
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = (i + static_cast<std::size_t>(inst)) % 2 == 0 ? 1 : -1;
      for (auto& v : x[i]) v = g(rng) + 0.7 * y[i];
    }
    model::SvmOptions opt;
    opt.C = cs[static_cast<std::size_t>(inst) % cs.size()];
    opt.standardize = false;
    opt.tol = 1e-3;
    opt.kernel.degree = 2 + inst % 2;
    opt.kernel.gamma = 0.5;
    opt.kernel.coef0 = 1.0;

    const auto m = model::train_svm(x, y, opt);

    std::vector<std::vector<double>> q(n, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) q[i][j] = y[i] * y[j] * oracle_kernel(x[i], x[j], opt.kernel);
    const double oracle = qp_oracle(q, y, opt.C);

    std::vector<double> alpha(n, 0.0);
    for (std::size_t s = 0; s < m.support_indices.size(); ++s) alpha[m.support_indices[s]] = m.dual_coef[s] * y[m.support_indices[s]];
    double obj = 0.0, eq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      obj += alpha[i];
      eq += alpha[i] * y[i];
      for (std::size_t j = 0; j < n; ++j) obj -= 0.5 * alpha[i] * alpha[j] * q[i][j];
    }
    const std::string tag = "instance " + std::to_string(inst);
    const double gap = std::abs(obj - oracle);
    worst_gap = std::max(worst_gap, gap);
    out.require(gap <= 1e-4, tag + ": dual gap " + fmt("%.3g", gap));
    out.require(std::abs(m.dual_objective - obj) <= 1e-9 * std::max(1.0, std::abs(obj)), tag + ": reported objective");

    // Feasibility and KKT conditions at the solver tolerance.
    out.require(std::abs(eq) <= 1e-9 * opt.C * static_cast<double>(n), tag + ": sum(alpha*y) = " + fmt("%.3g", eq));
    for (std::size_t i = 0; i < n; ++i) {
      out.require(alpha[i] >= -1e-12 && alpha[i] <= opt.C + 1e-12, tag + ": alpha out of box");
      const double margin = y[i] * model::decision_value(m, x[i]);
      double viol = 0.0;
      if (alpha[i] <= 1e-12) viol = std::max(0.0, 1.0 - margin);
      else if (alpha[i] >= opt.C - 1e-12) viol = std::max(0.0, margin - 1.0);
      else viol = std::abs(margin - 1.0);
      worst_kkt = std::max(worst_kkt, viol);
      out.require(viol <= 2.0 * opt.tol, tag + ": KKT violation " + fmt("%.3g", viol));
    }
    out.require(m.converged, tag + ": solver did not converge");
  }
  if (out.pass)
    out.detail = "20 instances, max dual gap " + fmt("%.3g", worst_gap) + ", max KKT violation " + fmt("%.3g", worst_kkt);
  return out;
}

// ---------------------------------------------------------------- 7, 8

ingest::DatasetManifest synth_dataset(const synth::GaitSpec& spec, const synth::ScoreCounts& counts,
                                      std::size_t files_per_cow, const fs::path& dir) {
  synth::DatasetRequest req;
  req.cows_per_score = counts;
  req.files_per_cow = files_per_cow;
  req.out_dir = dir.string();
  req.jobs = 0;
  synth::gen_dataset(spec, req);
  return ingest::build_manifest(dir.string(), {});
}

eval::ProtocolConfig protocol_config() {
  eval::ProtocolConfig cfg;  // 10 folds, seed 1, 70/30
  cfg.jobs = 0;
  return cfg;
}

Outcome separability() {
  Outcome out;
  const auto cfg = protocol_config();
  {
    TempDir dir("easy");
    const auto manifest = synth_dataset(synth::easy_spec(), synth::easy_counts(), 5, dir.path());
    const auto report = eval::run_protocol1(manifest, cfg);
    const double best = report.scenario_accuracy(2);
    const double auc = report.mean_auc();
    out.require(best >= 90.0, "easy best accuracy " + fmt("%.1f", best));
    out.require(auc >= 0.9, "easy mean AUC " + fmt("%.3f", auc));
    out.detail += std::string(out.detail.empty() ? "" : "; ") + "easy: best acc " + fmt("%.1f", best) + "%, mean AUC " + fmt("%.4f", auc);
  }
  {
    // Scored null arm. With labels carrying no signal the fold-averaged
    // accuracy of a 20-cow cohort spreads by ~12 points under label
    // permutation, wider than the +-10 band; 100 cows bring it to ~5.
    TempDir dir("null");
    const auto manifest = synth_dataset(synth::null_spec(), {50, 13, 13, 12, 12}, 1, dir.path());
    const auto report = eval::run_protocol1(manifest, cfg);
    const double mean = report.scenario_accuracy(1);
    out.require(std::abs(mean - 50.0) <= 10.0, "null mean accuracy " + fmt("%.1f", mean));
    out.detail += "; null (100 cows): mean acc " + fmt("%.1f", mean) + "%";
  }
  {
    // Same-shape null cohort as the easy run, reported but not scored.
    TempDir dir("null20");
    const auto manifest = synth_dataset(synth::null_spec(), synth::easy_counts(), 5, dir.path());
    const auto report = eval::run_protocol1(manifest, cfg);
    out.detail += "; null (20 cows, not scored): mean acc " + fmt("%.1f", report.scenario_accuracy(1)) + "%";
  }
  return out;
}

Outcome ablation_sanity() {
  Outcome out;
  TempDir dir("gyro");
  const auto manifest = synth_dataset(synth::gyro_only_spec(), synth::easy_counts(), 5, dir.path());
  const auto ab = eval::run_protocol2(manifest, protocol_config());
  std::string ranking;
  for (std::size_t i = 0; i < ab.group_ranking.size(); ++i) {
    ranking += (i ? " > " : "") + ab.group_ranking[i];
  }
  std::string accs;
  for (const auto& arm : ab.group_arms) accs += " " + arm.arm + "=" + fmt("%.1f", arm.scenario_accuracy(1));
  out.require(!ab.group_ranking.empty() && ab.group_ranking.front() == "gyro", "ranking " + ranking);
  out.detail += std::string(out.detail.empty() ? "" : "; ") + "ranking " + ranking + " (mean acc" + accs + ")";
  return out;
}

// ---------------------------------------------------------------- 9

Outcome dataset_statistics() {
  Outcome out;
  TempDir dir("shape");
  synth::GaitSpec spec = synth::default_spec();
  spec.samples_per_file = 300;
  const auto manifest = synth_dataset(spec, synth::paper_shape_counts(), 2, dir.path());
  const auto stats = ingest::dataset_stats(manifest);
  const std::array<std::size_t, 5> want{19, 7, 6, 6, 5};
  out.require(stats.cows_per_score == want, "cow histogram differs");
  out.require(stats.n_cows == 43 && stats.n_observations == 86, "cow/observation counts");
  out.require(stats.summary() == "43 (12x86)", "S_S rendered as '" + stats.summary() + "'");
  const auto text = ingest::stats_text(stats);
  out.require(text.find("S_S = 43 (12x86)") != std::string::npos, "stats text lacks S_S");

  // Manifest with the real dataset's counts: 43 cows, 11,518 recordings.
  std::vector<ingest::ManifestEntry> entries;
  const std::size_t per_score[5] = {19, 7, 6, 6, 5};
  std::size_t cow = 0;
  const std::size_t total = 11518;
  for (int s = 0; s < 5; ++s) {
    for (std::size_t k = 0; k < per_score[s]; ++k, ++cow) {
      const std::size_t files = total / 43 + (cow < total % 43 ? 1 : 0);
      for (std::size_t f = 0; f < files; ++f) {
        ingest::ManifestEntry e;
        e.meta.cow_id = "c" + std::to_string(cow);
        e.meta.lameness_score = s + 1;
        e.meta.start_time = std::chrono::sys_seconds{std::chrono::seconds{static_cast<long long>(f) * 90}};
        e.rows = 9000;
        entries.push_back(std::move(e));
      }
    }
  }
  const auto real = ingest::dataset_stats(ingest::make_manifest(std::move(entries)));
  out.require(real.product == 495274, "product " + std::to_string(real.product));
  if (out.pass) out.detail = "19/7/6/6/5, S_S = " + stats.summary() + ", 43 x 11518 = " + std::to_string(real.product);
  return out;
}

// ---------------------------------------------------------------- 10

std::map<std::string, std::string> run_bundle(const fs::path& data, const fs::path& out_dir, unsigned jobs) {
  auto cfg = protocol_config();
  cfg.jobs = jobs;
  const auto manifest = ingest::build_manifest(data.string(), {});
  const auto table = eval::extract_features(manifest, cfg);
  std::vector<eval::ProtocolReport> reports{eval::run_protocol1(table, cfg), eval::run_multiclass(table, cfg)};
  const auto ab = eval::run_protocol2(table, cfg);
  reports.insert(reports.end(), ab.group_arms.begin(), ab.group_arms.end());
  reports.insert(reports.end(), ab.family_arms.begin(), ab.family_arms.end());
  fs::create_directories(out_dir);
  eval::ConfigEcho echo{{"seed", std::to_string(cfg.seed)}};
  std::map<std::string, std::string> files;
  for (const auto& path : report::write_bundle(out_dir.string(), reports, echo))
    files[fs::path(path).filename().string()] = text::read_file(path);
  return files;
}

Outcome determinism() {
  Outcome out;
  TempDir dir("det");
  synth::GaitSpec spec = synth::easy_spec();
  spec.samples_per_file = 2000;
  synth::DatasetRequest req;
  req.cows_per_score = synth::easy_counts();
  req.files_per_cow = 2;
  for (const char* name : {"a", "b"}) {
    req.out_dir = (dir.path() / name).string();
    req.jobs = name[0] == 'a' ? 1 : 3;
    synth::gen_dataset(spec, req);
  }
  std::size_t files_compared = 0;
  for (const auto& entry : fs::directory_iterator(dir.path() / "a")) {
    const auto other = dir.path() / "b" / entry.path().filename();
    out.require(fs::exists(other) && text::read_file(entry.path().string()) == text::read_file(other.string()),
                "synthetic file " + entry.path().filename().string() + " differs");
    ++files_compared;
  }
  const auto first = run_bundle(dir.path() / "a", dir.path() / "r1", 1);
  const auto second = run_bundle(dir.path() / "a", dir.path() / "r2", 3);
  out.require(first.size() == second.size() && first.size() > 2, "report file sets differ");
  for (const auto& [name, content] : first) {
    auto it = second.find(name);
    out.require(it != second.end() && it->second == content, "report " + name + " differs");
  }
  if (out.pass)
    out.detail = std::to_string(files_compared) + " data files and " + std::to_string(first.size()) +
                 " report files byte-identical (1 vs 3 workers)";
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria = {
      {1, "metric parity", 1.0, metric_parity},
      {2, "feature dimensionality", 1.0, feature_dimensionality},
      {3, "CZT correctness", 30.0, czt_correctness},
      {4, "zero-phase property", 5.0, zero_phase},
      {5, "homomorphic identity", 5.0, homomorphic_identity},
      {6, "SVM oracle equivalence", 60.0, svm_oracle},
      {7, "end-to-end separability", 600.0, separability},
      {8, "ablation sanity", 600.0, ablation_sanity},
      {9, "dataset statistics", 60.0, dataset_statistics},
      {10, "determinism", 600.0, determinism},
  };

  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) selected.push_back(std::atoi(argv[i]));
  int failures = 0;
  for (const auto& c : criteria) {
    if (!selected.empty() && std::find(selected.begin(), selected.end(), c.id) == selected.end()) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (secs > c.budget_s) o.require(false, "runtime " + fmt("%.1f", secs) + " s over " + fmt("%.0f", c.budget_s) + " s budget");
    std::printf("criterion %2d %-24s %s  (%.2f s)  %s\n", c.id, c.title, o.pass ? "PASS" : "FAIL", secs, o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
