#include "core/report.hpp"

#include <cctype>
#include <filesystem>

#include "core/text.hpp"

namespace gaitscreen::report {

namespace {

std::string safe_name(std::string s) {
  for (char& c : s)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_') c = '_';
  return s;
}

}  // namespace

std::vector<std::string> write_bundle(const std::string& out_dir, std::span<const eval::ProtocolReport> reports,
                                      const eval::ConfigEcho& config) {
  namespace fs = std::filesystem;
  std::vector<std::string> written;
  auto emit = [&](const std::string& name, std::string_view content) {
    const std::string path = (fs::path(out_dir) / name).string();
    text::write_file_atomic(path, content);
    written.push_back(path);
  };

  emit("report.csv", eval::report_csv(reports, config));
  std::string txt;
  for (const auto& r : reports) {
    txt += eval::report_text(r);
    txt += '\n';
  }
  emit("report.txt", txt);
  for (const auto& r : reports) {
    for (const auto& f : r.folds) {
      if (f.roc.points.empty()) continue;
      emit("roc_" + safe_name(r.protocol + "-" + r.arm) + "_" + std::to_string(f.fold) + ".csv", eval::roc_csv(f.roc));
    }
  }
  return written;
}

std::string trace_csv(const dsp::Signal& raw, const dsp::SegmentationTrace& trace) {
  std::string out = "t,raw,despiked,envelope,log_envelope,baseline,ripple,normalized,motion\n";
  const auto& h = trace.homomorphic;
  for (std::size_t i = 0; i < raw.samples.size(); ++i) {
    out += text::format_double(static_cast<double>(i) / raw.sample_rate_hz, 10);
    for (double v : {raw.samples[i], trace.despiked.samples[i], h.envelope.samples[i], h.log_envelope.samples[i],
                     h.baseline.samples[i], h.ripple.samples[i], trace.normalized.signal.samples[i]}) {
      out += ',';
      out += text::format_double(v, 12);
    }
    out += trace.mask.motion[i] ? ",1\n" : ",0\n";
  }
  return out;
}

}  // namespace gaitscreen::report
