#pragma once

#include <span>
#include <string>
#include <vector>

#include "core/dsp.hpp"
#include "core/eval.hpp"

namespace gaitscreen::report {

// Writes report.csv, report.txt and one roc_<arm>_<fold>.csv per binary fold
// under out_dir. Returns the written paths.
std::vector<std::string> write_bundle(const std::string& out_dir, std::span<const eval::ProtocolReport> reports,
                                      const eval::ConfigEcho& config);

// Per-sample trace: t,raw,despiked,envelope,log_envelope,baseline,ripple,normalized,motion
std::string trace_csv(const dsp::Signal& raw, const dsp::SegmentationTrace& trace);

}  // namespace gaitscreen::report
