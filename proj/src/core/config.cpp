#include "core/config.hpp"

#include <functional>

#include "core/error.hpp"
#include "core/text.hpp"

namespace gaitscreen::config {

namespace {

using eval::ProtocolConfig;
using Setter = std::function<void(ProtocolConfig&, std::string_view)>;
using Getter = std::function<std::string(const ProtocolConfig&)>;

struct Entry {
  std::string name;
  std::string help;
  Getter get;
  Setter set;
};

[[noreturn]] void bad_value(std::string_view key, std::string_view value, std::string_view want) {
  fail(ErrorCode::Config, std::string(key) + ": '" + std::string(value) + "' is not " + std::string(want));
}

double to_double(std::string_view key, std::string_view v) {
  double out = 0.0;
  if (!text::parse_double(v, out)) bad_value(key, v, "a number");
  return out;
}

long long to_int(std::string_view key, std::string_view v, long long lo) {
  long long out = 0;
  if (!text::parse_int(v, out) || out < lo) bad_value(key, v, "an integer >= " + std::to_string(lo));
  return out;
}

bool to_bool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  bad_value(key, v, "a boolean");
}

std::string fmt(double v) { return text::format_double(v); }
std::string fmt_bool(bool b) { return b ? "true" : "false"; }

template <typename T>
Entry num(std::string name, std::string help, T ProtocolConfig::*outer, double T::*field) {
  Entry e;
  e.name = name;
  e.help = std::move(help);
  e.get = [=](const ProtocolConfig& c) { return fmt((c.*outer).*field); };
  e.set = [=](ProtocolConfig& c, std::string_view v) { (c.*outer).*field = to_double(name, v); };
  return e;
}

const std::vector<Entry>& table() {
  static const std::vector<Entry> entries = [] {
    std::vector<Entry> t;
    auto add = [&](std::string name, std::string help, Getter g, Setter s) {
      t.push_back({std::move(name), std::move(help), std::move(g), std::move(s)});
    };

    add("filter.median_order", "moving-median window length (odd)",
        [](const ProtocolConfig& c) { return std::to_string(c.features.filter.median_order); },
        [](ProtocolConfig& c, std::string_view v) {
          c.features.filter.median_order = static_cast<int>(to_int("filter.median_order", v, 1));
        });
    add("filter.lowpass_cutoff_hz", "Butterworth cutoff of the log-envelope low-pass",
        [](const ProtocolConfig& c) { return fmt(c.features.filter.lowpass_cutoff_hz); },
        [](ProtocolConfig& c, std::string_view v) {
          c.features.filter.lowpass_cutoff_hz = to_double("filter.lowpass_cutoff_hz", v);
        });
    add("filter.lowpass_order", "effective zero-phase low-pass order (even)",
        [](const ProtocolConfig& c) { return std::to_string(c.features.filter.lowpass_order); },
        [](ProtocolConfig& c, std::string_view v) {
          c.features.filter.lowpass_order = static_cast<int>(to_int("filter.lowpass_order", v, 2));
        });
    add("filter.log_floor", "envelope floor before the logarithm",
        [](const ProtocolConfig& c) { return fmt(c.features.filter.log_floor); },
        [](ProtocolConfig& c, std::string_view v) { c.features.filter.log_floor = to_double("filter.log_floor", v); });
    add("filter.motion_threshold", "motion when the squared normalized baseline exceeds this",
        [](const ProtocolConfig& c) { return fmt(c.features.filter.motion_threshold); },
        [](ProtocolConfig& c, std::string_view v) {
          c.features.filter.motion_threshold = to_double("filter.motion_threshold", v);
        });

    add("czt.a0", "contour starting radius",
        [](const ProtocolConfig& c) { return fmt(c.features.czt.a0); },
        [](ProtocolConfig& c, std::string_view v) { c.features.czt.a0 = to_double("czt.a0", v); });
    add("czt.theta0", "contour starting angle, radians",
        [](const ProtocolConfig& c) { return fmt(c.features.czt.theta0); },
        [](ProtocolConfig& c, std::string_view v) { c.features.czt.theta0 = to_double("czt.theta0", v); });
    add("czt.w0", "contour radial step ratio",
        [](const ProtocolConfig& c) { return fmt(c.features.czt.w0); },
        [](ProtocolConfig& c, std::string_view v) { c.features.czt.w0 = to_double("czt.w0", v); });
    add("czt.phi0", "contour angular step, radians; auto = -2*pi/M",
        [](const ProtocolConfig& c) { return c.features.czt.phi0 ? fmt(*c.features.czt.phi0) : std::string("auto"); },
        [](ProtocolConfig& c, std::string_view v) {
          if (v == "auto") c.features.czt.phi0.reset();
          else c.features.czt.phi0 = to_double("czt.phi0", v);
        });
    add("czt.bins", "number of output bins M; 0 = automatic",
        [](const ProtocolConfig& c) { return std::to_string(c.features.czt.bins); },
        [](ProtocolConfig& c, std::string_view v) {
          c.features.czt.bins = static_cast<std::size_t>(to_int("czt.bins", v, 0));
        });
    add("czt.decimation", "decimation factor when bins are not scaled with length",
        [](const ProtocolConfig& c) { return std::to_string(c.features.czt.decimation); },
        [](ProtocolConfig& c, std::string_view v) {
          c.features.czt.decimation = static_cast<std::size_t>(to_int("czt.decimation", v, 1));
        });
    add("czt.scale_with_length", "automatic M = 90*ceil(N/90)",
        [](const ProtocolConfig& c) { return fmt_bool(c.features.czt.scale_with_length); },
        [](ProtocolConfig& c, std::string_view v) {
          c.features.czt.scale_with_length = to_bool("czt.scale_with_length", v);
        });

    add("svm.degree", "polynomial kernel degree",
        [](const ProtocolConfig& c) { return std::to_string(c.svm.kernel.degree); },
        [](ProtocolConfig& c, std::string_view v) { c.svm.kernel.degree = static_cast<int>(to_int("svm.degree", v, 1)); });
    add("svm.gamma", "kernel scale; 0 = 1/dimension",
        [](const ProtocolConfig& c) { return fmt(c.svm.kernel.gamma); },
        [](ProtocolConfig& c, std::string_view v) { c.svm.kernel.gamma = to_double("svm.gamma", v); });
    add("svm.coef0", "kernel offset",
        [](const ProtocolConfig& c) { return fmt(c.svm.kernel.coef0); },
        [](ProtocolConfig& c, std::string_view v) { c.svm.kernel.coef0 = to_double("svm.coef0", v); });
    add("svm.C", "box constraint",
        [](const ProtocolConfig& c) { return fmt(c.svm.C); },
        [](ProtocolConfig& c, std::string_view v) { c.svm.C = to_double("svm.C", v); });
    add("svm.tol", "KKT violation tolerance",
        [](const ProtocolConfig& c) { return fmt(c.svm.tol); },
        [](ProtocolConfig& c, std::string_view v) { c.svm.tol = to_double("svm.tol", v); });
    add("svm.max_iter", "solver iteration cap",
        [](const ProtocolConfig& c) { return std::to_string(c.svm.max_iter); },
        [](ProtocolConfig& c, std::string_view v) {
          c.svm.max_iter = static_cast<std::size_t>(to_int("svm.max_iter", v, 1));
        });
    add("svm.standardize", "z-score features on the training rows",
        [](const ProtocolConfig& c) { return fmt_bool(c.svm.standardize); },
        [](ProtocolConfig& c, std::string_view v) { c.svm.standardize = to_bool("svm.standardize", v); });

    add("eval.folds", "number of random splits",
        [](const ProtocolConfig& c) { return std::to_string(c.folds); },
        [](ProtocolConfig& c, std::string_view v) { c.folds = static_cast<std::size_t>(to_int("eval.folds", v, 1)); });
    add("eval.seed", "split seed",
        [](const ProtocolConfig& c) { return std::to_string(c.seed); },
        [](ProtocolConfig& c, std::string_view v) { c.seed = static_cast<std::uint64_t>(to_int("eval.seed", v, 0)); });
    add("eval.test_fraction", "held-out share of cows per class",
        [](const ProtocolConfig& c) { return fmt(c.test_fraction); },
        [](ProtocolConfig& c, std::string_view v) { c.test_fraction = to_double("eval.test_fraction", v); });
    add("eval.channel_group", "accel | gravity | gyro | attitude | all",
        [](const ProtocolConfig& c) { return std::string(features::group_name(c.group)); },
        [](ProtocolConfig& c, std::string_view v) {
          auto g = features::parse_group(v);
          if (!g) bad_value("eval.channel_group", v, "a channel group");
          c.group = *g;
        });
    add("eval.feature_family", "all | czt | cdf",
        [](const ProtocolConfig& c) { return std::string(features::family_name(c.family)); },
        [](ProtocolConfig& c, std::string_view v) {
          auto f = features::parse_family(v);
          if (!f) bad_value("eval.feature_family", v, "a feature family");
          c.family = *f;
        });

    add("ingest.utc_offset_minutes", "offset of the filename clock from UTC",
        [](const ProtocolConfig& c) { return std::to_string(c.parse.utc_offset_minutes); },
        [](ProtocolConfig& c, std::string_view v) {
          c.parse.utc_offset_minutes = static_cast<int>(to_int("ingest.utc_offset_minutes", v, -24 * 60));
        });
    add("ingest.nominal_rate_hz", "sample rate used for filtering",
        [](const ProtocolConfig& c) { return fmt(c.parse.nominal_rate_hz); },
        [](ProtocolConfig& c, std::string_view v) { c.parse.nominal_rate_hz = to_double("ingest.nominal_rate_hz", v); });
    add("ingest.nominal_seconds", "expected file duration",
        [](const ProtocolConfig& c) { return fmt(c.parse.nominal_seconds); },
        [](ProtocolConfig& c, std::string_view v) { c.parse.nominal_seconds = to_double("ingest.nominal_seconds", v); });
    add("ingest.length_tolerance", "relative duration deviation before a file is flagged",
        [](const ProtocolConfig& c) { return fmt(c.parse.length_tolerance); },
        [](ProtocolConfig& c, std::string_view v) {
          c.parse.length_tolerance = to_double("ingest.length_tolerance", v);
        });

    add("run.jobs", "worker threads; 0 = all cores",
        [](const ProtocolConfig& c) { return std::to_string(c.jobs); },
        [](ProtocolConfig& c, std::string_view v) { c.jobs = static_cast<unsigned>(to_int("run.jobs", v, 0)); });
    return t;
  }();
  return entries;
}

const Entry& find(std::string_view key) {
  for (const auto& e : table())
    if (e.name == key) return e;
  fail(ErrorCode::Config, "unknown key '" + std::string(key) + "'");
}

}  // namespace

const std::vector<KeyInfo>& keys() {
  static const std::vector<KeyInfo> info = [] {
    std::vector<KeyInfo> out;
    const ProtocolConfig defaults;
    for (const auto& e : table()) out.push_back({e.name, e.get(defaults), e.help});
    return out;
  }();
  return info;
}

void RunConfig::set(std::string_view key, std::string_view value) {
  find(text::trim(key)).set(protocol, text::trim(value));
}

std::string RunConfig::get(std::string_view key) const { return find(key).get(protocol); }

void RunConfig::load_text(std::string_view content, std::string_view origin) {
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= content.size()) {
    const std::size_t nl = content.find('\n', pos);
    std::string_view line = content.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? content.size() + 1 : nl + 1;
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = text::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      fail(ErrorCode::Config, std::string(origin) + ":" + std::to_string(line_no) + ": expected key = value");
    try {
      set(line.substr(0, eq), line.substr(eq + 1));
    } catch (const Error& e) {
      fail(ErrorCode::Config, std::string(origin) + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
}

void RunConfig::load_file(const std::string& path) { load_text(text::read_file(path), path); }

void RunConfig::validate() const {
  try {
    protocol.features.filter.validate(protocol.parse.nominal_rate_hz);
    protocol.features.czt.validate();
  } catch (const Error& e) {
    fail(ErrorCode::Config, e.what());
  }
  if (!(protocol.svm.C > 0.0)) fail(ErrorCode::Config, "svm.C must be positive");
  if (!(protocol.svm.tol > 0.0)) fail(ErrorCode::Config, "svm.tol must be positive");
  if (!(protocol.svm.kernel.gamma >= 0.0)) fail(ErrorCode::Config, "svm.gamma must be >= 0");
  if (!(protocol.test_fraction > 0.0 && protocol.test_fraction < 1.0))
    fail(ErrorCode::Config, "eval.test_fraction must lie in (0, 1)");
  if (!(protocol.parse.nominal_rate_hz > 0.0)) fail(ErrorCode::Config, "ingest.nominal_rate_hz must be positive");
}

eval::ConfigEcho RunConfig::echo() const {
  eval::ConfigEcho out;
  out.emplace_back("version", std::string(kVersion));
  for (const auto& e : table()) out.emplace_back(e.name, e.get(protocol));
  return out;
}

std::string RunConfig::render() const {
  std::string out;
  for (const auto& e : table()) out += e.name + " = " + e.get(protocol) + "\n";
  return out;
}

}  // namespace gaitscreen::config
