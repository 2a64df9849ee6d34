#include "pulselab/pulses.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <json.hpp>

namespace pulselab {

namespace {

constexpr double kTilingTolerance = 0.0;  // adjacent endpoints must coincide exactly

std::string upper(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  return s;
}

double sinc(double x) {
  if (std::abs(x) < 1e-4) {
    const double x2 = x * x;
    return 1.0 - x2 / 6.0 + x2 * x2 / 120.0;
  }
  return std::sin(x) / x;
}

double parse_decimal(const nlohmann::json& value, const std::string& what) {
  if (value.is_number()) return value.get<double>();
  if (!value.is_string()) throw ConfigError("catalog field '" + what + "' must be a decimal string");
  const auto& text = value.get_ref<const std::string&>();
  double out = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc{} || ptr != last)
    throw ConfigError("catalog field '" + what + "' is not a decimal number: '" + text + "'");
  return out;
}

std::string decimal_string(double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

double chop(double x, int decimals) {
  const double scale = std::pow(10.0, decimals);
  return std::trunc(x * scale) / scale;
}

}  // namespace

extern const char* const kBuiltinCatalogJson;

// ---------------------------------------------------------------------------
// PiecewiseConstantPulse
// ---------------------------------------------------------------------------

PiecewiseConstantPulse::PiecewiseConstantPulse(std::string name, int order,
                                               std::vector<Segment> segments, double tau_p)
    : name_(std::move(name)), order_(order), segments_(std::move(segments)), tau_p_(tau_p) {
  if (segments_.empty()) throw ConfigError("pulse '" + name_ + "' has no segments");
  if (!(tau_p_ > 0.0) || !std::isfinite(tau_p_))
    throw ConfigError("pulse '" + name_ + "' needs a positive duration");
  if (segments_.front().start != 0.0 || segments_.back().end != 1.0)
    throw ConfigError("segments of '" + name_ + "' must cover [0, 1]");
  for (std::size_t i = 0; i < segments_.size(); ++i) {
    const auto& s = segments_[i];
    if (!(s.end > s.start)) throw ConfigError("empty or reversed segment in '" + name_ + "'");
    if (!std::isfinite(s.amplitude_taup)) throw ConfigError("non-finite amplitude in '" + name_ + "'");
    if (i > 0 && std::abs(s.start - segments_[i - 1].end) > kTilingTolerance)
      throw ConfigError("segments of '" + name_ + "' leave a gap or overlap");
  }
}

PiecewiseConstantPulse PiecewiseConstantPulse::with_duration(double tau_p) const {
  return PiecewiseConstantPulse(name_, order_, segments_, tau_p);
}

PiecewiseConstantPulse PiecewiseConstantPulse::with_peak_amplitude(double v) const {
  if (!(v > 0.0)) throw ConfigError("peak amplitude must be positive");
  return with_duration(peak_amplitude_taup() / v);
}

double PiecewiseConstantPulse::peak_amplitude_taup() const {
  double peak = 0.0;
  for (const auto& s : segments_) peak = std::max(peak, std::abs(s.amplitude_taup));
  return peak;
}

std::vector<double> PiecewiseConstantPulse::switching_fractions() const {
  std::vector<double> out;
  for (std::size_t i = 1; i < segments_.size(); ++i) out.push_back(segments_[i].start);
  return out;
}

std::vector<double> PiecewiseConstantPulse::switching_instants() const {
  auto out = switching_fractions();
  for (double& f : out) f *= tau_p_;
  return out;
}

double PiecewiseConstantPulse::amplitude_at(double t) const {
  const double f = t / tau_p_;
  for (const auto& s : segments_)
    if (f < s.end) return s.amplitude_taup / tau_p_;
  return segments_.back().amplitude_taup / tau_p_;
}

double PiecewiseConstantPulse::total_angle() const { return angle_at(*this, tau_p_); }

PiecewiseConstantPulse PiecewiseConstantPulse::truncated(int decimals) const {
  std::vector<Segment> out = segments_;
  for (auto& s : out) {
    s.start = chop(s.start, decimals);
    s.end = chop(s.end, decimals);
    s.amplitude_taup = chop(s.amplitude_taup, decimals);
  }
  return PiecewiseConstantPulse(name_ + "@" + std::to_string(decimals), order_, std::move(out),
                                tau_p_);
}

double angle_at(const PiecewiseConstantPulse& pulse, double t) {
  const double tau = pulse.tau_p();
  if (!(t >= 0.0 && t <= tau)) throw OutOfRange("angle_at: time outside [0, tau_p]");
  const double f = t / tau;
  double psi = 0.0;
  for (const auto& s : pulse.segments()) {
    if (f <= s.start) break;
    psi += 2.0 * s.amplitude_taup * (std::min(f, s.end) - s.start);
  }
  return psi;
}

void linear_phase_integrals(double psi0, double slope, double length, double& sin_part,
                            double& cos_part) {
  const double half = 0.5 * slope * length;
  const double weight = length * sinc(half);
  sin_part = weight * std::sin(psi0 + half);
  cos_part = weight * std::cos(psi0 + half);
}

FirstOrderIntegrals first_order_integrals(const PiecewiseConstantPulse& pulse) {
  const double tau = pulse.tau_p();
  FirstOrderIntegrals out;
  double psi = 0.0;
  for (const auto& s : pulse.segments()) {
    const double length = (s.end - s.start) * tau;
    const double slope = 2.0 * s.amplitude_taup / tau;
    double sp = 0.0, cp = 0.0;
    linear_phase_integrals(psi, slope, length, sp, cp);
    out.sin_integral += sp;
    out.cos_integral += cp;
    psi += 2.0 * s.amplitude_taup * (s.end - s.start);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Catalog
// ---------------------------------------------------------------------------

PulseCatalog::PulseCatalog(std::vector<PiecewiseConstantPulse> pulses) : pulses_(std::move(pulses)) {
  for (std::size_t i = 0; i < pulses_.size(); ++i)
    for (std::size_t j = 0; j < i; ++j)
      if (upper(pulses_[i].name()) == upper(pulses_[j].name()))
        throw ConfigError("duplicate pulse name '" + pulses_[i].name() + "'");
}

PulseCatalog PulseCatalog::from_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("catalog is not valid JSON: ") + e.what());
  }
  const nlohmann::json& list = doc.is_object() && doc.contains("pulses") ? doc["pulses"] : doc;
  if (!list.is_array()) throw ConfigError("catalog must be a list of pulse objects");

  std::vector<PiecewiseConstantPulse> pulses;
  for (const auto& entry : list) {
    if (!entry.is_object() || !entry.contains("name") || !entry.contains("segments"))
      throw ConfigError("catalog entry needs 'name' and 'segments'");
    const auto name = entry["name"].get<std::string>();
    const int order = entry.value("order", 0);
    std::vector<Segment> segments;
    for (const auto& s : entry["segments"]) {
      segments.push_back({parse_decimal(s.at("start"), name + ".start"),
                          parse_decimal(s.at("end"), name + ".end"),
                          parse_decimal(s.at("amplitude_taup"), name + ".amplitude_taup")});
    }
    pulses.emplace_back(name, order, std::move(segments));
  }
  return PulseCatalog(std::move(pulses));
}

PulseCatalog PulseCatalog::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open catalog file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return from_json(buf.str());
}

const PulseCatalog& PulseCatalog::builtin() {
  static const PulseCatalog catalog = from_json(kBuiltinCatalogJson);
  return catalog;
}

namespace {
nlohmann::json pulse_json(const PiecewiseConstantPulse& p) {
  nlohmann::json segs = nlohmann::json::array();
  for (const auto& s : p.segments())
    segs.push_back({{"start", decimal_string(s.start)},
                    {"end", decimal_string(s.end)},
                    {"amplitude_taup", decimal_string(s.amplitude_taup)}});
  return {{"name", p.name()}, {"order", p.order()}, {"segments", segs}};
}
}  // namespace

std::string pulse_to_json(const PiecewiseConstantPulse& pulse) { return pulse_json(pulse).dump(2); }

std::string PulseCatalog::to_json() const {
  nlohmann::json doc = nlohmann::json::array();
  for (const auto& p : pulses_) doc.push_back(pulse_json(p));
  return doc.dump(2);
}

const PiecewiseConstantPulse& PulseCatalog::at(const std::string& name) const {
  const auto key = upper(name);
  for (const auto& p : pulses_)
    if (upper(p.name()) == key) return p;
  throw ConfigError("unknown pulse '" + name + "'");
}

bool PulseCatalog::contains(const std::string& name) const {
  const auto key = upper(name);
  return std::any_of(pulses_.begin(), pulses_.end(),
                     [&](const auto& p) { return upper(p.name()) == key; });
}

std::vector<std::string> PulseCatalog::names() const {
  std::vector<std::string> out;
  for (const auto& p : pulses_) out.push_back(p.name());
  return out;
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

bool ValidationReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
}

std::string ValidationReport::summary() const {
  std::ostringstream out;
  for (const auto& c : checks) {
    out << (c.passed ? "pass " : "FAIL ") << c.pulse << ' ' << c.condition << " deviation "
        << c.value << " (tol " << c.tolerance << ")\n";
  }
  return out.str();
}

CatalogInvalid::CatalogInvalid(ValidationReport report)
    : ConfigError("pulse catalog failed validation:\n" + [&] {
        ValidationReport failed;
        for (const auto& c : report.checks)
          if (!c.passed) failed.checks.push_back(c);
        return failed.summary();
      }()),
      report_(std::move(report)) {}

ValidationReport validate_pulse(const PiecewiseConstantPulse& pulse) {
  ValidationReport report;
  const double angle_dev = pulse.total_angle() - std::numbers::pi;
  report.checks.push_back({pulse.name(), "total_angle", angle_dev, kAngleTolerance,
                           std::abs(angle_dev) <= kAngleTolerance});
  if (pulse.order() >= 1) {
    const auto sc = first_order_integrals(pulse);
    const double tol = kFirstOrderTolerance * pulse.tau_p();
    report.checks.push_back({pulse.name(), "sin_integral", sc.sin_integral, tol,
                             std::abs(sc.sin_integral) <= tol});
    report.checks.push_back({pulse.name(), "cos_integral", sc.cos_integral, tol,
                             std::abs(sc.cos_integral) <= tol});
  }
  return report;
}

ValidationReport validate_catalog(const PulseCatalog& catalog) {
  ValidationReport report;
  for (const auto& p : catalog.pulses()) {
    auto r = validate_pulse(p);
    report.checks.insert(report.checks.end(), r.checks.begin(), r.checks.end());
  }
  if (!report.all_passed()) throw CatalogInvalid(std::move(report));
  return report;
}

}  // namespace pulselab
