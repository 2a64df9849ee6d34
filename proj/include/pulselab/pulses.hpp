#pragma once

#include <map>
#include <string>
#include <vector>

#include "pulselab/errors.hpp"

namespace pulselab {

/// One constant-amplitude piece. start/end are fractions of tau_p; the
/// amplitude is in units of 1/tau_p (Table-style convention), so the
/// physical drive on the piece is amplitude_taup / tau_p.
struct Segment {
  double start = 0.0;
  double end = 1.0;
  double amplitude_taup = 0.0;
};

/// Piecewise constant control v(t) on [0, tau_p] about the x axis.
/// The rotation angle is psi(t) = 2 * integral_0^t v.
class PiecewiseConstantPulse {
 public:
  PiecewiseConstantPulse() = default;
  /// Throws ConfigError unless the segments tile [0, 1] exactly.
  PiecewiseConstantPulse(std::string name, int order, std::vector<Segment> segments,
                         double tau_p = 1.0);

  const std::string& name() const { return name_; }
  /// Advertised refocusing order (0 for a plain pulse).
  int order() const { return order_; }
  double tau_p() const { return tau_p_; }
  const std::vector<Segment>& segments() const { return segments_; }

  /// Same shape with a different duration.
  PiecewiseConstantPulse with_duration(double tau_p) const;
  /// Same shape stretched so that its peak amplitude equals v.
  PiecewiseConstantPulse with_peak_amplitude(double v) const;

  /// max |amplitude| * tau_p, i.e. the product v * tau_p of the shape.
  double peak_amplitude_taup() const;
  double peak_amplitude() const { return peak_amplitude_taup() / tau_p_; }

  /// Interior switching fractions (segment boundaries strictly inside (0,1)).
  std::vector<double> switching_fractions() const;
  /// Interior switching instants, computed as fraction * tau_p.
  std::vector<double> switching_instants() const;

  /// Drive v(t) in absolute units; right-continuous at switching instants.
  double amplitude_at(double t) const;
  /// Total angle psi(tau_p).
  double total_angle() const;

  /// Copy with every instant and amplitude chopped to `decimals` decimal
  /// places (towards zero). Used to emulate limited realization accuracy.
  PiecewiseConstantPulse truncated(int decimals) const;

 private:
  std::string name_;
  int order_ = 0;
  std::vector<Segment> segments_;
  double tau_p_ = 1.0;
};

/// psi(t) = 2 * integral_0^t v(t') dt'. Throws OutOfRange outside [0, tau_p].
double angle_at(const PiecewiseConstantPulse& pulse, double t);

struct FirstOrderIntegrals {
  double sin_integral = 0.0;  // S = integral of sin psi over [0, tau_p]
  double cos_integral = 0.0;  // C = integral of cos psi over [0, tau_p]
};

/// Closed-form S and C, summed per linear-psi segment.
FirstOrderIntegrals first_order_integrals(const PiecewiseConstantPulse& pulse);

/// Integral of sin/cos of psi over [t0, t1] where psi is linear on that
/// interval with psi(t0) = psi0 and slope k. Exact, stable as k -> 0.
void linear_phase_integrals(double psi0, double slope, double length, double& sin_part,
                            double& cos_part);

class PulseCatalog {
 public:
  PulseCatalog() = default;
  explicit PulseCatalog(std::vector<PiecewiseConstantPulse> pulses);

  /// Parses the catalog JSON: a list (or {"pulses": [...]}) of
  /// {"name", "order", "segments": [{"start","end","amplitude_taup"}]},
  /// numbers given as decimal strings.
  static PulseCatalog from_json(const std::string& text);
  static PulseCatalog load(const std::string& path);
  /// The catalog shipped with the library (data/catalog.json).
  static const PulseCatalog& builtin();

  std::string to_json() const;

  /// Case-insensitive lookup; throws ConfigError for unknown names.
  const PiecewiseConstantPulse& at(const std::string& name) const;
  bool contains(const std::string& name) const;
  const std::vector<PiecewiseConstantPulse>& pulses() const { return pulses_; }
  std::vector<std::string> names() const;

 private:
  std::vector<PiecewiseConstantPulse> pulses_;
};

/// Serializes one pulse as a catalog entry (decimal strings, 17 significant digits).
std::string pulse_to_json(const PiecewiseConstantPulse& pulse);

struct ValidationCheck {
  std::string pulse;
  std::string condition;  // "total_angle", "sin_integral", "cos_integral"
  double value = 0.0;     // deviation from the target
  double tolerance = 0.0;
  bool passed = false;
};

struct ValidationReport {
  std::vector<ValidationCheck> checks;
  bool all_passed() const;
  std::string summary() const;
};

class CatalogInvalid : public ConfigError {
 public:
  explicit CatalogInvalid(ValidationReport report);
  const char* kind() const noexcept override { return "CatalogInvalid"; }
  const ValidationReport& report() const { return report_; }

 private:
  ValidationReport report_;
};

constexpr double kAngleTolerance = 1e-9;
constexpr double kFirstOrderTolerance = 1e-9;

/// Checks psi(tau_p) = pi for every pulse and S = C = 0 for pulses of
/// advertised order >= 1. Returns the full report when everything passes,
/// otherwise throws CatalogInvalid carrying it.
ValidationReport validate_catalog(const PulseCatalog& catalog);
ValidationReport validate_pulse(const PiecewiseConstantPulse& pulse);

}  // namespace pulselab
