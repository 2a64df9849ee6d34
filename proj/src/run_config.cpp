#include "pulselab/run_config.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "pulselab/errors.hpp"

namespace pulselab {

using nlohmann::json;

AutocorrelationModel RunConfig::noise_model() const {
  AutocorrelationModel m;
  m.kind = correlation_kind_from_string(model);
  m.g0 = g0;
  m.gamma = gamma;
  m.eta0 = eta0;
  m.validate();
  return m;
}

Axis RunConfig::axis() const {
  if (polarization_axis == "x" || polarization_axis == "X") return Axis::X;
  if (polarization_axis == "y" || polarization_axis == "Y") return Axis::Y;
  if (polarization_axis == "z" || polarization_axis == "Z") return Axis::Z;
  throw ConfigError("polarization_axis must be x, y or z");
}

double RunConfig::resolved_fit_min() const { return fit_min.value_or(1e-3); }

double RunConfig::resolved_fit_max() const {
  if (fit_max) return *fit_max;
  return noise_model().kind == CorrelationKind::Exponential ? 3e-2 : 1e-1;
}

std::uint64_t RunConfig::resolved_realizations(std::uint64_t fallback) const {
  return realizations.value_or(fallback);
}

std::vector<double> RunConfig::resolved_inv_v() const {
  if (!inv_v.empty()) return inv_v;
  return log_spaced(inv_v_min.value_or(resolved_fit_min()), inv_v_max.value_or(resolved_fit_max()),
                    inv_v_points);
}

ScalingExperimentConfig RunConfig::scaling_config() const {
  ScalingExperimentConfig c;
  c.pulses = pulses;
  c.model = noise_model();
  c.inv_v_grid = resolved_inv_v();
  c.realizations = resolved_realizations(20000);
  c.steps_per_pulse = steps;
  c.seed = seed;
  // an explicit grid without a window is fitted end to end
  c.fit_min = !fit_min && !inv_v.empty() ? inv_v.front() : resolved_fit_min();
  c.fit_max = !fit_max && !inv_v.empty() ? inv_v.back() : resolved_fit_max();
  c.estimator = estimator_from_string(estimator);
  c.track_polarization = true;
  c.record_mean_path = record_mean_path;
  c.polarization_axis = axis();
  c.workers = workers;
  c.chunk_size = chunk_size;
  c.validate();
  return c;
}

DesignOptions RunConfig::design_options() const {
  DesignOptions o;
  o.v_max = v_max;
  o.restarts = restarts;
  o.max_evaluations = max_evaluations;
  o.seed = seed;
  return o;
}

PulseCatalog RunConfig::load_catalog() const {
  PulseCatalog base = catalog.empty() ? PulseCatalog::builtin() : PulseCatalog::load(catalog);
  return truncate_decimals >= 0 ? truncated_catalog(base, truncate_decimals) : base;
}

void RunConfig::validate(const PulseCatalog& cat) const {
  for (const auto& p : pulses)
    if (!cat.contains(p)) throw ConfigError("unknown pulse '" + p + "'");
  if (!cat.contains(pulse)) throw ConfigError("unknown pulse '" + pulse + "'");
  if (!seed_pulse.empty() && !cat.contains(seed_pulse))
    throw ConfigError("unknown seed pulse '" + seed_pulse + "'");
  noise_model();
  axis();
  estimator_from_string(estimator);
}

// ---------------------------------------------------------------------------

namespace {

template <class T>
void read(const json& j, const char* key, T& field) {
  if (!j.contains(key)) return;
  try {
    field = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config key '") + key + "': " + e.what());
  }
}

template <class T>
void read(const json& j, const char* key, std::optional<T>& field) {
  if (!j.contains(key)) return;
  if (j.at(key).is_null()) {
    field.reset();
    return;
  }
  T value{};
  read(j, key, value);
  field = value;
}

template <class T>
json opt(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

const char* const kKeys[] = {
    "catalog", "out", "seed", "workers", "truncate_decimals", "model", "g0", "gamma", "eta0",
    "pulses", "inv_v", "inv_v_min", "inv_v_max", "inv_v_points", "realizations", "steps",
    "fit_min", "fit_max", "estimator", "record_mean_path", "polarization_axis", "chunk_size",
    "pulse", "grid", "step_counts", "segments", "v_max", "restarts", "max_evaluations",
    "seed_pulse", "noise_points", "noise_tau"};

}  // namespace

RunConfig RunConfig::from_json(const std::string& text, RunConfig base) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& item : j.items()) {
    bool known = false;
    for (const char* k : kKeys) known = known || item.key() == k;
    if (!known) throw ConfigError("unknown config key '" + item.key() + "'");
  }
  RunConfig c = std::move(base);
  read(j, "catalog", c.catalog);
  read(j, "out", c.out);
  read(j, "seed", c.seed);
  read(j, "workers", c.workers);
  read(j, "truncate_decimals", c.truncate_decimals);
  read(j, "model", c.model);
  read(j, "g0", c.g0);
  read(j, "gamma", c.gamma);
  read(j, "eta0", c.eta0);
  read(j, "pulses", c.pulses);
  read(j, "inv_v", c.inv_v);
  read(j, "inv_v_min", c.inv_v_min);
  read(j, "inv_v_max", c.inv_v_max);
  read(j, "inv_v_points", c.inv_v_points);
  read(j, "realizations", c.realizations);
  read(j, "steps", c.steps);
  read(j, "fit_min", c.fit_min);
  read(j, "fit_max", c.fit_max);
  read(j, "estimator", c.estimator);
  read(j, "record_mean_path", c.record_mean_path);
  read(j, "polarization_axis", c.polarization_axis);
  read(j, "chunk_size", c.chunk_size);
  read(j, "pulse", c.pulse);
  read(j, "grid", c.grid);
  read(j, "step_counts", c.step_counts);
  read(j, "segments", c.segments);
  read(j, "v_max", c.v_max);
  read(j, "restarts", c.restarts);
  read(j, "max_evaluations", c.max_evaluations);
  read(j, "seed_pulse", c.seed_pulse);
  read(j, "noise_points", c.noise_points);
  read(j, "noise_tau", c.noise_tau);
  return c;
}

RunConfig RunConfig::load(const std::string& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return from_json(buf.str(), std::move(base));
}

std::string RunConfig::to_json() const {
  json j;
  j["catalog"] = catalog;
  j["out"] = out;
  j["seed"] = seed;
  j["workers"] = workers;
  j["truncate_decimals"] = truncate_decimals;
  j["model"] = model;
  j["g0"] = g0;
  j["gamma"] = gamma;
  j["eta0"] = eta0;
  j["pulses"] = pulses;
  j["inv_v"] = inv_v;
  j["inv_v_min"] = opt(inv_v_min);
  j["inv_v_max"] = opt(inv_v_max);
  j["inv_v_points"] = inv_v_points;
  j["realizations"] = opt(realizations);
  j["steps"] = steps;
  j["fit_min"] = opt(fit_min);
  j["fit_max"] = opt(fit_max);
  j["estimator"] = estimator;
  j["record_mean_path"] = record_mean_path;
  j["polarization_axis"] = polarization_axis;
  j["chunk_size"] = chunk_size;
  j["pulse"] = pulse;
  j["grid"] = grid;
  j["step_counts"] = step_counts;
  j["segments"] = segments;
  j["v_max"] = v_max;
  j["restarts"] = restarts;
  j["max_evaluations"] = max_evaluations;
  j["seed_pulse"] = seed_pulse;
  j["noise_points"] = noise_points;
  j["noise_tau"] = noise_tau;
  return j.dump(2);
}

std::uint64_t seed_from_environment(std::uint64_t fallback) {
  const char* env = std::getenv("PULSELAB_SEED");
  if (!env || !*env) return fallback;
  std::uint64_t v = 0;
  const char* end = env + std::char_traits<char>::length(env);
  const auto [ptr, ec] = std::from_chars(env, end, v);
  if (ec != std::errc() || ptr != end) throw ConfigError("PULSELAB_SEED is not an unsigned integer");
  return v;
}

}  // namespace pulselab
