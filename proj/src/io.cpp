#include "pulselab/io.hpp"

#include <charconv>
#include <cmath>

#include <json.hpp>

namespace pulselab {

using nlohmann::json;

std::string format_double(double x) {
  char buf[32];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return ec == std::errc() ? std::string(buf, end) : std::string("nan");
}

namespace {

const char* const kScalingColumns[] = {"pulse",     "inv_v",     "mean_df2",  "stderr_df2",
                                       "mean_df",   "partial_x", "partial_y", "partial_z",
                                       "polarization_dev", "realizations"};

std::vector<std::string> scaling_row(const CellResult& c) {
  return {c.pulse,
          format_double(c.inv_v),
          format_double(c.total.mean_df2),
          format_double(c.total.stderr_df2),
          format_double(c.total.mean_df),
          format_double(c.partials[0].mean),
          format_double(c.partials[1].mean),
          format_double(c.partials[2].mean),
          format_double(c.polarization ? c.polarization->mean : 0.0),
          std::to_string(c.total.realizations)};
}

void write_table(std::ostream& out, const std::vector<const CellResult*>& cells, char sep,
                 const char* comment) {
  out << comment;
  bool first = true;
  for (const char* col : kScalingColumns) {
    out << (first ? "" : std::string(1, sep)) << col;
    first = false;
  }
  out << '\n';
  for (const CellResult* c : cells) {
    const auto row = scaling_row(*c);
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? std::string(1, sep) : "") << row[i];
    out << '\n';
  }
}

json fit_json(const std::optional<PowerLawFit>& fit) {
  if (!fit) return nullptr;
  json excluded = json::array();
  for (const auto& e : fit->excluded) excluded.push_back({{"inv_v", e.inv_v}, {"reason", e.reason}});
  return {{"slope", fit->slope},         {"slope_err", fit->slope_err},
          {"intercept", fit->intercept}, {"intercept_err", fit->intercept_err},
          {"used", fit->used},           {"weighted", fit->weighted},
          {"excluded", excluded}};
}

}  // namespace

void write_scaling_csv(std::ostream& out, const std::vector<const CellResult*>& cells) {
  write_table(out, cells, ',', "");
}

void write_scaling_dat(std::ostream& out, const std::vector<const CellResult*>& cells) {
  write_table(out, cells, ' ', "# ");
}

void write_mean_path_dat(std::ostream& out, const CellResult& cell) {
  out << "# pulse " << cell.pulse << " inv_v " << format_double(cell.inv_v) << "\n# t mean_polarization\n";
  for (const auto& [t, p] : cell.mean_path) out << format_double(t) << ' ' << format_double(p) << '\n';
}

std::string scaling_summary_json(const ScalingResult& r) {
  const auto& c = r.config;
  json pulses = json::object();
  for (const auto& f : r.fits) {
    json entry = {{"total", fit_json(f.total)},
                  {"partial_x", fit_json(f.partials[0])},
                  {"partial_y", fit_json(f.partials[1])},
                  {"partial_z", fit_json(f.partials[2])},
                  {"polarization", fit_json(f.polarization)}};
    if (!f.failure.empty()) entry["failure"] = f.failure;
    pulses[f.pulse] = entry;
  }
  json j = {{"model", to_string(c.model.kind)},
            {"g0", c.model.g0},
            {"gamma", c.model.gamma},
            {"eta0", c.model.eta0},
            {"inv_v", c.inv_v_grid},
            {"realizations", c.realizations},
            {"steps", c.steps_per_pulse},
            {"seed", c.seed},
            {"fit_window", {c.fit_min, c.fit_max}},
            {"estimator", to_string(c.estimator)},
            {"pulses", pulses}};
  return j.dump(2);
}

void write_prefactor_csv(std::ostream& out, const std::vector<PrefactorRow>& rows) {
  out << "inv_v,measured_df2,stderr_df2,predicted_df2,ratio,ratio_err,z,within_3_sigma\n";
  for (const auto& r : rows)
    out << format_double(r.inv_v) << ',' << format_double(r.measured) << ','
        << format_double(r.error) << ',' << format_double(r.predicted) << ','
        << format_double(r.ratio) << ',' << format_double(r.ratio_err) << ','
        << format_double(r.z) << ',' << (r.within_3_sigma ? 1 : 0) << '\n';
}

void write_convergence_csv(std::ostream& out, const ConvergenceTable& table) {
  out << "steps,mean_df2,stderr_df2,drift\n";
  for (const auto& r : table.rows)
    out << r.steps << ',' << format_double(r.mean_df2) << ',' << format_double(r.error) << ','
        << format_double(r.drift) << '\n';
}

std::string nogo_report_json(const std::string& pulse, const NoGoReport& r, double i32_quadrature) {
  json j = {{"pulse", pulse},
            {"grid_n", r.grid_n},
            {"dt", r.dt},
            {"quad_a_cos", r.quad_a_cos},
            {"quad_a_sin", r.quad_a_sin},
            {"b_norm_cos", r.b_norm_cos},
            {"b_norm_sin", r.b_norm_sin},
            {"c_form_cos", r.c_form_cos},
            {"c_form_sin", r.c_form_sin},
            {"identity_residual", r.identity_residual},
            {"cusp_coefficient", r.cusp_coefficient},
            {"i32_from_a", r.i32_from_a},
            {"i32_from_b", r.i32_from_b},
            {"i32_quadrature", i32_quadrature},
            {"positive", r.i32_from_b > 0.0}};
  return j.dump(2);
}

std::string covariance_check_json(const CovarianceCheck& check, bool reproducible) {
  json j = {{"points", check.sample.rows()},
            {"realizations", check.realizations},
            {"max_abs_z", check.max_abs_z},
            {"passed", check.passed(5.0)},
            {"reproducible", reproducible}};
  return j.dump(2);
}

std::string design_result_json(const DesignResult& r) {
  json j = {{"i32_min", r.i32_min},
            {"evaluations", r.evaluations},
            {"feasible_candidates", r.feasible_candidates},
            {"pulse", json::parse(pulse_to_json(r.pulse))}};
  return j.dump(2);
}

}  // namespace pulselab
