#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "pulselab/harness.hpp"
#include "pulselab/magnus.hpp"
#include "pulselab/noise.hpp"

namespace pulselab {

/// Shortest decimal that reads back to the same double.
std::string format_double(double x);

/// Header line followed by one row per cell:
/// pulse,inv_v,mean_df2,stderr_df2,mean_df,partial_x,partial_y,partial_z,polarization_dev,realizations
void write_scaling_csv(std::ostream& out, const std::vector<const CellResult*>& cells);
/// Same columns, whitespace separated, '#' header; for gnuplot and friends.
void write_scaling_dat(std::ostream& out, const std::vector<const CellResult*>& cells);
/// t and <sigma^axis>(t) averaged over the ensemble.
void write_mean_path_dat(std::ostream& out, const CellResult& cell);

std::string scaling_summary_json(const ScalingResult& result);
void write_prefactor_csv(std::ostream& out, const std::vector<PrefactorRow>& rows);
void write_convergence_csv(std::ostream& out, const ConvergenceTable& table);
std::string nogo_report_json(const std::string& pulse, const NoGoReport& report, double i32_quadrature);
std::string covariance_check_json(const CovarianceCheck& check, bool reproducible);
std::string design_result_json(const DesignResult& result);

}  // namespace pulselab
