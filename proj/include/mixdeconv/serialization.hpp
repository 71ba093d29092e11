#pragma once

#include "mixdeconv/comparators.hpp"
#include "mixdeconv/fixed_point.hpp"
#include "mixdeconv/grid.hpp"
#include "mixdeconv/kernels.hpp"
#include "mixdeconv/simulation.hpp"

#include <json.hpp>

namespace mixdeconv {

using json = nlohmann::ordered_json;

json grid_to_json(const Grid& grid);
Grid grid_from_json(const json& j);

//! {"family": "normal", "variance": 0.5}, {"family": "student_t", "scale":
//! 0.3, "df": 5}, {"family": "gamma", "shape_mult": 20, "rate": 20},
//! {"family": "poisson"}. A normal kernel may also be given with "sd".
json kernel_to_json(const KernelModel& kernel);
KernelModel kernel_from_json(const json& j);

json pr_config_to_json(const PrConfig& cfg);
PrConfig pr_config_from_json(const json& j);

json kde_to_json(const KdeEstimate& kde);

json fit_result_to_json(const FitResult& fit);

//! Kernel may be a preset name string or a kernel object; mixing is a name.
json study_config_to_json(const StudyConfig& cfg);
StudyConfig study_config_from_json(const json& j);

json report_summary_to_json(const SimReport& report);

//! Consistent layout for JSON files: two-space indent and trailing newline.
std::string dump_json(const json& j);

} // namespace mixdeconv
