#pragma once

#include <string>

#include "json.hpp"
#include "rp/rde.hpp"
#include "rp/sensitivity.hpp"
#include "rp/sewing.hpp"

namespace rp {

/// CSV with header t,x1,...,xd, one row per instant, %.17g precision.
void write_path_csv(const DiscretePath& x, const std::string& file);
DiscretePath read_path_csv(const std::string& file);

/// Rough-path JSON: {dim, p, grid, start, steps:[{lvl1, lvl2}...]}, row-major
/// matrices, full precision. An optional "checks" array carries redundant
/// non-adjacent increments {i, j, lvl1, lvl2} validated on load via the
/// Chen defect.
nlohmann::json rough_to_json(const RoughPath& x, int n_redundant_checks = 0);
RoughPath rough_from_json(const nlohmann::json& j, double* redundancy_defect = nullptr);
void write_rough_json(const RoughPath& x, const std::string& file, int n_redundant_checks = 0);
RoughPath read_rough_json(const std::string& file, double* redundancy_defect = nullptr);

/// Controlled-path JSON: {rough_ref, y, ydag, p, q, r}.
nlohmann::json crp_to_json(const ControlledPath& y, const std::string& rough_ref);

nlohmann::json defect_scan_to_json(const DefectScan& scan);
nlohmann::json scan_report_to_json(const ScanReport& rep);
nlohmann::json solution_report_to_json(const RoughSolution& sol);

void write_json(const nlohmann::json& j, const std::string& file);
nlohmann::json read_json(const std::string& file);

std::string format_full(double v);  // %.17g

}  // namespace rp
