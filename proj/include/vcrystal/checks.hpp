#pragma once

#include <string>
#include <vector>

namespace vcrystal {

struct CheckResult {
    int id = 0;
    std::string name;
    bool passed = false;
    std::string measured;   // short human summary of the numbers
    std::string detail;
    double seconds = 0.0;
};

struct CheckOptions {
    int ns_grid = 512;          // deformation and correction runs
    int fit_grid = 512;         // angular-speed fit run
    bool fine_comparison = false;  // repeat the deformation runs at twice the grid
    std::string out_dir;        // diagnostics CSVs when non-empty
};

CheckResult check_alpha4_table();
CheckResult check_distance_column();
CheckResult check_constants();
CheckResult check_t1_eigenfunction();
CheckResult check_lambda_roundtrip();
CheckResult check_point_vortex();
CheckResult check_ns_solver(const CheckOptions& opt);
CheckResult check_deformation(const CheckOptions& opt);
CheckResult check_angular_speed(const CheckOptions& opt);
CheckResult check_correction(const CheckOptions& opt);

// ids 1..10; an empty list runs all.
std::vector<CheckResult> run_checks(const std::vector<int>& ids, const CheckOptions& opt);

std::string to_json_line(const CheckResult& r);

} // namespace vcrystal
