#pragma once

#include <cstdint>
#include <string>

#include "vcrystal/config.hpp"
#include "vcrystal/ns2d.hpp"

namespace vcrystal {

// Everything a run needs. Text form is `section.key = value`, one per line;
// `[section]` headers and `#` comments are accepted as well.
struct RunConfig {
    // crystal
    int n_vortices = 2;
    double gamma = 0.0;
    double circulation = 1.0;
    double viscosity = 2e-4;
    double radius = 1.0;
    // solver
    int n_grid = 512;
    double box_factor = 8.0;
    double dt_safety = 0.4;
    double t_end_rotations = 1.0 / 3.0;
    double t_end = 0.0;
    double output_interval = 0.0;
    double eps0 = 0.05;
    std::string dt_policy = "initial";
    bool init_order2 = false;
    bool periodic_reference = true;
    double noise = 0.0;
    // lambda
    int grid_nodes = 2048;
    double r_max = 20.0;
    // outputs
    std::string directory = "out";
    bool dump_fields = false;
    bool image_dumps = false;
    int dump_every = 10;

    std::uint64_t seed = 0;

    CrystalConfig crystal() const;
    SimParams sim() const;
    GridPtr lambda_grid() const;
};

RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);
std::string serialize_config(const RunConfig& c);

// Sets one dotted key from its text value; throws UsageError on unknown keys or bad values.
void set_config_key(RunConfig& c, const std::string& key, const std::string& value);

// Range checks shared by the parser and the command line.
void validate_config(const RunConfig& c);

// Full precision field for CSV output.
std::string fmt17(double v);

} // namespace vcrystal
