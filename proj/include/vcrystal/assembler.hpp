#pragma once

#include <string>
#include <vector>

#include "vcrystal/config.hpp"
#include "vcrystal/corrections.hpp"

namespace vcrystal {

// Cell-centred periodic grid, x_i = -L/2 + i L/n, so the origin is node n/2.
struct CartesianGrid {
    double box_size;
    int n_grid;

    CartesianGrid(double box, int n);
    double dx() const { return box_size / n_grid; }
    double coord(int i) const { return -0.5 * box_size + i * dx(); }
};

enum Component : unsigned { pv_nu = 1u, order2 = 2u, order3 = 4u };

struct AssembledField {
    CartesianGrid grid;
    std::vector<double> values;  // row-major, values[iy * n + ix]
    double time;
    unsigned components;
};

AssembledField assemble_pv_nu(const CrystalConfig& cfg, double R, double alpha, double t,
                              const CartesianGrid& grid);

struct CorrectionOptions {
    int max_order = 2;
    bool include_ns = true;   // add delta * Omega_NS
    bool strict = false;      // throw InterpolationOutOfRange instead of clamping
};

// The correction of order 2 (and 3) about the polygon (R, alpha).
AssembledField assemble_correction(const CrystalConfig& cfg, const CorrectionProfiles& profiles,
                                   double R, double alpha, double t, const CartesianGrid& grid,
                                   const CorrectionOptions& opt = {}, long* clamped = nullptr);

AssembledField& operator+=(AssembledField& a, const AssembledField& b);

double total_integral(const AssembledField& f);
double l1_distance(const std::vector<double>& a, const std::vector<double>& b, double cell_area);

void write_field_dump(const std::string& path, const AssembledField& f);
AssembledField read_field_dump(const std::string& path);
void write_pgm(const std::string& path, const AssembledField& f);

} // namespace vcrystal
