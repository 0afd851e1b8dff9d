#pragma once

#include <complex>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "vcrystal/assembler.hpp"
#include "vcrystal/config.hpp"
#include "vcrystal/vec2.hpp"

namespace vcrystal {

// Doubly periodic vorticity in physical and half-plane Fourier form, with the 2/3 mask.
// The spectrum is normalised so that the inverse transform reproduces the samples.
class SpectralField {
public:
    SpectralField(int n_grid, double box_size);
    ~SpectralField();
    SpectralField(const SpectralField&) = delete;
    SpectralField& operator=(const SpectralField&) = delete;

    int n() const { return n_; }
    int nk() const { return n_ * (n_ / 2 + 1); }
    double box_size() const { return L_; }
    double dx() const { return L_ / n_; }
    double kx(int ix) const;
    double ky(int iy) const;

    std::vector<double>& physical() { return phys_; }
    const std::vector<double>& physical() const { return phys_; }
    std::vector<std::complex<double>>& spectral() { return spec_; }
    const std::vector<std::complex<double>>& spectral() const { return spec_; }
    const std::vector<unsigned char>& dealias_mask() const { return mask_; }

    void to_spectral();   // physical -> spectral
    void to_physical();   // spectral -> physical

    // Raw transforms on caller buffers (input of backward is preserved).
    void forward(const double* in, std::complex<double>* out) const;
    void backward(const std::complex<double>* in, double* out) const;

private:
    int n_;
    double L_;
    std::vector<double> phys_;
    std::vector<std::complex<double>> spec_;
    std::vector<unsigned char> mask_;
    struct Plans;
    std::unique_ptr<Plans> plans_;
};

// ETDRK4 with exact diffusion and a dealiased pseudospectral advection term.
class NSSolver {
public:
    NSSolver(int n_grid, double box_size, double nu);
    ~NSSolver();

    void set_vorticity(const std::vector<double>& w);
    std::vector<double> vorticity() const;
    const std::vector<std::complex<double>>& spectrum() const { return w_; }

    // Max |u| of the current state.
    double max_velocity();
    void step(double dt);

    double time() const { return time_; }
    void set_time(double t) { time_ = t; }
    double nu() const { return nu_; }
    const SpectralField& field() const { return *field_; }
    long steps_taken() const { return steps_; }

private:
    void nonlinear(const std::complex<double>* w, std::complex<double>* out, double* umax);
    void prepare(double dt);

    std::unique_ptr<SpectralField> field_;
    double nu_;
    double time_ = 0.0;
    long steps_ = 0;
    std::vector<std::complex<double>> w_;
    std::vector<double> k2_;
    double dt_cached_ = -1.0;
    std::vector<double> E_, E2_, Q_, f1_, f2_, f3_;
    // work buffers
    std::vector<std::complex<double>> a_, b_, c_, Nu_, Na_, Nb_, Nc_, tmp_;
    std::vector<double> u_, v_, wx_, wy_;
};

// One step from a physical field.
std::vector<double> ns_step(const std::vector<double>& field, int n_grid, double box_size, double dt,
                            double nu);

struct BlobDiagnostic {
    Vec2 centre;
    double captured;        // fraction of the blob circulation inside the hard disk
    double qxx, qxy, qyy;   // weighted second moments about the centre
    double orientation;     // major axis minus radial direction, in (-pi/2, pi/2]
    double anisotropy;      // (l1 - l2)/(l1 + l2)
    double radial_alignment;  // (Q_rr - Q_tt)/(Q_rr + Q_tt)
};

struct BlobDiagnostics {
    std::vector<BlobDiagnostic> blobs;  // N exterior blobs, then the centre if gamma != 0
    double radius_meas = 0.0;
    double phase_meas = 0.0;  // wrapped to (-pi, pi]
};

BlobDiagnostics extract_diagnostics(const CrystalConfig& cfg, const SpectralField& grid,
                                    const std::vector<double>& w, const std::vector<Vec2>& guesses,
                                    double mask_radius);

// |w - rotate(w)| / |w| for an exact grid rotation by 2 pi / N (N in {1, 2, 4}).
double symmetry_defect(const std::vector<double>& w, int n_grid, int N);

double integral(const std::vector<double>& w, double dx);
double angular_momentum(const std::vector<double>& w, int n_grid, double box_size);

struct SimParams {
    int n_grid = 512;
    double box_factor = 8.0;
    double dt_safety = 0.4;
    double t_end_rotations = 1.0 / 3.0;
    double t_end = 0.0;             // overrides t_end_rotations when > 0
    double output_interval = 0.0;   // 0: 100 outputs over the run
    double eps0 = 0.05;
    std::string dt_policy = "initial";  // "initial" or "adaptive"
    bool init_order2 = false;
    bool periodic_reference = true;
    double noise = 0.0;             // relative position noise
    std::uint64_t seed = 0;
    bool dump_fields = false;
    bool image_dumps = false;
    int dump_every = 0;
    std::string out_dir;
};

struct DiagRecord {
    double t;        // since the start of the run
    double t_phys;   // t + t0
    double eps;
    double radius_meas;
    double alpha_meas;   // unwrapped
    double alpha_ref;    // periodic point-vortex phase (or omega_rot t)
    double L_total;
    double M_total;
    double max_u;
    double dt;
    BlobDiagnostics diag;
};

struct RunEvent {
    std::string kind;
    double t;
    std::string detail;
};

struct RunResult {
    double t0 = 0.0;
    std::vector<DiagRecord> series;
    std::vector<RunEvent> events;
    std::vector<std::vector<double>> snapshots;  // fields at the requested times
    std::vector<double> snapshot_times;
    long steps = 0;
    double seconds = 0.0;
};

struct CorrectionProfiles;

// Optional snapshot times (simulation time) are captured exactly.
RunResult run_crystal(const CrystalConfig& cfg, const SimParams& sp,
                      const std::vector<double>& snapshot_times = {});

struct FitOptions {
    double eps_min = 0.05;
    double eps_max = 0.2;
    int half_window = 4;
};

struct FitResult {
    double slope;
    double intercept;
    int points;
};

FitResult fit_alpha4(const std::vector<DiagRecord>& series, const CrystalConfig& cfg,
                     const FitOptions& opt = {});

void write_diagnostics_csv(const std::string& path, const CrystalConfig& cfg, const RunResult& r);

} // namespace vcrystal
