// Command-line front end: constants, coefficients, pv, stability, simulate, assemble, validate.
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "vcrystal/assembler.hpp"
#include "vcrystal/checks.hpp"
#include "vcrystal/constants.hpp"
#include "vcrystal/corrections.hpp"
#include "vcrystal/errors.hpp"
#include "vcrystal/io.hpp"
#include "vcrystal/pointvortex.hpp"

using namespace vcrystal;
using nlohmann::json;

namespace {

struct Common {
    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    bool seed_given = false;
    std::vector<std::string> overrides;
};

RunConfig resolve(const Common& c)
{
    RunConfig rc = c.config_path.empty() ? RunConfig{} : load_config(c.config_path);
    for (const auto& kv : c.overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos)
            throw UsageError("--set expects key=value, got '" + kv + "'");
        set_config_key(rc, kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (c.seed_given)
        rc.seed = c.seed;
    if (!c.out_dir.empty())
        rc.directory = c.out_dir;
    validate_config(rc);
    return rc;
}

class Summary {
public:
    explicit Summary(const std::string& dir)
    {
        std::filesystem::create_directories(dir);
        out_.open(dir + "/summary.jsonl", std::ios::app);
    }
    void record(json j)
    {
        if (j.contains("error"))
            errors_ = true;
        out_ << j.dump() << "\n";
        out_.flush();
    }
    bool errors() const { return errors_; }

private:
    std::ofstream out_;
    bool errors_ = false;
};

std::ofstream open_csv(const std::string& path)
{
    std::ofstream f(path);
    if (!f)
        throw UsageError("cannot write " + path);
    return f;
}

std::vector<std::pair<int, double>> parse_pairs(const std::string& s)
{
    std::vector<std::pair<int, double>> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto c = item.find(':');
        if (c == std::string::npos)
            throw UsageError("--pairs expects N:gamma items, got '" + item + "'");
        try {
            out.emplace_back(std::stoi(item.substr(0, c)), std::stod(item.substr(c + 1)));
        } catch (const std::exception&) {
            throw UsageError("--pairs: cannot parse '" + item + "'");
        }
    }
    return out;
}

int cmd_constants(const Common& common, int N, int order)
{
    const auto rc = resolve(common);
    if (N < 2)
        throw UsageError("constants: N must be at least 2");
    if (order < 0 || order > 40)
        throw UsageError("constants: order must lie in [0, 40]");
    Summary sum(rc.directory);
    const auto t = snk_recursive(N, order);
    const std::string path = rc.directory + "/constants.csv";
    auto f = open_csv(path);
    f << "N,n,k,S_nk\n";
    for (int n = 0; n <= order; ++n)
        for (int k = 0; k <= n; ++k)
            f << N << "," << n << "," << k << "," << fmt17(t(n, k)) << "\n";
    std::cout << "wrote " << path << "\n";
    sum.record({{"command", "constants"}, {"N", N}, {"order", order}, {"file", path}});
    return 0;
}

int cmd_coefficients(const Common& common, const std::string& pairs)
{
    const auto rc = resolve(common);
    Summary sum(rc.directory);
    std::vector<std::pair<int, double>> list;
    if (pairs.empty())
        for (int N = 3; N <= 10; ++N)
            list.emplace_back(N, 0.0);
    else
        list = parse_pairs(pairs);
    const auto grid = rc.lambda_grid();
    const std::string path = rc.directory + "/coefficients.csv";
    auto f = open_csv(path);
    f << "N,gamma,d,gamma_star,kappa2,alpha4,r6,m21_omega2,m22_omega2NS\n";
    for (auto [N, g] : list) {
        const CrystalConfig cfg(N, g, rc.circulation, rc.viscosity, rc.radius);
        const auto p = build_omega2(cfg, grid);
        const auto dc = compute_drift(cfg, p);
        f << N << "," << fmt17(g) << "," << fmt17(characteristic_distance(N, 1.0)) << ","
          << fmt17(critical_gamma(N)) << "," << fmt17(p.kappa2) << "," << fmt17(dc.alpha4) << ","
          << fmt17(dc.r6) << "," << fmt17(dc.m21_omega2) << "," << fmt17(dc.m22_omega2NS) << "\n";
        std::printf("N=%-3d gamma=%-8g alpha4=%.6f r6=%.6f\n", N, g, dc.alpha4, dc.r6);
        sum.record({{"command", "coefficients"}, {"N", N}, {"gamma", g}, {"alpha4", dc.alpha4}, {"r6", dc.r6}});
    }
    std::cout << "wrote " << path << "\n";
    return 0;
}

int cmd_pv(const Common& common)
{
    const auto rc = resolve(common);
    Summary sum(rc.directory);
    const auto cfg = rc.crystal();
    const double a = derive_scales(cfg).omega_rot;
    const double t_end = rc.t_end > 0.0 ? rc.t_end : rc.t_end_rotations * 2.0 * std::numbers::pi / std::abs(a);
    const double dt = rc.output_interval > 0.0 ? rc.output_interval : t_end / 100.0;
    auto s = crystal_state(cfg);
    if (rc.noise > 0.0) {
        std::mt19937_64 rng(rc.seed);
        std::normal_distribution<double> nd(0.0, rc.noise * cfg.radius());
        for (int j = 0; j < cfg.n_vortices(); ++j)
            s.positions[j] += Vec2{nd(rng), nd(rng)};
    }
    const auto tr = pv_integrate(s, dt, t_end, 1e-12);
    const std::string path = rc.directory + "/trajectory.csv";
    auto f = open_csv(path);
    f << "t";
    for (std::size_t j = 0; j < s.positions.size(); ++j)
        f << ",x" << j + 1 << ",y" << j + 1;
    f << ",H,Px,Py,L\n";
    for (std::size_t k = 0; k < tr.t.size(); ++k) {
        f << fmt17(tr.t[k]);
        for (const auto& p : tr.positions[k])
            f << "," << fmt17(p.x) << "," << fmt17(p.y);
        const auto& c = tr.conserved[k];
        f << "," << fmt17(c.hamiltonian) << "," << fmt17(c.linear_momentum.x) << ","
          << fmt17(c.linear_momentum.y) << "," << fmt17(c.angular_momentum) << "\n";
    }
    const auto& c0 = tr.conserved.front();
    const auto& c1 = tr.conserved.back();
    const double dH = std::abs(c1.hamiltonian - c0.hamiltonian) / std::max(1e-300, std::abs(c0.hamiltonian));
    std::printf("integrated to t=%.6g, relative energy drift %.2e\nwrote %s\n", t_end, dH, path.c_str());
    sum.record({{"command", "pv"}, {"t_end", t_end}, {"energy_drift", dH}, {"file", path}});
    return 0;
}

int cmd_stability(const Common& common, int n_min, int n_max, double g_min, double g_max, double g_step)
{
    const auto rc = resolve(common);
    Summary sum(rc.directory);
    if (n_min < 2 || n_max < n_min || !(g_step > 0.0) || g_max < g_min)
        throw UsageError("stability: bad chart ranges");
    const std::string path = rc.directory + "/stability.csv";
    auto f = open_csv(path);
    f << "N,gamma,classification,max_real,min_abs,theorem_stable\n";
    int agree = 0, cells = 0;
    for (int N = n_min; N <= n_max; ++N) {
        const int steps = static_cast<int>(std::floor((g_max - g_min) / g_step + 1e-9));
        for (int k = 0; k <= steps; ++k) {
            const double g = g_min + k * g_step;
            const CrystalConfig cfg(N, g, rc.circulation, rc.viscosity, rc.radius);
            const auto rep = pv_linear_stability(cfg);
            const bool th = stability_theorem_predicts_stable(N, g);
            f << N << "," << fmt17(g) << "," << to_string(rep.classification) << "," << fmt17(rep.max_real) << ","
              << fmt17(rep.min_abs_nontrivial) << "," << (th ? "true" : "false") << "\n";
            if (rep.classification != Stability::marginal) {
                ++cells;
                agree += (rep.classification == Stability::stable) == th;
            }
        }
    }
    std::printf("%d of %d non-marginal cells agree with the closed-form window\nwrote %s\n", agree, cells,
                path.c_str());
    sum.record({{"command", "stability"}, {"cells", cells}, {"agree", agree}, {"file", path}});
    return 0;
}

int cmd_simulate(const Common& common)
{
    const auto rc = resolve(common);
    Summary sum(rc.directory);
    const auto cfg = rc.crystal();
    const auto sp = rc.sim();
    std::ofstream(rc.directory + "/config.toml") << serialize_config(rc);
    RunResult run;
    try {
        run = run_crystal(cfg, sp);
    } catch (const NumericalError& e) {
        sum.record({{"command", "simulate"}, {"error", e.what()}});
        throw;
    }
    const std::string path = rc.directory + "/diagnostics.csv";
    write_diagnostics_csv(path, cfg, run);
    for (const auto& e : run.events) {
        std::printf("event %s at t=%.6g: %s\n", e.kind.c_str(), e.t, e.detail.c_str());
        sum.record({{"command", "simulate"}, {"event", e.kind}, {"t", e.t}, {"detail", e.detail}});
    }
    const auto coeffs = compute_drift(cfg, build_omega2(cfg, rc.lambda_grid()));
    const auto& last = run.series.back();
    const auto pred = predict_motion(cfg, coeffs, last.t_phys);
    std::printf("%ld steps in %.1f s; final eps=%.4f R_meas=%.6f (model %.6f) alpha_meas=%.6f\nwrote %s\n",
                run.steps, run.seconds, last.eps, last.radius_meas, pred.radius, last.alpha_meas, path.c_str());
    sum.record({{"command", "simulate"}, {"steps", run.steps}, {"seconds", run.seconds}, {"eps", last.eps},
                {"R_meas", last.radius_meas}, {"R_model", pred.radius}, {"alpha_meas", last.alpha_meas},
                {"file", path}});
    return 0;
}

int cmd_assemble(const Common& common, double t, int order, bool pgm)
{
    const auto rc = resolve(common);
    Summary sum(rc.directory);
    const auto cfg = rc.crystal();
    if (!(t > 0.0))
        throw UsageError("assemble: --time must be positive");
    const CartesianGrid grid(rc.box_factor * cfg.radius(), rc.n_grid);
    const double alpha = derive_scales(cfg).omega_rot * t;
    auto f = assemble_pv_nu(cfg, cfg.radius(), alpha, t, grid);
    long clamped = 0;
    if (order >= 2) {
        auto p = build_omega2(cfg, rc.lambda_grid());
        if (order >= 3)
            build_omega3(cfg, p);
        CorrectionOptions o;
        o.max_order = order;
        f += assemble_correction(cfg, p, cfg.radius(), alpha, t, grid, o, &clamped);
    }
    const std::string path = rc.directory + "/field.bin";
    write_field_dump(path, f);
    if (pgm)
        write_pgm(rc.directory + "/field.pgm", f);
    std::printf("total circulation %.12g, %ld samples beyond the radial grid\nwrote %s\n", total_integral(f),
                clamped, path.c_str());
    sum.record({{"command", "assemble"}, {"t", t}, {"order", order}, {"integral", total_integral(f)},
                {"clamped", clamped}, {"file", path}});
    return 0;
}

int cmd_validate(const Common& common, const std::vector<int>& ids, int grid, int fit_grid, bool fine)
{
    const auto rc = resolve(common);
    Summary sum(rc.directory);
    CheckOptions opt;
    opt.ns_grid = grid;
    opt.fit_grid = fit_grid;
    opt.fine_comparison = fine;
    opt.out_dir = rc.directory;
    bool ok = true;
    for (const auto& r : run_checks(ids, opt)) {
        std::printf("criterion %2d %-36s %s  %s (%.1f s)\n", r.id, r.name.c_str(), r.passed ? "PASS" : "FAIL",
                    r.measured.c_str(), r.seconds);
        if (!r.detail.empty())
            std::printf("             %s\n", r.detail.c_str());
        std::fflush(stdout);
        sum.record(json::parse(to_json_line(r)));
        ok = ok && r.passed;
    }
    return ok ? 0 : 3;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Vortex crystal laboratory"};
    app.require_subcommand(1);
    Common common;
    auto add_common = [&](CLI::App* s) {
        s->add_option("--config", common.config_path, "key = value configuration file");
        s->add_option("--out", common.out_dir, "output directory");
        s->add_option("--seed", common.seed, "random seed")->each([&](const std::string&) { common.seed_given = true; });
        s->add_option("--set", common.overrides, "override a config key, e.g. crystal.gamma=10");
    };

    int N = 0, order = 8;
    auto* c_const = app.add_subcommand("constants", "S_nk table as CSV");
    add_common(c_const);
    c_const->add_option("--n", N, "number of exterior vortices")->required();
    c_const->add_option("--order", order, "maximal n");

    std::string pairs;
    auto* c_coef = app.add_subcommand("coefficients", "alpha4 and r6 for a list of (N, gamma)");
    add_common(c_coef);
    c_coef->add_option("--pairs", pairs, "comma separated N:gamma items (default N=3..10, gamma=0)");

    auto* c_pv = app.add_subcommand("pv", "point-vortex trajectory");
    add_common(c_pv);

    int n_min = 2, n_max = 12;
    double g_min = 0.0, g_max = 8.0, g_step = 0.25;
    auto* c_stab = app.add_subcommand("stability", "linear stability chart");
    add_common(c_stab);
    c_stab->add_option("--n-min", n_min);
    c_stab->add_option("--n-max", n_max);
    c_stab->add_option("--gamma-min", g_min);
    c_stab->add_option("--gamma-max", g_max);
    c_stab->add_option("--gamma-step", g_step);

    auto* c_sim = app.add_subcommand("simulate", "Navier-Stokes run with blob diagnostics");
    add_common(c_sim);

    double t_asm = 1.0;
    int asm_order = 2;
    bool pgm = false;
    auto* c_asm = app.add_subcommand("assemble", "model vorticity field on the Cartesian grid");
    add_common(c_asm);
    c_asm->add_option("--time", t_asm, "physical time");
    c_asm->add_option("--order", asm_order, "highest correction order (0, 2 or 3)");
    c_asm->add_flag("--pgm", pgm, "also write a greyscale image");

    std::vector<int> ids;
    int vgrid = 512, fgrid = 512;
    bool fine = false;
    auto* c_val = app.add_subcommand("validate", "acceptance checks");
    add_common(c_val);
    c_val->add_option("--criteria", ids, "criterion ids (default all)")->delimiter(',');
    c_val->add_option("--grid", vgrid, "grid for the deformation and correction runs");
    c_val->add_option("--fit-grid", fgrid, "grid for the angular-speed run");
    c_val->add_flag("--fine", fine, "repeat the deformation runs at twice the grid");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*c_const) return cmd_constants(common, N, order);
        if (*c_coef) return cmd_coefficients(common, pairs);
        if (*c_pv) return cmd_pv(common);
        if (*c_stab) return cmd_stability(common, n_min, n_max, g_min, g_max, g_step);
        if (*c_sim) return cmd_simulate(common);
        if (*c_asm) return cmd_assemble(common, t_asm, asm_order, pgm);
        if (*c_val) return cmd_validate(common, ids, vgrid, fgrid, fine);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 1;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
