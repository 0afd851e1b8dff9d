#include "vcrystal/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "vcrystal/errors.hpp"

namespace vcrystal {

namespace {

std::string trim(const std::string& s)
{
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos)
        return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

double to_double(const std::string& key, const std::string& v)
{
    double x = 0.0;
    const auto* end = v.data() + v.size();
    auto [p, ec] = std::from_chars(v.data(), end, x);
    if (ec != std::errc() || p != end || !std::isfinite(x))
        throw UsageError("config: '" + key + "' expects a number, got '" + v + "'");
    return x;
}

long long to_int(const std::string& key, const std::string& v)
{
    long long x = 0;
    const auto* end = v.data() + v.size();
    auto [p, ec] = std::from_chars(v.data(), end, x);
    if (ec != std::errc() || p != end)
        throw UsageError("config: '" + key + "' expects an integer, got '" + v + "'");
    return x;
}

bool to_bool(const std::string& key, const std::string& v)
{
    if (v == "true")
        return true;
    if (v == "false")
        return false;
    throw UsageError("config: '" + key + "' expects true or false, got '" + v + "'");
}

std::string to_string_value(const std::string& v)
{
    if (v.size() >= 2 && v.front() == '"' && v.back() == '"')
        return v.substr(1, v.size() - 2);
    return v;
}

std::string quote(const std::string& s) { return "\"" + s + "\""; }

struct Field {
    std::function<void(RunConfig&, const std::string&, const std::string&)> set;
    std::function<std::string(const RunConfig&)> get;
};

#define VC_DOUBLE(key, member)                                                                     \
    {key, {[](RunConfig& c, const std::string& k, const std::string& v) { c.member = to_double(k, v); }, \
           [](const RunConfig& c) { return fmt17(c.member); }}}
#define VC_INT(key, member)                                                                        \
    {key, {[](RunConfig& c, const std::string& k, const std::string& v) {                         \
               c.member = static_cast<decltype(c.member)>(to_int(k, v));                           \
           },                                                                                      \
           [](const RunConfig& c) { return std::to_string(c.member); }}}
#define VC_BOOL(key, member)                                                                       \
    {key, {[](RunConfig& c, const std::string& k, const std::string& v) { c.member = to_bool(k, v); }, \
           [](const RunConfig& c) { return std::string(c.member ? "true" : "false"); }}}
#define VC_STRING(key, member)                                                                     \
    {key, {[](RunConfig& c, const std::string&, const std::string& v) { c.member = to_string_value(v); }, \
           [](const RunConfig& c) { return quote(c.member); }}}

// Ordered so that serialisation groups sections.
const std::vector<std::pair<std::string, Field>>& fields()
{
    static const std::vector<std::pair<std::string, Field>> f = {
        VC_INT("crystal.n_vortices", n_vortices),
        VC_DOUBLE("crystal.gamma", gamma),
        VC_DOUBLE("crystal.circulation", circulation),
        VC_DOUBLE("crystal.viscosity", viscosity),
        VC_DOUBLE("crystal.radius", radius),
        VC_INT("solver.n_grid", n_grid),
        VC_DOUBLE("solver.box_factor", box_factor),
        VC_DOUBLE("solver.dt_safety", dt_safety),
        VC_DOUBLE("solver.t_end_rotations", t_end_rotations),
        VC_DOUBLE("solver.t_end", t_end),
        VC_DOUBLE("solver.output_interval", output_interval),
        VC_DOUBLE("solver.eps0", eps0),
        VC_STRING("solver.dt_policy", dt_policy),
        VC_BOOL("solver.init_order2", init_order2),
        VC_BOOL("solver.periodic_reference", periodic_reference),
        VC_DOUBLE("solver.noise", noise),
        VC_INT("lambda.grid_nodes", grid_nodes),
        VC_DOUBLE("lambda.r_max", r_max),
        VC_STRING("outputs.directory", directory),
        VC_BOOL("outputs.dump_fields", dump_fields),
        VC_BOOL("outputs.image_dumps", image_dumps),
        VC_INT("outputs.dump_every", dump_every),
        {"seed", {[](RunConfig& c, const std::string& k, const std::string& v) {
                      if (!v.empty() && v[0] == '-')
                          throw UsageError("config: seed must be non-negative");
                      std::uint64_t x = 0;
                      auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
                      if (ec != std::errc() || p != v.data() + v.size())
                          throw UsageError("config: '" + k + "' expects an unsigned integer");
                      c.seed = x;
                  },
                  [](const RunConfig& c) { return std::to_string(c.seed); }}},
    };
    return f;
}

#undef VC_DOUBLE
#undef VC_INT
#undef VC_BOOL
#undef VC_STRING

} // namespace

std::string fmt17(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

CrystalConfig RunConfig::crystal() const
{
    return CrystalConfig(n_vortices, gamma, circulation, viscosity, radius);
}

SimParams RunConfig::sim() const
{
    SimParams s;
    s.n_grid = n_grid;
    s.box_factor = box_factor;
    s.dt_safety = dt_safety;
    s.t_end_rotations = t_end_rotations;
    s.t_end = t_end;
    s.output_interval = output_interval;
    s.eps0 = eps0;
    s.dt_policy = dt_policy;
    s.init_order2 = init_order2;
    s.periodic_reference = periodic_reference;
    s.noise = noise;
    s.seed = seed;
    s.dump_fields = dump_fields;
    s.image_dumps = image_dumps;
    s.dump_every = dump_every;
    s.out_dir = directory;
    return s;
}

GridPtr RunConfig::lambda_grid() const { return RadialGrid::uniform(grid_nodes, r_max); }

void set_config_key(RunConfig& c, const std::string& key, const std::string& value)
{
    for (const auto& [k, f] : fields())
        if (k == key) {
            f.set(c, key, trim(value));
            return;
        }
    throw UsageError("config: unknown key '" + key + "'");
}

void validate_config(const RunConfig& c)
{
    auto need = [](bool ok, const std::string& what) {
        if (!ok)
            throw UsageError("config: " + what);
    };
    (void)c.crystal();  // crystal ranges live in CrystalConfig
    need(c.n_grid >= 128 && c.n_grid <= 4096 && (c.n_grid & (c.n_grid - 1)) == 0,
         "solver.n_grid must be a power of two in [128, 4096]");
    need(c.box_factor >= 4.0, "solver.box_factor must be >= 4");
    need(c.dt_safety > 0.0 && c.dt_safety <= 1.0, "solver.dt_safety must lie in (0, 1]");
    need(c.t_end_rotations > 0.0, "solver.t_end_rotations must be positive");
    need(c.t_end >= 0.0, "solver.t_end must be non-negative");
    need(c.output_interval >= 0.0, "solver.output_interval must be non-negative");
    need(c.eps0 >= 0.02 && c.eps0 <= 0.1, "solver.eps0 must lie in [0.02, 0.1]");
    need(c.dt_policy == "initial" || c.dt_policy == "adaptive", "solver.dt_policy must be initial or adaptive");
    need(c.noise >= 0.0 && c.noise < 0.5, "solver.noise must lie in [0, 0.5)");
    need(c.grid_nodes >= 64 && c.grid_nodes <= 8192, "lambda.grid_nodes must lie in [64, 8192]");
    need(c.r_max >= 8.0 && c.r_max <= 60.0, "lambda.r_max must lie in [8, 60]");
    need(c.dump_every >= 0, "outputs.dump_every must be non-negative");
}

RunConfig parse_config(const std::string& text)
{
    RunConfig c;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        // strip comments outside quotes
        bool q = false;
        for (std::size_t i = 0; i < line.size(); ++i) {
            if (line[i] == '"')
                q = !q;
            else if (line[i] == '#' && !q) {
                line.resize(i);
                break;
            }
        }
        line = trim(line);
        if (line.empty())
            continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw UsageError("config line " + std::to_string(lineno) + ": bad section header");
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw UsageError("config line " + std::to_string(lineno) + ": expected key = value");
        std::string key = trim(line.substr(0, eq));
        if (!section.empty())
            key = section + "." + key;
        set_config_key(c, key, line.substr(eq + 1));
    }
    validate_config(c);
    return c;
}

RunConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw UsageError("cannot open config '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string serialize_config(const RunConfig& c)
{
    std::string out;
    for (const auto& [k, f] : fields())
        out += k + " = " + f.get(c) + "\n";
    return out;
}

} // namespace vcrystal
