/// @file config.cpp
#include "lmfsi/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "lmfsi/errors.hpp"

namespace lmfsi {

namespace {

namespace pt = boost::property_tree;

const std::map<std::string, std::set<std::string>>& schema() {
    static const std::map<std::string, std::set<std::string>> s = {
        {"fluid", {"a", "gamma", "mu", "lambda", "rho_bar", "eps", "m"}},
        {"grid", {"cells", "side_length"}},
        {"solver", {"dt_safety", "penalization_eta", "t_end", "snapshots", "stream_amplitude",
                    "density_perturbation", "seed"}},
        {"body", {"mode", "path", "center_x", "center_y", "radius", "period", "clockwise", "phase",
                  "density_exponent", "start_x", "start_y", "velocity_x", "velocity_y", "beta0", "omega0"}},
        {"sweep", {"eps", "min_cells", "cells_per_unit", "max_cells", "jobs", "out"}},
    };
    return s;
}

std::string where(const std::string& section, const std::string& key) { return "[" + section + "] " + key; }

double to_double(const std::string& v, const std::string& at) {
    std::size_t used = 0;
    double d = 0.0;
    try {
        d = std::stod(v, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != v.size()) throw ConfigError(at + ": expected a number, got '" + v + "'");
    return d;
}

long long to_integer(const std::string& v, const std::string& at) {
    std::size_t used = 0;
    long long d = 0;
    try {
        d = std::stoll(v, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != v.size()) throw ConfigError(at + ": expected an integer, got '" + v + "'");
    return d;
}

bool to_bool(const std::string& v, const std::string& at) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError(at + ": expected true or false, got '" + v + "'");
}

std::vector<double> to_list(const std::string& v, const std::string& at) {
    std::vector<double> out;
    std::istringstream in(v);
    for (std::string item; std::getline(in, item, ',');) {
        const auto a = item.find_first_not_of(" \t"), b = item.find_last_not_of(" \t");
        if (a == std::string::npos) throw ConfigError(at + ": empty list entry");
        out.push_back(to_double(item.substr(a, b - a + 1), at));
    }
    return out;
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace

SweepConfig parse_config(const std::string& text) {
    pt::ptree tree;
    std::istringstream in(text);
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(std::string("config syntax: ") + e.what());
    }

    SweepConfig c = default_sweep_config();
    SolverConfig& s = c.base;
    const auto& known = schema();
    for (const auto& [section, body] : tree) {
        const auto sec = known.find(section);
        if (sec == known.end()) {
            if (body.empty() && !body.data().empty())
                throw ConfigError("config: key '" + section + "' outside any section");
            throw ConfigError("config: unknown section [" + section + "]");
        }
        for (const auto& [key, node] : body) {
            if (!sec->second.count(key)) throw ConfigError("config: unknown key " + where(section, key));
            const std::string v = node.get_value<std::string>();
            const std::string at = where(section, key);
            auto num = [&] { return to_double(v, at); };
            auto integer = [&] { return to_integer(v, at); };
            if (section == "fluid") {
                double& target = key == "a" ? s.params.a
                               : key == "gamma" ? s.params.gamma
                               : key == "mu" ? s.params.mu
                               : key == "lambda" ? s.params.lambda
                               : key == "rho_bar" ? s.params.rho_bar
                               : key == "eps" ? s.params.eps
                               : s.params.m;
                target = num();
            } else if (section == "grid") {
                if (key == "cells") {
                    const long long n = integer();
                    if (n < 0 || n > (1 << 14)) throw ConfigError(at + ": out of range");
                    c.fixed_cells = static_cast<int>(n);
                } else {
                    s.grid.side_length = num();
                }
            } else if (section == "solver") {
                if (key == "dt_safety") s.dt_safety = num();
                else if (key == "penalization_eta") s.penalization_eta = num();
                else if (key == "t_end") s.t_end = num();
                else if (key == "snapshots") s.snapshots = static_cast<int>(integer());
                else if (key == "stream_amplitude") s.stream_amplitude = num();
                else if (key == "density_perturbation") s.density_perturbation = num();
                else {
                    const long long seed = integer();
                    if (seed < 0) throw ConfigError(at + ": must be >= 0");
                    s.seed = static_cast<std::uint64_t>(seed);
                }
            } else if (section == "body") {
                if (key == "mode") {
                    if (v == "prescribed") s.body_mode = BodyMode::prescribed;
                    else if (v == "coupled") s.body_mode = BodyMode::coupled;
                    else throw ConfigError(at + ": expected prescribed or coupled, got '" + v + "'");
                } else if (key == "path") {
                    if (v == "circle") c.path_kind = PathKind::circle;
                    else if (v == "grazing") c.path_kind = PathKind::grazing;
                    else if (v == "custom") c.path_kind = PathKind::custom;
                    else throw ConfigError(at + ": expected circle, grazing or custom, got '" + v + "'");
                } else if (key == "clockwise") {
                    s.path.clockwise = to_bool(v, at);
                } else {
                    double& target = key == "center_x" ? s.path.center.x
                                   : key == "center_y" ? s.path.center.y
                                   : key == "radius" ? s.path.radius
                                   : key == "period" ? s.path.period
                                   : key == "phase" ? s.path.phase
                                   : key == "density_exponent" ? s.body_density_exponent
                                   : key == "start_x" ? s.body_start.x
                                   : key == "start_y" ? s.body_start.y
                                   : key == "velocity_x" ? s.body_velocity0.x
                                   : key == "velocity_y" ? s.body_velocity0.y
                                   : key == "beta0" ? s.beta0
                                   : s.omega0;
                    target = num();
                }
            } else {
                if (key == "eps") c.eps_ladder = to_list(v, at);
                else if (key == "min_cells") c.min_cells = static_cast<int>(integer());
                else if (key == "cells_per_unit") c.cells_per_unit = num();
                else if (key == "max_cells") c.max_cells = static_cast<int>(integer());
                else if (key == "jobs") c.jobs = static_cast<int>(integer());
                else c.out_dir = v;
            }
        }
    }
    if (c.fixed_cells > 0) s.grid = GridSpec::square(c.fixed_cells, s.grid.side_length);
    c.validate();
    return c;
}

SweepConfig load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot read config file: " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    try {
        return parse_config(ss.str());
    } catch (const ConfigError& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

std::string to_ini(const SweepConfig& c) {
    const SolverConfig& s = c.base;
    const FluidParams& p = s.params;
    std::ostringstream o;
    o << "[fluid]\n"
      << "a=" << fmt(p.a) << "\ngamma=" << fmt(p.gamma) << "\nmu=" << fmt(p.mu) << "\nlambda=" << fmt(p.lambda)
      << "\nrho_bar=" << fmt(p.rho_bar) << "\neps=" << fmt(p.eps) << "\nm=" << fmt(p.m) << "\n\n";
    o << "[grid]\ncells=" << c.fixed_cells << "\nside_length=" << fmt(s.grid.side_length) << "\n\n";
    o << "[solver]\n"
      << "dt_safety=" << fmt(s.dt_safety) << "\npenalization_eta=" << fmt(s.penalization_eta)
      << "\nt_end=" << fmt(s.t_end) << "\nsnapshots=" << s.snapshots << "\nstream_amplitude="
      << fmt(s.stream_amplitude) << "\ndensity_perturbation=" << fmt(s.density_perturbation)
      << "\nseed=" << s.seed << "\n\n";
    const char* path = c.path_kind == PathKind::circle ? "circle" : c.path_kind == PathKind::grazing ? "grazing" : "custom";
    o << "[body]\n"
      << "mode=" << (s.body_mode == BodyMode::prescribed ? "prescribed" : "coupled") << "\npath=" << path
      << "\ncenter_x=" << fmt(s.path.center.x) << "\ncenter_y=" << fmt(s.path.center.y)
      << "\nradius=" << fmt(s.path.radius) << "\nperiod=" << fmt(s.path.period)
      << "\nclockwise=" << (s.path.clockwise ? "true" : "false") << "\nphase=" << fmt(s.path.phase)
      << "\ndensity_exponent=" << fmt(s.body_density_exponent) << "\nstart_x=" << fmt(s.body_start.x)
      << "\nstart_y=" << fmt(s.body_start.y) << "\nvelocity_x=" << fmt(s.body_velocity0.x)
      << "\nvelocity_y=" << fmt(s.body_velocity0.y) << "\nbeta0=" << fmt(s.beta0) << "\nomega0=" << fmt(s.omega0)
      << "\n\n";
    o << "[sweep]\neps=";
    for (std::size_t k = 0; k < c.eps_ladder.size(); ++k) o << (k ? "," : "") << fmt(c.eps_ladder[k]);
    o << "\nmin_cells=" << c.min_cells << "\ncells_per_unit=" << fmt(c.cells_per_unit) << "\nmax_cells=" << c.max_cells
      << "\njobs=" << c.jobs << "\nout=" << c.out_dir << "\n";
    return o.str();
}

} // namespace lmfsi
