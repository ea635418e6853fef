#include "mfgtrack/config.hpp"

#include <cctype>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace mfgtrack {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

double to_number(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const double v = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw std::invalid_argument("config: bad numeric value for '" + key + "': " + value);
    }
}

std::size_t to_count(const std::string& key, const std::string& value) {
    const double v = to_number(key, value);
    if (v < 0.0 || v != static_cast<double>(static_cast<std::size_t>(v)))
        throw std::invalid_argument("config: '" + key + "' must be a nonnegative integer");
    return static_cast<std::size_t>(v);
}

}  // namespace

void RunConfig::validate() const {
    params.validate();
    if (z0 < 0.0) throw std::invalid_argument("config: z0 must be >= 0");
    if (!has_v0 && !has_x0) throw std::invalid_argument("config: needs v0 or x0");
    if (has_v0 && v0 < 0.0) throw std::invalid_argument("config: v0 must be >= 0");
    if (has_x0 && x0 < 0.0) throw std::invalid_argument("config: x0 must be >= 0");
    if (solve.curve_intervals < 2) throw std::invalid_argument("config: curve_intervals must be >= 2");
    if (solve.sim_steps % solve.curve_intervals != 0)
        throw std::invalid_argument("config: steps must be a multiple of curve_intervals");
    if (solve.fp_tol <= 0.0 || solve.x_tol <= 0.0)
        throw std::invalid_argument("config: tolerances must be > 0");
}

RunConfig parse_config_text(const std::string& text) {
    RunConfig cfg;
    std::map<std::string, std::string> kv;
    std::istringstream is(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config: line " + std::to_string(lineno) + " is not key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty())
            throw std::invalid_argument("config: line " + std::to_string(lineno) + " has empty key or value");
        if (!kv.emplace(key, value).second)
            throw std::invalid_argument("config: duplicate key '" + key + "'");
    }

    bool saw_mu = false, saw_sigma = false, saw_mu_z = false, saw_sigma_z = false, saw_lambda = false,
         saw_rho = false, saw_horizon = false, saw_z0 = false;
    for (const auto& [key, value] : kv) {
        if (key == "mu") { cfg.params.mu = to_number(key, value); saw_mu = true; }
        else if (key == "sigma") { cfg.params.sigma = to_number(key, value); saw_sigma = true; }
        else if (key == "mu_z") { cfg.params.mu_z = to_number(key, value); saw_mu_z = true; }
        else if (key == "sigma_z") { cfg.params.sigma_z = to_number(key, value); saw_sigma_z = true; }
        else if (key == "lambda") { cfg.params.lambda = to_number(key, value); saw_lambda = true; }
        else if (key == "rho") { cfg.params.rho = to_number(key, value); saw_rho = true; }
        else if (key == "horizon") { cfg.params.horizon = to_number(key, value); saw_horizon = true; }
        else if (key == "v0") { cfg.v0 = to_number(key, value); cfg.has_v0 = true; }
        else if (key == "z0") { cfg.z0 = to_number(key, value); saw_z0 = true; }
        else if (key == "x0") { cfg.x0 = to_number(key, value); cfg.has_x0 = true; }
        else if (key == "seed") { cfg.solve.seed = static_cast<std::uint64_t>(to_count(key, value)); }
        else if (key == "steps") { cfg.solve.sim_steps = to_count(key, value); }
        else if (key == "curve_intervals") { cfg.solve.curve_intervals = to_count(key, value); }
        else if (key == "kernel_paths") { cfg.solve.kernel_paths = to_count(key, value); }
        else if (key == "certificate_paths") { cfg.solve.certificate_paths = to_count(key, value); }
        else if (key == "x_paths") { cfg.solve.x_paths = to_count(key, value); }
        else if (key == "verify_paths") { cfg.verify_paths = to_count(key, value); }
        else if (key == "psi_paths") { cfg.psi_paths = to_count(key, value); }
        else if (key == "nplayer_reps") { cfg.nplayer_reps = to_count(key, value); }
        else if (key == "nplayer_steps") { cfg.nplayer_steps = to_count(key, value); }
        else if (key == "fp_tol") { cfg.solve.fp_tol = to_number(key, value); }
        else if (key == "x_tol") { cfg.solve.x_tol = to_number(key, value); }
        else if (key == "heterogeneity_delta") { cfg.heterogeneity_delta = to_number(key, value); }
        else if (key == "out_dir") { cfg.out_dir = value; }
        else throw std::invalid_argument("config: unknown key '" + key + "'");
    }
    if (!(saw_mu && saw_sigma && saw_mu_z && saw_sigma_z && saw_lambda && saw_rho && saw_horizon && saw_z0))
        throw std::invalid_argument("config: missing one of mu, sigma, mu_z, sigma_z, lambda, rho, horizon, z0");
    cfg.validate();
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f.is_open()) throw std::invalid_argument("config: cannot open " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_config_text(ss.str());
}

}  // namespace mfgtrack
