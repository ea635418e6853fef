#include "mfgtrack/kernels.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "mfgtrack/parallel.hpp"

namespace mfgtrack {

namespace {

constexpr std::size_t kChunk = 128;

double probe_r_max(const DerivedConstants& c, double r, double horizon) {
    return r + std::max(0.0, c.r_drift) * horizon + 8.0 * c.r_vol * std::sqrt(horizon) + 2.0;
}

// Cumulative trapezoid of per-node values; out[k] = int over the first k cells.
void cumulative_trapezoid(const std::vector<double>& vals, double dt, std::vector<double>& out) {
    out.resize(vals.size());
    out[0] = 0.0;
    for (std::size_t k = 1; k < vals.size(); ++k)
        out[k] = out[k - 1] + 0.5 * dt * (vals[k - 1] + vals[k]);
}

}  // namespace

std::size_t first_boundary_node(const PathBundle& b, std::size_t k0) {
    for (std::size_t k = k0; k < b.reflected.size(); ++k)
        if (b.reflected[k] == 0.0) return k;
    return b.reflected.size();
}

McEstimate mc_over_paths(const ModelParams& p, const DerivedConstants& c, const TimeGrid& grid,
                         double r, double z, std::uint64_t seed, std::size_t n_paths,
                         const std::function<double(const PathBundle&)>& fn) {
    std::vector<MeanAccumulator> acc(chunk_count(n_paths, kChunk));
    parallel_chunks(n_paths, kChunk, [&](std::size_t chunk, std::size_t first, std::size_t last) {
        PathBundle b;
        MeanAccumulator local;
        for (std::size_t path = first; path < last; ++path) {
            RngStream rng(seed, path);
            simulate_joint_into(b, p, c, grid, r, z, rng);
            local.add(fn(b));
        }
        acc[chunk] = local;
    });
    MeanAccumulator total;
    for (const auto& a : acc) total.merge(a);
    return total.estimate();
}

KernelBasis::KernelBasis(const ModelParams& p, const DerivedConstants& c, const TimeGrid& curve_grid,
                         double r_max, std::size_t n_r)
    : p_(p), c_(c), curve_grid_(curve_grid) {
    const double dtc = curve_grid_.dt();
    const std::size_t n = curve_grid_.n_steps;
    q_one_ = InnerIntegralTable(c_, 1.0, dtc, n, r_max, n_r);
    q_mix_ = InnerIntegralTable(c_, 1.0 - p_.sigma * p_.sigma_z / p_.mu, dtc, n, r_max, n_r);

    // C2 rows: trapezoid over the remaining horizon for every start node.
    const std::size_t n_cols = n_r + 1;
    c2_.assign((n + 1) * n_cols, 0.0);
    const double rate = p_.rho - c_.kappa;
    parallel_chunks(n + 1, 8, [&](std::size_t, std::size_t first, std::size_t last) {
        for (std::size_t i = first; i < last; ++i) {
            const std::size_t m = n - i;  // remaining intervals
            if (m == 0) continue;
            double* row = &c2_[i * n_cols];
            for (std::size_t j = 0; j < n_cols; ++j) {
                const double rr = static_cast<double>(j) * (r_max / static_cast<double>(n_r));
                double sum = 0.0;
                for (std::size_t d = 1; d <= m; ++d) {
                    const double w = (d == m) ? 0.5 * dtc : dtc;
                    sum += w * std::exp(-rate * static_cast<double>(d) * dtc) * q_mix_.at(d, rr);
                }
                row[j] = sum;
            }
        }
    });
}

KernelTable::KernelTable(const KernelBasis& basis, const TimeGrid& sim_grid, double r, double z,
                         const KernelMcConfig& mc, bool build_g, bool build_h) {
    const ModelParams& p = basis.params();
    const DerivedConstants& c = basis.constants();
    curve_grid_ = basis.curve_grid();
    r_ = r;
    z_ = z;
    n_paths_ = mc.n_paths;
    if (r < 0.0 || z < 0.0) throw std::domain_error("KernelTable: r and z must be >= 0");
    if (sim_grid.t_start != curve_grid_.t_start || sim_grid.t_end != curve_grid_.t_end)
        throw std::invalid_argument("KernelTable: sim grid must span the curve grid");
    if (sim_grid.n_steps % curve_grid_.n_steps != 0)
        throw std::invalid_argument("KernelTable: sim steps must be a multiple of curve intervals");

    const std::size_t n = curve_grid_.n_steps;
    const std::size_t n_nodes = n + 1;
    const std::size_t stride = sim_grid.n_steps / n;
    const std::size_t n_sim = sim_grid.n_nodes();
    const double dtc = curve_grid_.dt();

    const double pref_g = p.lambda * p.mu * p.mu / (p.sigma * p.sigma);
    const double pref_h1 = (1.0 - p.lambda) * c.eta * p.mu * p.mu / (p.sigma * p.sigma);
    const double pref_h2 = (1.0 - p.lambda) * c.eta * p.sigma_z * p.mu / p.sigma;
    const double pref_h3 = (1.0 - p.lambda) * p.sigma_z * p.mu / p.sigma;

    const bool want_g = build_g && p.lambda > 0.0;
    const bool want_h = build_h && p.lambda < 1.0;

    g_.assign(n_nodes * n_nodes, 0.0);
    g_se_.assign(n_nodes * n_nodes, 0.0);
    h_.assign(n_nodes, 0.0);
    h_se_.assign(n_nodes, 0.0);

    struct ChunkAcc {
        std::vector<double> g_sum, g_sq, h_sum, h_sq;
        std::size_t n{0};
    };
    std::vector<ChunkAcc> acc(chunk_count(mc.n_paths, kChunk));

    parallel_chunks(mc.n_paths, kChunk, [&](std::size_t chunk, std::size_t first, std::size_t last) {
        ChunkAcc local;
        if (want_g) {
            local.g_sum.assign(n_nodes * n_nodes, 0.0);
            local.g_sq.assign(n_nodes * n_nodes, 0.0);
        }
        if (want_h) {
            local.h_sum.assign(n_nodes, 0.0);
            local.h_sq.assign(n_nodes, 0.0);
        }
        PathBundle b;
        std::vector<double> q_vals, q_cum;
        std::vector<std::size_t> znext;
        for (std::size_t path = first; path < last; ++path) {
            RngStream rng(mc.seed, path);
            simulate_joint_into(b, p, c, sim_grid, r, z, rng);
            ++local.n;

            if (want_h) {
                // next boundary visit at or after each sim node
                znext.resize(n_sim);
                std::size_t nxt = n_sim;
                for (std::size_t k = n_sim; k-- > 0;) {
                    if (b.reflected[k] == 0.0) nxt = k;
                    znext[k] = nxt;
                }
                q_vals.resize(n_sim);
                for (std::size_t k = 0; k < n_sim; ++k)
                    q_vals[k] = std::exp(-p.rho * sim_grid.node(k) - b.reflected[k]) * b.index[k];
                cumulative_trapezoid(q_vals, sim_grid.dt(), q_cum);
            }

            for (std::size_t i = 0; i <= n; ++i) {
                const std::size_t k0 = i * stride;
                const double rt = b.reflected[k0];
                if (want_h) {
                    const double zt = b.index[k0];
                    const std::size_t stop = std::min(znext[k0], n_sim - 1);
                    const double cont = stop > k0
                        ? std::exp(p.rho * curve_grid_.node(i) + rt) * (q_cum[stop] - q_cum[k0])
                        : 0.0;
                    const double hv = pref_h1 * zt * basis.c2_coef(i, basis.q_mix().coef(rt))
                                      + pref_h2 * cont;
                    local.h_sum[i] += hv;
                    local.h_sq[i] += hv * hv;
                }
                if (want_g) {
                    const auto rc = basis.q_one().coef(rt);
                    double* gs = &local.g_sum[i * n_nodes];
                    double* gq = &local.g_sq[i * n_nodes];
                    for (std::size_t d = 1; d <= n - i; ++d) {
                        const double v = basis.q_one().at_coef(d, rc);
                        gs[i + d] += v;
                        gq[i + d] += v * v;
                    }
                }
            }
        }
        acc[chunk] = std::move(local);
    });

    // deterministic merge in chunk order
    std::vector<double> g_sum, g_sq, h_sum, h_sq;
    if (want_g) {
        g_sum.assign(n_nodes * n_nodes, 0.0);
        g_sq.assign(n_nodes * n_nodes, 0.0);
    }
    if (want_h) {
        h_sum.assign(n_nodes, 0.0);
        h_sq.assign(n_nodes, 0.0);
    }
    std::size_t total = 0;
    for (const auto& a : acc) {
        total += a.n;
        if (want_g)
            for (std::size_t k = 0; k < g_sum.size(); ++k) {
                g_sum[k] += a.g_sum[k];
                g_sq[k] += a.g_sq[k];
            }
        if (want_h)
            for (std::size_t k = 0; k < h_sum.size(); ++k) {
                h_sum[k] += a.h_sum[k];
                h_sq[k] += a.h_sq[k];
            }
    }
    const auto dN = static_cast<double>(total);

    if (want_g) {
        for (std::size_t i = 0; i <= n; ++i)
            for (std::size_t d = 1; d <= n - i; ++d) {
                const std::size_t k = i * n_nodes + i + d;
                const double mean = g_sum[k] / dN;
                double var = total > 1 ? (g_sq[k] - dN * mean * mean) / (dN - 1.0) : 0.0;
                if (var < 0.0) var = 0.0;
                const double scale = pref_g * std::exp(-p.rho * static_cast<double>(d) * dtc);
                g_[k] = scale * mean;
                g_se_[k] = scale * std::sqrt(var / dN);
            }
    }
    for (std::size_t i = 0; i <= n; ++i) {
        const double det = pref_h3 * std::exp(p.mu_z * curve_grid_.node(i)) * z;
        if (want_h) {
            const double mean = h_sum[i] / dN;
            double var = total > 1 ? (h_sq[i] - dN * mean * mean) / (dN - 1.0) : 0.0;
            if (var < 0.0) var = 0.0;
            h_[i] = mean + det;
            h_se_[i] = std::sqrt(var / dN);
        } else {
            h_[i] = (p.lambda < 1.0) ? det : 0.0;
        }
    }
}

double KernelTable::contraction_sup() const {
    const std::size_t n = curve_grid_.n_steps;
    const double dtc = curve_grid_.dt();
    double sup = 0.0;
    for (std::size_t i = 0; i <= n; ++i) {
        double m = 0.0;
        for (std::size_t j = i; j <= n; ++j) {
            const double w = (j == i || j == n) ? 0.5 * dtc : dtc;
            m += w * g(i, j);
        }
        sup = std::max(sup, m);
    }
    return sup;
}

void KernelTable::write_csv(std::ostream& os) const {
    os << "# n_paths=" << n_paths_ << "\n";
    os << "r,z,t,s,G,G_se,H,H_se\n";
    char buf[320];
    const std::size_t n = curve_grid_.n_steps;
    for (std::size_t i = 0; i <= n; ++i)
        for (std::size_t j = i; j <= n; ++j) {
            std::snprintf(buf, sizeof(buf), "%.12g,%.12g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", r_, z_,
                          curve_grid_.node(i), curve_grid_.node(j), g(i, j), g_se(i, j), h_[i], h_se_[i]);
            os << buf;
        }
}

KernelTable KernelTable::read_csv(std::istream& is) {
    KernelTable kt;
    std::string line;
    std::vector<std::array<double, 8>> rows;
    std::size_t n_paths = 0;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            const auto pos = line.find("n_paths=");
            if (pos != std::string::npos) n_paths = std::stoull(line.substr(pos + 8));
            continue;
        }
        if (line.find("r,z,t,s") == 0) continue;
        std::array<double, 8> row{};
        std::stringstream ss(line);
        std::string cell;
        std::size_t c = 0;
        while (std::getline(ss, cell, ',') && c < 8) row[c++] = std::stod(cell);
        if (c == 8) rows.push_back(row);
    }
    if (rows.empty()) throw std::runtime_error("KernelTable::read_csv: no data rows");

    std::map<double, std::size_t> t_index;
    for (const auto& row : rows) t_index.emplace(row[2], 0);
    std::size_t idx = 0;
    for (auto& kv : t_index) kv.second = idx++;
    const std::size_t n = t_index.size() - 1;
    const double t0 = t_index.begin()->first;
    const double t1 = t_index.rbegin()->first;
    kt.curve_grid_ = TimeGrid(t0, t1, n);
    kt.r_ = rows.front()[0];
    kt.z_ = rows.front()[1];
    kt.n_paths_ = n_paths;
    kt.g_.assign((n + 1) * (n + 1), 0.0);
    kt.g_se_.assign((n + 1) * (n + 1), 0.0);
    kt.h_.assign(n + 1, 0.0);
    kt.h_se_.assign(n + 1, 0.0);
    for (const auto& row : rows) {
        const std::size_t i = t_index.at(row[2]);
        const std::size_t j = t_index.at(row[3]);
        kt.g_[kt.idx(i, j)] = row[4];
        kt.g_se_[kt.idx(i, j)] = row[5];
        kt.h_[i] = row[6];
        kt.h_se_[i] = row[7];
    }
    return kt;
}

McEstimate kernel_G(const ModelParams& p, const DerivedConstants& c, double r, double s, double t,
                    const McConfig& mc) {
    if (!(0.0 <= t && t <= s && s <= p.horizon)) throw std::domain_error("kernel_G: need 0 <= t <= s <= T");
    if (r < 0.0) throw std::domain_error("kernel_G: r must be >= 0");
    if (p.lambda == 0.0) return {0.0, 0.0, 0};

    const double pref = p.lambda * p.mu * p.mu / (p.sigma * p.sigma) * std::exp(-p.rho * (s - t));
    if (s == t) return {0.0, 0.0, 0};  // tau -> 0 limit
    if (t == 0.0) {
        // the reflected state at time zero is deterministic
        return {pref * inner_phi_integral(c, s - t, r, 1.0), 0.0, 0};
    }
    const TimeGrid grid(0.0, t, mc.steps);
    const InnerIntegralTable table(c, 1.0, s - t, 1, probe_r_max(c, r, t), 800);
    McEstimate e = mc_over_paths(p, c, grid, r, 1.0, mc.seed, mc.n_paths,
                                 [&](const PathBundle& b) { return table.at(1, b.reflected.back()); });
    e.value *= pref;
    e.std_error *= pref;
    return e;
}

McEstimate kernel_H(const ModelParams& p, const DerivedConstants& c, double r, double z, double t,
                    const McConfig& mc) {
    if (!(0.0 <= t && t <= p.horizon)) throw std::domain_error("kernel_H: t outside [0, T]");
    if (r < 0.0 || z < 0.0) throw std::domain_error("kernel_H: r, z must be >= 0");
    if (p.lambda == 1.0) return {0.0, 0.0, 0};

    const double pref1 = (1.0 - p.lambda) * c.eta * p.mu * p.mu / (p.sigma * p.sigma);
    const double pref2 = (1.0 - p.lambda) * c.eta * p.sigma_z * p.mu / p.sigma;
    const double term3 = (1.0 - p.lambda) * p.sigma_z * p.mu / p.sigma * std::exp(p.mu_z * t) * z;
    if (t == p.horizon) return {term3, 0.0, 0};

    const TimeGrid grid(0.0, p.horizon, mc.steps);
    const std::size_t kt = grid.floor_index(t + 0.5 * grid.dt());
    const std::size_t m2 = 160;
    const double dtau2 = (p.horizon - t) / static_cast<double>(m2);
    const InnerIntegralTable q_mix(c, 1.0 - p.sigma * p.sigma_z / p.mu, dtau2, m2,
                                   probe_r_max(c, r, p.horizon), 800);
    const double rate = p.rho - c.kappa;

    McEstimate e = mc_over_paths(p, c, grid, r, z, mc.seed, mc.n_paths, [&](const PathBundle& b) {
        const double rt = b.reflected[kt];
        const double zt = b.index[kt];
        const auto rc = q_mix.coef(rt);
        double c2 = 0.0;
        for (std::size_t d = 1; d <= m2; ++d) {
            const double w = (d == m2) ? 0.5 * dtau2 : dtau2;
            c2 += w * std::exp(-rate * static_cast<double>(d) * dtau2) * q_mix.at_coef(d, rc);
        }
        const std::size_t stop = first_boundary_node(b, kt);
        double cont = 0.0;
        if (stop > kt) {
            const std::size_t hi = std::min(stop, grid.n_steps);
            double prev = zt;  // integrand at s = t is Z_t
            for (std::size_t k = kt + 1; k <= hi; ++k) {
                const double cur = std::exp(-p.rho * (grid.node(k) - t) - (b.reflected[k] - rt)) * b.index[k];
                cont += 0.5 * grid.dt() * (prev + cur);
                prev = cur;
            }
        }
        return pref1 * zt * c2 + pref2 * cont;
    });
    e.value += term3;
    return e;
}

McEstimate varphi_bar(const ModelParams& p, const DerivedConstants& c, double t, double r, double z,
                      const McConfig& mc) {
    if (r < 0.0 || z < 0.0) throw std::domain_error("varphi_bar: r, z must be >= 0");
    if (!(0.0 <= t && t <= p.horizon)) throw std::domain_error("varphi_bar: t outside [0, T]");
    if (t == p.horizon || r == 0.0 || z == 0.0) return {0.0, 0.0, 0};

    const TimeGrid grid(t, p.horizon, mc.steps);
    return mc_over_paths(p, c, grid, r, z, mc.seed, mc.n_paths, [&](const PathBundle& b) {
        const std::size_t stop = std::min(first_boundary_node(b, 0), grid.n_steps);
        double acc = 0.0;
        double prev = z;  // e^{0 - r + r} z
        for (std::size_t k = 1; k <= stop; ++k) {
            const double cur = std::exp(-p.rho * (grid.node(k) - t) - b.reflected[k] + r) * b.index[k];
            acc += 0.5 * grid.dt() * (prev + cur);
            prev = cur;
        }
        return acc;
    });
}

McEstimate value_v(const ModelParams& p, const DerivedConstants& c, double t, double r, double z,
                   const Curve& f, const McConfig& mc) {
    if (r < 0.0 || z < 0.0) throw std::domain_error("value_v: r, z must be >= 0");
    if (!(0.0 <= t && t <= p.horizon)) throw std::domain_error("value_v: t outside [0, T]");
    if (t == p.horizon) return {0.0, 0.0, 0};

    const TimeGrid grid(t, p.horizon, mc.steps);
    const double eta = c.eta;
    return mc_over_paths(p, c, grid, r, z, mc.seed, mc.n_paths, [&](const PathBundle& b) {
        double acc_f = 0.0, acc_z = 0.0;
        double pf = std::exp(-p.rho * t - b.reflected[0]);
        double prev_f = pf * f.value(t);
        double prev_z = pf * b.index[0];
        for (std::size_t k = 1; k <= grid.n_steps; ++k) {
            const double s = grid.node(k);
            const double e = std::exp(-p.rho * s - b.reflected[k]);
            const double cur_f = e * f.value(s);
            const double cur_z = e * b.index[k];
            acc_f += 0.5 * grid.dt() * (prev_f + cur_f);
            acc_z += 0.5 * grid.dt() * (prev_z + cur_z);
            prev_f = cur_f;
            prev_z = cur_z;
        }
        return -p.lambda * acc_f - (1.0 - p.lambda) * eta * acc_z;
    });
}

McEstimate deriv_v_r(const ModelParams& p, const DerivedConstants& c, double t, double r, double z,
                     const Curve& f, const McConfig& mc) {
    if (r < 0.0 || z < 0.0) throw std::domain_error("deriv_v_r: r, z must be >= 0");
    if (!(0.0 <= t && t <= p.horizon)) throw std::domain_error("deriv_v_r: t outside [0, T]");
    if (t == p.horizon || r == 0.0) return {0.0, 0.0, 0};

    const TimeGrid grid(t, p.horizon, mc.steps);
    return mc_over_paths(p, c, grid, r, z, mc.seed, mc.n_paths, [&](const PathBundle& b) {
        const std::size_t stop = std::min(first_boundary_node(b, 0), grid.n_steps);
        double acc_f = 0.0, acc_z = 0.0;
        const double p0 = std::exp(-p.rho * t - b.reflected[0]);
        double prev_f = p0 * f.value(t);
        double prev_z = p0 * b.index[0];
        for (std::size_t k = 1; k <= stop; ++k) {
            const double s = grid.node(k);
            const double e = std::exp(-p.rho * s - b.reflected[k]);
            const double cur_f = e * f.value(s);
            const double cur_z = e * b.index[k];
            acc_f += 0.5 * grid.dt() * (prev_f + cur_f);
            acc_z += 0.5 * grid.dt() * (prev_z + cur_z);
            prev_f = cur_f;
            prev_z = cur_z;
        }
        return p.lambda * acc_f + (1.0 - p.lambda) * c.eta * acc_z;
    });
}

McEstimate deriv_v_rr(const ModelParams& p, const DerivedConstants& c, double t, double r, double z,
                      const Curve& f, const McConfig& mc) {
    if (r < 0.0 || z < 0.0) throw std::domain_error("deriv_v_rr: r, z must be >= 0");
    if (!(0.0 <= t && t <= p.horizon)) throw std::domain_error("deriv_v_rr: t outside [0, T]");
    if (t == p.horizon) return {0.0, 0.0, 0};

    // phi-quadrature part, trapezoid in s with the s -> t endpoint at zero
    const std::size_t m = std::min<std::size_t>(mc.steps, 400);
    const double ds = (p.horizon - t) / static_cast<double>(m);
    const double a_mix = 1.0 - p.sigma * p.sigma_z / p.mu;
    double a1 = 0.0, a2 = 0.0;
    for (std::size_t j = 1; j <= m; ++j) {
        const double s = t + static_cast<double>(j) * ds;
        const double w = (j == m) ? 0.5 * ds : ds;
        const double tau = s - t;
        a1 += w * std::exp(-p.rho * s - r) * inner_phi_integral(c, tau, r, 1.0) * f.value(s);
        a2 += w * std::exp(-p.rho * s - r + c.kappa * tau) * inner_phi_integral(c, tau, r, a_mix);
    }
    const double quad = p.lambda * a1 + (1.0 - p.lambda) * c.eta * z * a2;

    const McEstimate vr = deriv_v_r(p, c, t, r, z, f, mc);
    McEstimate e;
    e.value = quad - vr.value;
    e.std_error = vr.std_error;
    e.n_paths = vr.n_paths;
    return e;
}

}  // namespace mfgtrack
