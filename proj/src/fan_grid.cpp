#include "paratomo/fan_grid.hpp"

#include "paratomo/errors.hpp"

namespace paratomo {

FanBeamGrid make_fan_grid(const MetricField& m, Domain domain, int n_beta, int n_alpha) {
    if (n_beta < 4 || n_alpha < 4)
        throw ValidationError("grid", "fan grid needs at least 4 nodes per axis");
    FanBeamGrid g;
    g.domain = domain;
    g.radius = m.radius(domain);
    g.n_beta = n_beta;
    g.n_alpha = n_alpha;
    g.beta.resize(n_beta);
    g.alpha.resize(n_alpha);
    for (int i = 0; i < n_beta; ++i) g.beta[i] = 2.0 * M_PI * i / n_beta;
    for (int j = 0; j < n_alpha; ++j) g.alpha[j] = -M_PI / 2.0 + M_PI * (j + 0.5) / n_alpha;
    g.mu.resize(g.count());
    g.quad.resize(g.count());
    const double cell = g.dbeta() * g.dalpha();
    for (int i = 0; i < n_beta; ++i) {
        const double arc = m.boundary_frame(g.beta[i], domain).arc_speed;
        for (int j = 0; j < n_alpha; ++j) {
            const double w = std::cos(g.alpha[j]) * arc * cell;
            g.mu[g.idx(i, j)] = w;
            g.quad[g.idx(i, j)] = g.in_band(j) ? 0.0 : w;
        }
    }
    return g;
}

FanPtr make_fan_ptr(const MetricField& m, Domain domain, int n_beta, int n_alpha) {
    return std::make_shared<const FanBeamGrid>(make_fan_grid(m, domain, n_beta, n_alpha));
}

PhasePoint phase_from_fan(const MetricField& m, Domain domain, double beta, double alpha) {
    const auto f = m.boundary_frame(beta, domain);
    return {f.point, std::cos(alpha) * f.nu + std::sin(alpha) * f.tangent};
}

PhasePoint node_phase(const MetricField& m, const FanBeamGrid& grid, int i, int j) {
    return phase_from_fan(m, grid.domain, grid.beta[i], grid.alpha[j]);
}

std::pair<double, double> fan_of_phase(const MetricField& m, Domain domain, const PhasePoint& p) {
    double beta = std::atan2(p.x[1], p.x[0]);
    if (beta < 0.0) beta += 2.0 * M_PI;
    const auto f = m.boundary_frame(beta, domain);
    const double cn = m.inner(f.point, p.v, f.nu);
    const double ct = m.inner(f.point, p.v, f.tangent);
    return {beta, std::atan2(ct, cn)};
}

}  // namespace paratomo
