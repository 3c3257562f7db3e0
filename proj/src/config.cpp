#include "paratomo/config.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "paratomo/phantom.hpp"
#include "paratomo/rng.hpp"

namespace paratomo {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

double parse_double(const std::string& v, int line) {
    std::size_t used = 0;
    double out = 0.0;
    try {
        out = std::stod(v, &used);
    } catch (const std::exception&) {
        throw ParseError(line, "not a number: '" + v + "'");
    }
    if (used != v.size()) throw ParseError(line, "trailing characters after number: '" + v + "'");
    return out;
}

int parse_int(const std::string& v, int line) {
    std::size_t used = 0;
    long out = 0;
    try {
        out = std::stol(v, &used);
    } catch (const std::exception&) {
        throw ParseError(line, "not an integer: '" + v + "'");
    }
    if (used != v.size()) throw ParseError(line, "trailing characters after integer: '" + v + "'");
    return static_cast<int>(out);
}

std::uint64_t parse_seed(const std::string& v, int line) {
    std::size_t used = 0;
    unsigned long long out = 0;
    try {
        out = std::stoull(v, &used);
    } catch (const std::exception&) {
        throw ParseError(line, "not a seed value: '" + v + "'");
    }
    if (used != v.size()) throw ParseError(line, "trailing characters after seed: '" + v + "'");
    return out;
}

void validate(const ExperimentConfig& c) {
    if (c.metric_kind != "euclidean" && c.metric_kind != "conformal" && c.metric_kind != "general")
        throw ValidationError("metric.kind", "unknown metric kind '" + c.metric_kind + "'");
    if (c.metric_amplitude < 0.0) throw ValidationError("metric.amplitude", "must be >= 0");
    if (c.rank < 1 || c.rank > 2) throw ValidationError("pair.rank", "supported ranks are 1 and 2");
    if (c.pair_scale < 0.0) throw ValidationError("pair.scale", "must be >= 0");
    if (c.pair_b_scale < 0.0) throw ValidationError("pair.b_scale", "must be >= 0");
    if (c.n_r < 4) throw ValidationError("grid.n_r", "must be >= 4");
    if (c.n_theta < 4) throw ValidationError("grid.n_theta", "must be >= 4");
    if (c.n_beta < 4) throw ValidationError("grid.n_beta", "must be >= 4");
    if (c.n_alpha < 4) throw ValidationError("grid.n_alpha", "must be >= 4");
    if (c.n_dir < 4) throw ValidationError("grid.n_dir", "must be >= 4");
    if (!(c.step > 0.0) || c.step > 1.0 / 32.0)
        throw ValidationError("solver.step", "must lie in (0, 1/32]");
    if (!(c.tol > 0.0)) throw ValidationError("solver.tol", "must be > 0");
    if (c.max_iter < 1) throw ValidationError("solver.max_iter", "must be >= 1");
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text) {
    ExperimentConfig c;
    bool saw_metric_kind = false;
    std::istringstream is(text);
    std::string raw, section;
    int line = 0;
    while (std::getline(is, raw)) {
        ++line;
        std::string s = trim(raw);
        if (s.empty() || s[0] == '#' || s[0] == ';') continue;
        if (s.front() == '[') {
            if (s.back() != ']') throw ParseError(line, "unterminated section header");
            section = trim(s.substr(1, s.size() - 2));
            if (section != "metric" && section != "pair" && section != "grid" &&
                section != "solver" && section != "run")
                throw ValidationError(section, "unknown section");
            continue;
        }
        const std::size_t eq = s.find('=');
        if (eq == std::string::npos) throw ParseError(line, "expected key = value");
        const std::string key = trim(s.substr(0, eq));
        const std::string value = trim(s.substr(eq + 1));
        if (key.empty()) throw ParseError(line, "empty key");
        if (section.empty()) throw ParseError(line, "key before any section");
        const std::string full = section + "." + key;

        if (full == "metric.kind") {
            c.metric_kind = value;
            saw_metric_kind = true;
        } else if (full == "metric.amplitude") {
            c.metric_amplitude = parse_double(value, line);
        } else if (full == "metric.seed") {
            c.metric_seed = parse_seed(value, line);
        } else if (full == "pair.rank") {
            c.rank = parse_int(value, line);
        } else if (full == "pair.scale") {
            c.pair_scale = parse_double(value, line);
        } else if (full == "pair.seed") {
            c.pair_seed = parse_seed(value, line);
        } else if (full == "pair.b_scale") {
            c.pair_b_scale = parse_double(value, line);
        } else if (full == "pair.b_seed") {
            c.pair_b_seed = parse_seed(value, line);
        } else if (full == "grid.n_r") {
            c.n_r = parse_int(value, line);
        } else if (full == "grid.n_theta") {
            c.n_theta = parse_int(value, line);
        } else if (full == "grid.n_beta") {
            c.n_beta = parse_int(value, line);
        } else if (full == "grid.n_alpha") {
            c.n_alpha = parse_int(value, line);
        } else if (full == "grid.n_dir") {
            c.n_dir = parse_int(value, line);
        } else if (full == "solver.step") {
            c.step = parse_double(value, line);
        } else if (full == "solver.tol") {
            c.tol = parse_double(value, line);
        } else if (full == "solver.max_iter") {
            c.max_iter = parse_int(value, line);
        } else if (full == "run.experiment") {
            c.experiment = value;
        } else if (full == "run.out") {
            c.out_dir = value;
        } else if (full == "run.seed") {
            c.seed = parse_seed(value, line);
        } else {
            throw ValidationError(full, "unknown key");
        }
    }
    if (!saw_metric_kind) throw ValidationError("metric.kind", "missing required key");
    validate(c);
    return c;
}

ExperimentConfig parse_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ValidationError("config", "cannot open '" + path + "'");
    std::ostringstream buf;
    buf << f.rdbuf();
    return parse_config_text(buf.str());
}

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

std::string emit_config(const ExperimentConfig& c) {
    std::ostringstream os;
    os << "[metric]\n"
       << "kind = " << c.metric_kind << "\n"
       << "amplitude = " << fmt(c.metric_amplitude) << "\n"
       << "seed = " << c.metric_seed << "\n\n"
       << "[pair]\n"
       << "rank = " << c.rank << "\n"
       << "scale = " << fmt(c.pair_scale) << "\n"
       << "seed = " << c.pair_seed << "\n"
       << "b_scale = " << fmt(c.pair_b_scale) << "\n"
       << "b_seed = " << c.pair_b_seed << "\n\n"
       << "[grid]\n"
       << "n_r = " << c.n_r << "\n"
       << "n_theta = " << c.n_theta << "\n"
       << "n_beta = " << c.n_beta << "\n"
       << "n_alpha = " << c.n_alpha << "\n"
       << "n_dir = " << c.n_dir << "\n\n"
       << "[solver]\n"
       << "step = " << fmt(c.step) << "\n"
       << "tol = " << fmt(c.tol) << "\n"
       << "max_iter = " << c.max_iter << "\n\n"
       << "[run]\n";
    if (!c.experiment.empty()) os << "experiment = " << c.experiment << "\n";
    os << "out = " << c.out_dir << "\n"
       << "seed = " << c.seed << "\n";
    return os.str();
}

PhantomSet phantom_gen(const ExperimentConfig& cfg) {
    PhantomSet out;

    Rng mrng(cfg.metric_seed);
    if (cfg.metric_kind == "euclidean" || cfg.metric_amplitude == 0.0) {
        out.metric = euclidean_metric();
    } else if (cfg.metric_kind == "conformal") {
        const SmoothField dev = random_scalar_cn(mrng, 4, cfg.metric_amplitude, 1.1);
        out.metric = conformal_metric(field_sum(constant_field(1.0), dev));
        out.metric_c4 = c_norm(dev, 4, out.metric.r_ext);
    } else {
        const double half = 0.5 * cfg.metric_amplitude;
        const SmoothField d11 = random_scalar_cn(mrng, 4, half, 1.1);
        const SmoothField d12 = random_scalar_cn(mrng, 4, 0.5 * half, 1.1);
        const SmoothField d22 = random_scalar_cn(mrng, 4, half, 1.1);
        out.metric = general_metric(field_sum(constant_field(1.0), d11), d12,
                                    field_sum(constant_field(1.0), d22));
        out.metric_c4 = std::max({c_norm(d11, 4, out.metric.r_ext),
                                  c_norm(d12, 4, out.metric.r_ext),
                                  c_norm(d22, 4, out.metric.r_ext)});
    }

    Rng prng(cfg.pair_seed);
    out.pair_a = random_pair_cn(cfg.rank, 3, cfg.pair_scale, out.metric.r_ext, prng);
    out.pair_c3 = c_norm(*out.pair_a, 3, out.metric.r_ext);
    if (cfg.pair_b_scale > 0.0) {
        Rng brng(cfg.pair_b_seed);
        out.pair_b = random_pair_cn(cfg.rank, 3, cfg.pair_b_scale, out.metric.r_ext, brng);
        out.pair_b_c3 = c_norm(*out.pair_b, 3, out.metric.r_ext);
    }

    Rng hrng(cfg.seed);
    const GridPtr grid = make_grid(cfg.n_r, cfg.n_theta, out.metric.r_core);
    out.h = random_pair_field(grid, cfg.rank, hrng);
    return out;
}

}  // namespace paratomo
