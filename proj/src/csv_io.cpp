#include "paratomo/csv_io.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

namespace paratomo {

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string getline_or_throw(std::istream& is, const char* what) {
    std::string line;
    if (!std::getline(is, line)) throw SchemaError(std::string("truncated file: missing ") + what);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
}

// "# key=value key=value ..." after a known magic line.
std::map<std::string, std::string> header_fields(const std::string& line) {
    std::map<std::string, std::string> out;
    std::istringstream is(line);
    std::string tok;
    is >> tok;  // leading '#'
    while (is >> tok) {
        const std::size_t eq = tok.find('=');
        if (eq == std::string::npos) throw SchemaError("malformed header token '" + tok + "'");
        out[tok.substr(0, eq)] = tok.substr(eq + 1);
    }
    return out;
}

const std::string& field_of(const std::map<std::string, std::string>& h, const char* key) {
    const auto it = h.find(key);
    if (it == h.end()) throw SchemaError(std::string("header misses '") + key + "'");
    return it->second;
}

int int_of(const std::map<std::string, std::string>& h, const char* key) {
    return std::atoi(field_of(h, key).c_str());
}

double double_of(const std::map<std::string, std::string>& h, const char* key) {
    return std::strtod(field_of(h, key).c_str(), nullptr);
}

std::vector<double> split_row(const std::string& line, int expected, int lineno) {
    std::vector<double> out;
    out.reserve(expected);
    const char* p = line.c_str();
    while (*p) {
        char* end = nullptr;
        const double v = std::strtod(p, &end);
        if (end == p) throw ParseError(lineno, "expected a number in '" + line + "'");
        out.push_back(v);
        p = end;
        while (*p == ' ') ++p;
        if (*p == ',') ++p;
    }
    if (int(out.size()) != expected)
        throw SchemaError("row holds " + std::to_string(out.size()) + " values, expected " +
                          std::to_string(expected));
    return out;
}

}  // namespace

void write_fan_csv(std::ostream& os, const FanData& d, const MetricField& m, double step) {
    const FanBeamGrid& g = *d.grid;
    os << "# paratomo fan data v1\n";
    os << "# rows=" << d.rows << " cols=" << d.cols << " n_beta=" << g.n_beta
       << " n_alpha=" << g.n_alpha << " domain=" << (g.domain == Domain::M ? "M" : "M1")
       << " radius=" << fmt(g.radius) << " step=" << fmt(step) << "\n";
    os << "# metric " << describe(m) << "\n";
    os << "beta,alpha,mu_weight";
    for (int c = 0; c < d.stride(); ++c) os << ",re_" << c << ",im_" << c;
    os << "\n";
    for (int i = 0; i < g.n_beta; ++i)
        for (int j = 0; j < g.n_alpha; ++j) {
            os << fmt(g.beta[i]) << ',' << fmt(g.alpha[j]) << ',' << fmt(g.mu[g.idx(i, j)]);
            const Complex* p = d.node(i, j);
            for (int c = 0; c < d.stride(); ++c)
                os << ',' << fmt(p[c].real()) << ',' << fmt(p[c].imag());
            os << "\n";
        }
}

FanData read_fan_csv(std::istream& is, const MetricField& m) {
    if (getline_or_throw(is, "magic") != "# paratomo fan data v1")
        throw SchemaError("not a fan data file");
    const auto h = header_fields(getline_or_throw(is, "layout header"));
    const int rows = int_of(h, "rows"), cols = int_of(h, "cols");
    const int n_beta = int_of(h, "n_beta"), n_alpha = int_of(h, "n_alpha");
    const std::string& dom = field_of(h, "domain");
    if (dom != "M" && dom != "M1") throw SchemaError("unknown domain '" + dom + "'");
    const Domain domain = dom == "M" ? Domain::M : Domain::M1;
    if (rows < 1 || rows > kMaxRank || cols < 1 || cols > kMaxRank)
        throw SchemaError("stored rank is out of range");
    const std::string metric_line = getline_or_throw(is, "metric header");
    if (metric_line != "# metric " + describe(m))
        throw SchemaError("stored metric does not match the supplied one");
    getline_or_throw(is, "column header");

    FanPtr grid = make_fan_ptr(m, domain, n_beta, n_alpha);
    if (std::abs(grid->radius - double_of(h, "radius")) > 1e-12)
        throw SchemaError("stored radius disagrees with the metric's disk");
    FanData d(grid, rows, cols);
    const int ncol = 3 + 2 * d.stride();
    int lineno = 4;
    for (int i = 0; i < n_beta; ++i)
        for (int j = 0; j < n_alpha; ++j) {
            const auto row = split_row(getline_or_throw(is, "data row"), ncol, ++lineno);
            const double mu = grid->mu[grid->idx(i, j)];
            if (std::abs(row[2] - mu) > 1e-9 * std::max(1.0, std::abs(mu)))
                throw SchemaError("mu weight column disagrees with the grid");
            Complex* p = d.node(i, j);
            for (int c = 0; c < d.stride(); ++c) p[c] = Complex(row[3 + 2 * c], row[4 + 2 * c]);
        }
    return d;
}

namespace {

void write_grid_header(std::ostream& os, const char* magic, const GridPtr& g, int k) {
    os << magic << "\n";
    os << "# k=" << k << " n_r=" << g->n_r << " n_theta=" << g->n_theta
       << " r_max=" << fmt(g->r_max) << "\n";
}

GridPtr read_grid_header(std::istream& is, const char* magic, int& k) {
    if (getline_or_throw(is, "magic") != magic) throw SchemaError("unexpected file type");
    const auto h = header_fields(getline_or_throw(is, "layout header"));
    k = int_of(h, "k");
    if (k < 1 || k > kMaxRank * kMaxRank) throw SchemaError("stored component count out of range");
    const GridPtr g = make_grid(int_of(h, "n_r"), int_of(h, "n_theta"), double_of(h, "r_max"));
    getline_or_throw(is, "column header");
    return g;
}

}  // namespace

void write_pair_csv(std::ostream& os, const PairField& h) {
    write_grid_header(os, "# paratomo pair field v1", h.grid, h.k);
    os << "r_index,theta_index";
    for (const char* part : {"a1", "a2", "f"})
        for (int c = 0; c < h.k; ++c) os << ",re_" << part << "_" << c << ",im_" << part << "_" << c;
    os << "\n";
    for (int i = 0; i < h.grid->n_r; ++i)
        for (int j = 0; j < h.grid->n_theta; ++j) {
            os << i << ',' << j;
            for (const Field* part : {&h.a1, &h.a2, &h.f})
                for (int c = 0; c < h.k; ++c) {
                    const Complex v = part->comp(i, j, c);
                    os << ',' << fmt(v.real()) << ',' << fmt(v.imag());
                }
            os << "\n";
        }
}

PairField read_pair_csv(std::istream& is) {
    int k = 0;
    const GridPtr g = read_grid_header(is, "# paratomo pair field v1", k);
    PairField h(g, k);
    const int ncol = 2 + 6 * k;
    int lineno = 3;
    for (int i = 0; i < g->n_r; ++i)
        for (int j = 0; j < g->n_theta; ++j) {
            const auto row = split_row(getline_or_throw(is, "data row"), ncol, ++lineno);
            if (int(row[0]) != i || int(row[1]) != j)
                throw SchemaError("row indices out of order");
            Field* parts[3] = {&h.a1, &h.a2, &h.f};
            for (int part = 0; part < 3; ++part)
                for (int c = 0; c < k; ++c) {
                    const int at = 2 + 2 * (part * k + c);
                    parts[part]->comp(i, j, c) = Complex(row[at], row[at + 1]);
                }
        }
    return h;
}

void write_field_csv(std::ostream& os, const Field& f) {
    write_grid_header(os, "# paratomo field v1", f.grid, f.k);
    os << "r_index,theta_index";
    for (int c = 0; c < f.k; ++c) os << ",re_" << c << ",im_" << c;
    os << "\n";
    for (int i = 0; i < f.grid->n_r; ++i)
        for (int j = 0; j < f.grid->n_theta; ++j) {
            os << i << ',' << j;
            for (int c = 0; c < f.k; ++c) {
                const Complex v = f.comp(i, j, c);
                os << ',' << fmt(v.real()) << ',' << fmt(v.imag());
            }
            os << "\n";
        }
}

Field read_field_csv(std::istream& is) {
    int k = 0;
    const GridPtr g = read_grid_header(is, "# paratomo field v1", k);
    Field f(g, k);
    const int ncol = 2 + 2 * k;
    int lineno = 3;
    for (int i = 0; i < g->n_r; ++i)
        for (int j = 0; j < g->n_theta; ++j) {
            const auto row = split_row(getline_or_throw(is, "data row"), ncol, ++lineno);
            if (int(row[0]) != i || int(row[1]) != j)
                throw SchemaError("row indices out of order");
            for (int c = 0; c < k; ++c)
                f.comp(i, j, c) = Complex(row[2 + 2 * c], row[3 + 2 * c]);
        }
    return f;
}

namespace {

template <class WriteFn>
void save_to(const std::string& path, WriteFn&& fn) {
    std::ofstream os(path);
    if (!os) throw ValidationError("path", "cannot open '" + path + "' for writing");
    fn(os);
    if (!os) throw ValidationError("path", "write to '" + path + "' failed");
}

std::ifstream open_or_throw(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ValidationError("path", "cannot open '" + path + "'");
    return is;
}

}  // namespace

void save_fan_csv(const std::string& path, const FanData& d, const MetricField& m, double step) {
    save_to(path, [&](std::ostream& os) { write_fan_csv(os, d, m, step); });
}

FanData load_fan_csv(const std::string& path, const MetricField& m) {
    std::ifstream is = open_or_throw(path);
    return read_fan_csv(is, m);
}

void save_pair_csv(const std::string& path, const PairField& h) {
    save_to(path, [&](std::ostream& os) { write_pair_csv(os, h); });
}

PairField load_pair_csv(const std::string& path) {
    std::ifstream is = open_or_throw(path);
    return read_pair_csv(is);
}

void save_field_csv(const std::string& path, const Field& f) {
    save_to(path, [&](std::ostream& os) { write_field_csv(os, f); });
}

Field load_field_csv(const std::string& path) {
    std::ifstream is = open_or_throw(path);
    return read_field_csv(is);
}

}  // namespace paratomo
