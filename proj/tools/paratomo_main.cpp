#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "paratomo/config.hpp"
#include "paratomo/csv_io.hpp"
#include "paratomo/decomp.hpp"
#include "paratomo/errors.hpp"
#include "paratomo/experiments.hpp"
#include "paratomo/fan_grid.hpp"
#include "paratomo/gauge_ops.hpp"
#include "paratomo/pseudolin.hpp"
#include "paratomo/transport.hpp"
#include "paratomo/xray.hpp"

namespace {

using namespace paratomo;

struct CommonArgs {
    std::string config_path;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    bool quiet = false;
};

void add_common(CLI::App* cmd, CommonArgs& a) {
    cmd->add_option("--config", a.config_path, "structured-text configuration file");
    cmd->add_option("--out", a.out_dir, "output directory (overrides run.out)");
    cmd->add_option("--seed", a.seed, "phantom seed (overrides run.seed)");
    cmd->add_flag("--quiet", a.quiet, "suppress progress lines");
}

ExperimentConfig load_config(const CommonArgs& a) {
    ExperimentConfig cfg;
    if (!a.config_path.empty()) cfg = parse_config(a.config_path);
    if (a.seed) cfg.seed = *a.seed;
    if (!a.out_dir.empty()) cfg.out_dir = a.out_dir;
    return cfg;
}

std::string out_file(const ExperimentConfig& cfg, const char* name) {
    std::filesystem::create_directories(cfg.out_dir);
    return (std::filesystem::path(cfg.out_dir) / name).string();
}

TraceOptions trace_of(const ExperimentConfig& cfg) {
    TraceOptions t;
    t.dt = cfg.step;
    return t;
}

int cmd_forward(const CommonArgs& a) {
    const ExperimentConfig cfg = load_config(a);
    const PhantomSet ps = phantom_gen(cfg);
    const FanPtr fan = make_fan_ptr(ps.metric, Domain::M1, cfg.n_beta, cfg.n_alpha);
    const FanData data = forward_pair(ps.metric, *ps.pair_a, ps.h, fan, trace_of(cfg));
    save_pair_csv(out_file(cfg, "phantom.csv"), ps.h);
    save_fan_csv(out_file(cfg, "forward.csv"), data, ps.metric, cfg.step);
    if (!a.quiet)
        std::cout << "forward transform written: " << out_file(cfg, "forward.csv")
                  << " (pair C3 norm " << ps.pair_c3 << ")\n";
    return 0;
}

int cmd_scatter(const CommonArgs& a) {
    const ExperimentConfig cfg = load_config(a);
    const PhantomSet ps = phantom_gen(cfg);
    const FanPtr fan = make_fan_ptr(ps.metric, Domain::M, cfg.n_beta, cfg.n_alpha);
    const FanData ca = scattering_data(ps.metric, *ps.pair_a, fan, trace_of(cfg));
    save_fan_csv(out_file(cfg, "scatter_a.csv"), ca, ps.metric, cfg.step);
    if (ps.pair_b) {
        const FanData cb = scattering_data(ps.metric, *ps.pair_b, fan, trace_of(cfg));
        save_fan_csv(out_file(cfg, "scatter_b.csv"), cb, ps.metric, cfg.step);
        const FanData sino = pseudolin_sinogram(ca, cb);
        save_fan_csv(out_file(cfg, "pseudolin.csv"), sino, ps.metric, cfg.step);
    }
    if (!a.quiet) std::cout << "scattering data written to " << cfg.out_dir << "\n";
    return 0;
}

int cmd_decompose(const CommonArgs& a) {
    const ExperimentConfig cfg = load_config(a);
    const PhantomSet ps = phantom_gen(cfg);
    const Decomposition dec = split(ps.metric, *ps.pair_a, ps.h);
    save_pair_csv(out_file(cfg, "solenoidal.csv"), dec.h_s);
    save_field_csv(out_file(cfg, "potential.csv"), dec.p);
    if (!a.quiet)
        std::cout << "decomposition written to " << cfg.out_dir
                  << " (interior divergence residual " << dec.residual_delta << ")\n";
    return 0;
}

int cmd_reconstruct(const CommonArgs& a) {
    const ExperimentConfig cfg = load_config(a);
    const PhantomSet ps = phantom_gen(cfg);
    const FanPtr fan = make_fan_ptr(ps.metric, Domain::M1, cfg.n_beta, cfg.n_alpha);
    const TraceOptions topt = trace_of(cfg);
    const FanData data = forward_pair(ps.metric, *ps.pair_a, ps.h, fan, topt);
    const GridPtr grid = make_grid(cfg.n_r, cfg.n_theta, ps.metric.r_core);
    ReconstructOptions ropt;
    ropt.max_iter = cfg.max_iter;
    ropt.tol = cfg.tol;
    ropt.trace = topt;
    const ReconstructionResult rec = linear_reconstruct(*ps.pair_a, ps.metric, data, grid, ropt);
    save_pair_csv(out_file(cfg, "reconstruction.csv"), rec.h);
    {
        std::ofstream os(out_file(cfg, "residuals.csv"));
        os << "iteration,residual\n";
        char b[40];
        for (std::size_t i = 0; i < rec.residuals.size(); ++i) {
            std::snprintf(b, sizeof(b), "%.17g", rec.residuals[i]);
            os << i + 1 << "," << b << "\n";
        }
    }
    if (!a.quiet) {
        const double hn = pair_l2_norm(ps.metric, ps.h);
        const double err = hn > 0.0 ? pair_l2_norm(ps.metric, rec.h - ps.h) / hn : 0.0;
        std::cout << "reconstruction written after " << rec.iterations
                  << " iterations, phantom relative error " << err
                  << (rec.stagnated ? " (stagnated)" : "") << "\n";
    }
    return 0;
}

int cmd_experiment(const CommonArgs& a, const std::string& name) {
    ExperimentConfig cfg = load_config(a);
    if (!name.empty()) cfg.experiment = name;
    return run_experiment_main(cfg, std::cout, a.quiet);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"attenuated ray transforms of connection pairs on a disk"};
    app.require_subcommand(1);

    CommonArgs fwd_a, sc_a, dec_a, rec_a, exp_a;
    std::string exp_name;

    CLI::App* fwd = app.add_subcommand("forward", "transform a seeded phantom pair field");
    add_common(fwd, fwd_a);
    CLI::App* sc = app.add_subcommand("scatter", "nonlinear scattering data of the seeded pair(s)");
    add_common(sc, sc_a);
    CLI::App* dec = app.add_subcommand("decompose", "potential/solenoidal splitting of the phantom");
    add_common(dec, dec_a);
    CLI::App* rec = app.add_subcommand("reconstruct", "iterative inversion of phantom data");
    add_common(rec, rec_a);
    CLI::App* exp = app.add_subcommand("experiment", "run named verification experiments");
    add_common(exp, exp_a);
    exp->add_option("name", exp_name, "experiment name (default: run.experiment or all)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 3;
    }

    try {
        if (fwd->parsed()) return cmd_forward(fwd_a);
        if (sc->parsed()) return cmd_scatter(sc_a);
        if (dec->parsed()) return cmd_decompose(dec_a);
        if (rec->parsed()) return cmd_reconstruct(rec_a);
        if (exp->parsed()) return cmd_experiment(exp_a, exp_name);
    } catch (const paratomo::ParseError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 3;
    } catch (const paratomo::ValidationError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 3;
    } catch (const paratomo::SchemaError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 3;
    } catch (const paratomo::Error& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "failure: " << e.what() << "\n";
        return 4;
    }
    return 0;
}
