// hkc: command-line front end for the HKC truncation hierarchy.
#include <CLI11.hpp>

#include <hkc/hkc.hpp>

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

namespace {

enum Exit { Ok = 0, Usage = 2, Numerical = 3, Criteria = 4 };

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

bool g_no_banner = false;

void banner(std::ostream& out, const std::string& cmd)
{
    if (g_no_banner) return;
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char ts[64];
    std::strftime(ts, sizeof ts, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    out << "# hkc " << cmd << " " << ts << "\n";
}

std::ofstream open_out(const std::string& path)
{
    std::ofstream out(path);
    if (!out) throw UsageError("cannot open output file " + path);
    return out;
}

void print_report(const hkc::CriteriaReport& r, std::ostream& os)
{
    os << "energy=" << (r.energy_ok ? "ok" : "FAIL") << " vorticity=" << (r.vorticity_ok ? "ok" : "FAIL")
       << " rotating_vorticity=" << (r.rotating_vorticity_ok ? "ok" : "FAIL")
       << " buoyancy=" << (r.buoyancy_ok ? "ok" : "FAIL") << "\n";
    for (const auto& v : r.violations)
        os << "  violation " << v.criterion << ": " << v.first.label() << " needs "
           << hkc::kind_name(v.required_kind) << "(" << v.required.m1 << "," << v.required.m3 << ")\n";
}

/** @brief R, S, P, k1 flags plus the atmospheric presets. */
struct ParamFlags {
    double R = 180.0, S = 0.0, P = 10.0, k1 = 1.0 / std::sqrt(2.0);
    std::string preset;
    CLI::Option *oR = nullptr, *oS = nullptr, *oP = nullptr;

    void add(CLI::App* app)
    {
        oR = app->add_option("--R", R, "Rayleigh number")->capture_default_str();
        oS = app->add_option("--S", S, "rotation number")->capture_default_str();
        oP = app->add_option("--P", P, "Prandtl number")->capture_default_str();
        app->add_option("--k1", k1, "horizontal wave number")->capture_default_str();
        app->add_option("--preset", preset, "troposphere-equator | troposphere-pole")
            ->check(CLI::IsMember({"troposphere-equator", "troposphere-pole"}));
    }

    hkc::Params resolve()
    {
        if (!preset.empty()) {
            std::cerr << "WARNING: preset " << preset
                      << " sets R~1e16; integration at these magnitudes is infeasible at desk scale\n";
            if (!oR->count()) R = 1e16;
            if (!oP->count()) P = 1.0;
            if (!oS->count()) S = preset == "troposphere-pole" ? 1e15 : 0.0;
        }
        try {
            return hkc::Params(R, S, P, k1);
        } catch (const std::exception& e) {
            throw UsageError(e.what());
        }
    }
};

hkc::CompiledModel load_model(const std::string& spec_path, int M, const hkc::Params& p,
                              bool allow_inconsistent)
{
    hkc::ModelSpec spec;
    try {
        spec = spec_path.empty() ? hkc::build_hkc(M) : hkc::io::read_spec(spec_path);
    } catch (const std::exception& e) {
        throw UsageError(e.what());
    }
    auto model = hkc::compile(spec, p, true);
    if (!model.report.all_ok()) {
        print_report(model.report, std::cerr);
        if (!allow_inconsistent) throw hkc::CriteriaError(model.report);
        std::cerr << "WARNING: running an inconsistent model (--allow-inconsistent)\n";
    }
    return model;
}

hkc::io::LoadedTrajectory load_trajectory(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open " + path);
    try {
        return hkc::io::read_trajectory_csv(in);
    } catch (const std::exception& e) {
        throw UsageError(e.what());
    }
}

int cmd_generate(int M, const std::string& out)
{
    if (M < 1) throw UsageError("M must be >= 1");
    const auto spec = hkc::build_hkc(M);
    hkc::io::write_spec(spec, out);
    std::cout << "dimension=" << spec.dimension() << "\n";
    const auto r = hkc::check_criteria(spec, true);
    print_report(r, std::cout);
    return r.all_ok() ? Ok : Criteria;
}

struct SimulateFlags {
    std::string spec, out = "trajectory.csv", diagnostics, coefficients;
    int M = 1;
    std::uint64_t seed = 1;
    double amplitude = 0.1;
    bool allow_inconsistent = false;
    hkc::IntegratorConfig ic{1e-10, 1e-10, 1e-3, 1e-12, 0.05, 50.0, 1, 1e10};
};

int cmd_simulate(SimulateFlags& f, ParamFlags& pf)
{
    if (!(f.ic.t_final > 0)) throw UsageError("--t-final must be > 0 (empty trajectory)");
    const auto p = pf.resolve();
    const auto model = load_model(f.spec, f.M, p, f.allow_inconsistent);
    const auto x0 = hkc::random_initial_condition(model.spec, hkc::replicate_key(f.seed, 0),
                                                  f.amplitude, p.k1());
    try {
        f.ic.validate();
    } catch (const std::exception& e) {
        throw UsageError(e.what());
    }
    hkc::Trajectory tr;
    int code = Ok;
    try {
        hkc::integrate_into(model, x0, f.ic, tr);
    } catch (const hkc::IntegrationError& e) {
        std::cerr << "numerical failure at t=" << e.t << ": " << e.what() << "\n";
        code = Numerical;
    }
    auto out = open_out(f.out);
    banner(out, "simulate");
    hkc::io::write_trajectory_csv(model.spec, tr, out);
    if (!f.diagnostics.empty()) {
        auto d = open_out(f.diagnostics);
        banner(d, "simulate");
        hkc::io::write_diagnostics_csv(model, tr, d);
    }
    if (!f.coefficients.empty()) open_out(f.coefficients) << hkc::io::coefficient_dump(model).dump(2) << "\n";
    std::cout << "dimension=" << model.dimension() << " samples=" << tr.times.size()
              << " accepted=" << tr.accepted << " rejected=" << tr.rejected << "\n";
    return code;
}

int cmd_nusselt(const std::string& path, double k1, double threshold, const std::string& series_out)
{
    const auto lt = load_trajectory(path);
    if (lt.traj.times.empty()) throw UsageError("trajectory has no samples");
    const auto spec = hkc::io::spec_from_labels(lt.labels);
    const auto nu = hkc::nusselt_series(lt.traj, spec, k1);
    if (!series_out.empty()) {
        auto out = open_out(series_out);
        banner(out, "nusselt");
        out << "t,nu\n";
        for (std::size_t i = 0; i < nu.times.size(); ++i)
            out << hkc::io::fmt(nu.times[i]) << ',' << hkc::io::fmt(nu.values[i]) << '\n';
    }
    std::cout << "nu_final=" << hkc::io::fmt(nu.values.back()) << "\n";
    std::cout << "nu_heat_flux=" << hkc::io::fmt(hkc::nusselt_from_heat_flux(lt.traj, spec, k1)) << "\n";
    if (nu.values.size() >= 4)
        std::cout << "converged=" << (hkc::converged(nu, threshold) ? "true" : "false") << "\n";
    else
        std::cout << "converged=false (fewer than 4 samples)\n";
    return Ok;
}

struct SweepFlags {
    std::string R = "50", S = "0", out = "sweep.csv", hist;
    int M = 1, ensemble = 1, max_extensions = 10, threads = 0;
    std::uint64_t seed = 1;
    double P = 10.0, k1 = 1.0 / std::sqrt(2.0), extension = 1000.0, amplitude = 0.1;
};

int cmd_sweep(const SweepFlags& f)
{
    hkc::SweepConfig cfg;
    try {
        cfg.R_values = hkc::parse_range(f.R);
        cfg.S_values = hkc::parse_range(f.S);
    } catch (const std::exception& e) {
        throw UsageError(e.what());
    }
    cfg.M = f.M;
    cfg.P = f.P;
    cfg.k1 = f.k1;
    cfg.ensemble = f.ensemble;
    cfg.seed = f.seed;
    cfg.extension = f.extension;
    cfg.max_extensions = f.max_extensions;
    cfg.amplitude = f.amplitude;
    cfg.threads = f.threads;
    try {
        cfg.validate();
        for (double R : cfg.R_values)
            for (double S : cfg.S_values) hkc::Params(R, S, cfg.P, cfg.k1);
    } catch (const std::exception& e) {
        throw UsageError(e.what());
    }
    auto out = open_out(f.out);
    banner(out, "sweep");
    out << hkc::sweep_csv_header() << "\n";
    const auto recs = hkc::run_sweep(cfg);
    std::vector<double> nus;
    for (const auto& r : recs) {
        out << hkc::format_sweep_row(r) << "\n";
        if (r.converged) nus.push_back(r.nu);
    }
    if (!f.hist.empty()) {
        auto h = open_out(f.hist);
        banner(h, "sweep");
        hkc::write_histogram_csv(hkc::bin_nusselt(nus), h);
    }
    std::cout << "records=" << recs.size() << "\n";
    return Ok;
}

int cmd_stability(ParamFlags& pf, int max_shell, const std::string& out_path)
{
    const auto p = pf.resolve();
    if (max_shell < 2) throw UsageError("--max-shell must be >= 2");
    auto out = open_out(out_path);
    banner(out, "stability");
    hkc::io::write_stability_atlas(p, max_shell, out);
    const int cap = std::max(max_shell, hkc::safe_shell_cap(p));
    std::cout << "unstable_dimension=" << hkc::unstable_dimension(p, cap) << "\n";
    std::cout << "hausdorff_constant=" << hkc::io::fmt(hkc::hausdorff_constant(p.P(), p.k1())) << "\n";
    std::cout << "hausdorff_bound=" << hkc::io::fmt(hkc::hausdorff_upper_bound(p)) << "\n";
    return Ok;
}

int cmd_field(const std::string& path, double time, const std::string& grid, double k1,
              const std::string& out_path)
{
    int n1 = 0, n3 = 0;
    char x = 0, extra = 0;
    if (std::sscanf(grid.c_str(), "%d%c%d%c", &n1, &x, &n3, &extra) != 3 || x != 'x')
        throw UsageError("--grid must look like 128x64");
    hkc::GridSpec g;
    try {
        g = hkc::GridSpec(n1, n3);
    } catch (const std::exception& e) {
        throw UsageError(e.what());
    }
    const auto lt = load_trajectory(path);
    const auto& ts = lt.traj.times;
    if (ts.empty() || time < ts.front() || time > ts.back())
        throw UsageError("--time outside the trajectory's range");
    const auto spec = hkc::io::spec_from_labels(lt.labels);
    std::size_t i = 0;
    while (i + 1 < ts.size() && ts[i + 1] <= time) ++i;
    hkc::State s = lt.traj.states[i];
    if (i + 1 < ts.size() && ts[i] < time) {
        const double w = (time - ts[i]) / (ts[i + 1] - ts[i]);
        s = (1 - w) * lt.traj.states[i] + w * lt.traj.states[i + 1];
    }
    const auto f = hkc::reconstruct_fields(spec, s, g, k1);
    hkc::write_field_csv(f, out_path);
    return Ok;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"HKC hierarchy of energetically consistent Boussinesq-Coriolis truncations"};
    app.require_subcommand(1);
    app.fallthrough();
    app.add_flag("--no-banner", g_no_banner, "omit the timestamp comment line in CSV outputs");

    int gen_M = 1;
    std::string gen_out = "model.json";
    auto* gen = app.add_subcommand("generate", "write the HKC-M spec as JSON");
    gen->add_option("-M", gen_M, "hierarchy level")->required();
    gen->add_option("-o", gen_out, "output JSON")->capture_default_str();

    SimulateFlags sf;
    ParamFlags sim_p;
    auto* sim = app.add_subcommand("simulate", "integrate one trajectory");
    sim_p.add(sim);
    auto* sim_spec = sim->add_option("--spec", sf.spec, "model spec JSON");
    sim->add_option("-M", sf.M, "hierarchy level")->excludes(sim_spec)->capture_default_str();
    sim->add_option("--t-final", sf.ic.t_final)->capture_default_str();
    sim->add_option("--rtol", sf.ic.rel_tol)->capture_default_str();
    sim->add_option("--atol", sf.ic.abs_tol)->capture_default_str();
    sim->add_option("--dt-init", sf.ic.dt_init)->capture_default_str();
    sim->add_option("--dt-max", sf.ic.dt_max)->capture_default_str();
    sim->add_option("--stride", sf.ic.sample_stride, "keep every k-th accepted step")->capture_default_str();
    sim->add_option("--seed", sf.seed)->capture_default_str();
    sim->add_option("--amplitude", sf.amplitude)->capture_default_str();
    sim->add_option("-o", sf.out, "trajectory CSV")->capture_default_str();
    sim->add_option("--diagnostics", sf.diagnostics, "diagnostics CSV");
    sim->add_option("--coefficients", sf.coefficients, "coefficient dump JSON");
    sim->add_flag("--allow-inconsistent", sf.allow_inconsistent);

    std::string nu_in, nu_series;
    double nu_k1 = 1.0 / std::sqrt(2.0), nu_thr = 0.02;
    auto* nus = app.add_subcommand("nusselt", "Nusselt series and convergence verdict");
    nus->add_option("trajectory", nu_in)->required();
    nus->add_option("--k1", nu_k1)->capture_default_str();
    nus->add_option("--threshold", nu_thr)->capture_default_str();
    nus->add_option("-o", nu_series, "Nu(t) CSV");

    SweepFlags swf;
    auto* sw = app.add_subcommand("sweep", "ensemble sweep over an (R, S) grid");
    sw->add_option("--R", swf.R, "range, e.g. 0:50:500")->capture_default_str();
    sw->add_option("--S", swf.S, "range, e.g. 0:50:300")->capture_default_str();
    sw->add_option("-M", swf.M)->capture_default_str();
    sw->add_option("--P", swf.P)->capture_default_str();
    sw->add_option("--k1", swf.k1)->capture_default_str();
    sw->add_option("--ensemble", swf.ensemble)->capture_default_str();
    sw->add_option("--seed", swf.seed)->capture_default_str();
    sw->add_option("--amplitude", swf.amplitude)->capture_default_str();
    sw->add_option("--extension", swf.extension, "time units per extension")->capture_default_str();
    sw->add_option("--max-extensions", swf.max_extensions)->capture_default_str();
    sw->add_option("--threads", swf.threads, "0 = HKC_THREADS or all cores")->capture_default_str();
    sw->add_option("-o", swf.out)->capture_default_str();
    sw->add_option("--hist", swf.hist, "Nusselt histogram CSV");

    ParamFlags st_p;
    int max_shell = 10;
    std::string st_out = "atlas.csv";
    auto* st = app.add_subcommand("stability", "stability atlas, unstable dimension, Hausdorff bound");
    st_p.add(st);
    st->add_option("--max-shell", max_shell)->capture_default_str();
    st->add_option("-o", st_out)->capture_default_str();

    std::string fd_in, fd_grid = "128x64", fd_out = "field.csv";
    double fd_time = 0.0, fd_k1 = 1.0 / std::sqrt(2.0);
    auto* fd = app.add_subcommand("field", "reconstruct physical fields at one time");
    fd->add_option("trajectory", fd_in)->required();
    fd->add_option("--time", fd_time)->required();
    fd->add_option("--grid", fd_grid)->capture_default_str();
    fd->add_option("--k1", fd_k1)->capture_default_str();
    fd->add_option("-o", fd_out)->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? Ok : Usage;
    }

    try {
        if (*gen) return cmd_generate(gen_M, gen_out);
        if (*sim) return cmd_simulate(sf, sim_p);
        if (*nus) return cmd_nusselt(nu_in, nu_k1, nu_thr, nu_series);
        if (*sw) return cmd_sweep(swf);
        if (*st) return cmd_stability(st_p, max_shell, st_out);
        if (*fd) return cmd_field(fd_in, fd_time, fd_grid, fd_k1, fd_out);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return Usage;
    } catch (const hkc::CriteriaError& e) {
        std::cerr << e.what() << "\n";
        return Criteria;
    } catch (const hkc::IntegrationError& e) {
        std::cerr << e.what() << "\n";
        return Numerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return Numerical;
    }
    return Usage;
}
