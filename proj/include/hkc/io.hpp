#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "diagnostics.hpp"
#include "dynamics.hpp"
#include "integrator.hpp"
#include "model_spec.hpp"
#include "stability.hpp"

namespace hkc::io {

using nlohmann::ordered_json;

inline std::string fmt(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline ordered_json to_json(const ModelSpec& s)
{
    auto waves = [](const std::vector<WaveVector>& v) {
        ordered_json a = ordered_json::array();
        for (auto m : v) a.push_back({m.m1, m.m3});
        return a;
    };
    ordered_json j;
    j["M"] = s.M;
    j["u"] = waves(s.u);
    j["w"] = waves(s.w);
    j["theta"] = waves(s.theta);
    ordered_json lay = ordered_json::array();
    for (std::size_t i = 0; i < s.layout.size(); ++i) {
        const auto& n = s.layout[i];
        ordered_json e;
        e["kind"] = kind_name(n.kind);
        e["m"] = {n.m.m1, n.m.m3};
        e["p1"] = n.p1;
        e["slot"] = i;
        lay.push_back(e);
    }
    j["layout"] = lay;
    return j;
}

/// Rebuilds through make_spec and rejects files whose layout disagrees with it.
inline ModelSpec spec_from_json(const ordered_json& j)
{
    auto waves = [&](const char* key) {
        std::vector<WaveVector> v;
        for (const auto& e : j.at(key)) {
            if (!e.is_array() || e.size() != 2) throw std::invalid_argument("bad wave vector");
            v.push_back({e[0].get<int>(), e[1].get<int>()});
        }
        return v;
    };
    auto s = make_spec(j.at("M").get<int>(), waves("u"), waves("w"), waves("theta"));
    if (j.contains("layout")) {
        const auto& lay = j.at("layout");
        if (lay.size() != s.layout.size()) throw std::invalid_argument("layout size mismatch");
        for (std::size_t i = 0; i < lay.size(); ++i) {
            const auto& n = s.layout[i];
            const auto& e = lay[i];
            if (e.at("kind").get<std::string>() != kind_name(n.kind) ||
                e.at("m")[0].get<int>() != n.m.m1 || e.at("m")[1].get<int>() != n.m.m3 ||
                e.at("p1").get<int>() != n.p1 || e.at("slot").get<std::size_t>() != i)
                throw std::invalid_argument("layout entry " + std::to_string(i) +
                                            " disagrees with the canonical layout");
        }
    }
    return s;
}

inline void write_spec(const ModelSpec& s, const std::string& path)
{
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << to_json(s).dump(2) << "\n";
}

inline ModelSpec read_spec(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    return spec_from_json(ordered_json::parse(in));
}

inline std::string trajectory_header(const ModelSpec& s)
{
    std::string h = "t";
    for (const auto& n : s.layout) h += "," + n.label();
    return h;
}

inline void write_trajectory_row(std::ostream& out, double t, const State& x)
{
    out << fmt(t);
    for (Eigen::Index i = 0; i < x.size(); ++i) out << ',' << fmt(x[i]);
    out << '\n';
}

inline void write_trajectory_csv(const ModelSpec& s, const Trajectory& tr, std::ostream& out)
{
    out << trajectory_header(s) << '\n';
    for (std::size_t i = 0; i < tr.times.size(); ++i) write_trajectory_row(out, tr.times[i], tr.states[i]);
}

/** @brief A trajectory CSV as read back: slot labels plus samples. */
struct LoadedTrajectory {
    std::vector<std::string> labels;
    Trajectory traj;
};

/// Lines starting with '#' are banner comments and are skipped.
inline LoadedTrajectory read_trajectory_csv(std::istream& in)
{
    LoadedTrajectory lt;
    std::string line;
    bool header = false;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string c;
        while (std::getline(ss, c, ',')) cells.push_back(c);
        if (!header) {
            if (cells.empty() || cells[0] != "t") throw std::invalid_argument("trajectory CSV: missing header");
            lt.labels.assign(cells.begin() + 1, cells.end());
            header = true;
            continue;
        }
        if (cells.size() != lt.labels.size() + 1)
            throw std::invalid_argument("trajectory CSV: ragged row");
        lt.traj.times.push_back(std::stod(cells[0]));
        State x(Eigen::Index(lt.labels.size()));
        for (std::size_t i = 0; i < lt.labels.size(); ++i) x[Eigen::Index(i)] = std::stod(cells[i + 1]);
        lt.traj.states.push_back(std::move(x));
    }
    if (!header) throw std::invalid_argument("trajectory CSV: empty file");
    return lt;
}

/// Reconstructs the spec implied by a trajectory's column labels.
inline ModelSpec spec_from_labels(const std::vector<std::string>& labels)
{
    std::vector<WaveVector> u, w, th;
    for (const auto& l : labels) {
        const auto a = l.find('_'), b = l.rfind('_');
        if (a == std::string::npos || a == b) throw std::invalid_argument("bad slot label " + l);
        const std::string k = l.substr(0, a);
        const WaveVector m{std::stoi(l.substr(a + 1, b - a - 1)), std::stoi(l.substr(b + 1))};
        if (k == "u") u.push_back(m);
        else if (k == "w") w.push_back(m);
        else if (k == "th") th.push_back(m);
        else throw std::invalid_argument("bad slot label " + l);
    }
    auto s = make_spec(0, u, w, th);
    for (std::size_t i = 0; i < labels.size(); ++i)
        if (s.layout[i].label() != labels[i])
            throw std::invalid_argument("trajectory columns are not in canonical layout order");
    return s;
}

inline const char* diagnostics_header()
{
    return "t,kinetic,variance,potential,heat_flux,nu,res_kin,res_var,res_pot,res_vort1,res_vort2";
}

inline void write_diagnostics_csv(const CompiledModel& model, const Trajectory& tr, std::ostream& out)
{
    const auto fw = functional_weights(model.spec, model.params.k1());
    NusseltAccumulator acc(fw);
    out << diagnostics_header() << '\n';
    for (std::size_t i = 0; i < tr.times.size(); ++i) {
        const auto& x = tr.states[i];
        acc.add(tr.times[i], x);
        const auto f = energy_functionals(fw, x);
        const auto b = balance_at(model, fw, x);
        out << fmt(tr.times[i]) << ',' << fmt(f.kinetic) << ',' << fmt(f.variance) << ','
            << fmt(f.potential) << ',' << fmt(heat_flux(fw, x)) << ',' << fmt(acc.value()) << ','
            << fmt(b.kinetic.residual()) << ',' << fmt(b.variance.residual()) << ','
            << fmt(b.potential.residual()) << ',' << fmt(b.vorticity[0].residual()) << ','
            << fmt(b.vorticity[1].residual()) << '\n';
    }
}

/// Audit dump: one record per nonzero coefficient, in slot labels.
inline ordered_json coefficient_dump(const CompiledModel& model)
{
    ordered_json a = ordered_json::array();
    for (const auto& e : model.quad) {
        ordered_json r;
        r["out"] = model.spec.layout[e.i].label();
        r["adv"] = model.spec.layout[e.j].label();
        r["in"] = model.spec.layout[e.k].label();
        r["value"] = e.coeff;
        a.push_back(r);
    }
    return a;
}

inline const char* atlas_header() { return "m1,m3,R1,R2,Rc,S_threshold,crossing_type,n_unstable"; }

inline void write_stability_atlas(const Params& p, int max_shell, std::ostream& out)
{
    out << atlas_header() << '\n';
    for (int s = 2; s <= max_shell; ++s)
        for (int m1 = 1; m1 < s; ++m1) {
            const auto r = stability_report({m1, s - m1}, p);
            out << m1 << ',' << (s - m1) << ',' << fmt(r.R1) << ',' << fmt(r.R2) << ',' << fmt(r.Rc)
                << ',' << fmt(r.S_threshold) << ',' << crossing_name(r.crossing) << ','
                << r.n_unstable << '\n';
        }
}

} // namespace hkc::io
