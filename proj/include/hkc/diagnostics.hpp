#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "basis.hpp"
#include "dynamics.hpp"
#include "integrator.hpp"
#include "trig.hpp"

namespace hkc {

struct ScalarSeries {
    std::vector<double> times, values;
};

/** @brief Per-slot weights of every linear/quadratic functional the balances need. */
struct FunctionalWeights {
    struct Pair {
        int u, th;
        double coeff;
    };
    struct Quad2 {
        int comp, j, k;
        double value;
    };
    std::vector<Pair> heat_flux;          ///< <u3 theta> = sum coeff u th
    std::vector<double> grad_sq;          ///< |Km|^2 per slot
    std::vector<double> conduction;       ///< <(1 - x3/pi) f^n>, stratified theta only
    std::vector<double> conduction_lap;   ///< <(1 - x3/pi) d33 f^n>
    std::vector<double> nusselt;          ///< sqrt(k1) m3 / pi on stratified theta
    std::array<std::vector<double>, 2> vort_mean, vort_diff, shear_mean;
    std::vector<Quad2> vort_stretch;      ///< <(omega . grad) u>, components 1,2
    std::vector<int> u_slots, th_slots, strat_slots;
};

inline FunctionalWeights functional_weights(const ModelSpec& spec, double k1)
{
    FunctionalWeights fw;
    const int d = int(spec.dimension());
    fw.grad_sq.assign(d, 0.0);
    fw.conduction.assign(d, 0.0);
    fw.conduction_lap.assign(d, 0.0);
    fw.nusselt.assign(d, 0.0);
    for (auto& a : fw.vort_mean) a.assign(d, 0.0);
    for (auto& a : fw.vort_diff) a.assign(d, 0.0);
    for (auto& a : fw.shear_mean) a.assign(d, 0.0);

    std::vector<trig::VecPoly> v(d), curl(d);
    for (int s = 0; s < d; ++s) {
        const auto& n = spec.layout[s];
        fw.grad_sq[s] = km_norm_sq(n.m, k1);
        if (n.kind == Kind::Theta) {
            fw.th_slots.push_back(s);
            if (n.m.stratified()) {
                fw.strat_slots.push_back(s);
                fw.conduction[s] = 2.0 / (std::sqrt(k1) * n.m.m3);
                fw.conduction_lap[s] = -2.0 * n.m.m3 / std::sqrt(k1);
                fw.nusselt[s] = std::sqrt(k1) * n.m.m3 / pi;
            }
            if (n.m.m1 > 0) {
                if (auto u = spec.slot(Kind::U, n.m))
                    fw.heat_flux.push_back(
                        {int(*u), s, sign_pow(n.p1) * k1 * n.m.m1 / km_norm(n.m, k1)});
            }
            continue;
        }
        fw.u_slots.push_back(s);
        v[s] = velocity_poly(n, k1);
        // omega = (-d3 v2, d3 v1 - d1 v3, d1 v2)
        curl[s][0] = trig::scaled(trig::d3(v[s][1]), -1.0);
        curl[s][1] = trig::sum(trig::d3(v[s][0]), trig::scaled(trig::d1(v[s][2], k1), -1.0));
        curl[s][2] = trig::d1(v[s][1], k1);
        for (int c = 0; c < 2; ++c) {
            fw.vort_mean[c][s] = trig::integrate(curl[s][c], k1);
            fw.vort_diff[c][s] = trig::integrate(trig::d3(trig::d3(curl[s][c])), k1);
            fw.shear_mean[c][s] = trig::integrate(trig::d3(v[s][c]), k1);
        }
    }
    // (omega^j . grad) v^k = omega1 d1 v^k + omega3 d3 v^k; x1-means vanish unless m1 agree.
    for (int j : fw.u_slots)
        for (int k : fw.u_slots) {
            if (spec.layout[j].m.m1 != spec.layout[k].m.m1) continue;
            for (int c = 0; c < 2; ++c) {
                const double val = trig::integrate(curl[j][0], trig::d1(v[k][c], k1), k1) +
                                   trig::integrate(curl[j][2], trig::d3(v[k][c]), k1);
                if (std::abs(val) > 1e-15) fw.vort_stretch.push_back({c, j, k, val});
            }
        }
    return fw;
}

struct Functionals {
    double kinetic = 0, variance = 0, potential = 0, heat_flux = 0;
    std::array<double, 2> vorticity_mean{0, 0};
};

inline double heat_flux(const FunctionalWeights& fw, const State& x)
{
    double s = 0.0;
    for (const auto& p : fw.heat_flux) s += p.coeff * x[p.u] * x[p.th];
    return s;
}

inline Functionals energy_functionals(const FunctionalWeights& fw, const State& x)
{
    Functionals f;
    for (int s : fw.u_slots) f.kinetic += 0.5 * x[s] * x[s];
    for (int s : fw.th_slots) f.variance += 0.5 * x[s] * x[s];
    for (int s : fw.strat_slots) f.potential += fw.conduction[s] * x[s];
    f.heat_flux = heat_flux(fw, x);
    for (int c = 0; c < 2; ++c)
        for (int s : fw.u_slots) f.vorticity_mean[c] += fw.vort_mean[c][s] * x[s];
    return f;
}

inline Functionals energy_functionals(const ModelSpec& spec, const State& x, const Params& p)
{
    if (std::size_t(x.size()) != spec.dimension()) throw std::invalid_argument("state mismatch");
    return energy_functionals(functional_weights(spec, p.k1()), x);
}

/** @brief Both sides of one balance at one state. */
struct BalanceTerm {
    double lhs = 0, rhs = 0, scale = 0;
    double residual() const { return std::abs(lhs - rhs); }
    double relative() const { return scale > 0 ? residual() / scale : residual(); }
};

struct BalanceAt {
    BalanceTerm kinetic, variance, potential;
    std::array<BalanceTerm, 2> vorticity;
};

/// d/dt of each functional via its gradient dotted with rhs, against the analytic right sides.
inline BalanceAt balance_at(const CompiledModel& model, const FunctionalWeights& fw, const State& x)
{
    const double P = model.params.P(), R = model.params.R(), S = model.params.S();
    const State f = model.rhs(x);
    const double hf = heat_flux(fw, x);
    BalanceAt b;

    double diss = 0.0;
    for (int s : fw.u_slots) {
        b.kinetic.lhs += x[s] * f[s];
        diss += fw.grad_sq[s] * x[s] * x[s];
    }
    b.kinetic.rhs = -P * diss + P * R * hf;
    b.kinetic.scale = std::abs(b.kinetic.lhs) + P * diss + P * R * std::abs(hf);

    diss = 0.0;
    for (int s : fw.th_slots) {
        b.variance.lhs += x[s] * f[s];
        diss += fw.grad_sq[s] * x[s] * x[s];
    }
    b.variance.rhs = -diss + hf;
    b.variance.scale = std::abs(b.variance.lhs) + diss + std::abs(hf);

    double lap = 0.0, lap_abs = 0.0, lhs_abs = 0.0;
    for (int s : fw.strat_slots) {
        b.potential.lhs += fw.conduction[s] * f[s];
        lhs_abs += std::abs(fw.conduction[s] * f[s]);
        lap += fw.conduction_lap[s] * x[s];
        lap_abs += std::abs(fw.conduction_lap[s] * x[s]);
    }
    b.potential.rhs = lap - hf / pi;
    b.potential.scale = lhs_abs + lap_abs + std::abs(hf) / pi;

    for (int c = 0; c < 2; ++c) {
        auto& t = b.vorticity[c];
        double lin = 0.0, cor = 0.0, sc = 0.0;
        for (int s : fw.u_slots) {
            t.lhs += fw.vort_mean[c][s] * f[s];
            sc += std::abs(fw.vort_mean[c][s] * f[s]);
            lin += P * fw.vort_diff[c][s] * x[s];
            cor += P * S * fw.shear_mean[c][s] * x[s];
            sc += std::abs(P * fw.vort_diff[c][s] * x[s]) + std::abs(P * S * fw.shear_mean[c][s] * x[s]);
        }
        double st = 0.0;
        for (const auto& q : fw.vort_stretch)
            if (q.comp == c) {
                st += q.value * x[q.j] * x[q.k];
                sc += std::abs(q.value * x[q.j] * x[q.k]);
            }
        t.rhs = lin + st + cor;
        t.scale = sc;
    }
    return b;
}

/** @brief Absolute residual series of the five balances along a trajectory. */
struct BalanceResiduals {
    ScalarSeries kinetic, variance, potential, vorticity_x, vorticity_y;
    double max_relative_kinetic = 0, max_relative_variance = 0, max_relative_potential = 0,
           max_relative_vorticity = 0;
};

inline BalanceResiduals balance_residuals(const CompiledModel& model, const Trajectory& traj)
{
    const auto fw = functional_weights(model.spec, model.params.k1());
    BalanceResiduals r;
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        const auto b = balance_at(model, fw, traj.states[i]);
        const double t = traj.times[i];
        auto push = [t](ScalarSeries& s, double v) {
            s.times.push_back(t);
            s.values.push_back(v);
        };
        push(r.kinetic, b.kinetic.residual());
        push(r.variance, b.variance.residual());
        push(r.potential, b.potential.residual());
        push(r.vorticity_x, b.vorticity[0].residual());
        push(r.vorticity_y, b.vorticity[1].residual());
        r.max_relative_kinetic = std::max(r.max_relative_kinetic, b.kinetic.relative());
        r.max_relative_variance = std::max(r.max_relative_variance, b.variance.relative());
        r.max_relative_potential = std::max(r.max_relative_potential, b.potential.relative());
        r.max_relative_vorticity = std::max(
            {r.max_relative_vorticity, b.vorticity[0].relative(), b.vorticity[1].relative()});
    }
    return r;
}

/** @brief Running trapezoidal time integral of the stratified temperature modes. */
class NusseltAccumulator {
public:
    explicit NusseltAccumulator(const FunctionalWeights& fw) : fw_(&fw) {}

    double integrand(const State& x) const
    {
        double g = 0.0;
        for (int s : fw_->strat_slots) g += fw_->nusselt[s] * x[s];
        return g;
    }

    void add(double t, const State& x)
    {
        const double g = integrand(x);
        if (started_) integral_ += 0.5 * (t - t_prev_) * (g + g_prev_);
        else t0_ = t;
        started_ = true;
        t_prev_ = t;
        g_prev_ = g;
    }

    /// Nu(t) = 1 - (1/t) int_0^t g; equals 1 before any time has elapsed.
    double value() const
    {
        const double span = t_prev_ - t0_;
        return span > 0 ? 1.0 - integral_ / span : 1.0;
    }

    double time() const { return t_prev_; }

private:
    const FunctionalWeights* fw_;
    bool started_ = false;
    double t0_ = 0, t_prev_ = 0, g_prev_ = 0, integral_ = 0;
};

inline ScalarSeries nusselt_series(const Trajectory& traj, const ModelSpec& spec, double k1)
{
    if (traj.times.empty()) throw std::invalid_argument("nusselt_series: empty trajectory");
    const auto fw = functional_weights(spec, k1);
    NusseltAccumulator acc(fw);
    ScalarSeries s;
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        acc.add(traj.times[i], traj.states[i]);
        s.times.push_back(traj.times[i]);
        s.values.push_back(acc.value());
    }
    return s;
}

/// Nusselt number from the time-mean heat flux, 1 + (k1 / 2 pi^2) mean <u3 theta>.
inline double nusselt_from_heat_flux(const Trajectory& traj, const ModelSpec& spec, double k1)
{
    const auto fw = functional_weights(spec, k1);
    const auto& t = traj.times;
    if (t.size() < 2) return 1.0 + k1 / (2 * pi * pi) * heat_flux(fw, traj.states.front());
    double acc = 0.0;
    for (std::size_t i = 1; i < t.size(); ++i)
        acc += 0.5 * (t[i] - t[i - 1]) *
               (heat_flux(fw, traj.states[i]) + heat_flux(fw, traj.states[i - 1]));
    return 1.0 + k1 / (2 * pi * pi) * acc / (t.back() - t.front());
}

/// Sample stddev of the second half of the window <= threshold * |final value|.
inline bool converged(const ScalarSeries& nu, double threshold = 0.02)
{
    if (nu.values.size() < 4) throw std::invalid_argument("converged: need at least 4 samples");
    const double mid = nu.times.front() + 0.5 * (nu.times.back() - nu.times.front());
    double sum = 0.0, sq = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < nu.values.size(); ++i)
        if (nu.times[i] >= mid) {
            sum += nu.values[i];
            ++n;
        }
    if (n < 2) return false;
    const double mean = sum / double(n);
    for (std::size_t i = 0; i < nu.values.size(); ++i)
        if (nu.times[i] >= mid) sq += (nu.values[i] - mean) * (nu.values[i] - mean);
    const double sd = std::sqrt(sq / double(n - 1));
    return sd <= threshold * std::abs(nu.values.back());
}

struct LyapunovBall {
    double weighted_h0 = 0, weighted_h1_deficit = 0, rho_sq = 0;
};

inline double rho_squared(const ModelSpec& spec, double k1)
{
    int n = 0;
    for (auto m : spec.theta) n += m.stratified() ? 1 : 0;
    return 4.0 * pi * pi / k1 * n;
}

/// 1/2 <|u|^2/(PR) + (theta + 2 pi l)^2> and <|grad u|^2/R + |grad(theta + pi l)|^2> - rho^2.
inline LyapunovBall lyapunov_ball(const ModelSpec& spec, const State& x, const Params& p)
{
    if (!check_energy_criterion(spec).energy_ok)
        throw std::invalid_argument("lyapunov_ball: spec is energy-inconsistent");
    if (!(p.R() > 0)) throw std::invalid_argument("lyapunov_ball: requires R > 0");
    const auto fw = functional_weights(spec, p.k1());
    LyapunovBall b;
    b.rho_sq = rho_squared(spec, p.k1());
    double h0 = 0.0, h1 = 0.0;
    for (int s : fw.u_slots) {
        h0 += x[s] * x[s] / (p.P() * p.R());
        h1 += fw.grad_sq[s] * x[s] * x[s] / p.R();
    }
    for (int s : fw.th_slots) {
        const double a = x[s] + 2.0 * pi * fw.conduction[s];
        const double c = x[s] + pi * fw.conduction[s];
        h0 += a * a;
        h1 += fw.grad_sq[s] * c * c;
    }
    b.weighted_h0 = 0.5 * h0;
    b.weighted_h1_deficit = h1 - b.rho_sq;
    return b;
}

} // namespace hkc
