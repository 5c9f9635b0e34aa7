#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "dynamics.hpp"

namespace hkc {

struct IntegratorConfig {
    double rel_tol = 1e-10;
    double abs_tol = 1e-10;
    double dt_init = 1e-3;
    double dt_min = 1e-12;
    double dt_max = 1.0;
    double t_final = 10.0;
    int sample_stride = 1;        ///< keep every k-th accepted step
    double blowup_norm = 1e10;    ///< max-norm treated as divergence

    void validate() const
    {
        if (!(rel_tol > 0) || !(abs_tol > 0)) throw std::invalid_argument("tolerances must be > 0");
        if (!(dt_min > 0) || !(dt_min <= dt_init) || !(dt_init <= dt_max))
            throw std::invalid_argument("require 0 < dt_min <= dt_init <= dt_max");
        if (sample_stride < 1) throw std::invalid_argument("sample_stride must be >= 1");
    }
};

class IntegrationError : public std::runtime_error {
public:
    enum class Reason { BlowUp, Stiffness };
    IntegrationError(Reason r, double t, State last, const std::string& what)
        : std::runtime_error(what), reason(r), t(t), last_state(std::move(last))
    {
    }
    Reason reason;
    double t;
    State last_state;
};

struct Trajectory {
    std::vector<double> times;
    std::vector<State> states;
    long accepted = 0;
    long rejected = 0;
};

/// Dormand-Prince 5(4) tableau.
namespace dopri {
inline constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
inline constexpr double a21 = 1.0 / 5;
inline constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
inline constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
inline constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                        a54 = -212.0 / 729;
inline constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                        a64 = 49.0 / 176, a65 = -5103.0 / 18656;
inline constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                        b6 = 11.0 / 84;
// b - b_hat (fifth minus fourth order weights)
inline constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                        e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
} // namespace dopri

struct StepResult {
    State x_next;
    State error;  ///< raw difference of the embedded solutions
    State f_next; ///< rhs at x_next (first stage of the next step)
};

template <class Rhs>
StepResult step_embedded(Rhs&& f, const State& x, const State& k1, double dt)
{
    using namespace dopri;
    if (!(dt > 0)) throw std::invalid_argument("step_embedded: dt must be > 0");
    const auto n = x.size();
    State k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), y(n);
    y = x + dt * a21 * k1;
    f(y, k2);
    y = x + dt * (a31 * k1 + a32 * k2);
    f(y, k3);
    y = x + dt * (a41 * k1 + a42 * k2 + a43 * k3);
    f(y, k4);
    y = x + dt * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
    f(y, k5);
    y = x + dt * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
    f(y, k6);
    StepResult r;
    r.x_next = x + dt * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    r.f_next.resize(n);
    f(r.x_next, r.f_next);
    k7 = r.f_next;
    r.error = dt * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    return r;
}

inline StepResult step_embedded(const CompiledModel& m, const State& x, double dt)
{
    auto f = [&](const State& y, State& out) { m.rhs(y, out); };
    State k1(x.size());
    f(x, k1);
    return step_embedded(f, x, k1, dt);
}

/** @brief Adaptive DP5(4) stepper with PI step-size control; resumable. */
class Stepper {
public:
    using Observer = std::function<void(double t, const State& x)>;

    Stepper(const CompiledModel& model, State x0, IntegratorConfig cfg, double t0 = 0.0)
        : model_(model), cfg_(cfg), t_(t0), x_(std::move(x0)), h_(cfg.dt_init)
    {
        cfg_.validate();
        model_.check(x_);
        f_.resize(x_.size());
        model_.rhs(x_, f_);
    }

    double t() const { return t_; }
    const State& x() const { return x_; }
    long accepted() const { return accepted_; }
    long rejected() const { return rejected_; }

    /// Advances to t_end, calling obs after every accepted step.
    void advance_to(double t_end, const Observer& obs = {})
    {
        constexpr double safety = 0.9, fac_min = 0.2, fac_max = 10.0, beta = 0.04,
                         alpha = 0.2 - 0.75 * beta;
        auto f = [&](const State& y, State& out) { model_.rhs(y, out); };
        while (t_ < t_end) {
            const bool last = t_ + h_ >= t_end;
            const double h = last ? t_end - t_ : h_;
            auto r = step_embedded(f, x_, f_, h);
            double err = 0.0;
            for (Eigen::Index i = 0; i < x_.size(); ++i) {
                const double sc =
                    cfg_.abs_tol + cfg_.rel_tol * std::max(std::abs(x_[i]), std::abs(r.x_next[i]));
                const double e = r.error[i] / sc;
                err += e * e;
            }
            err = std::sqrt(err / double(x_.size()));
            if (!std::isfinite(err) || !r.x_next.allFinite()) {
                if (h <= cfg_.dt_min) blowup();
                h_ = std::max(cfg_.dt_min, 0.2 * h);
                ++rejected_;
                continue;
            }
            if (err <= 1.0) {
                t_ = last ? t_end : t_ + h;
                x_ = std::move(r.x_next);
                f_ = std::move(r.f_next);
                ++accepted_;
                if (x_.lpNorm<Eigen::Infinity>() > cfg_.blowup_norm) blowup();
                double fac = err == 0.0 ? fac_max
                                        : safety * std::pow(err, -alpha) * std::pow(err_prev_, beta);
                fac = std::clamp(fac, fac_min, rejected_last_ ? 1.0 : fac_max);
                if (!last || fac < 1.0) h_ = std::min(cfg_.dt_max, (last ? h_ : h) * fac);
                err_prev_ = std::max(err, 1e-4);
                rejected_last_ = false;
                if (obs) obs(t_, x_);
            } else {
                const double fac = std::max(fac_min, safety * std::pow(err, -alpha));
                h_ = h * fac;
                ++rejected_;
                rejected_last_ = true;
                if (h_ < cfg_.dt_min)
                    throw IntegrationError(IntegrationError::Reason::Stiffness, t_, x_,
                                           "step size underflow below dt_min");
            }
        }
    }

private:
    [[noreturn]] void blowup() const
    {
        throw IntegrationError(IntegrationError::Reason::BlowUp, t_, x_,
                               "trajectory diverged (blow-up)");
    }

    const CompiledModel& model_;
    IntegratorConfig cfg_;
    double t_;
    State x_, f_;
    double h_;
    double err_prev_ = 1.0;
    bool rejected_last_ = false;
    long accepted_ = 0, rejected_ = 0;
};

/// Integrates from t=0 to cfg.t_final into tr, keeping every sample_stride-th accepted
/// step. On failure tr holds the samples gathered so far and the error propagates.
inline void integrate_into(const CompiledModel& model, const State& x0,
                           const IntegratorConfig& cfg, Trajectory& tr)
{
    if (!(cfg.t_final > 0)) throw std::invalid_argument("integrate: t_final must be > 0");
    Stepper st(model, x0, cfg);
    tr = Trajectory{};
    tr.times.push_back(0.0);
    tr.states.push_back(x0);
    long count = 0;
    try {
        st.advance_to(cfg.t_final, [&](double t, const State& x) {
            if (++count % cfg.sample_stride == 0 || t >= cfg.t_final) {
                tr.times.push_back(t);
                tr.states.push_back(x);
            }
        });
    } catch (IntegrationError&) {
        tr.accepted = st.accepted();
        tr.rejected = st.rejected();
        throw;
    }
    tr.accepted = st.accepted();
    tr.rejected = st.rejected();
}

inline Trajectory integrate(const CompiledModel& model, const State& x0, const IntegratorConfig& cfg)
{
    Trajectory tr;
    integrate_into(model, x0, cfg, tr);
    return tr;
}

} // namespace hkc
