#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "core_types.hpp"
#include "hierarchy.hpp"
#include "interaction.hpp"
#include "model_spec.hpp"

namespace hkc {

using State = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// dX_i/dt gains coeff * X_j * X_k; j is always the advecting velocity slot.
struct QuadEntry {
    int i, j, k;
    double coeff;
};

class CriteriaError : public std::runtime_error {
public:
    explicit CriteriaError(CriteriaReport r)
        : std::runtime_error("model violates mode-selection criteria"), report(std::move(r))
    {
    }
    CriteriaReport report;
};

class NoConvergence : public std::runtime_error {
public:
    NoConvergence(const std::string& what, State last)
        : std::runtime_error(what), last_iterate(std::move(last))
    {
    }
    State last_iterate;
};

/** @brief ModelSpec + Params lowered to a dense linear part and a sparse quadratic part. */
struct CompiledModel {
    ModelSpec spec;
    Params params{0.0, 0.0, 1.0, 1.0};
    Matrix linear;
    std::vector<QuadEntry> quad;
    CriteriaReport report;

    int dimension() const { return int(spec.dimension()); }

    void rhs(const State& x, State& out) const
    {
        out.noalias() = linear * x;
        for (const auto& e : quad) out[e.i] += e.coeff * x[e.j] * x[e.k];
    }

    State rhs(const State& x) const
    {
        check(x);
        State out(x.size());
        rhs(x, out);
        return out;
    }

    /// Quadratic part only.
    State nonlinear(const State& x) const
    {
        check(x);
        State out = State::Zero(x.size());
        for (const auto& e : quad) out[e.i] += e.coeff * x[e.j] * x[e.k];
        return out;
    }

    Matrix jacobian(const State& x) const
    {
        check(x);
        Matrix J = linear;
        for (const auto& e : quad) {
            J(e.i, e.j) += e.coeff * x[e.k];
            J(e.i, e.k) += e.coeff * x[e.j];
        }
        return J;
    }

    void check(const State& x) const
    {
        if (x.size() != dimension()) throw std::invalid_argument("state dimension mismatch");
    }
};

inline CompiledModel compile(const ModelSpec& spec, const Params& params,
                             bool allow_inconsistent = false)
{
    CompiledModel cm;
    cm.spec = spec;
    cm.params = params;
    cm.report = check_criteria(spec, params.S() != 0.0);
    if (!cm.report.all_ok() && !allow_inconsistent) throw CriteriaError(cm.report);

    const int d = int(spec.dimension());
    const double k1 = params.k1();
    std::map<std::tuple<int, int, int>, int> where;
    for (int s = 0; s < d; ++s) {
        const auto& n = spec.layout[s];
        where[{int(n.kind), n.m.m1, n.m.m3}] = s;
    }
    auto find = [&](Kind k, int m1, int m3) {
        auto it = where.find({int(k), m1, m3});
        return it == where.end() ? -1 : it->second;
    };

    cm.linear = Matrix::Zero(d, d);
    for (int s = 0; s < d; ++s) {
        const auto& n = spec.layout[s];
        const auto lc = linear_couplings(n, params);
        cm.linear(s, s) = lc.diffusion;
        if (lc.buoyancy != 0.0) {
            const int b = find(lc.buoyancy_partner.kind, n.m.m1, n.m.m3);
            if (b >= 0) cm.linear(s, b) += lc.buoyancy;
        }
        if (lc.coriolis_partner && lc.coriolis != 0.0) {
            const int c = find(lc.coriolis_partner->kind, n.m.m1, n.m.m3);
            if (c >= 0) cm.linear(s, c) += lc.coriolis;
        }
    }

    for (int i = 0; i < d; ++i) {
        const auto& n = spec.layout[i];
        for (int j = 0; j < d; ++j) {
            const auto& a = spec.layout[j];
            if (a.kind != Kind::U) continue;
            std::set<std::pair<int, int>> cands;
            for (int b1 : {std::abs(n.m.m1 - a.m.m1), n.m.m1 + a.m.m1})
                for (int b3 : {std::abs(n.m.m3 - a.m.m3), n.m.m3 + a.m.m3}) cands.insert({b1, b3});
            for (auto [b1, b3] : cands) {
                const int k = find(n.kind, b1, b3);
                if (k < 0) continue;
                const double I = coefficient({n, a, spec.layout[k]}, k1);
                if (I != 0.0) cm.quad.push_back({i, j, k, -I});
            }
        }
    }
    return cm;
}

/// Newton iteration with dense LU; throws NoConvergence carrying the last iterate.
inline State find_equilibrium(const CompiledModel& model, State x, double tol = 1e-12,
                              int max_iter = 100)
{
    model.check(x);
    for (int it = 0; it <= max_iter; ++it) {
        const State f = model.rhs(x);
        if (!f.allFinite()) throw NoConvergence("find_equilibrium: non-finite residual", x);
        if (f.lpNorm<Eigen::Infinity>() <= tol) return x;
        if (it == max_iter) break;
        Eigen::PartialPivLU<Matrix> lu(model.jacobian(x));
        if (!(lu.rcond() > 1e-14)) throw NoConvergence("find_equilibrium: singular Jacobian", x);
        x -= lu.solve(f);
    }
    throw NoConvergence("find_equilibrium: max_iter exceeded", x);
}

} // namespace hkc
