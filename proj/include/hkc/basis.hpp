#pragma once

#include <array>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

#include "core_types.hpp"
#include "model_spec.hpp"
#include "trig.hpp"

namespace hkc {

using Vec3 = std::array<double, 3>;

/// Velocity basis field v^n as separable monomials, prefactors included.
inline trig::VecPoly velocity_poly(const ModeIndex& n, double k1)
{
    using trig::Fn;
    require_admissible(n);
    if (n.kind == Kind::Theta) throw std::domain_error("velocity_poly: theta index");
    const auto [m1, m3] = n.m;
    trig::VecPoly v;
    if (n.kind == Kind::U) {
        const double pref = normalizer_eta(n.m) / (km_norm(n.m, k1) * volume_factor(k1));
        if (n.p1 == 1) {
            if (m3 != 0) v[0].push_back({pref * m3, Fn::Sin, m1, Fn::Cos, m3});
            if (m1 != 0) v[2].push_back({-pref * k1 * m1, Fn::Cos, m1, Fn::Sin, m3});
        } else {
            if (m3 != 0) v[0].push_back({pref * m3, Fn::Cos, m1, Fn::Cos, m3});
            if (m1 != 0) v[2].push_back({pref * k1 * m1, Fn::Sin, m1, Fn::Sin, m3});
        }
    } else {
        const double pref = normalizer_eta(n.m) / volume_factor(k1);
        v[1].push_back({pref, n.p1 == 1 ? Fn::Sin : Fn::Cos, m1, Fn::Cos, m3});
    }
    return v;
}

inline trig::Poly theta_poly(const ModeIndex& n, double k1)
{
    using trig::Fn;
    require_admissible(n);
    if (n.kind != Kind::Theta) throw std::domain_error("theta_poly: velocity index");
    const double pref = normalizer_eta(n.m) / volume_factor(k1);
    return {{pref, n.p1 == 1 ? Fn::Cos : Fn::Sin, n.m.m1, Fn::Sin, n.m.m3}};
}

inline Vec3 eval_velocity_basis(const ModeIndex& n, double x1, double x3, double k1)
{
    const auto v = velocity_poly(n, k1);
    return {trig::eval(v[0], x1, x3, k1), trig::eval(v[1], x1, x3, k1),
            trig::eval(v[2], x1, x3, k1)};
}

inline double eval_theta_basis(const ModeIndex& n, double x1, double x3, double k1)
{
    return trig::eval(theta_poly(n, k1), x1, x3, k1);
}

/// Sum of coefficient times basis over the velocity slots of a layout.
template <class Vec>
trig::VecPoly state_velocity_poly(const std::vector<ModeIndex>& layout, const Vec& x, double k1)
{
    if (std::size_t(x.size()) != layout.size())
        throw std::invalid_argument("state length mismatch");
    trig::VecPoly out;
    for (std::size_t i = 0; i < layout.size(); ++i) {
        if (!layout[i].velocity()) continue;
        auto v = velocity_poly(layout[i], k1);
        for (int c = 0; c < 3; ++c) out[c] = trig::sum(out[c], trig::scaled(v[c], x[i]));
    }
    return out;
}

template <class Vec>
trig::Poly state_theta_poly(const std::vector<ModeIndex>& layout, const Vec& x, double k1)
{
    if (std::size_t(x.size()) != layout.size())
        throw std::invalid_argument("state length mismatch");
    trig::Poly out;
    for (std::size_t i = 0; i < layout.size(); ++i)
        if (layout[i].kind == Kind::Theta)
            out = trig::sum(out, trig::scaled(theta_poly(layout[i], k1), x[i]));
    return out;
}

/** @brief Uniform tensor grid: periodic in x1, endpoints included in x3. */
struct GridSpec {
    int n1 = 64;
    int n3 = 33;

    GridSpec() = default;
    GridSpec(int a, int b) : n1(a), n3(b)
    {
        if (n1 < 4 || n3 < 4) throw std::invalid_argument("GridSpec: n1, n3 must be >= 4");
    }

    double x1(int i, double k1) const { return i * (2.0 * pi / k1) / n1; }
    double x3(int j) const { return j * pi / (n3 - 1); }
    double w1(double k1) const { return (2.0 * pi / k1) / n1; }
    double w3(int j) const
    {
        const double h = pi / (n3 - 1);
        return (j == 0 || j == n3 - 1) ? 0.5 * h : h;
    }
};

/// Trapezoidal volume integral of f(x1, x3); exact for resolved trig polynomials
/// whose x3 dependence is even about both walls.
template <class F>
double quadrature(F&& f, const GridSpec& g, double k1)
{
    double s = 0.0;
    const double w1 = g.w1(k1);
    for (int j = 0; j < g.n3; ++j) {
        double row = 0.0;
        const double x3 = g.x3(j);
        for (int i = 0; i < g.n1; ++i) row += f(g.x1(i, k1), x3);
        s += g.w3(j) * w1 * row;
    }
    return s;
}

template <class A, class B>
double quadrature_inner_product(A&& a, B&& b, const GridSpec& g, double k1)
{
    return quadrature(
        [&](double x1, double x3) {
            const auto fa = a(x1, x3);
            const auto fb = b(x1, x3);
            if constexpr (std::is_arithmetic_v<std::decay_t<decltype(fa)>>)
                return double(fa * fb);
            else
                return fa[0] * fb[0] + fa[1] * fb[1] + fa[2] * fb[2];
        },
        g, k1);
}

/** @brief Physical fields on a grid, row-major in x3 then x1. */
struct FieldSnapshot {
    GridSpec grid;
    double k1 = 1.0;
    std::vector<double> u1, u2, u3, theta, T;

    std::size_t index(int i, int j) const { return std::size_t(j) * grid.n1 + i; }
};

template <class Vec>
FieldSnapshot reconstruct_fields(const ModelSpec& spec, const Vec& x, const GridSpec& grid,
                                 double k1)
{
    if (std::size_t(x.size()) != spec.dimension())
        throw std::invalid_argument("reconstruct_fields: state length mismatch");
    const auto v = state_velocity_poly(spec.layout, x, k1);
    const auto th = state_theta_poly(spec.layout, x, k1);
    FieldSnapshot f;
    f.grid = grid;
    f.k1 = k1;
    const std::size_t N = std::size_t(grid.n1) * grid.n3;
    for (auto* a : {&f.u1, &f.u2, &f.u3, &f.theta, &f.T}) a->assign(N, 0.0);
    for (int j = 0; j < grid.n3; ++j)
        for (int i = 0; i < grid.n1; ++i) {
            const double x1 = grid.x1(i, k1), x3 = grid.x3(j);
            const auto k = f.index(i, j);
            f.u1[k] = trig::eval(v[0], x1, x3, k1);
            f.u2[k] = trig::eval(v[1], x1, x3, k1);
            f.u3[k] = trig::eval(v[2], x1, x3, k1);
            f.theta[k] = trig::eval(th, x1, x3, k1);
            f.T[k] = 1.0 - x3 / pi + f.theta[k] / pi;
        }
    return f;
}

inline void write_field_csv(const FieldSnapshot& f, const std::string& path)
{
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << "x1,x3,u1,u2,u3,theta,T\n";
    char buf[512];
    for (int j = 0; j < f.grid.n3; ++j)
        for (int i = 0; i < f.grid.n1; ++i) {
            const auto k = f.index(i, j);
            std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                          f.grid.x1(i, f.k1), f.grid.x3(j), f.u1[k], f.u2[k], f.u3[k],
                          f.theta[k], f.T[k]);
            out << buf;
        }
}

} // namespace hkc
