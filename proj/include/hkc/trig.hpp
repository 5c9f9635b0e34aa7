#pragma once

// Exact calculus on separable trigonometric monomials
//   coef * T1(k1 a x1) * T3(b x3),  T in {sin, cos},
// integrated over x1 in [0, 2 pi / k1) and x3 in [0, pi].

#include <array>
#include <complex>
#include <utility>
#include <vector>

#include "core_types.hpp"

namespace hkc::trig {

enum class Fn { Sin, Cos };

struct Term {
    double coef = 0.0;
    Fn f1 = Fn::Cos;
    int a = 0;
    Fn f3 = Fn::Cos;
    int b = 0;
};

using Poly = std::vector<Term>;
using VecPoly = std::array<Poly, 3>;

inline double eval_fn(Fn f, double arg) { return f == Fn::Sin ? std::sin(arg) : std::cos(arg); }

inline double eval(const Poly& p, double x1, double x3, double k1)
{
    double s = 0.0;
    for (const auto& t : p) s += t.coef * eval_fn(t.f1, k1 * t.a * x1) * eval_fn(t.f3, t.b * x3);
    return s;
}

inline Poly d1(const Poly& p, double k1)
{
    Poly out;
    for (const auto& t : p) {
        if (t.a == 0) continue;
        Term r = t;
        r.coef = (t.f1 == Fn::Sin ? 1.0 : -1.0) * k1 * t.a * t.coef;
        r.f1 = t.f1 == Fn::Sin ? Fn::Cos : Fn::Sin;
        out.push_back(r);
    }
    return out;
}

inline Poly d3(const Poly& p)
{
    Poly out;
    for (const auto& t : p) {
        if (t.b == 0) continue;
        Term r = t;
        r.coef = (t.f3 == Fn::Sin ? 1.0 : -1.0) * t.b * t.coef;
        r.f3 = t.f3 == Fn::Sin ? Fn::Cos : Fn::Sin;
        out.push_back(r);
    }
    return out;
}

inline Poly scaled(Poly p, double s)
{
    for (auto& t : p) t.coef *= s;
    return p;
}

inline Poly sum(Poly a, const Poly& b)
{
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

namespace detail {

using Spectrum = std::vector<std::pair<int, std::complex<double>>>;

inline Spectrum times(const Spectrum& s, Fn f, int freq)
{
    using namespace std::complex_literals;
    const std::complex<double> plus = f == Fn::Cos ? 0.5 + 0.0i : -0.5i;
    const std::complex<double> minus = f == Fn::Cos ? 0.5 + 0.0i : 0.5i;
    Spectrum out;
    out.reserve(2 * s.size());
    for (const auto& [k, c] : s) {
        out.emplace_back(k + freq, c * plus);
        out.emplace_back(k - freq, c * minus);
    }
    return out;
}

/// Integral over [0, 2 pi) in the scaled variable y = k1 x1.
inline double periodic(const Spectrum& s)
{
    std::complex<double> acc = 0.0;
    for (const auto& [k, c] : s)
        if (k == 0) acc += c;
    return 2.0 * pi * acc.real();
}

/// Integral over [0, pi].
inline double half_period(const Spectrum& s)
{
    using namespace std::complex_literals;
    std::complex<double> acc = 0.0;
    for (const auto& [k, c] : s) {
        if (k == 0)
            acc += c * pi;
        else
            acc += c * (double(sign_pow(k)) - 1.0) / (1.0i * double(k));
    }
    return acc.real();
}

} // namespace detail

/// Exact volume integral of a product of monomials.
inline double integrate_product(const std::vector<const Term*>& factors, double k1)
{
    detail::Spectrum s1{{0, 1.0}}, s3{{0, 1.0}};
    double coef = 1.0;
    for (const Term* t : factors) {
        coef *= t->coef;
        s1 = detail::times(s1, t->f1, t->a);
        s3 = detail::times(s3, t->f3, t->b);
    }
    if (coef == 0.0) return 0.0;
    return coef * detail::periodic(s1) / k1 * detail::half_period(s3);
}

/// <p>
inline double integrate(const Poly& p, double k1)
{
    double s = 0.0;
    for (const auto& t : p) s += integrate_product({&t}, k1);
    return s;
}

/// <p q>
inline double integrate(const Poly& p, const Poly& q, double k1)
{
    double s = 0.0;
    for (const auto& t : p)
        for (const auto& u : q) s += integrate_product({&t, &u}, k1);
    return s;
}

/// <p q r>
inline double integrate(const Poly& p, const Poly& q, const Poly& r, double k1)
{
    double s = 0.0;
    for (const auto& t : p)
        for (const auto& u : q)
            for (const auto& v : r) s += integrate_product({&t, &u, &v}, k1);
    return s;
}

} // namespace hkc::trig
