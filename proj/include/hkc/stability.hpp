#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "core_types.hpp"

namespace hkc {

using cplx = std::complex<double>;

/// Linearization at the origin restricted to one wave vector.
struct OriginBlock {
    WaveVector m;
    Eigen::MatrixXd matrix; ///< rows/cols ordered (u, w, theta) over the modes present
};

inline OriginBlock origin_block(WaveVector m, const Params& p)
{
    if (m.is_zero() || m.m1 < 0 || m.m3 < 0) throw std::domain_error("origin_block: bad m");
    const double P = p.P(), R = p.R(), S = p.S(), k1 = p.k1();
    const double K2 = km_norm_sq(m, k1), K = std::sqrt(K2);
    OriginBlock b{m, {}};
    if (m.interior()) {
        const double sg = sign_pow(m.m1 + m.m3 + 1);
        b.matrix.resize(3, 3);
        b.matrix << -P * K2, P * S * m.m3 / K, sg * P * R * k1 * m.m1 / K,
                    -P * S * m.m3 / K, -P * K2, 0.0,
                    sg * k1 * m.m1 / K, 0.0, -K2;
    } else if (m.m1 == 0 && m.m3 % 2 == 1) {
        b.matrix.resize(2, 2);
        b.matrix << -P * K2, P * S * m.m3 / K, -P * S * m.m3 / K, -P * K2;
    } else if (m.m1 == 0) {
        b.matrix = Eigen::MatrixXd::Constant(1, 1, -K2);
    } else {
        b.matrix = Eigen::MatrixXd::Constant(1, 1, -P * K2);
    }
    return b;
}

/// Descending lexicographic order on (real, imag).
inline void sort_lex_desc(std::vector<cplx>& v)
{
    std::sort(v.begin(), v.end(), [](cplx a, cplx b) {
        if (a.real() != b.real()) return a.real() > b.real();
        return a.imag() > b.imag();
    });
}

inline std::vector<cplx> block_eigenvalues(const OriginBlock& b)
{
    Eigen::EigenSolver<Eigen::MatrixXd> es(b.matrix, false);
    std::vector<cplx> ev(es.eigenvalues().data(), es.eigenvalues().data() + b.matrix.rows());
    sort_lex_desc(ev);
    return ev;
}

struct CharCoeffs {
    double c2, c1, c0;
};

/// lambda^3 + c2 lambda^2 + c1 lambda + c0 for interior m.
inline CharCoeffs char_coeffs(WaveVector m, const Params& p)
{
    if (!m.interior()) throw std::domain_error("char_coeffs: m must be interior");
    const double P = p.P(), R = p.R(), S = p.S(), k1 = p.k1();
    const double K2 = km_norm_sq(m, k1);
    const double a = k1 * k1 * m.m1 * m.m1, s2 = S * S * m.m3 * m.m3;
    return {(2 * P + 1) * K2, P * ((P + 2) * K2 * K2 + P * s2 / K2 - R * a / K2),
            P * P * (K2 * K2 * K2 + s2 - R * a)};
}

/// Roots of the characteristic cubic via the companion matrix.
inline std::vector<cplx> eigenvalues(WaveVector m, const Params& p)
{
    const auto c = char_coeffs(m, p);
    Eigen::Matrix3d comp;
    comp << -c.c2, -c.c1, -c.c0, 1, 0, 0, 0, 1, 0;
    Eigen::EigenSolver<Eigen::Matrix3d> es(comp, false);
    std::vector<cplx> ev(es.eigenvalues().data(), es.eigenvalues().data() + 3);
    // Newton polish on the cubic; a step is kept only if it shrinks the residual.
    auto f = [&](cplx l) { return ((l + c.c2) * l + c.c1) * l + c.c0; };
    for (auto& l : ev)
        for (int it = 0; it < 3; ++it) {
            const cplx d = (3.0 * l + 2.0 * c.c2) * l + c.c1;
            if (d == 0.0) break;
            const cplx next = l - f(l) / d;
            if (!(std::abs(f(next)) < std::abs(f(l)))) break;
            l = next;
        }
    sort_lex_desc(ev);
    return ev;
}

struct CriticalRayleigh {
    double R1, R2, Rc;
};

inline CriticalRayleigh critical_rayleigh(WaveVector m, double S, double P, double k1)
{
    if (!m.interior()) throw std::domain_error("critical_rayleigh: m must be interior");
    const double a = k1 * k1 * m.m1 * m.m1, b = double(m.m3) * m.m3, s2 = S * S * b;
    // K^6/a = (a + b)^3/a expanded; near the k1-minimum the O(a) rounding terms cancel.
    const double K6a = a * a + 3 * a * b + 3 * b * b + b * b * b / a;
    const double R1 = K6a + s2 / a;
    const double R2 = 2 * (P + 1) * K6a + 2 * P * P / (P + 1) * s2 / a;
    return {R1, R2, std::min(R1, R2)};
}

inline CriticalRayleigh critical_rayleigh(WaveVector m, const Params& p)
{
    return critical_rayleigh(m, p.S(), p.P(), p.k1());
}

inline double rotation_threshold(WaveVector m, double P, double k1)
{
    if (!m.interior()) throw std::domain_error("rotation_threshold: m must be interior");
    const double K3 = std::pow(km_norm_sq(m, k1), 1.5);
    if (P == 1.0) return std::numeric_limits<double>::infinity();
    if (P < 1.0) return std::sqrt((1 + P) / (1 - P)) * K3 / m.m3;
    return K3 / (2.0 * m.m3 * std::sqrt(P * (P - 1)));
}

enum class Crossing { None, T1, T2, T3, T4 };

inline const char* crossing_name(Crossing c)
{
    switch (c) {
    case Crossing::T1: return "T1";
    case Crossing::T2: return "T2";
    case Crossing::T3: return "T3";
    case Crossing::T4: return "T4";
    default: return "None";
    }
}

inline bool rel_equal(double a, double b, double tol = 1e-9)
{
    return std::abs(a - b) <= tol * std::max({std::abs(a), std::abs(b), 1e-300});
}

inline Crossing crossing_type(WaveVector m, const Params& p)
{
    const auto cr = critical_rayleigh(m, p);
    const double R = p.R();
    if (p.P() >= 1.0) return rel_equal(R, cr.R1) ? Crossing::T1 : Crossing::None;
    const double Sm = rotation_threshold(m, p.P(), p.k1());
    if (rel_equal(p.S(), Sm)) return rel_equal(R, cr.R1) ? Crossing::T4 : Crossing::None;
    if (p.S() < Sm) return rel_equal(R, cr.R1) ? Crossing::T1 : Crossing::None;
    if (rel_equal(R, cr.R2)) return Crossing::T2;
    if (rel_equal(R, cr.R1)) return Crossing::T3;
    return Crossing::None;
}

/// Count of eigenvalues with positive real part in the interior block for m,
/// from the closed-form thresholds.
inline int unstable_count(WaveVector m, const Params& p)
{
    const auto cr = critical_rayleigh(m, p);
    const double R = p.R();
    if (p.P() < 1.0 && p.S() > rotation_threshold(m, p.P(), p.k1())) {
        if (R > cr.R1) return 1;
        return R > cr.R2 ? 2 : 0;
    }
    return R > cr.R1 ? 1 : 0;
}

/// Smallest shell cap beyond which |Km|^4 >= R, hence every Rc exceeds R.
inline int safe_shell_cap(const Params& p)
{
    const double c = std::min(1.0, p.k1() * p.k1());
    return std::max(2, int(std::ceil(std::sqrt(2.0 * std::sqrt(p.R()) / c))));
}

/// Fast count restricted to shells <= shell_cap, with no completeness check.
inline long unstable_count_upto(const Params& p, int shell_cap)
{
    long n = 0;
    for (int s = 2; s <= shell_cap; ++s)
        for (int m1 = 1; m1 < s; ++m1) n += unstable_count({m1, s - m1}, p);
    return n;
}

inline long unstable_dimension(const Params& p, int shell_cap)
{
    if (shell_cap + 1 < safe_shell_cap(p))
        throw std::invalid_argument("unstable_dimension: shell_cap too small for R");
    return unstable_count_upto(p, shell_cap);
}

inline long unstable_dimension(const Params& p) { return unstable_dimension(p, safe_shell_cap(p)); }

/// Eigenvalue counting on every block up to shell_cap, boundary blocks included.
inline long unstable_dimension_bruteforce(const Params& p, int shell_cap)
{
    long n = 0;
    for (int s = 1; s <= shell_cap; ++s)
        for (int m1 = 0; m1 <= s; ++m1)
            for (auto ev : block_eigenvalues(origin_block({m1, s - m1}, p)))
                if (ev.real() > 0) ++n;
    return n;
}

enum class Pitchfork { Supercritical, Subcritical };

inline Pitchfork pitchfork_criticality(WaveVector m, const Params& p)
{
    const auto cr = critical_rayleigh(m, p);
    const auto type = crossing_type(m, p.with_R(cr.R1));
    if (type != Crossing::T1 && type != Crossing::T3)
        throw std::domain_error("pitchfork_criticality: not a pitchfork crossing");
    const double ratio = m.m3 / (p.k1() * m.m1);
    if (p.P() >= ratio) return Pitchfork::Supercritical;
    const double K3 = std::pow(km_norm_sq(m, p.k1()), 1.5);
    const double q = ratio / p.P();
    const double Cm = K3 / (m.m3 * std::sqrt(q * q - 1.0));
    return p.S() < Cm ? Pitchfork::Supercritical : Pitchfork::Subcritical;
}

inline double hausdorff_constant(double P, double k1)
{
    return 320.0 * std::pow(pi, 3) / (P * (1 + P) * std::min(1.0, k1 * k1));
}

inline double hausdorff_upper_bound(const Params& p)
{
    return hausdorff_constant(p.P(), p.k1()) * (1.0 + p.R());
}

enum class LevelCurve { R1curve, R2curve };

/// Real root of s^3 + p s + q = 0 with p >= 0, refined by Newton.
inline double depressed_cubic_root(double pc, double qc)
{
    const double D = qc * qc / 4 + pc * pc * pc / 27;
    const double sq = std::sqrt(std::max(D, 0.0));
    double s = std::cbrt(-qc / 2 + sq) + std::cbrt(-qc / 2 - sq);
    for (int i = 0; i < 3; ++i) {
        const double f = s * s * s + pc * s + qc, df = 3 * s * s + pc;
        if (df == 0) break;
        s -= f / df;
    }
    return s;
}

/// m3 on the level set R^{m,c} = R for a real m1 in its domain; none outside.
inline std::optional<double> level_curve_m3(double m1, const Params& p, LevelCurve which)
{
    const double P = p.P(), R = p.R(), S = p.S(), k1 = p.k1();
    const double a = k1 * k1 * m1 * m1;
    if (!(m1 > 0)) return std::nullopt;
    double pc, qc;
    if (which == LevelCurve::R1curve) {
        if (!(a * a < R)) return std::nullopt;
        pc = S * S;
        qc = -a * (R + S * S);
    } else {
        if (!(a * a < R / (2 * P + 2))) return std::nullopt;
        pc = P * P * S * S / ((P + 1) * (P + 1));
        qc = -a * (R + 2 * P * P * S * S / (P + 1)) / (2 * (P + 1));
    }
    const double s = depressed_cubic_root(pc, qc);
    if (!(s > a)) return std::nullopt;
    return std::sqrt(s - a);
}

/// R^{m,1} or R^{m,2} evaluated at real (m1, m3); residual oracle for level curves.
inline double critical_value_real(double m1, double m3, const Params& p, LevelCurve which)
{
    const double P = p.P(), S = p.S(), k1 = p.k1();
    const double a = k1 * k1 * m1 * m1;
    const double K6 = std::pow(a + m3 * m3, 3), s2 = S * S * m3 * m3;
    if (which == LevelCurve::R1curve) return (K6 + s2) / a;
    return (2 * (P + 1) * K6 + 2 * P * P / (P + 1) * s2) / a;
}

/** @brief Everything known about one wave vector's origin block. */
struct StabilityReport {
    WaveVector m;
    std::vector<cplx> eigenvalues;
    double R1 = 0, R2 = 0, R3 = 0, Rc = 0;
    double S_threshold = 0;
    Crossing crossing = Crossing::None;
    int n_unstable = 0;
};

inline StabilityReport stability_report(WaveVector m, const Params& p)
{
    StabilityReport r;
    r.m = m;
    r.eigenvalues = eigenvalues(m, p);
    const auto cr = critical_rayleigh(m, p);
    r.R1 = cr.R1;
    r.R2 = cr.R2;
    r.Rc = cr.Rc;
    const double K2 = km_norm_sq(m, p.k1()), a = p.k1() * p.k1() * m.m1 * m.m1;
    r.R3 = ((p.P() + 2) * K2 * K2 + p.P() * p.S() * p.S() * m.m3 * m.m3) / a;
    r.S_threshold = rotation_threshold(m, p.P(), p.k1());
    r.crossing = crossing_type(m, p);
    r.n_unstable = unstable_count(m, p);
    return r;
}

} // namespace hkc
