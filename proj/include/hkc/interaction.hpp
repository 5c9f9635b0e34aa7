#pragma once

#include <array>
#include <cstdlib>
#include <optional>
#include <stdexcept>

#include "core_types.hpp"

namespace hkc {

/** @brief (n, n', n''): output mode, advecting velocity, advected mode. */
struct Triad {
    ModeIndex n, n_prime, n_dprime;
};

using Phase3 = std::array<int, 3>;

inline constexpr std::array<Phase3, 4> xi_patterns{{{1, 1, 1}, {1, 2, 2}, {2, 1, 2}, {2, 2, 1}}};

/// 1..4 if phi equals xi^k, else 0.
inline int xi_index(const Phase3& phi)
{
    for (int k = 0; k < 4; ++k)
        if (xi_patterns[k] == phi) return k + 1;
    return 0;
}

/// Phase map rho^j, j in 1..4 (cyclic).
inline Phase3 rho(int j, const Phase3& phi)
{
    static constexpr std::array<Phase3, 4> shift{{{1, 1, 0}, {1, 0, 1}, {0, 1, 1}, {0, 0, 0}}};
    const auto& d = shift[(j - 1) % 4];
    return {mod2(phi[0] + d[0]), mod2(phi[1] + d[1]), mod2(phi[2] + d[2])};
}

/// S^{a1,a2,a3} = -1 iff a1 = a2 + a3.
inline int S3(int a1, int a2, int a3) { return a1 == a2 + a3 ? -1 : 1; }

/// s^{(mu, xi^k)} for k in 1..4.
inline int sign_coeff(const std::array<int, 3>& mu, int k)
{
    switch (k) {
    case 1: return 1;
    case 2: return S3(mu[0], mu[1], mu[2]);
    case 3: return S3(mu[1], mu[2], mu[0]);
    case 4: return S3(mu[2], mu[0], mu[1]);
    default: throw std::domain_error("sign_coeff: phase pattern outside xi^1..xi^4");
    }
}

inline int sign_coeff(const std::array<int, 3>& mu, const Phase3& phi)
{
    return sign_coeff(mu, xi_index(phi));
}

inline bool convolves(int m, int a, int b) { return m == a + b || m == std::abs(a - b); }

inline bool is_compatible(const Triad& t)
{
    const auto& [n, a, b] = t;
    if (a.kind != Kind::U) return false;
    if (n.velocity() != b.velocity()) return false;
    if (n.c() != b.c()) return false;
    if (!convolves(n.m.m1, a.m.m1, b.m.m1) || !convolves(n.m.m3, a.m.m3, b.m.m3)) return false;
    return xi_index({n.p1, a.p1, b.p1}) != 0;
}

inline double zeta(const Triad& t, int j)
{
    if (j != 1 && j != 3) throw std::domain_error("zeta: j must be 1 or 3");
    if (!is_compatible(t)) throw std::domain_error("zeta: incompatible triad");
    const auto& [n, a, b] = t;
    const Phase3 phi{n.p1, a.p1, b.p1};
    const std::array<int, 3> mu1{n.m.m1, a.m.m1, b.m.m1};
    const std::array<int, 3> mu3{n.m.m3, a.m.m3, b.m.m3};
    const double first = sign_pow(b.p1) * double(a.m.m3) * b.m.m1 * sign_coeff(mu1, rho(j, phi)) *
                         sign_coeff(mu3, j);
    const double second = sign_pow(a.p1) * double(a.m.m1) * b.m.m3 *
                          sign_coeff(mu1, rho(j + 1, phi)) * sign_coeff(mu3, j + 1);
    return first + second;
}

inline double triad_prefactor(const Triad& t, double k1)
{
    const auto& [n, a, b] = t;
    return k1 / (4.0 * normalizer_eta(n.m) * normalizer_eta(a.m) * normalizer_eta(b.m) *
                 km_norm(a.m, k1) * volume_factor(k1));
}

/// I_theta; zero for incompatible triads.
inline double coeff_theta(const Triad& t, double k1)
{
    if (t.n.kind != Kind::Theta || !is_compatible(t)) return 0.0;
    return triad_prefactor(t, k1) * zeta(t, 3);
}

/// I_u; zero for incompatible triads.
inline double coeff_velocity(const Triad& t, double k1)
{
    if (!t.n.velocity() || !is_compatible(t)) return 0.0;
    const auto& [n, a, b] = t;
    const double C = triad_prefactor(t, k1);
    if (n.c() == 2) return -C * zeta(t, 1);
    const double num = -double(n.m.m3) * b.m.m3 * zeta(t, 1) +
                       sign_pow(n.p1 + b.p1) * k1 * k1 * n.m.m1 * b.m.m1 * zeta(t, 3);
    return C * num / (km_norm(n.m, k1) * km_norm(b.m, k1));
}

inline double coefficient(const Triad& t, double k1)
{
    return t.n.kind == Kind::Theta ? coeff_theta(t, k1) : coeff_velocity(t, k1);
}

/** @brief Linear terms acting on one mode's equation. */
struct LinearCoupling {
    double diffusion = 0.0;
    ModeIndex buoyancy_partner;
    double buoyancy = 0.0;
    std::optional<ModeIndex> coriolis_partner;
    double coriolis = 0.0;
};

inline LinearCoupling linear_couplings(const ModeIndex& n, const Params& p)
{
    require_admissible(n);
    LinearCoupling lc;
    const double k1 = p.k1();
    const double K2 = km_norm_sq(n.m, k1);
    const double K = std::sqrt(K2);
    const double b = sign_pow(n.p1) * k1 * n.m.m1 / K;
    switch (n.kind) {
    case Kind::Theta:
        lc.diffusion = -K2;
        lc.buoyancy_partner = {Kind::U, n.m, n.p1};
        lc.buoyancy = n.m.m3 > 0 ? b : 0.0;
        break;
    case Kind::U:
        lc.diffusion = -p.P() * K2;
        lc.buoyancy_partner = {Kind::Theta, n.m, n.p1};
        lc.buoyancy = p.P() * p.R() * b;
        lc.coriolis_partner = ModeIndex{Kind::W, n.m, n.p1};
        lc.coriolis = p.P() * p.S() * n.m.m3 / K;
        break;
    case Kind::W:
        lc.diffusion = -p.P() * K2;
        lc.buoyancy_partner = {Kind::Theta, n.m, n.p1};
        lc.buoyancy = 0.0;
        if (n.m.m3 > 0) {
            lc.coriolis_partner = ModeIndex{Kind::U, n.m, n.p1};
            lc.coriolis = -p.P() * p.S() * n.m.m3 / K;
        }
        break;
    }
    return lc;
}

} // namespace hkc
