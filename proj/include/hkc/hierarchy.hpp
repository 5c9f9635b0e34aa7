#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "core_types.hpp"
#include "model_spec.hpp"

namespace hkc {

/// i-th interior wave vector: by shell m1+m3, larger m1 first within a shell.
inline WaveVector wave_order(int i)
{
    if (i < 1) throw std::invalid_argument("wave_order: i must be >= 1");
    int shell = 2;
    while (i > shell - 1) {
        i -= shell - 1;
        ++shell;
    }
    const int m1 = shell - i;
    return {m1, shell - m1};
}

inline ModelSpec build_hkc(int M)
{
    if (M < 1) throw std::invalid_argument("build_hkc: M must be >= 1");
    std::vector<WaveVector> u, w, th;
    for (int i = 1; i <= M; ++i) {
        const WaveVector m = wave_order(i);
        u.push_back(m);
        w.push_back(m);
        th.push_back(m);
        if (m.m1 == 1) {
            u.push_back({0, 2 * m.m3 - 1});
            w.push_back({0, 2 * m.m3 - 1});
            th.push_back({0, 2 * m.m3});
            if (m.m3 > 1) w.push_back({m.m3 - 1, 0});
        }
    }
    return make_spec(M, u, w, th);
}

inline int model_dimension(int M)
{
    if (M < 1) throw std::invalid_argument("model_dimension: M must be >= 1");
    const int shells = int(std::floor((std::sqrt(8.0 * M + 1.0) - 1.0) / 2.0));
    return 3 * M + 4 * shells - 1;
}

struct Violation {
    std::string criterion;
    ModeIndex first, second;
    Kind required_kind = Kind::Theta;
    WaveVector required;
};

/** @brief Outcome of the four mode-selection checks. */
struct CriteriaReport {
    bool energy_ok = true;
    bool vorticity_ok = true;
    bool rotating_vorticity_ok = true;
    bool buoyancy_ok = true;
    std::vector<Violation> violations;

    bool all_ok() const { return energy_ok && vorticity_ok && rotating_vorticity_ok && buoyancy_ok; }

    void merge(const CriteriaReport& o)
    {
        energy_ok = energy_ok && o.energy_ok;
        vorticity_ok = vorticity_ok && o.vorticity_ok;
        rotating_vorticity_ok = rotating_vorticity_ok && o.rotating_vorticity_ok;
        buoyancy_ok = buoyancy_ok && o.buoyancy_ok;
        violations.insert(violations.end(), o.violations.begin(), o.violations.end());
    }
};

inline CriteriaReport check_energy_criterion(const ModelSpec& s)
{
    CriteriaReport r;
    auto fail = [&](const ModeIndex& a, const ModeIndex& b, WaveVector need) {
        r.energy_ok = false;
        r.violations.push_back({"energy", a, b, Kind::Theta, need});
    };
    for (auto mu : s.u) {
        const auto a = locked_mode(Kind::U, mu);
        if (mu.m1 == 0) continue;
        for (auto mt : s.theta) {
            const auto b = locked_mode(Kind::Theta, mt);
            if (mt.m1 != mu.m1 || a.p1 != b.p1) continue;
            if (mu.m3 == mt.m3) {
                if (!s.has(Kind::Theta, {0, 2 * mu.m3})) fail(a, b, {0, 2 * mu.m3});
                continue;
            }
            const WaveVector lo{0, std::abs(mu.m3 - mt.m3)}, hi{0, mu.m3 + mt.m3};
            const bool has_lo = s.has(Kind::Theta, lo), has_hi = s.has(Kind::Theta, hi);
            if (has_lo && !has_hi) fail(a, b, hi);
            if (has_hi && !has_lo) fail(a, b, lo);
        }
    }
    return r;
}

inline CriteriaReport check_vorticity_criteria(const ModelSpec& s, bool rotating)
{
    CriteriaReport r;
    std::vector<ModeIndex> vel;
    for (auto m : s.u) vel.push_back(locked_mode(Kind::U, m));
    for (auto m : s.w) vel.push_back(locked_mode(Kind::W, m));
    for (const auto& a : vel)
        for (const auto& b : vel) {
            if (a.m.m1 != b.m.m1 || a.m.m1 == 0) continue;
            if ((a.m.m3 + b.m.m3) % 2 == 0 || a.p1 != mod2(b.p1 + 1)) continue;
            const WaveVector lo{0, std::abs(a.m.m3 - b.m.m3)}, hi{0, a.m.m3 + b.m.m3};
            if (a.c() == 1 && b.c() == 1) {
                const bool has_lo = s.has(Kind::U, lo), has_hi = s.has(Kind::U, hi);
                if (has_lo != has_hi) {
                    r.vorticity_ok = false;
                    r.violations.push_back({"vorticity", a, b, Kind::U, has_lo ? hi : lo});
                }
            } else if (a.c() != b.c()) {
                for (auto need : {hi, lo})
                    if (!s.has(Kind::W, need)) {
                        r.vorticity_ok = false;
                        r.violations.push_back({"vorticity", a, b, Kind::W, need});
                    }
            }
        }
    if (rotating) {
        auto pair_check = [&](Kind have, Kind need, const std::vector<WaveVector>& set) {
            for (auto m : set) {
                if (m.m1 != 0 || m.m3 % 2 == 0) continue;
                if (!s.has(need, m)) {
                    r.rotating_vorticity_ok = false;
                    const auto a = locked_mode(have, m);
                    r.violations.push_back({"rotating_vorticity", a, a, need, m});
                }
            }
        };
        pair_check(Kind::U, Kind::W, s.u);
        pair_check(Kind::W, Kind::U, s.w);
    }
    return r;
}

inline CriteriaReport check_buoyancy_criterion(const ModelSpec& s)
{
    CriteriaReport r;
    for (auto m : s.u)
        if (m.interior() && !s.has(Kind::Theta, m)) {
            r.buoyancy_ok = false;
            const auto a = locked_mode(Kind::U, m);
            r.violations.push_back({"buoyancy", a, a, Kind::Theta, m});
        }
    for (auto m : s.theta)
        if (m.interior() && !s.has(Kind::U, m)) {
            r.buoyancy_ok = false;
            const auto a = locked_mode(Kind::Theta, m);
            r.violations.push_back({"buoyancy", a, a, Kind::U, m});
        }
    return r;
}

inline CriteriaReport check_criteria(const ModelSpec& s, bool rotating)
{
    auto r = check_energy_criterion(s);
    r.merge(check_vorticity_criteria(s, rotating));
    r.merge(check_buoyancy_criterion(s));
    return r;
}

/// Copy of spec with one wave vector removed from one set; layout rebuilt.
inline ModelSpec without(const ModelSpec& s, Kind kind, WaveVector m)
{
    auto u = s.u, w = s.w, th = s.theta;
    auto& set = kind == Kind::U ? u : kind == Kind::W ? w : th;
    std::erase(set, m);
    return make_spec(0, u, w, th);
}

} // namespace hkc
