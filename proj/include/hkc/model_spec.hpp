#pragma once

#include <algorithm>
#include <optional>
#include <stdexcept>
#include <vector>

#include "core_types.hpp"

namespace hkc {

/** @brief Wave-vector sets of a truncation plus its state-vector layout. */
struct ModelSpec {
    int M = 0; ///< hierarchy level, 0 for custom specs
    std::vector<WaveVector> u, w, theta;
    std::vector<ModeIndex> layout;

    std::size_t dimension() const { return layout.size(); }

    std::optional<std::size_t> slot(Kind kind, WaveVector m) const
    {
        for (std::size_t i = 0; i < layout.size(); ++i)
            if (layout[i].kind == kind && layout[i].m == m) return i;
        return std::nullopt;
    }

    bool has(Kind kind, WaveVector m) const
    {
        const auto& set = kind == Kind::U ? u : kind == Kind::W ? w : theta;
        return std::find(set.begin(), set.end(), m) != set.end();
    }
};

inline void sort_waves(std::vector<WaveVector>& v)
{
    std::sort(v.begin(), v.end(), [](const WaveVector& a, const WaveVector& b) {
        if (a.shell() != b.shell()) return a.shell() < b.shell();
        if (a.m1 != b.m1) return a.m1 < b.m1;
        return a.m3 < b.m3;
    });
    v.erase(std::unique(v.begin(), v.end()), v.end());
}

/// Sorts each set by (m1+m3, m1, m3), then lays out U, W, Theta with phase-locked p1.
inline ModelSpec make_spec(int M, std::vector<WaveVector> u, std::vector<WaveVector> w,
                           std::vector<WaveVector> theta)
{
    ModelSpec s;
    s.M = M;
    sort_waves(u);
    sort_waves(w);
    sort_waves(theta);
    s.u = std::move(u);
    s.w = std::move(w);
    s.theta = std::move(theta);
    for (auto m : s.u) s.layout.push_back(locked_mode(Kind::U, m));
    for (auto m : s.w) s.layout.push_back(locked_mode(Kind::W, m));
    for (auto m : s.theta) s.layout.push_back(locked_mode(Kind::Theta, m));
    for (const auto& n : s.layout)
        if (!admissible(n)) throw std::domain_error("make_spec: inadmissible mode " + n.label());
    return s;
}

} // namespace hkc
