#pragma once

#include <cmath>
#include <compare>
#include <numbers>
#include <stdexcept>
#include <string>

namespace hkc {

inline constexpr double pi = std::numbers::pi;

/** @brief Admissible parameter vector (R, S, P, k1). */
class Params {
public:
    Params(double R, double S, double P, double k1) : R_(R), S_(S), P_(P), k1_(k1)
    {
        if (!(R >= 0.0) || !(S >= 0.0) || !(P > 0.0) || !(k1 > 0.0) || !std::isfinite(R) ||
            !std::isfinite(S) || !std::isfinite(P) || !std::isfinite(k1))
            throw std::invalid_argument("Params: require R >= 0, S >= 0, P > 0, k1 > 0 (finite)");
    }

    double R() const { return R_; }
    double S() const { return S_; }
    double P() const { return P_; }
    double k1() const { return k1_; }

    Params with_R(double R) const { return {R, S_, P_, k1_}; }
    Params with_S(double S) const { return {R_, S, P_, k1_}; }

private:
    double R_, S_, P_, k1_;
};

struct WaveVector {
    int m1 = 0;
    int m3 = 0;

    bool is_zero() const { return m1 == 0 && m3 == 0; }
    bool interior() const { return m1 > 0 && m3 > 0; }
    bool stratified() const { return m1 == 0 && m3 > 0; }
    int shell() const { return m1 + m3; }

    friend bool operator==(const WaveVector&, const WaveVector&) = default;
    /// Shell first, then larger m1 first; matches the hierarchy ordering.
    friend std::strong_ordering operator<=>(const WaveVector& a, const WaveVector& b)
    {
        if (auto c = a.shell() <=> b.shell(); c != 0) return c;
        return b.m1 <=> a.m1;
    }
};

enum class Kind { U, W, Theta };

inline const char* kind_name(Kind k)
{
    switch (k) {
    case Kind::U: return "u";
    case Kind::W: return "w";
    default: return "theta";
    }
}

inline const char* kind_label(Kind k)
{
    switch (k) {
    case Kind::U: return "u";
    case Kind::W: return "w";
    default: return "th";
    }
}

/// Maps any integer into {1,2} with 1 for odd and 2 for even.
constexpr int mod2(int x) { return ((x % 2) + 2) % 2 == 1 ? 1 : 2; }

/// Phase-locked p1 = m1 + m3 + 1 (mod 2).
constexpr int locked_phase(const WaveVector& m) { return mod2(m.m1 + m.m3 + 1); }

/** @brief Typed Fourier index n = (m, p1, c). */
struct ModeIndex {
    Kind kind = Kind::U;
    WaveVector m;
    int p1 = 1;

    int c() const { return kind == Kind::W ? 2 : 1; }
    bool velocity() const { return kind != Kind::Theta; }

    friend bool operator==(const ModeIndex&, const ModeIndex&) = default;

    std::string label() const
    {
        return std::string(kind_label(kind)) + "_" + std::to_string(m.m1) + "_" +
               std::to_string(m.m3);
    }
};

inline ModeIndex locked_mode(Kind kind, WaveVector m) { return {kind, m, locked_phase(m)}; }

/// Admissible phase set P^m contains p.
inline bool phase_admissible(int m1, int p) { return m1 > 0 ? true : mod2(p) == 1; }

inline bool admissible(const ModeIndex& n)
{
    if (n.m.m1 < 0 || n.m.m3 < 0 || (n.p1 != 1 && n.p1 != 2)) return false;
    if (n.kind == Kind::Theta) return n.m.m3 > 0 && phase_admissible(n.m.m1, n.p1);
    if (n.m.is_zero()) return false;
    if (!phase_admissible(n.m.m1, n.p1 + 1)) return false;
    return n.m.m3 > 0 || n.kind == Kind::W;
}

inline void require_admissible(const ModeIndex& n)
{
    if (!admissible(n)) throw std::domain_error("inadmissible mode index " + n.label());
}

inline double eta(int m) { return m > 0 ? 1.0 : 1.0 / std::numbers::sqrt2; }

inline double normalizer_eta(const WaveVector& m) { return eta(m.m1) * eta(m.m3); }

inline double km_norm(const WaveVector& m, double k1)
{
    if (m.is_zero()) throw std::domain_error("km_norm: zero wave vector");
    return std::sqrt(k1 * k1 * m.m1 * m.m1 + double(m.m3) * m.m3);
}

inline double km_norm_sq(const WaveVector& m, double k1)
{
    return k1 * k1 * m.m1 * m.m1 + double(m.m3) * m.m3;
}

/// V = sqrt(pi^2 / (2 k1)).
inline double volume_factor(double k1) { return std::sqrt(pi * pi / (2.0 * k1)); }

/// |Omega| = 2 pi^2 / k1.
inline double domain_volume(double k1) { return 2.0 * pi * pi / k1; }

inline int sign_pow(int e) { return (e % 2 == 0) ? 1 : -1; }

} // namespace hkc
