#include <catch_amalgamated.hpp>

#include <hkc/dynamics.hpp>
#include <hkc/stability.hpp>
#include <hkc/sweep.hpp>

#include <cmath>
#include <algorithm>
#include <limits>
#include <random>

using namespace hkc;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

const double K1 = 1 / std::sqrt(2.0);
const double S11 = 9 / (2 * std::sqrt(2.0)); // rotation threshold of (1,1) at P = 1/2, k1 = 1/sqrt2

struct Draw {
    WaveVector m;
    Params p;
};

Draw random_draw(std::mt19937_64& rng, double Pmin = 0.05, double Pmax = 20)
{
    std::uniform_int_distribution<int> mi(1, 5);
    std::uniform_real_distribution<double> u(0, 1);
    const WaveVector m{mi(rng), mi(rng)};
    const double k1 = 0.2 + 2 * u(rng);
    const double P = Pmin * std::pow(Pmax / Pmin, u(rng));
    const double S = 30 * u(rng);
    const double R = 2000 * u(rng);
    return {m, Params(R, S, P, k1)};
}

/// Worst pairing error under the best permutation; ordering is fragile for near-equal real parts.
double multiset_error(std::vector<cplx> a, std::vector<cplx> b)
{
    std::sort(b.begin(), b.end(), [](cplx x, cplx y) { return std::make_pair(x.real(), x.imag()) < std::make_pair(y.real(), y.imag()); });
    double best = std::numeric_limits<double>::infinity();
    do {
        double worst = 0;
        for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]) / (1 + std::abs(b[i])));
        best = std::min(best, worst);
    } while (std::next_permutation(b.begin(), b.end(), [](cplx x, cplx y) { return std::make_pair(x.real(), x.imag()) < std::make_pair(y.real(), y.imag()); }));
    return best;
}

} // namespace

TEST_CASE("origin block entries for (1,1)")
{
    const Params p(6.75, 0, 10, K1);
    const auto b = origin_block({1, 1}, p);
    const double K = std::sqrt(1.5);
    REQUIRE(b.matrix.rows() == 3);
    CHECK_THAT(b.matrix(0, 0), WithinRel(-15.0, 1e-14));
    CHECK_THAT(b.matrix(1, 1), WithinRel(-15.0, 1e-14));
    CHECK_THAT(b.matrix(2, 2), WithinRel(-1.5, 1e-14));
    CHECK_THAT(b.matrix(0, 2), WithinRel(-10 * 6.75 * K1 / K, 1e-14));
    CHECK_THAT(b.matrix(2, 0), WithinRel(-K1 / K, 1e-14));
    CHECK(b.matrix(0, 1) == 0.0);
    CHECK(b.matrix(1, 0) == 0.0);
    CHECK_THROWS_AS(origin_block({0, 0}, p), std::domain_error);
}

TEST_CASE("origin blocks equal the compiled Jacobian at the origin, wave vector by wave vector")
{
    std::mt19937_64 rng(1);
    for (int trial = 0; trial < 5; ++trial) {
        const auto d = random_draw(rng);
        const auto model = compile(build_hkc(10), d.p);
        const Matrix J = model.jacobian(State::Zero(model.dimension()));
        CHECK((J - model.linear).norm() == 0.0);
        std::vector<WaveVector> seen;
        for (const auto& n : model.spec.layout) {
            if (std::find(seen.begin(), seen.end(), n.m) != seen.end()) continue;
            seen.push_back(n.m);
            std::vector<int> idx;
            for (Kind k : {Kind::U, Kind::W, Kind::Theta})
                if (auto s = model.spec.slot(k, n.m)) idx.push_back(int(*s));
            const auto b = origin_block(n.m, d.p);
            REQUIRE(b.matrix.rows() == Eigen::Index(idx.size()));
            for (std::size_t r = 0; r < idx.size(); ++r) {
                for (std::size_t c = 0; c < idx.size(); ++c)
                    CHECK_THAT(J(idx[r], idx[c]), WithinAbs(b.matrix(r, c), 1e-12 * (1 + std::abs(b.matrix(r, c)))));
                // nothing couples a wave vector to a different one at the origin
                for (int c = 0; c < model.dimension(); ++c)
                    if (std::find(idx.begin(), idx.end(), c) == idx.end()) CHECK(J(idx[r], c) == 0.0);
            }
        }
    }
}

TEST_CASE("characteristic coefficients")
{
    const auto c = char_coeffs({1, 1}, Params(0, 0, 10, K1));
    CHECK_THAT(c.c2, WithinRel(31.5, 1e-14));
    CHECK_THAT(c.c1, WithinRel(270.0, 1e-14));
    CHECK_THAT(c.c0, WithinRel(337.5, 1e-14));
    CHECK_THROWS_AS(char_coeffs({0, 1}, Params(0, 0, 10, K1)), std::domain_error);

    std::mt19937_64 rng(2);
    for (int i = 0; i < 100; ++i) {
        const auto d = random_draw(rng);
        const auto b = origin_block(d.m, d.p);
        const auto cc = char_coeffs(d.m, d.p);
        const double scale = std::max({std::abs(cc.c0), std::abs(cc.c1), std::abs(cc.c2)});
        CHECK_THAT(b.matrix.trace(), WithinAbs(-cc.c2, 1e-12 * scale));
        CHECK_THAT(b.matrix.determinant(), WithinAbs(-cc.c0, 1e-10 * scale));
        // c0 changes sign exactly at R1
        const double R1 = critical_rayleigh(d.m, d.p).R1;
        CHECK(char_coeffs(d.m, d.p.with_R(R1 * (1 - 1e-9))).c0 > 0);
        CHECK(char_coeffs(d.m, d.p.with_R(R1 * (1 + 1e-9))).c0 < 0);
    }
}

TEST_CASE("eigenvalues: cubic residual, trace, ordering, agreement with the block")
{
    std::mt19937_64 rng(3);
    for (int i = 0; i < 200; ++i) {
        const auto d = random_draw(rng);
        const auto ev = eigenvalues(d.m, d.p);
        const auto c = char_coeffs(d.m, d.p);
        const double scale = std::max({std::abs(c.c0), std::abs(c.c1), std::abs(c.c2)});
        for (auto l : ev) CHECK(std::abs(l * l * l + c.c2 * l * l + c.c1 * l + c.c0) <= 1e-9 * scale);
        const double tr = ev[0].real() + ev[1].real() + ev[2].real();
        CHECK_THAT(tr, WithinAbs(-(2 * d.p.P() + 1) * km_norm_sq(d.m, d.p.k1()), 1e-9 * c.c2));
        for (int j = 0; j < 2; ++j) CHECK(ev[j].real() >= ev[j + 1].real());
        if (std::abs(ev[0].imag()) > 0 && ev[0].real() == ev[1].real()) CHECK(ev[0].imag() > 0);
        CHECK(multiset_error(block_eigenvalues(origin_block(d.m, d.p)), ev) <= 1e-9);
    }
}

TEST_CASE("Routh-Hurwitz consistency")
{
    std::mt19937_64 rng(4);
    for (int i = 0; i < 200; ++i) {
        const auto d = random_draw(rng);
        const auto ev = eigenvalues(d.m, d.p);
        const auto c = char_coeffs(d.m, d.p);
        const bool stable = ev[0].real() < 0;
        const bool rh = c.c2 > 0 && c.c1 > 0 && c.c0 > 0 && c.c2 * c.c1 - c.c0 > 0;
        CHECK(stable == rh);
    }
}

TEST_CASE("Prandtl-one eigenvalues in closed form")
{
    std::mt19937_64 rng(5);
    for (int i = 0; i < 100; ++i) {
        auto d = random_draw(rng);
        const Params p(d.p.R(), d.p.S(), 1.0, d.p.k1());
        const double K2 = km_norm_sq(d.m, p.k1());
        const cplx disc = (p.k1() * p.k1() * d.m.m1 * d.m.m1 * p.R() - d.m.m3 * d.m.m3 * p.S() * p.S()) / K2;
        const cplx r = std::sqrt(disc);
        const std::vector<cplx> expect{-K2 + r, cplx(-K2, 0), -K2 - r};
        CHECK(multiset_error(eigenvalues(d.m, p), expect) <= 1e-9);
    }
    const auto ev = eigenvalues({1, 1}, Params(6.75, 0, 1, K1));
    CHECK_THAT(ev[0].real(), WithinAbs(0.0, 1e-12));
}

TEST_CASE("non-critical eigenvalues at R = R1")
{
    std::mt19937_64 rng(6);
    for (int i = 0; i < 50; ++i) {
        const auto d = random_draw(rng);
        const double R1 = critical_rayleigh(d.m, d.p).R1;
        const auto p = d.p.with_R(R1);
        const double K2 = km_norm_sq(d.m, p.k1()), P = p.P();
        const cplx q = std::sqrt(cplx(0.25 * K2 * K2 + P * (1 - P) * p.S() * p.S() * d.m.m3 * d.m.m3 / K2));
        const cplx l2 = -(P + 0.5) * K2 + q, l3 = -(P + 0.5) * K2 - q;
        const auto ev = eigenvalues(d.m, p);
        // one eigenvalue is zero; the other two are l2, l3 in some order
        int zero = -1;
        for (int j = 0; j < 3; ++j)
            if (std::abs(ev[j]) < 1e-6 * K2) zero = j;
        REQUIRE(zero >= 0);
        std::vector<cplx> rest;
        for (int j = 0; j < 3; ++j)
            if (j != zero) rest.push_back(ev[j]);
        const double e1 = std::abs(rest[0] - l2) + std::abs(rest[1] - l3);
        const double e2 = std::abs(rest[0] - l3) + std::abs(rest[1] - l2);
        CHECK(std::min(e1, e2) <= 1e-8 * (1 + std::abs(l3)));
    }
}

TEST_CASE("Gershgorin containment")
{
    std::mt19937_64 rng(7);
    for (int i = 0; i < 50; ++i) {
        const auto d = random_draw(rng);
        const double K2 = km_norm_sq(d.m, d.p.k1()), P = d.p.P();
        for (auto l : eigenvalues(d.m, d.p)) {
            const double tol = 1e-9 * (1 + std::abs(l));
            const bool in = std::abs(l + P * K2) <= P * (d.p.R() + d.p.S()) + tol ||
                            std::abs(l + P * K2) <= P * d.p.S() + tol || std::abs(l + K2) <= 1 + tol;
            CHECK(in);
        }
    }
}

TEST_CASE("critical Rayleigh numbers")
{
    CHECK(critical_rayleigh({1, 1}, 0, 10, K1).R1 == 6.75);
    for (double S : {0.5, 1.0, 3.0, 10.0}) {
        const auto c = critical_rayleigh({1, 1}, S, 10, K1);
        CHECK_THAT(c.Rc, WithinRel(6.75 + 2 * S * S, 1e-12));
        CHECK(c.R1 < c.R2);
    }
    std::mt19937_64 rng(8);
    for (int i = 0; i < 100; ++i) {
        const auto d = random_draw(rng, 1.0, 20.0);
        const auto c = critical_rayleigh(d.m, d.p);
        CHECK(c.R1 < c.R2);
        CHECK(c.Rc == std::min(c.R1, c.R2));
    }
}

TEST_CASE("rotation threshold")
{
    CHECK_THAT(rotation_threshold({1, 1}, 0.5, 1.0), WithinRel(std::sqrt(3.0) * std::pow(2.0, 1.5), 1e-14));
    CHECK_THAT(rotation_threshold({1, 1}, 2.0, 1.0), WithinRel(1.0, 1e-14));
    CHECK(std::isinf(rotation_threshold({1, 1}, 1.0, 1.0)));
    CHECK_THAT(rotation_threshold({1, 1}, 0.5, K1), WithinRel(S11, 1e-14));
    // at |S| = S^m the real and complex thresholds coincide
    const auto rep = stability_report({1, 1}, Params(10, S11, 0.5, K1));
    CHECK_THAT(rep.R1, WithinRel(rep.R2, 1e-12));
}

namespace {

/// Sign changes of the cubic discriminant along R in [0, Rmax].
std::vector<double> discriminant_roots(WaveVector m, Params p, double Rmax)
{
    auto disc = [&](double R) {
        const auto c = char_coeffs(m, p.with_R(R));
        const double a = c.c2, b = c.c1, d = c.c0;
        return 18 * a * b * d - 4 * a * a * a * d + a * a * b * b - 4 * b * b * b - 27 * d * d;
    };
    std::vector<double> roots;
    const int N = 20000;
    double prev = disc(0);
    for (int i = 1; i <= N; ++i) {
        const double R = Rmax * i / N, cur = disc(R);
        if ((prev < 0) != (cur < 0)) roots.push_back(R);
        prev = cur;
    }
    return roots;
}

} // namespace

TEST_CASE("discriminant has a single real-to-complex transition")
{
    for (double S : {0.5, 2.0, S11 + 2}) {
        const Params p(0, S, 0.5, K1);
        const auto c = critical_rayleigh({1, 1}, p);
        const auto roots = discriminant_roots({1, 1}, p, 3 * std::max(c.R1, c.R2));
        REQUIRE(roots.size() == 1);
        const double Rs = roots[0];
        if (S < S11) {
            CHECK(Rs < c.R1);
            CHECK(c.R1 < c.R2);
        } else {
            CHECK(c.R2 < Rs);
            CHECK(Rs < c.R1);
        }
    }
    // S = 0: three real eigenvalues for every R > 0
    const auto ev = eigenvalues({1, 1}, Params(1e-3, 0, 0.5, K1));
    for (auto l : ev) CHECK(l.imag() == 0.0);
}

TEST_CASE("crossing types")
{
    {
        const Params p(0, S11 + 1, 2, K1);
        const double R1 = critical_rayleigh({1, 1}, p).R1;
        CHECK(crossing_type({1, 1}, p.with_R(R1)) == Crossing::T1);
        CHECK(crossing_type({1, 1}, p.with_R(R1 * 1.01)) == Crossing::None);
    }
    {
        const Params p(0, S11 + 2, 0.5, K1);
        const auto c = critical_rayleigh({1, 1}, p);
        CHECK(crossing_type({1, 1}, p.with_R(c.R2)) == Crossing::T2);
        CHECK(crossing_type({1, 1}, p.with_R(c.R1)) == Crossing::T3);
    }
    {
        const Params p(0, S11, 0.5, K1);
        const double R1 = critical_rayleigh({1, 1}, p).R1;
        CHECK(crossing_type({1, 1}, p.with_R(R1)) == Crossing::T4);
    }
    {
        const Params p(0, 1.0, 0.5, K1);
        const double R1 = critical_rayleigh({1, 1}, p).R1;
        CHECK(crossing_type({1, 1}, p.with_R(R1)) == Crossing::T1);
    }
}

TEST_CASE("pitchfork criticality")
{
    for (double S : {0.0, 1.0, 50.0, 1e3})
        CHECK(pitchfork_criticality({1, 1}, Params(0, S, 10, K1)) == Pitchfork::Supercritical);
    const WaveVector m{1, 2};
    const double Km3 = std::pow(5.0, 1.5), Cm = Km3 / (2 * std::sqrt(15.0));
    CHECK(pitchfork_criticality(m, Params(0, 0, 0.5, 1)) == Pitchfork::Supercritical);
    CHECK(pitchfork_criticality(m, Params(0, 0.9 * Cm, 0.5, 1)) == Pitchfork::Supercritical);
    CHECK(pitchfork_criticality(m, Params(0, 1.1 * Cm, 0.5, 1)) == Pitchfork::Subcritical);
    CHECK(pitchfork_criticality(m, Params(0, 40, 0.5, 1)) == Pitchfork::Subcritical); // T3 branch
    CHECK_THROWS_AS(pitchfork_criticality({1, 1}, Params(0, S11, 0.5, K1)), std::domain_error);
}

TEST_CASE("unstable dimension: thresholds and brute force")
{
    CHECK(unstable_dimension(Params(6.7, 0, 10, K1)) == 0);
    CHECK(unstable_dimension(Params(6.8, 0, 10, K1)) == 1);
    CHECK_THROWS_AS(unstable_dimension(Params(1e6, 0, 10, 1), 5), std::invalid_argument);

    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(0, 1);
    for (int i = 0; i < 20; ++i) {
        const double k1 = 0.3 + 1.5 * u(rng), P = i % 2 ? 0.1 + 0.8 * u(rng) : 1 + 10 * u(rng);
        const double S = 40 * u(rng), R = 20000 * u(rng);
        const Params p(R, S, P, k1);
        CHECK(unstable_count_upto(p, 20) == unstable_dimension_bruteforce(p, 20));
    }
    // the P < 1 pocket: +2 between R2 and R1
    const Params pocket(0, S11 + 2, 0.5, K1);
    const auto c = critical_rayleigh({1, 1}, pocket);
    const Params mid = pocket.with_R(0.5 * (c.R1 + c.R2));
    CHECK(unstable_count({1, 1}, mid) == 2);
    CHECK(unstable_dimension_bruteforce(mid, 2) == 2);
    CHECK(unstable_count({1, 1}, pocket.with_R(c.R1 * 1.01)) == 1);
}

TEST_CASE("unstable dimension decreases with rotation")
{
    long prev = unstable_dimension(Params(5000, 0, 10, K1));
    CHECK(prev > 0);
    for (double S = 50; S <= 2000; S += 50) {
        const long d = unstable_dimension(Params(5000, S, 10, K1));
        CHECK(d <= prev);
        prev = d;
    }
    CHECK(prev == 0);
}

TEST_CASE("Hausdorff bound")
{
    CHECK_THAT(hausdorff_constant(10, K1), WithinRel(320 * std::pow(pi, 3) / 55, 1e-14));
    CHECK_THAT(hausdorff_constant(10, K1), WithinAbs(180.40, 0.01));
    CHECK_THAT(hausdorff_upper_bound(Params(1500, 0, 10, K1)), WithinRel(2.708e5, 1e-3));
    CHECK_THAT(hausdorff_constant(2, 1.5), WithinRel(320 * std::pow(pi, 3) / 6, 1e-14));
}

TEST_CASE("level curves")
{
    std::mt19937_64 rng(10);
    std::uniform_real_distribution<double> u(0, 1);
    // S = 0 closed form
    for (int i = 0; i < 20; ++i) {
        const double R = 10 + 1e4 * u(rng), k1 = 0.3 + u(rng);
        const Params p(R, 0, 10, k1);
        const double m1 = 0.95 * std::pow(R, 0.25) / k1 * u(rng) + 1e-3;
        const double a = k1 * k1 * m1 * m1;
        const auto m3 = level_curve_m3(m1, p, LevelCurve::R1curve);
        if (std::cbrt(R * a) <= a) continue;
        REQUIRE(m3);
        CHECK_THAT(*m3, WithinAbs(std::sqrt(std::cbrt(R * a) - a), 1e-10));
    }
    // residuals and domain
    for (int i = 0; i < 50; ++i) {
        const Params p(50 + 1e4 * u(rng), 30 * u(rng), 0.2 + 10 * u(rng), 0.3 + u(rng));
        for (auto which : {LevelCurve::R1curve, LevelCurve::R2curve}) {
            const double top = which == LevelCurve::R1curve ? std::pow(p.R(), 0.25)
                                                            : std::pow(p.R() / (2 * p.P() + 2), 0.25);
            const double m1 = top / p.k1() * (0.05 + 0.9 * u(rng));
            if (auto m3 = level_curve_m3(m1, p, which))
                CHECK(std::abs(critical_value_real(m1, *m3, p, which) - p.R()) <= 1e-9 * p.R());
            CHECK_FALSE(level_curve_m3(1.01 * top / p.k1(), p, which));
        }
    }
    CHECK_FALSE(level_curve_m3(-1, Params(100, 0, 1, 1), LevelCurve::R1curve));
}

TEST_CASE("level curves are concave in m1")
{
    const Params p(500, 10, 10, 1);
    const double top = std::pow(500.0, 0.25);
    std::vector<double> ys;
    const int N = 200;
    for (int i = 1; i < N; ++i)
        if (auto m3 = level_curve_m3(top * i / N, p, LevelCurve::R1curve)) ys.push_back(*m3);
    REQUIRE(ys.size() > 150);
    for (std::size_t i = 1; i + 1 < ys.size(); ++i) CHECK(ys[i - 1] - 2 * ys[i] + ys[i + 1] <= 1e-12);
}
