#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <limits>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "diagnostics.hpp"
#include "dynamics.hpp"
#include "hierarchy.hpp"
#include "integrator.hpp"

namespace hkc {

/// Parses "a", "a:d:b", comma lists of those, optionally wrapped in [ ].
inline std::vector<double> parse_range(const std::string& text)
{
    std::string s;
    for (char c : text)
        if (c != '[' && c != ']' && c != ' ' && c != '\t') s += c;
    if (s.empty()) throw std::invalid_argument("empty range expression");
    auto num = [&](const std::string& tok) {
        std::size_t pos = 0;
        double v = 0;
        try {
            v = std::stod(tok, &pos);
        } catch (const std::exception&) {
            pos = std::string::npos;
        }
        if (pos != tok.size() || !std::isfinite(v))
            throw std::invalid_argument("bad number in range: '" + tok + "'");
        return v;
    };
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::vector<std::string> parts;
        std::stringstream is(item);
        std::string p;
        while (std::getline(is, p, ':')) parts.push_back(p);
        if (parts.size() == 1) {
            out.push_back(num(parts[0]));
        } else if (parts.size() == 3) {
            const double a = num(parts[0]), d = num(parts[1]), b = num(parts[2]);
            if (!(d > 0) || a > b) throw std::invalid_argument("range needs d > 0 and a <= b: " + item);
            const long n = long(std::floor((b - a) / d + 1e-9));
            for (long i = 0; i <= n; ++i) out.push_back(a + double(i) * d);
        } else {
            throw std::invalid_argument("bad range item: '" + item + "'");
        }
    }
    if (out.empty()) throw std::invalid_argument("empty range expression");
    return out;
}

/// splitmix64 finalizer; the building block of the counter-based stream below.
inline std::uint64_t mix64(std::uint64_t z)
{
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Uniform [0,1) from (key, counter) with no hidden state.
inline double counter_uniform(std::uint64_t key, std::uint64_t counter)
{
    return double(mix64(mix64(key) ^ mix64(counter + 0x632be59bd9b4e019ULL)) >> 11) * 0x1.0p-53;
}

inline std::uint64_t replicate_key(std::uint64_t seed, std::uint64_t replicate)
{
    return mix64(seed * 0x9e3779b97f4a7c15ULL + mix64(replicate));
}

/// <(x3 - pi/2) f^{(0,m3)}> for the stratified theta mode; zero for odd m3.
inline double uniform_state_coefficient(int m3, double k1)
{
    return m3 % 2 == 0 ? -2.0 * pi / (std::sqrt(k1) * m3) : 0.0;
}

/// Uniform noise of the given amplitude on every slot plus the uniform-state projection.
inline State random_initial_condition(const ModelSpec& spec, std::uint64_t seed,
                                      double amplitude = 0.1, double k1 = 1.0 / std::sqrt(2.0))
{
    State x(spec.dimension());
    for (std::size_t i = 0; i < spec.dimension(); ++i) {
        x[Eigen::Index(i)] = amplitude * (2.0 * counter_uniform(seed, i) - 1.0);
        const auto& n = spec.layout[i];
        if (n.kind == Kind::Theta && n.m.stratified())
            x[Eigen::Index(i)] += uniform_state_coefficient(n.m.m3, k1);
    }
    return x;
}

/** @brief Grid, ensemble and convergence-loop settings for one sweep. */
struct SweepConfig {
    std::vector<double> R_values, S_values;
    int M = 1;
    double P = 10.0;
    double k1 = 1.0 / std::sqrt(2.0);
    int ensemble = 1;
    std::uint64_t seed = 1;
    double amplitude = 0.1;
    IntegratorConfig integrator{1e-8, 1e-8, 1e-4, 1e-12, 0.05, 0.0, 1, 1e10};
    double burn_in = 1.0;          ///< 10^4 steps of 1e-4
    double extension = 1000.0;     ///< time added per failed convergence poll
    double threshold = 0.02;
    int max_extensions = 10;
    double sample_interval = 0.01; ///< spacing of the Nu series used by the 2% rule
    int threads = 0;               ///< 0: HKC_THREADS or hardware concurrency

    void validate() const
    {
        if (R_values.empty() || S_values.empty()) throw std::invalid_argument("empty sweep grid");
        if (ensemble < 1) throw std::invalid_argument("ensemble must be >= 1");
        if (M < 1) throw std::invalid_argument("M must be >= 1");
        if (!(burn_in > 0) || !(extension > 0) || max_extensions < 0 || !(sample_interval > 0))
            throw std::invalid_argument("bad convergence-loop settings");
    }
};

struct SweepRecord {
    double R = 0, S = 0;
    int M = 0;
    std::uint64_t seed = 0;
    int replicate = 0;
    double nu = 1.0;
    double t_final = 0;
    bool converged = false;
    int extensions = 0;
    bool blowup = false;

    bool operator==(const SweepRecord&) const = default;
};

/// Burn-in (discarded), then average over one extension window and poll the 2% rule,
/// extending until it holds or max_extensions runs out.
inline SweepRecord run_point(const CompiledModel& model, const State& ic, const SweepConfig& cfg)
{
    if (!model.report.all_ok()) throw CriteriaError(model.report);
    SweepRecord rec;
    rec.R = model.params.R();
    rec.S = model.params.S();
    rec.M = model.spec.M;

    const auto fw = functional_weights(model.spec, model.params.k1());
    NusseltAccumulator acc(fw);
    ScalarSeries nu;
    double next_sample = 0.0;
    auto obs = [&](double t, const State& x) {
        acc.add(t, x);
        if (t >= next_sample) {
            nu.times.push_back(t);
            nu.values.push_back(acc.value());
            next_sample = t + cfg.sample_interval;
        }
    };

    Stepper st(model, ic, cfg.integrator);
    try {
        st.advance_to(cfg.burn_in);
        obs(st.t(), st.x());
        double horizon = cfg.burn_in + cfg.extension;
        for (;;) {
            st.advance_to(horizon, obs);
            if (nu.times.back() < st.t()) {
                nu.times.push_back(st.t());
                nu.values.push_back(acc.value());
            }
            if (nu.values.size() >= 4 && converged(nu, cfg.threshold)) {
                rec.converged = true;
                break;
            }
            if (rec.extensions == cfg.max_extensions) break;
            ++rec.extensions;
            horizon += cfg.extension;
        }
    } catch (const IntegrationError&) {
        rec.blowup = true;
        rec.converged = false;
    }
    rec.nu = acc.value();
    rec.t_final = st.t();
    return rec;
}

inline int sweep_threads(int requested)
{
    int n = requested;
    if (n <= 0) {
        if (const char* env = std::getenv("HKC_THREADS")) n = std::atoi(env);
        if (n <= 0) n = int(std::max(1u, std::thread::hardware_concurrency()));
    } else if (const char* env = std::getenv("HKC_THREADS")) {
        const int cap = std::atoi(env);
        if (cap > 0) n = std::min(n, cap);
    }
    return std::max(1, n);
}

/// Records in grid order (R outer, S, replicate inner). sink sees each record as it finishes.
inline std::vector<SweepRecord> run_sweep(const SweepConfig& cfg,
                                          const std::function<void(const SweepRecord&)>& sink = {})
{
    cfg.validate();
    const auto spec = build_hkc(cfg.M);
    const std::size_t nR = cfg.R_values.size(), nS = cfg.S_values.size();
    const std::size_t npts = nR * nS, ntasks = npts * std::size_t(cfg.ensemble);

    std::vector<CompiledModel> models;
    models.reserve(npts);
    for (double R : cfg.R_values)
        for (double S : cfg.S_values) models.push_back(compile(spec, Params(R, S, cfg.P, cfg.k1)));

    std::vector<SweepRecord> out(ntasks);
    std::atomic<std::size_t> next{0};
    std::mutex sink_mu;
    auto worker = [&] {
        for (std::size_t t; (t = next.fetch_add(1)) < ntasks;) {
            const std::size_t pt = t / std::size_t(cfg.ensemble);
            const int rep = int(t % std::size_t(cfg.ensemble));
            const auto& model = models[pt];
            const State ic = random_initial_condition(spec, replicate_key(cfg.seed, std::uint64_t(rep)),
                                                      cfg.amplitude, cfg.k1);
            SweepRecord r;
            try {
                r = run_point(model, ic, cfg);
            } catch (const std::exception&) {
                r.R = model.params.R();
                r.S = model.params.S();
                r.M = cfg.M;
                r.nu = std::numeric_limits<double>::quiet_NaN();
                r.blowup = true;
            }
            r.seed = cfg.seed;
            r.replicate = rep;
            out[t] = r;
            if (sink) {
                std::lock_guard<std::mutex> lk(sink_mu);
                sink(r);
            }
        }
    };
    const int nt = std::min<int>(sweep_threads(cfg.threads), int(ntasks));
    if (nt <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int i = 0; i < nt; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    return out;
}

/** @brief Counts per bin center. */
struct Histogram {
    std::vector<double> centers;
    std::vector<long> counts;
};

inline std::vector<double> default_nusselt_bins() { return parse_range("0:0.5:10"); }

/// Nearest center; an exact tie goes to the lower center.
inline Histogram bin_nusselt(const std::vector<double>& values,
                             std::vector<double> centers = default_nusselt_bins())
{
    if (centers.empty()) throw std::invalid_argument("bin_nusselt: no centers");
    for (std::size_t i = 1; i < centers.size(); ++i)
        if (!(centers[i] > centers[i - 1]))
            throw std::invalid_argument("bin_nusselt: centers must be strictly increasing");
    Histogram h{std::move(centers), {}};
    h.counts.assign(h.centers.size(), 0);
    for (double v : values) {
        auto it = std::lower_bound(h.centers.begin(), h.centers.end(), v);
        std::size_t k;
        if (it == h.centers.begin()) k = 0;
        else if (it == h.centers.end()) k = h.centers.size() - 1;
        else {
            const std::size_t hi = std::size_t(it - h.centers.begin());
            k = (v - h.centers[hi - 1] <= h.centers[hi] - v) ? hi - 1 : hi;
        }
        ++h.counts[k];
    }
    return h;
}

inline std::string format_sweep_row(const SweepRecord& r)
{
    char buf[320];
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%d,%llu,%d,%.17g,%.17g,%d,%d,%d", r.R, r.S, r.M,
                  (unsigned long long)r.seed, r.replicate, r.nu, r.t_final, int(r.converged),
                  r.extensions, int(r.blowup));
    return buf;
}

inline const char* sweep_csv_header() { return "R,S,M,seed,replicate,nu,t_final,converged,extensions,blowup"; }

inline void write_histogram_csv(const Histogram& h, std::ostream& out)
{
    out << "bin_center,count\n";
    char buf[64];
    for (std::size_t i = 0; i < h.centers.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g,%ld\n", h.centers[i], h.counts[i]);
        out << buf;
    }
}

} // namespace hkc
