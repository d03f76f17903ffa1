#pragma once

// Rayleigh-fading experiments: average common throughput with and without
// cooperation over a sweep of H-AP power or near-user placement.

#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

#include "wpcn/analysis.hpp"
#include "wpcn/scenario.hpp"

namespace wpcn {

// SplitMix64 (Steele, Lea, Flood 2014). The whole state is one word.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t state = 0) : state_(state) {}

    std::uint64_t next()
    {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // Uniform on (0, 1] with 53 random bits.
    double uniform_open0() { return double((next() >> 11) + 1) * 0x1.0p-53; }

    std::uint64_t state() const { return state_; }
    void set_state(std::uint64_t s) { state_ = s; }

private:
    std::uint64_t state_;
};

// Independent substream for (seed, stream index).
inline SplitMix64 substream(std::uint64_t seed, std::uint64_t index)
{
    SplitMix64 mixer(seed ^ (0xD1B54A32D192ED03ULL * (index + 1)));
    mixer.next();
    return SplitMix64(mixer.next());
}

inline double exp1_from_uniform(double u) { return 0.0 - std::log(u); }

inline FadingDraw draw_fading(SplitMix64& rng)
{
    FadingDraw f;
    f.theta10 = exp1_from_uniform(rng.uniform_open0());
    f.theta20 = exp1_from_uniform(rng.uniform_open0());
    f.theta12 = exp1_from_uniform(rng.uniform_open0());
    return f;
}

enum class SweepKind { P0Dbm, Kappa };

struct McConfig {
    Scenario base = reference_scenario();
    SweepKind sweep = SweepKind::P0Dbm;
    std::vector<double> values{20.0, 25.0, 30.0, 35.0, 40.0};
    std::vector<double> alphas{2.0};
    std::size_t trials = 1000;
    std::uint64_t seed = 1;
    bool fading = true;
    // With perfect CSI the H-AP runs the direct protocol in blocks where the
    // relay protocol is worse (possible once fading makes h12 < h10).
    bool select_protocol = true;
    unsigned threads = 0; // 0: WPCN_THREADS, then hardware concurrency
    CommonOptions common;

    void validate() const
    {
        if (trials < 1) throw InvalidParams("trials must be >= 1");
        if (values.empty() || alphas.empty()) throw InvalidParams("empty sweep");
        base.geometry.validate();
    }
};

struct McPoint {
    double alpha = 0.0;
    double sweep_value = 0.0;
    double mean_coop = 0.0;
    double mean_nocoop = 0.0;
    double stderr_coop = 0.0;
    double stderr_nocoop = 0.0;
    double mean_gain = 0.0;   // paired coop - no-coop
    double stderr_gain = 0.0;
    std::size_t trials = 0;   // successful trials
    std::size_t failures = 0;
    std::size_t dominance_violations = 0;
    std::size_t relay_declined = 0; // trials where the direct protocol won
};

struct McResult {
    std::vector<McPoint> points; // alpha-major, then sweep order
    std::size_t total_failures() const
    {
        std::size_t n = 0;
        for (const auto& p : points) n += p.failures;
        return n;
    }
};

inline unsigned worker_count(unsigned requested)
{
    if (requested > 0) return requested;
    if (const char* env = std::getenv("WPCN_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v > 0) return static_cast<unsigned>(v);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? hw : 1;
}

namespace detail {

struct TrialOutcome {
    double coop = 0.0;
    double nocoop = 0.0;
    bool ok = false;
    bool declined = false;
};

inline Scenario sweep_scenario(const McConfig& cfg, double alpha, double value)
{
    Scenario sc = cfg.base;
    sc.geometry.alpha = alpha;
    if (cfg.sweep == SweepKind::P0Dbm)
        sc.params.p0 = dbm_to_watts(value);
    else
        sc.geometry.kappa = value;
    return sc;
}

inline TrialOutcome run_trial(const McConfig& cfg, const Scenario& sc, std::size_t trial)
{
    TrialOutcome out;
    FadingDraw f;
    if (cfg.fading) {
        // Same channel realization for a trial across every sweep point.
        auto rng = substream(cfg.seed, trial);
        f = draw_fading(rng);
    }
    try {
        const auto rho = sc.rho(f);
        CommonOptions co = cfg.common;
        co.cooperative = true;
        out.coop = common_throughput(rho, co).r_common;
        co.cooperative = false;
        out.nocoop = common_throughput(rho, co).r_common;
        out.ok = std::isfinite(out.coop) && std::isfinite(out.nocoop);
        if (cfg.select_protocol && out.nocoop > out.coop) {
            out.coop = out.nocoop;
            out.declined = true;
        }
    } catch (const Error&) {
        out.ok = false;
    }
    return out;
}

} // namespace detail

// Means are in bits/s (bandwidth applied). Results do not depend on the
// worker count: each trial owns its substream and the reduction runs in
// trial order.
inline McResult average_common_throughput(const McConfig& cfg)
{
    cfg.validate();
    McResult res;
    const unsigned workers = worker_count(cfg.threads);
    for (double alpha : cfg.alphas) {
        for (double value : cfg.values) {
            const Scenario sc = detail::sweep_scenario(cfg, alpha, value);
            const std::size_t n = cfg.fading ? cfg.trials : 1;
            std::vector<detail::TrialOutcome> outcomes(n);
            std::atomic<std::size_t> next{0};
            auto work = [&] {
                for (std::size_t i = next++; i < n; i = next++)
                    outcomes[i] = detail::run_trial(cfg, sc, i);
            };
            if (workers <= 1 || n == 1) {
                work();
            } else {
                std::vector<std::thread> pool;
                for (unsigned k = 0; k < workers; ++k) pool.emplace_back(work);
                for (auto& t : pool) t.join();
            }

            McPoint pt;
            pt.alpha = alpha;
            pt.sweep_value = value;
            double sc1 = 0.0, sc2 = 0.0, sn1 = 0.0, sn2 = 0.0, sg1 = 0.0, sg2 = 0.0;
            for (const auto& o : outcomes) {
                if (!o.ok) {
                    ++pt.failures;
                    continue;
                }
                ++pt.trials;
                if (o.declined) ++pt.relay_declined;
                const double gain = o.coop - o.nocoop;
                if (gain < -1e-9) ++pt.dominance_violations;
                sc1 += o.coop;
                sc2 += o.coop * o.coop;
                sn1 += o.nocoop;
                sn2 += o.nocoop * o.nocoop;
                sg1 += gain;
                sg2 += gain * gain;
            }
            const double bw = sc.params.bandwidth_hz;
            auto moments = [&](double s1, double s2, double& mean, double& se) {
                const double m = pt.trials ? s1 / double(pt.trials) : 0.0;
                double var = 0.0;
                if (pt.trials > 1)
                    var = std::max(0.0, (s2 - double(pt.trials) * m * m) / double(pt.trials - 1));
                mean = bw * m;
                se = pt.trials ? bw * std::sqrt(var / double(pt.trials)) : 0.0;
            };
            moments(sc1, sc2, pt.mean_coop, pt.stderr_coop);
            moments(sn1, sn2, pt.mean_nocoop, pt.stderr_nocoop);
            moments(sg1, sg2, pt.mean_gain, pt.stderr_gain);
            res.points.push_back(pt);
        }
    }
    return res;
}

} // namespace wpcn
