#pragma once
#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <thread>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "retrial/model.hpp"
#include "retrial/rng.hpp"

namespace retrial {

struct SimConfig {
    SystemParams params;
    std::uint64_t seed = 1;
    std::uint64_t warmup_departures = 0;  // 0: 10% of measured, at least 10^4
    std::uint64_t measured_departures = 1'000'000;
    std::uint32_t replications = 30;
    unsigned threads = 0;  // 0: hardware concurrency

    std::uint64_t effective_warmup() const {
        if (warmup_departures > 0) return warmup_departures;
        return std::max<std::uint64_t>(10'000, measured_departures / 10);
    }

    void validate() const {
        params.validate();
        if (measured_departures == 0) throw ConfigError("simulation: measured_departures must be positive");
        if (measured_departures < 10'000) throw ConfigError("simulation: measured_departures must be at least 10^4");
        if (replications == 0) throw ConfigError("simulation: replications must be at least 1");
    }
};

/// Per-replication sample statistics.
struct ReplicationStats {
    double mean_orbit1_dep = 0, mean_orbit2_dep = 0;
    double mean_orbit1_time = 0, mean_orbit2_time = 0;
    double pi00 = 0, pi10 = 0, pi01 = 0;
    double mean_delay1 = 0, mean_delay2 = 0;
    double mean_sojourn1 = 0, mean_sojourn2 = 0;  // orbit delay plus own service time
    double busy_fraction = 0;
    double pgf1_half = 0, pgf2_half = 0;  // E[0.5^X] at departures
    double slope1 = 0, slope_total = 0;   // least-squares slope vs departure index
    double final_orbit1 = 0, final_orbit2 = 0;
};

struct Estimate {
    double mean = 0.0;
    double ci_halfwidth = std::numeric_limits<double>::infinity();  // 95%, Student t over replications
    double std_error = std::numeric_limits<double>::infinity();

    bool brackets(double v) const { return std::abs(v - mean) <= ci_halfwidth; }
};

struct SimEstimates {
    Estimate mean_orbit1_dep, mean_orbit2_dep, mean_orbit1_time, mean_orbit2_time;
    Estimate pi00, pi10, pi01;
    Estimate mean_delay1, mean_delay2;
    Estimate pgf1_half, pgf2_half;
    Estimate slope1, slope_total;
    Estimate mean_delay;    // orbit delay over all arrivals of both classes
    Estimate mean_sojourn;  // orbit delay plus service, over all arrivals
    Estimate mean_sojourn1, mean_sojourn2, busy_fraction;
    std::vector<ReplicationStats> replications;
};

inline Estimate summarize(const std::vector<double>& xs) {
    Estimate e;
    const std::size_t r = xs.size();
    if (r == 0) return e;
    double m = 0.0;
    for (double x : xs) m += x;
    m /= static_cast<double>(r);
    e.mean = m;
    if (r < 2) return e;
    double v = 0.0;
    for (double x : xs) v += (x - m) * (x - m);
    v /= static_cast<double>(r - 1);
    e.std_error = std::sqrt(v / static_cast<double>(r));
    boost::math::students_t t(static_cast<double>(r - 1));
    e.ci_halfwidth = boost::math::quantile(boost::math::complement(t, 0.025)) * e.std_error;
    return e;
}

namespace detail {

struct Orbit {
    std::vector<double> join_times;

    // Uniformly chosen member leaves; returns its join time.
    double remove_random(RandomStream& rng) {
        const std::size_t k = static_cast<std::size_t>(rng.below(join_times.size()));
        const double t = join_times[k];
        join_times[k] = join_times.back();
        join_times.pop_back();
        return t;
    }
};

/// One replication: warmup, then `measured` departures. Event loop per service cycle:
/// idle competition (arrival vs. retrial clocks), service, Poisson arrivals during service join their orbits.
inline ReplicationStats simulate_replication(const SystemParams& p, std::uint64_t warmup, std::uint64_t measured, RandomStream rng) {
    const double lam = p.lambda(), r1 = p.single_class ? 1.0 : p.r1();
    const double t1 = p.theta1, t2 = p.single_class ? 0.0 : p.theta2;
    Orbit o1, o2;
    double now = 0.0;

    bool measuring = false;
    double t_start = 0.0, area1 = 0.0, area2 = 0.0;
    double sum_x1 = 0, sum_x2 = 0, sum_pgf1 = 0, sum_pgf2 = 0;
    std::uint64_t n00 = 0, n_x2_zero = 0, n_x1_zero = 0;
    double delay_sum1 = 0, delay_sum2 = 0, sojourn_sum1 = 0, sojourn_sum2 = 0, busy_time = 0;
    std::uint64_t arrivals1 = 0, arrivals2 = 0;
    // least-squares accumulators in centred index k - (measured-1)/2
    double sxy1 = 0, sxyt = 0, sxx = 0;
    const double kc = 0.5 * static_cast<double>(measured - 1);

    auto advance = [&](double dt) {
        if (measuring) {
            area1 += dt * static_cast<double>(o1.join_times.size());
            area2 += dt * static_cast<double>(o2.join_times.size());
        }
        now += dt;
    };

    const std::uint64_t total = warmup + measured;
    for (std::uint64_t dep = 0; dep < total; ++dep) {
        if (dep == warmup) {
            measuring = true;
            t_start = now;
        }
        const std::size_t n1 = o1.join_times.size(), n2 = o2.join_times.size();
        const double a1 = n1 > 0 ? t1 : 0.0, a2 = n2 > 0 ? t2 : 0.0;
        const double rate = lam + a1 + a2;
        advance(rng.exponential(rate));

        const double u = rng.uniform() * rate;
        const ServiceDist* service;
        bool served_class1;
        double waited = 0.0;
        if (u < lam) {
            service = &p.b3;
            served_class1 = rng.uniform() < r1;
            if (measuring) ++(served_class1 ? arrivals1 : arrivals2);
        } else if (u < lam + a1) {
            service = &p.b1;
            served_class1 = true;
            waited = now - o1.remove_random(rng);
            if (measuring) delay_sum1 += waited;
        } else {
            service = &p.b2;
            served_class1 = false;
            waited = now - o2.remove_random(rng);
            if (measuring) delay_sum2 += waited;
        }

        const double s = service->sample(rng);
        if (measuring) {
            (served_class1 ? sojourn_sum1 : sojourn_sum2) += waited + s;
            busy_time += s;
        }
        double elapsed = 0.0;
        while (true) {
            const double gap = rng.exponential(lam);
            if (elapsed + gap >= s) break;
            elapsed += gap;
            advance(gap);
            const bool class1 = rng.uniform() < r1;
            (class1 ? o1 : o2).join_times.push_back(now);
            if (measuring) ++(class1 ? arrivals1 : arrivals2);
        }
        advance(s - elapsed);

        if (measuring) {
            const double x1 = static_cast<double>(o1.join_times.size()), x2 = static_cast<double>(o2.join_times.size());
            sum_x1 += x1;
            sum_x2 += x2;
            sum_pgf1 += std::pow(0.5, x1);
            sum_pgf2 += std::pow(0.5, x2);
            if (x1 == 0 && x2 == 0) ++n00;
            if (x2 == 0) ++n_x2_zero;
            if (x1 == 0) ++n_x1_zero;
            const double k = static_cast<double>(dep - warmup) - kc;
            sxy1 += k * x1;
            sxyt += k * (x1 + x2);
            sxx += k * k;
        }
    }

    ReplicationStats r;
    const double m = static_cast<double>(measured);
    const double duration = now - t_start;
    r.mean_orbit1_dep = sum_x1 / m;
    r.mean_orbit2_dep = sum_x2 / m;
    r.mean_orbit1_time = area1 / duration;
    r.mean_orbit2_time = area2 / duration;
    r.pi00 = static_cast<double>(n00) / m;
    r.pi10 = static_cast<double>(n_x2_zero) / m;
    r.pi01 = static_cast<double>(n_x1_zero) / m;
    r.mean_delay1 = arrivals1 ? delay_sum1 / static_cast<double>(arrivals1) : 0.0;
    r.mean_delay2 = arrivals2 ? delay_sum2 / static_cast<double>(arrivals2) : 0.0;
    r.mean_sojourn1 = arrivals1 ? sojourn_sum1 / static_cast<double>(arrivals1) : 0.0;
    r.mean_sojourn2 = arrivals2 ? sojourn_sum2 / static_cast<double>(arrivals2) : 0.0;
    r.busy_fraction = busy_time / duration;
    r.pgf1_half = sum_pgf1 / m;
    r.pgf2_half = sum_pgf2 / m;
    r.slope1 = sxx > 0 ? sxy1 / sxx : 0.0;
    r.slope_total = sxx > 0 ? sxyt / sxx : 0.0;
    r.final_orbit1 = static_cast<double>(o1.join_times.size());
    r.final_orbit2 = static_cast<double>(o2.join_times.size());
    return r;
}

template <class F>
void parallel_for(std::size_t count, unsigned threads, F&& body) {
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, count));
    if (threads <= 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t)
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) body(i);
        });
    for (auto& th : pool) th.join();
}

} // namespace detail

/// Runs all replications (in parallel, one stream per replication) and aggregates.
/// Results depend only on the config: the reduction is ordered by replication index.
inline SimEstimates run(const SimConfig& cfg) {
    cfg.validate();
    std::vector<ReplicationStats> reps(cfg.replications);
    const auto warmup = cfg.effective_warmup();
    detail::parallel_for(cfg.replications, cfg.threads, [&](std::size_t i) {
        reps[i] = detail::simulate_replication(cfg.params, warmup, cfg.measured_departures, RandomStream(cfg.seed, i));
    });
    SimEstimates e;
    auto col = [&](double ReplicationStats::*f) {
        std::vector<double> v;
        v.reserve(reps.size());
        for (const auto& r : reps) v.push_back(r.*f);
        return summarize(v);
    };
    e.mean_orbit1_dep = col(&ReplicationStats::mean_orbit1_dep);
    e.mean_orbit2_dep = col(&ReplicationStats::mean_orbit2_dep);
    e.mean_orbit1_time = col(&ReplicationStats::mean_orbit1_time);
    e.mean_orbit2_time = col(&ReplicationStats::mean_orbit2_time);
    e.pi00 = col(&ReplicationStats::pi00);
    e.pi10 = col(&ReplicationStats::pi10);
    e.pi01 = col(&ReplicationStats::pi01);
    e.mean_delay1 = col(&ReplicationStats::mean_delay1);
    e.mean_delay2 = col(&ReplicationStats::mean_delay2);
    e.pgf1_half = col(&ReplicationStats::pgf1_half);
    e.pgf2_half = col(&ReplicationStats::pgf2_half);
    e.slope1 = col(&ReplicationStats::slope1);
    e.slope_total = col(&ReplicationStats::slope_total);
    e.mean_sojourn1 = col(&ReplicationStats::mean_sojourn1);
    e.mean_sojourn2 = col(&ReplicationStats::mean_sojourn2);
    e.busy_fraction = col(&ReplicationStats::busy_fraction);
    std::vector<double> all, soj;
    const double w1 = cfg.params.single_class ? 1.0 : cfg.params.r1();
    for (const auto& r : reps) {
        all.push_back(w1 * r.mean_delay1 + (1.0 - w1) * r.mean_delay2);
        soj.push_back(w1 * r.mean_sojourn1 + (1.0 - w1) * r.mean_sojourn2);
    }
    e.mean_delay = summarize(all);
    e.mean_sojourn = summarize(soj);
    e.replications = std::move(reps);
    return e;
}

/// Monte-Carlo estimate of the expected number of class-1 customers that join the orbit during a period that ends
/// with the completion of a class-1 retrial service, both orbits held non-empty. Each round is a competition between
/// the primary arrival (B3), class-1 retrial (B1) and class-2 retrial (B2) clocks; class-1 arrivals during the
/// services are counted. Periods per replication = measured_departures / 10.
inline Estimate retrial_success_pgf_check(const SimConfig& cfg) {
    cfg.validate();
    const SystemParams& p = cfg.params;
    const double lam = p.lambda(), t1 = p.theta1, t2 = p.single_class ? 0.0 : p.theta2;
    const double lam1 = p.lambda1;
    const std::uint64_t periods = std::max<std::uint64_t>(1000, cfg.measured_departures / 10);
    std::vector<double> per_rep(cfg.replications);
    detail::parallel_for(cfg.replications, cfg.threads, [&](std::size_t i) {
        RandomStream rng(cfg.seed ^ 0x5DEECE66DULL, i);
        double joined = 0.0;
        for (std::uint64_t k = 0; k < periods; ++k) {
            while (true) {
                const double u = rng.uniform() * (lam + t1 + t2);
                const ServiceDist& b = u < lam ? p.b3 : (u < lam + t1 ? p.b1 : p.b2);
                const double s = b.sample(rng);
                // class-1 arrivals in the service: Poisson(lam1 s) by thinning of the arrival stream
                for (double t = rng.exponential(lam); t < s; t += rng.exponential(lam))
                    if (rng.uniform() * lam < lam1) joined += 1.0;
                if (u >= lam && u < lam + t1) break;
            }
        }
        per_rep[i] = joined / static_cast<double>(periods);
    });
    return summarize(per_rep);
}

} // namespace retrial
