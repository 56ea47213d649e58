#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "logspace.hpp"

namespace holoweld {

/// One checkpoint of the growth ledger. Everything is in natural-log space:
/// log_MB is log M_B(m), itself the log of a doubly exponential quantity.
struct LedgerRow {
    std::uint64_t m = 0;
    double log_a = 0.0;        // log a_m
    double log_MB = 0.0;       // B m + pi D^2 sum_{j=2}^{m-1} j^2 log^4 j
    double log_MB_next = 0.0;  // log M_B(m+1)
    double ratio = 0.0;        // (log 2 + (1-B) log 2 + log M_B(m+1)) / log^{3+eps} a_m
    double compensated = 0.0;  // ratio * (m / log m)^{1/2}
    double r_interp = 0.0;     // (log a_{m+1} / log a_m)^{3+eps/2}
    double alt_form_gap = 0.0; // log-space gap to the sum-of-squared-ratios form
};

struct GrowthLedger {
    double B = 20.0, D = 100.0, eps = 0.5;
    std::uint64_t m_max = 0;
    std::vector<LedgerRow> rows;

    const LedgerRow& row_at(std::uint64_t m) const {
        for (const auto& r : rows)
            if (r.m == m) return r;
        throw std::out_of_range("ledger: no checkpoint at requested m");
    }
};

/// Exact accumulation of log a_m and log M_B(m) up to m_max, with geometric
/// checkpoints. The sums run in long double with Kahan compensation; a full
/// sweep to 1e9 is a few seconds.
inline GrowthLedger growth_ledger(double B, double D, double eps, std::uint64_t m_max,
                                  int points_per_decade = 16) {
    if (m_max < 3) throw std::invalid_argument("growth_ledger: need m_max >= 3");
    GrowthLedger led;
    led.B = B;
    led.D = D;
    led.eps = eps;
    led.m_max = m_max;

    const long double piD2 = static_cast<long double>(M_PI) * D * D;
    const double log2e = std::log(2.0);

    long double s2 = 0.0L, s2_c = 0.0L;       // sum j^2 log^4 j over 2..k
    long double s2_prev = 0.0L;               // same sum over 2..k-1
    long double loga = 0.0L, loga_c = 0.0L;   // log a_k
    const double step = std::pow(10.0, 1.0 / points_per_decade);
    std::uint64_t next_cp = 2;

    auto kahan = [](long double& sum, long double& comp, long double term) {
        const long double y = term - comp;
        const long double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    };

    struct Pending {
        std::uint64_t m;
        double log_a, log_MB;
        long double s2_at_m; // sum up to m, for log_MB(m+1) and the alt form
    };
    std::vector<Pending> pend;

    const double logD = std::log(D);
    for (std::uint64_t k = 2; k <= m_max; ++k) {
        // per-term logs in double keep the sweep fast; the 1e-16 relative
        // term error is far below the 1e-6 acceptance tolerance, while the
        // accumulation itself runs compensated in long double
        const double lk = std::log(static_cast<double>(k));
        const double llk = std::log(lk);
        s2_prev = s2;
        const double lk2 = lk * lk;
        kahan(s2, s2_c, static_cast<long double>(static_cast<double>(k) * k * lk2 * lk2));
        kahan(loga, loga_c, static_cast<long double>(logD + lk + 2.0 * llk));
        if (k <= 32 || k == next_cp || k == m_max) {
            Pending p;
            p.m = k;
            p.log_a = static_cast<double>(loga);
            p.log_MB = static_cast<double>(B * k + piD2 * s2_prev);
            p.s2_at_m = s2;
            pend.push_back(p);
            while (next_cp <= k)
                next_cp = std::max<std::uint64_t>(
                    next_cp + 1,
                    static_cast<std::uint64_t>(std::ceil(next_cp * step)));
        }
    }

    for (const auto& p : pend) {
        LedgerRow r;
        r.m = p.m;
        r.log_a = p.log_a;
        r.log_MB = p.log_MB;
        r.log_MB_next = static_cast<double>(B * (p.m + 1) + piD2 * p.s2_at_m);
        const double lm = std::log(static_cast<double>(p.m));
        const double denom = std::pow(p.log_a, 3.0 + eps);
        r.ratio = (log2e + (1.0 - B) * log2e + r.log_MB_next) / denom;
        r.compensated = r.ratio * std::sqrt(static_cast<double>(p.m) / lm);
        const double log_a_next =
            p.log_a + std::log(D) + std::log(static_cast<double>(p.m + 1)) +
            2.0 * std::log(std::log(static_cast<double>(p.m + 1)));
        r.r_interp = std::pow(log_a_next / p.log_a, 3.0 + 0.5 * eps);
        // sum-of-squared-ratios form of log M_B carries one extra term
        r.alt_form_gap = static_cast<double>(B * p.m + piD2 * p.s2_at_m) - r.log_MB;
        led.rows.push_back(r);
    }
    return led;
}

} // namespace holoweld
