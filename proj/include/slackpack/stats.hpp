#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "box_store.hpp"
#include "core.hpp"
#include "engine.hpp"

namespace slackpack {

/// Band widths for the asymptotic monitors. The paper's statements hold for
/// n0 -> infinity; at desk scale every verdict distinguishes a hard invariant
/// violation from an asymptotic band missed at small scale.
struct MonitorConfig {
    double delta = 0.05;  // LRP-ratio slack below 1 - 1/gamma
    double eps = 0.05;    // band for the key lemma / ep1 smallness / t0 estimate
};

// --- LRP ratio (main inequality) -------------------------------------------

struct LrpRatioVerdict {
    bool pass = true;
    double threshold = 0.0;       // 1 - 1/gamma - delta
    std::uint64_t from_t = 0;     // events with t > from_t considered
    std::uint64_t considered = 0;
    double min_ratio = 0.0;
    std::uint64_t first_bad_t = 0;
};

inline LrpRatioVerdict monitor_lrp_ratio(const std::vector<CriticalEvent>& events, double gamma,
                                         std::uint64_t from_t, double delta) {
    LrpRatioVerdict v;
    v.threshold = 1.0 - 1.0 / gamma - delta;
    v.from_t = from_t;
    bool first = true;
    for (const auto& ev : events) {
        if (ev.t <= from_t) continue;
        v.considered++;
        if (first || ev.ratio < v.min_ratio) v.min_ratio = ev.ratio;
        first = false;
        if (ev.ratio <= v.threshold && v.pass) {
            v.pass = false;
            v.first_bad_t = ev.t;
        }
    }
    return v;
}

/// Mean critical-time ratio over t in (t_hi/10, t_hi].
inline std::optional<double> mean_ratio_last_decade(const std::vector<CriticalEvent>& events,
                                                    std::uint64_t t_hi) {
    CompensatedSum acc;
    std::uint64_t n = 0;
    for (const auto& ev : events)
        if (ev.t > t_hi / 10 && ev.t <= t_hi) {
            acc.add(ev.ratio);
            n++;
        }
    if (!n) return std::nullopt;
    return acc.value() / static_cast<double>(n);
}

// --- Assumption 1 (normal-box shape) ----------------------------------------

struct Assumption1Verdict {
    bool ready = false;       // first stripe complete, sigma_hat known
    double sigma_hat = 0.0;   // 1+sigma := w(~B)/h(~B)^gamma of the first stripe's last normal box
    bool eq8_pass = true;     // unconditional h^gamma <= w at creation
    bool pass = true;         // w <= (1+sigma)h^gamma for every normal box
    std::uint64_t violations = 0;
    double max_shape_norm = 0.0;
};

/// Creation-time verdict from the engine's own counters. Boxes never mutate,
/// so checking each normal box once at creation covers every later snapshot.
inline Assumption1Verdict monitor_assumption1(const RunSummary& summary, double max_shape_norm) {
    Assumption1Verdict v;
    v.ready = summary.sigma_hat > 0.0 || summary.k0 > 0;
    v.sigma_hat = summary.sigma_hat;
    v.eq8_pass = summary.eq8_violations == 0;
    v.violations = summary.assumption1_violations;
    v.pass = v.eq8_pass && summary.assumption1_violations == 0;
    v.max_shape_norm = max_shape_norm;
    return v;
}

/// Direct store scan, for spot checks on live boxes at one instant.
inline Assumption1Verdict check_assumption1_live(const BoxStore& store, double gamma,
                                                 double sigma_hat) {
    Assumption1Verdict v;
    v.ready = true;
    v.sigma_hat = sigma_hat;
    store.for_each_live([&](BoxStore::Id, const BoxRec& rec) {
        if (rec.cls != BoxClass::Norm1 && rec.cls != BoxClass::Norm2) return;
        const double hg = pow_gamma(rec.h, gamma);
        const double ratio = rec.w / hg;
        if (ratio > v.max_shape_norm) v.max_shape_norm = ratio;
        if (rec.w < hg * (1.0 - 1e-12)) {
            v.eq8_pass = false;
            v.violations++;
        }
        if (rec.w > (1.0 + sigma_hat) * hg * (1.0 + 1e-12)) {
            v.pass = false;
            v.violations++;
        }
    });
    v.pass = v.pass && v.eq8_pass;
    return v;
}

// --- Assumption 2 (second-kind endpoint h/w mean) ----------------------------

struct Ep2SeriesPoint {
    std::uint64_t t = 0;
    double mean_hw = 0.0;
    double per_log_t = 0.0;  // mean_hw / ln t
};

struct Assumption2Verdict {
    std::vector<Ep2SeriesPoint> series;
    double reference = 0.0;  // gamma^2 - 1
    double last_value = 0.0;
    bool in_band = false;
};

inline Assumption2Verdict monitor_assumption2(const std::vector<StatSnapshot>& snaps, double gamma,
                                              std::uint64_t t0, double band_lo, double band_hi) {
    Assumption2Verdict v;
    v.reference = gamma * gamma - 1.0;
    for (const auto& s : snaps) {
        if (s.t <= t0 || s.ep2_count == 0) continue;
        const double lt = std::log(static_cast<double>(s.t));
        v.series.push_back({s.t, s.ep2_mean_hw, s.ep2_mean_hw / lt});
    }
    if (!v.series.empty()) {
        v.last_value = v.series.back().per_log_t;
        v.in_band = v.last_value >= band_lo && v.last_value <= band_hi;
    }
    return v;
}

/// Series value at the latest snapshot with t <= each decade 10^k, k ascending.
inline std::vector<Ep2SeriesPoint> decade_points(const std::vector<Ep2SeriesPoint>& series) {
    std::vector<Ep2SeriesPoint> out;
    if (series.empty()) return out;
    for (std::uint64_t dec = 10; dec <= series.back().t; dec *= 10) {
        const Ep2SeriesPoint* best = nullptr;
        for (const auto& p : series)
            if (p.t <= dec && (!best || p.t > best->t)) best = &p;
        if (best && (out.empty() || out.back().t != best->t)) out.push_back(*best);
    }
    return out;
}

/// |v - center| strictly decreasing over the last `count` points.
inline bool monotone_toward(const std::vector<Ep2SeriesPoint>& pts, double center,
                            std::size_t count) {
    if (pts.size() < count) return false;
    for (std::size_t i = pts.size() - count; i + 1 < pts.size(); ++i)
        if (std::abs(pts[i + 1].per_log_t - center) >= std::abs(pts[i].per_log_t - center))
            return false;
    return true;
}

// --- Second-kind endpoint survival histogram ---------------------------------

struct SurvivalBucket {
    double n = 0.0;                 // bucket upper edge (creation time)
    std::uint64_t actual_cum = 0;   // live Ep2 boxes with created_at <= n
    double predicted = 0.0;         // G(n,t) n^{1/gamma}
    double predicted_simple = 0.0;  // n^{1/gamma + 1} / t
};

/// Live second-kind endpoints bucketed by creation time against the mixture
/// model's survival prediction, on a log grid over (t^{1/gamma}, t).
inline std::vector<SurvivalBucket> ep2_survival_histogram(const BoxStore& store, std::uint64_t t,
                                                          double gamma, std::size_t buckets = 64) {
    const double td = static_cast<double>(t);
    const double lo = pow_gamma(td, 1.0 / gamma);
    std::vector<SurvivalBucket> out(buckets);
    for (std::size_t i = 0; i < buckets; ++i) {
        const double n = lo * std::exp((std::log(td) - std::log(lo)) *
                                       static_cast<double>(i + 1) / static_cast<double>(buckets));
        out[i].n = n;
        const double G = (1.0 / td - std::exp(-gamma * std::log(n))) /
                         (1.0 / n - std::exp(-gamma * std::log(n)));
        out[i].predicted = std::max(0.0, G) * pow_gamma(n, 1.0 / gamma);
        out[i].predicted_simple = pow_gamma(n, 1.0 / gamma + 1.0) / td;
    }
    store.for_each_live([&](BoxStore::Id, const BoxRec& rec) {
        if (rec.cls != BoxClass::Ep2) return;
        const double c = static_cast<double>(rec.created_at);
        // count into every bucket with edge >= c (cumulative)
        auto it = std::lower_bound(out.begin(), out.end(), c,
                                   [](const SurvivalBucket& b, double v) { return b.n < v; });
        for (; it != out.end(); ++it) it->actual_cum++;
    });
    return out;
}

// --- t0 / k0 ------------------------------------------------------------------

struct T0K0Verdict {
    bool ready = false;   // t0 reached
    bool k0_pass = false; // k0 >= floor(sqrt(n0)) - 1, a proved bound
    std::uint64_t k0 = 0;
    std::uint64_t k0_bound = 0;
    double t0_ratio = 0.0;   // t0 / n0^gamma
    bool t0_in_band = false; // in [1/(1+sigma), 1+eps]; asymptotic, informational at small n0
};

inline T0K0Verdict check_t0_k0(const RunSummary& summary, const EngineConfig& cfg,
                               const MonitorConfig& mc = {}) {
    T0K0Verdict v;
    v.k0 = summary.k0;
    const auto root = static_cast<std::uint64_t>(std::floor(std::sqrt(static_cast<double>(cfg.n0))));
    v.k0_bound = root > 0 ? root - 1 : 0;
    v.k0_pass = summary.k0 >= v.k0_bound;
    if (summary.t0) {
        v.ready = true;
        v.t0_ratio = static_cast<double>(*summary.t0) /
                     pow_gamma(static_cast<double>(cfg.n0), cfg.gamma.value);
        const double lo = 1.0 / (1.0 + std::max(summary.sigma_hat, 0.0));
        v.t0_in_band = v.t0_ratio >= lo && v.t0_ratio <= 1.0 + mc.eps;
    }
    return v;
}

// --- Lemma monitors at critical times ----------------------------------------

struct LemmaReport {
    // key lemma: S_norm/S_com < 1/gamma + eps for t > 2 n0^gamma
    std::uint64_t keylemma_checked = 0, keylemma_misses = 0;
    double keylemma_max = 0.0;
    // first-kind endpoint smallness: S_ep1/S_com < eps
    std::uint64_t ep1_checked = 0, ep1_misses = 0;
    double ep1_max = 0.0;
    // second-kind decay: S_ep2 t^{2-1/gamma} / ln t stays bounded (trend only)
    double ep2_decay_max = 0.0, ep2_decay_last = 0.0;
};

inline LemmaReport lemma_monitors(const std::vector<CriticalEvent>& events, double gamma,
                                  std::uint64_t n0, const MonitorConfig& mc = {}) {
    LemmaReport r;
    const double from_t = 2.0 * pow_gamma(static_cast<double>(n0), gamma);
    const double key_bound = 1.0 / gamma + mc.eps;
    for (const auto& ev : events) {
        if (static_cast<double>(ev.t) <= from_t || ev.s_com <= 0) continue;
        const double norm_ratio = (ev.s_norm1 + ev.s_norm2) / ev.s_com;
        r.keylemma_checked++;
        r.keylemma_max = std::max(r.keylemma_max, norm_ratio);
        if (norm_ratio >= key_bound) r.keylemma_misses++;
        const double ep1_ratio = ev.s_ep1 / ev.s_com;
        r.ep1_checked++;
        r.ep1_max = std::max(r.ep1_max, ep1_ratio);
        if (ep1_ratio >= mc.eps) r.ep1_misses++;
        const double td = static_cast<double>(ev.t);
        const double decay = ev.s_ep2 * pow_gamma(td, 2.0 - 1.0 / gamma) / std::log(td);
        r.ep2_decay_max = std::max(r.ep2_decay_max, decay);
        r.ep2_decay_last = decay;
    }
    return r;
}

}  // namespace slackpack
