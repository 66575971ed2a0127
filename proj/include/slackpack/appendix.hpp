#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <thread>
#include <vector>

#include "core.hpp"

namespace slackpack {

/// Probabilistic model of surviving second-kind endpoints: a box created at
/// time n carries a width xi_n uniform on [1/n^gamma, 1/t]; the creation time
/// of a surviving box has density g(n) on (t^{1/gamma}, t); eta_n = 1/(n xi_n)
/// is the height-to-width proxy whose mixture mean e(t) satisfies
/// e(t)/ln t -> gamma^2 - 1.
struct MixtureModel {
    double gamma;
    double t;

    MixtureModel(double gamma_, double t_) : gamma(gamma_), t(t_) {
        if (!(gamma > 1.0)) throw std::domain_error("mixture model needs gamma > 1");
        if (!(t > 1.0)) throw std::domain_error("mixture model needs t > 1");
    }

    double n_lo() const { return pow_gamma(t, 1.0 / gamma); }
    double n_hi() const { return t; }

    /// E eta_n = n^{gamma-1} ln(u)/(u-1) with u = n^gamma/t. The factor
    /// ln(u)/(u-1) has a removable singularity at u=1; a cubic expansion takes
    /// over below |u-1| = 1e-6 where the direct quotient loses precision.
    double expected_eta(double n) const {
        const double ng = pow_gamma(n, gamma);
        if (!(ng > t)) throw std::domain_error("expected_eta requires n^gamma > t");
        const double d = ng / t - 1.0;
        double phi;
        if (std::abs(d) < 1e-6)
            phi = 1.0 - d / 2.0 + d * d / 3.0 - d * d * d / 4.0;
        else
            phi = std::log1p(d) / d;
        return pow_gamma(n, gamma - 1.0) * phi;
    }

    /// Fraction of time-n endpoints still uncut at time t:
    /// G(n,t) = (1/t - 1/n^gamma) / (1/n - 1/n^gamma), in [0,1] on the range.
    double survival_G(double n) const {
        check_range(n);
        const double ing = std::exp(-gamma * std::log(n));
        return (1.0 / t - ing) / (1.0 / n - ing);
    }

    /// Creation-time density g(n) = d/dn[G(n,t) n^{1/gamma}] / t^{1/gamma}.
    /// Closed form (derived symbolically, checked against finite differences):
    ///   g(n) = n^{1/gamma} [ gamma^2 n^gamma (t-n) + (n^gamma - t)((gamma+1) n^gamma - n) ]
    ///          / ( gamma t^{1+1/gamma} (n^gamma - n)^2 )
    double density_g(double n) const {
        check_range(n);
        const double ng = pow_gamma(n, gamma);
        const double num =
            gamma * gamma * ng * (t - n) + (ng - t) * ((gamma + 1.0) * ng - n);
        const double den = gamma * pow_gamma(t, 1.0 + 1.0 / gamma) * (ng - n) * (ng - n);
        return pow_gamma(n, 1.0 / gamma) * num / den;
    }

    /// CDF of the creation time: G(n,t) n^{1/gamma} / t^{1/gamma}.
    double cdf(double n) const {
        if (n <= n_lo()) return 0.0;
        if (n >= n_hi()) return 1.0;
        return survival_G(n) * pow_gamma(n, 1.0 / gamma) / pow_gamma(t, 1.0 / gamma);
    }

private:
    void check_range(double n) const {
        if (!(n > n_lo()) || !(n < n_hi()))
            throw std::domain_error("n outside (t^{1/gamma}, t)");
    }
};

namespace detail {

/// Adaptive Simpson on [a, b] with absolute tolerance split per subinterval.
template <typename F>
double adaptive_simpson(const F& f, double a, double b, double fa, double fm, double fb,
                        double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0) throw std::runtime_error("quadrature failed to converge");
    if (std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    return adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

template <typename F>
double integrate(const F& f, double a, double b, double rel_tol) {
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    const double scale = std::max(std::abs(whole), 1e-300);
    return adaptive_simpson(f, a, b, fa, fm, fb, whole, rel_tol * scale, 60);
}

}  // namespace detail

/// e(t) = int g(n) E eta_n dn over (t^{1/gamma}, t), by adaptive quadrature in
/// log space to ~1e-8 relative. The integrand is finite at both ends; the
/// series branch in expected_eta keeps the lower edge stable.
inline double mixture_mean_numeric(const MixtureModel& m, double rel_tol = 1e-8) {
    const double lo = std::log(m.n_lo());
    const double hi = std::log(m.n_hi());
    // nudge off the edges where G's quotient is 0/finite and u-1 underflows
    const double e0 = lo + (hi - lo) * 1e-12;
    const double e1 = hi - (hi - lo) * 1e-12;
    const auto f = [&](double x) {
        const double n = std::exp(x);
        return m.density_g(n) * m.expected_eta(n) * n;
    };
    return detail::integrate(f, e0, e1, rel_tol);
}

/// The explicit integral I from the asymptotic evaluation of e(t):
/// I = (gamma+1) t^{-1/gamma} (t^gamma + t)^{1/gamma^2}
///     ( gamma^2 ((t/(t^gamma+t))^{1/gamma^2} - 1) + ln(t^{gamma-1} + 1) ).
/// Agrees with the exact quadrature to well under 2% by t = 1e10 and
/// approaches (gamma^2-1) ln t only at rate O(1/ln t).
inline double mixture_mean_closed(const MixtureModel& m) {
    const double g = m.gamma, t = m.t;
    const double tg = pow_gamma(t, g);
    if (std::isinf(tg)) throw std::overflow_error("t^gamma overflows");
    const double inv_g2 = 1.0 / (g * g);
    const double a = pow_gamma(tg + t, inv_g2);
    const double b = pow_gamma(t / (tg + t), inv_g2);
    const double l = std::log1p(pow_gamma(t, g - 1.0));
    return (g + 1.0) * std::exp(-std::log(t) / g) * a * (g * g * (b - 1.0) + l);
}

struct MonteCarloResult {
    double mean = 0.0;
    double ci95 = 0.0;
    std::uint64_t samples = 0;
};

/// Samples eta from the mixture: n by 60-step bisection of the closed-form
/// CDF (interval ~2^-60 of the range), then xi uniform on [1/n^gamma, 1/t].
/// Deterministic for a fixed seed; shards derive per-shard seeds and merge by
/// weighted average, so results do not depend on thread scheduling.
inline MonteCarloResult monte_carlo_mixture(const MixtureModel& m, std::uint64_t samples,
                                            std::uint64_t seed, unsigned shards = 1) {
    if (samples < 1000) throw std::invalid_argument("monte_carlo_mixture needs samples >= 1000");
    if (shards == 0) shards = 1;
    const double lo = m.n_lo(), hi = m.n_hi();
    const double inv_t = 1.0 / m.t;

    struct Part {
        double sum = 0, sumsq = 0;
        std::uint64_t n = 0;
    };
    std::vector<Part> parts(shards);
    const std::uint64_t per = samples / shards;

    auto run_shard = [&](unsigned s) {
        std::mt19937_64 rng(seed + 0x9e3779b97f4a7c15ULL * (s + 1));
        std::uniform_real_distribution<double> uni(0.0, 1.0);
        const std::uint64_t count = (s + 1 == shards) ? samples - per * (shards - 1) : per;
        Part p;
        for (std::uint64_t i = 0; i < count; ++i) {
            const double u = uni(rng);
            double a = lo, b = hi;
            for (int it = 0; it < 60; ++it) {
                const double mid = 0.5 * (a + b);
                if (m.cdf(mid) < u)
                    a = mid;
                else
                    b = mid;
            }
            const double n = 0.5 * (a + b);
            const double xi_lo = std::exp(-m.gamma * std::log(n));
            const double xi = xi_lo + (inv_t - xi_lo) * uni(rng);
            const double eta = 1.0 / (n * xi);
            p.sum += eta;
            p.sumsq += eta * eta;
            p.n++;
        }
        parts[s] = p;
    };
    if (shards == 1) {
        run_shard(0);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(shards);
        for (unsigned s = 0; s < shards; ++s) pool.emplace_back(run_shard, s);
        for (auto& th : pool) th.join();
    }

    Part tot;
    for (const auto& p : parts) {
        tot.sum += p.sum;
        tot.sumsq += p.sumsq;
        tot.n += p.n;
    }
    MonteCarloResult r;
    r.samples = tot.n;
    const double nn = static_cast<double>(tot.n);
    r.mean = tot.sum / nn;
    const double var = std::max(0.0, tot.sumsq / nn - r.mean * r.mean);
    r.ci95 = 1.96 * std::sqrt(var / nn);
    return r;
}

}  // namespace slackpack
