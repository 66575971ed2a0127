#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace slackpack {

/// Kind of detail being packed: R_n rectangles (1/n x 1/(n+1)) or
/// S_n squares (1/n x 1/n). D_n denotes either, with greater side 1/n.
enum class DetailKind : std::uint8_t { Rect, Square };

inline const char* to_string(DetailKind k) {
    return k == DetailKind::Rect ? "rect" : "square";
}

struct Dims {
    double w;  // lesser side
    double h;  // greater side
};

/// Height of D_n is 1/n for both kinds.
inline double detail_height(std::uint64_t n) { return 1.0 / static_cast<double>(n); }

inline double detail_width(DetailKind kind, std::uint64_t n) {
    return kind == DetailKind::Rect ? 1.0 / static_cast<double>(n + 1)
                                    : 1.0 / static_cast<double>(n);
}

inline Dims detail_dims(DetailKind kind, std::uint64_t n) {
    if (n == 0) throw std::domain_error("detail index must be >= 1");
    return {detail_width(kind, n), detail_height(n)};
}

/// x^gamma as exp(gamma*ln x); one convention everywhere so runs reproduce.
inline double pow_gamma(double x, double gamma) {
    return std::exp(gamma * std::log(x));
}

/// 1/n^gamma, the gap reserved beyond a detail side.
inline double gap_term(std::uint64_t n, double gamma) {
    return std::exp(-gamma * std::log(static_cast<double>(n)));
}

/// Neumaier-compensated accumulator. Error stays bounded by ~2 eps times the
/// sum of magnitudes regardless of stream length; exposes both components so
/// checkpoints can restore the exact accumulator state.
struct CompensatedSum {
    double sum = 0.0;
    double comp = 0.0;

    void add(double x) {
        const double t = sum + x;
        if (std::abs(sum) >= std::abs(x))
            comp += (sum - t) + x;
        else
            comp += (x - t) + sum;
        sum = t;
    }
    CompensatedSum& operator+=(double x) { add(x); return *this; }
    double value() const { return sum + comp; }
    void reset() { sum = 0.0; comp = 0.0; }
};

/// Sums a finite stream with compensation; throws on overflow.
template <typename Range>
double compensated_sum(const Range& xs) {
    CompensatedSum acc;
    for (double x : xs) {
        acc.add(x);
        if (std::isinf(acc.sum)) throw std::overflow_error("compensated_sum overflow");
    }
    return acc.value();
}

/// Total area of all details with index >= n0.
/// Rect: sum 1/(k(k+1)) telescopes to exactly 1/n0.
/// Square: sum_{k>=n0} 1/k^2. Summed ascending (small terms first, compensated)
/// up to M = max(n0, 1e5), then an Euler-Maclaurin tail
/// 1/M + 1/(2M^2) + 1/(6M^3) - 1/(30M^5). Relative error < 1e-14.
inline double sheet_area(DetailKind kind, std::uint64_t n0) {
    if (n0 == 0) throw std::domain_error("n0 must be >= 1");
    if (kind == DetailKind::Rect) return 1.0 / static_cast<double>(n0);
    const std::uint64_t M = n0 < 100000 ? 100000 : n0;
    CompensatedSum acc;
    for (std::uint64_t k = M; k-- > n0;) {
        const double kd = static_cast<double>(k);
        acc.add(1.0 / (kd * kd));
    }
    const double m = static_cast<double>(M);
    acc.add(1.0 / m);
    acc.add(1.0 / (2.0 * m * m));
    acc.add(1.0 / (6.0 * m * m * m));
    acc.add(-1.0 / (30.0 * m * m * m * m * m));
    return acc.value();
}

/// Sheet for details D_n, n >= n0: a square of area sheet_area(kind, n0).
struct SheetSpec {
    DetailKind kind;
    std::uint64_t n0;
    double area;
    double side;

    static SheetSpec make(DetailKind kind, std::uint64_t n0) {
        const double a = sheet_area(kind, n0);
        return {kind, n0, a, std::sqrt(a)};
    }
};

/// Algorithm parameter gamma, accepted as a rational p/q and converted once.
struct Gamma {
    std::int64_t p = 4;
    std::int64_t q = 3;
    double value = 4.0 / 3.0;

    static Gamma parse(const std::string& text) {
        const auto slash = text.find('/');
        if (slash == std::string::npos || slash == 0 || slash + 1 == text.size())
            throw std::invalid_argument("gamma must be a rational like 4/3");
        std::size_t ip = 0, iq = 0;
        const std::int64_t p = std::stoll(text.substr(0, slash), &ip);
        const std::int64_t q = std::stoll(text.substr(slash + 1), &iq);
        if (ip != slash || iq != text.size() - slash - 1 || q <= 0 || p <= 0)
            throw std::invalid_argument("gamma must be a positive rational like 4/3");
        return Gamma{p, q, static_cast<double>(p) / static_cast<double>(q)};
    }

    std::string str() const { return std::to_string(p) + "/" + std::to_string(q); }

    /// The algorithm requires sqrt(3/2) < gamma < 3/2.
    bool in_range() const {
        return value > std::sqrt(1.5) && value < 1.5;
    }
};

}  // namespace slackpack
