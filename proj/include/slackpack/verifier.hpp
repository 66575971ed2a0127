#pragma once

#include <algorithm>
#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "core.hpp"
#include "engine.hpp"
#include "layout.hpp"

namespace slackpack {

/// Findings of the layout verifier; a passing report has every list empty and
/// a small area residual.
struct VerifyReport {
    std::vector<std::pair<std::uint32_t, std::uint32_t>> overlaps;  // rect indices
    std::vector<std::uint32_t> out_of_bounds;
    double area_residual = 0.0;  // (sum of rect areas - sheet area) / sheet area
    std::vector<std::uint64_t> wtcrit_violations;
    std::vector<std::uint32_t> dims_mismatches;

    bool pass(double residual_tol = 1e-9) const {
        return overlaps.empty() && out_of_bounds.empty() && dims_mismatches.empty() &&
               std::abs(area_residual) <= residual_tol;
    }
};

namespace detail {

struct ShrunkRect {
    double x0, y0, x1, y1;
    std::uint32_t idx;
};

/// Guillotine construction shares edges everywhere; shrink interiors by a hair
/// so only true interior intersections count.
inline ShrunkRect shrink(const LayoutRect& r, std::uint32_t idx) {
    const double ex = 1e-12 * r.w;
    const double ey = 1e-12 * r.h;
    return {r.x + ex, r.y + ey, r.x + r.w - ex, r.y + r.h - ey, idx};
}

}  // namespace detail

/// All pairwise interior intersections among `rects`, found by a plane sweep
/// over x with an active set ordered by y-start.
///
/// For the new interval [y0,y1), actives starting inside it are read off a
/// bounded forward scan. Actives starting below y0 can only overlap by
/// covering the point y0; while the active set is pairwise disjoint at most
/// one interval can cover it, and disjoint intervals sorted by start are also
/// sorted by end, so that interval must be the immediate predecessor. Once a
/// finding breaks disjointness the backward scan walks the whole prefix, so
/// enumeration stays exact on invalid layouts. Valid layouts thus verify in
/// O(n log n); invalid ones pay proportionally to how broken they are.
inline std::vector<std::pair<std::uint32_t, std::uint32_t>> find_overlaps(
    const std::vector<LayoutRect>& rects) {
    struct Event {
        double x;
        bool open;
        std::uint32_t i;
    };
    std::vector<detail::ShrunkRect> rs;
    rs.reserve(rects.size());
    for (std::uint32_t i = 0; i < rects.size(); ++i) {
        auto s = detail::shrink(rects[i], i);
        if (s.x1 > s.x0 && s.y1 > s.y0) rs.push_back(s);
    }
    std::vector<Event> events;
    events.reserve(2 * rs.size());
    for (std::uint32_t i = 0; i < rs.size(); ++i) {
        events.push_back({rs[i].x0, true, i});
        events.push_back({rs[i].x1, false, i});
    }
    std::sort(events.begin(), events.end(), [](const Event& a, const Event& b) {
        if (a.x != b.x) return a.x < b.x;
        return a.open < b.open;  // close before open at the same x
    });

    struct YKey {
        double y0, y1;
        std::uint32_t i;
        bool operator<(const YKey& o) const {
            if (y0 != o.y0) return y0 < o.y0;
            if (y1 != o.y1) return y1 < o.y1;
            return i < o.i;
        }
    };
    std::set<YKey> active;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> found;
    bool actives_disjoint = true;
    for (const Event& ev : events) {
        const auto& r = rs[ev.i];
        const YKey key{r.y0, r.y1, ev.i};
        if (!ev.open) {
            active.erase(key);
            continue;
        }
        const std::size_t found_before = found.size();
        auto it = active.lower_bound(key);
        for (auto fwd = it; fwd != active.end() && fwd->y0 < r.y1; ++fwd)
            found.emplace_back(std::min(rs[fwd->i].idx, r.idx), std::max(rs[fwd->i].idx, r.idx));
        if (actives_disjoint) {
            if (it != active.begin()) {
                auto prev = std::prev(it);
                if (prev->y1 > r.y0)
                    found.emplace_back(std::min(rs[prev->i].idx, r.idx),
                                       std::max(rs[prev->i].idx, r.idx));
            }
        } else {
            for (auto rev = it; rev != active.begin();) {
                --rev;
                if (rev->y1 > r.y0)
                    found.emplace_back(std::min(rs[rev->i].idx, r.idx),
                                       std::max(rs[rev->i].idx, r.idx));
            }
        }
        if (found.size() != found_before) actives_disjoint = false;
        active.insert(key);
    }
    std::sort(found.begin(), found.end());
    found.erase(std::unique(found.begin(), found.end()), found.end());
    return found;
}

/// Checks a layout-mode run: pairwise-disjoint interiors over details, live
/// boxes and the LRP together; containment in the sheet; detail dimensions
/// against the closed formulas; and the tiling residual.
inline VerifyReport verify_layout(const Layout& layout, double dims_tol = 1e-12) {
    VerifyReport rep;
    std::vector<LayoutRect> rects;
    rects.reserve(layout.details.size() + layout.boxes.size() + 1);
    for (const auto& d : layout.details) rects.push_back(d.rect);
    for (const auto& b : layout.boxes) rects.push_back(b.rect);
    if (layout.lrp.w > 0 && layout.lrp.h > 0) rects.push_back(layout.lrp);

    rep.overlaps = find_overlaps(rects);

    const double side = layout.side;
    const double slack = 1e-12 * side;
    CompensatedSum covered;
    for (std::uint32_t i = 0; i < rects.size(); ++i) {
        const auto& r = rects[i];
        if (r.x < -slack || r.y < -slack || r.x + r.w > side + slack || r.y + r.h > side + slack)
            rep.out_of_bounds.push_back(i);
        covered.add(r.w * r.h);
    }
    const double sheet = side * side;
    rep.area_residual = (covered.value() - sheet) / sheet;

    for (std::uint32_t i = 0; i < layout.details.size(); ++i) {
        const auto& d = layout.details[i];
        const Dims want = detail_dims(layout.kind, d.n);
        const double got_w = std::min(d.rect.w, d.rect.h);
        const double got_h = std::max(d.rect.w, d.rect.h);
        if (std::abs(got_w - want.w) > dims_tol * want.w ||
            std::abs(got_h - want.h) > dims_tol * want.h)
            rep.dims_mismatches.push_back(i);
    }
    return rep;
}

/// Relative residual of the Step-4 area identity
/// S_LRP + S_norm + S_ep - S_com, taken from one snapshot's sums.
inline double verify_area_identity(double s_lrp, double s_norm, double s_ep, double s_com) {
    return (s_lrp + s_norm + s_ep - s_com) / s_com;
}

/// Critical-time width bound: max w(B) < 1/t + 1/t^gamma at every event.
/// Returns the times at which it fails (informational for zero-gap runs).
inline std::vector<std::uint64_t> verify_wtcrit(const std::vector<CriticalEvent>& events,
                                                double gamma) {
    std::vector<std::uint64_t> bad;
    for (const auto& ev : events) {
        const double bound =
            1.0 / static_cast<double>(ev.t) + gap_term(ev.t, gamma);
        if (!(ev.max_w < bound)) bad.push_back(ev.t);
    }
    return bad;
}

}  // namespace slackpack
