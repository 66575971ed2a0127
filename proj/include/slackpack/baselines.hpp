#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <vector>

#include "core.hpp"
#include "engine.hpp"
#include "layout.hpp"

namespace slackpack {

/// The Paulhus greedy packer: each detail goes into the admissible empty box
/// with the smallest width (ties: smallest height, then creation order). The
/// first cut runs along the detail edge parallel to the lesser box side and
/// the second cut in the part holding the detail, so each placement leaves the
/// same endpoint/normal pair of boxes as the stacking engines. Exact fits
/// produce no box. The LRP is the corner descendant of the initial sheet.
class PaulhusEngine {
public:
    struct Summary {
        RunStatus status = RunStatus::Completed;
        std::uint64_t last_t = 0;
        std::uint64_t placed = 0;
        double ratio_lrp = 0.0;  // S_LRP / S_com at the end
        double s_com = 0.0;
        double s_lrp = 0.0;
    };

    PaulhusEngine(DetailKind kind, std::uint64_t n_start, std::uint64_t count,
                  bool layout_mode = false)
        : kind_(kind), n0_(n_start), max_(count), layout_(layout_mode) {
        if (n_start < 1 || count < 1) throw std::invalid_argument("need n_start, count >= 1");
        sheet_ = SheetSpec::make(kind, n_start);
        s_com_.add(sheet_.area);
        t_ = n_start;
        const std::uint64_t seq = new_box(sheet_.side, sheet_.side, {0, 0, sheet_.side, sheet_.side});
        lrp_ = seq;
    }

    const SheetSpec& sheet() const { return sheet_; }
    std::uint64_t time() const { return t_; }
    std::uint64_t placed() const { return placed_; }
    double s_com() const { return s_com_.value(); }
    double lrp_area() const {
        if (!lrp_) return 0.0;
        const Box& b = boxes_[*lrp_];
        return b.w * b.h;
    }

    template <typename Fn>
    void for_each_live(Fn&& fn) const {
        for (const auto& k : live_) fn(boxes_[k.seq].w, boxes_[k.seq].h);
    }

    /// Packs one detail; false when D_t fits no box.
    bool step() {
        const double w_d = detail_width(kind_, t_);
        const double h_d = detail_height(t_);
        const auto chosen = choose(w_d, h_d);
        if (!chosen) return false;
        place(*chosen, w_d, h_d);
        t_++;
        placed_++;
        return true;
    }

    Summary run() {
        while (placed_ < max_) {
            if (!step()) {
                return summary(RunStatus::FailedStep4);
            }
        }
        return summary(RunStatus::Completed);
    }

    Summary summary(RunStatus st) const {
        Summary s;
        s.status = st;
        s.last_t = t_;
        s.placed = placed_;
        s.s_com = s_com_.value();
        s.s_lrp = lrp_area();
        s.ratio_lrp = s.s_com > 0 ? s.s_lrp / s.s_com : 0.0;
        return s;
    }

    Layout layout() const {
        if (!layout_) throw std::logic_error("layout requires layout mode");
        Layout l;
        l.kind = kind_;
        l.n0 = n0_;
        l.side = sheet_.side;
        l.details = details_;
        for (const auto& k : live_) {
            const Box& b = boxes_[k.seq];
            if (lrp_ && *lrp_ == k.seq)
                continue;  // reported as the LRP rect
            l.boxes.push_back({b.rect, BoxClass::Ep1, static_cast<std::uint32_t>(b.created_at)});
        }
        if (lrp_) l.lrp = boxes_[*lrp_].rect;
        return l;
    }

    /// Smallest admissible width among live boxes, by linear scan. Test hook
    /// for the greedy-choice property.
    std::optional<double> min_admissible_width_scan(double w_d, double h_d) const {
        std::optional<double> best;
        for (const auto& k : live_) {
            const Box& b = boxes_[k.seq];
            if (b.w >= w_d && b.h >= h_d && (!best || b.w < *best)) best = b.w;
        }
        return best;
    }

private:
    struct Box {
        double w = 0, h = 0;
        std::uint64_t created_at = 0;
        LayoutRect rect;
    };
    struct Key {
        double w, h;
        std::uint64_t seq;
        bool operator<(const Key& o) const {
            if (w != o.w) return w < o.w;
            if (h != o.h) return h < o.h;
            return seq < o.seq;
        }
    };

    std::uint64_t new_box(double a, double b, const LayoutRect& rect) {
        Box box;
        box.w = std::min(a, b);
        box.h = std::max(a, b);
        box.created_at = t_;
        if (layout_) box.rect = rect;
        const std::uint64_t seq = boxes_.size();
        boxes_.push_back(box);
        live_.insert({box.w, box.h, seq});
        return seq;
    }

    /// Min admissible width, ties min height then age. Boxes wide enough but
    /// too short all have w in [w_d, h_d), a narrow band, so the scan past
    /// them stays cheap; from w >= h_d onward h >= w >= h_d admits anything.
    std::optional<std::uint64_t> choose(double w_d, double h_d) const {
        auto it = live_.lower_bound({w_d, 0.0, 0});
        while (it != live_.end() && it->h < h_d) ++it;
        if (it == live_.end()) return std::nullopt;
        return it->seq;
    }

    void place(std::uint64_t seq, double w_d, double h_d) {
        const Box b = boxes_[seq];
        live_.erase({b.w, b.h, seq});

        // detail height runs along the box's greater side
        const bool along_x = b.rect.w > b.rect.h;
        LayoutRect drect, eprect, nrect;
        if (layout_) {
            if (along_x) {
                drect = {b.rect.x, b.rect.y, h_d, w_d};
                eprect = {b.rect.x + h_d, b.rect.y, b.h - h_d, b.w};
                nrect = {b.rect.x, b.rect.y + w_d, h_d, b.w - w_d};
            } else {
                drect = {b.rect.x, b.rect.y, w_d, h_d};
                eprect = {b.rect.x, b.rect.y + h_d, b.w, b.h - h_d};
                nrect = {b.rect.x + w_d, b.rect.y, b.w - w_d, h_d};
            }
            details_.push_back({static_cast<std::uint32_t>(t_), drect});
        }

        std::optional<std::uint64_t> ep, norm;
        if (b.h - h_d > 0.0) ep = new_box(b.w, b.h - h_d, eprect);
        if (b.w - w_d > 0.0) norm = new_box(h_d, b.w - w_d, nrect);

        if (lrp_ && *lrp_ == seq) {
            // the endpoint child keeps the far corner; fall back to the normal
            // child when the endpoint degenerates
            if (ep)
                lrp_ = ep;
            else if (norm)
                lrp_ = norm;
            else
                lrp_.reset();
        }
        s_com_.add(-(w_d * h_d));
    }

    DetailKind kind_;
    std::uint64_t n0_;
    std::uint64_t max_;
    bool layout_;
    SheetSpec sheet_{};
    std::uint64_t t_ = 1;
    std::uint64_t placed_ = 0;
    CompensatedSum s_com_;
    std::vector<Box> boxes_;
    std::set<Key> live_;
    std::optional<std::uint64_t> lrp_;
    std::vector<PlacedDetail> details_;
};

inline PaulhusEngine::Summary paulhus_run(DetailKind kind, std::uint64_t n_start,
                                          std::uint64_t count) {
    PaulhusEngine e(kind, n_start, count);
    return e.run();
}

/// Snug stacking: the Slack-Pack engine with every gap term forced to zero.
/// Same code path, flag-controlled; no perfection guarantee.
inline EngineConfig stack_config(DetailKind kind, std::uint64_t n0, std::uint64_t count,
                                 bool layout_mode = false) {
    EngineConfig cfg;
    cfg.kind = kind;
    cfg.n0 = n0;
    cfg.max_details = count;
    cfg.layout_mode = layout_mode;
    cfg.zero_gap = true;
    cfg.checkpoint_every = 0;
    return cfg;
}

inline RunSummary stack_run(DetailKind kind, std::uint64_t n0, std::uint64_t count,
                            const RunSinks& sinks = {}) {
    Engine e(stack_config(kind, n0, count));
    return e.run(sinks);
}

}  // namespace slackpack
