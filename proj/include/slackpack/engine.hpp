#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include "box_store.hpp"
#include "core.hpp"
#include "layout.hpp"

namespace slackpack {

struct EngineConfig {
    DetailKind kind = DetailKind::Rect;
    std::uint64_t n0 = 1;
    Gamma gamma;
    std::uint64_t max_details = 1;
    bool layout_mode = false;
    std::uint64_t checkpoint_every = 10'000'000;
    std::uint64_t stats_stride = 10'000;
    bool zero_gap = false;  // snug-stacking baseline: gap terms forced to 0
    bool allow_gamma_out_of_range = false;

    void validate() const {
        if (n0 < 1) throw std::invalid_argument("n0 must be >= 1");
        if (max_details < 1) throw std::invalid_argument("max_details must be >= 1");
        if (max_details > 2'000'000'000ULL)
            throw std::invalid_argument("max_details exceeds engine index range");
        if (!gamma.in_range() && !allow_gamma_out_of_range && !zero_gap)
            throw std::invalid_argument("gamma " + gamma.str() +
                                        " outside (sqrt(3/2), 3/2); pass the override to force");
    }
};

/// Emitted at every Step-4 moment t in T_crit, before the stripe is cut.
struct CriticalEvent {
    std::uint64_t t = 0;
    double s_lrp = 0, s_norm1 = 0, s_norm2 = 0, s_ep1 = 0, s_ep2 = 0;
    double s_com = 0;
    double ratio = 0;  // s_lrp / s_com
    double max_w = 0;  // max box width at t, 0 when no boxes
};

struct StatSnapshot {
    std::uint64_t t = 0;
    double ratio_lrp = 0, ratio_norm = 0, ratio_ep1 = 0, ratio_ep2 = 0;
    double max_shape_norm = 0;  // running max of w/h^gamma over normal boxes created so far
    double ep2_mean_hw = 0;     // mean h/w over live second-kind endpoints, 0 when none
    std::uint64_t ep2_count = 0;
    double sigma_hat = 0;  // w/h^gamma - 1 of the first stripe's last normal box, 0 until known
};

enum class RunStatus : std::uint8_t { Completed, FailedStep4, BudgetExhausted };

inline const char* to_string(RunStatus s) {
    switch (s) {
        case RunStatus::Completed: return "completed";
        case RunStatus::FailedStep4: return "failed_step4";
        case RunStatus::BudgetExhausted: return "budget_exhausted";
    }
    return "?";
}

struct RunSummary {
    RunStatus status = RunStatus::Completed;
    std::uint64_t last_t = 0;
    std::optional<std::uint64_t> t0;
    std::uint64_t k0 = 0;
    std::uint64_t placed = 0;
    std::uint64_t critical_count = 0;
    std::uint64_t stripe_count = 0;
    double sigma_hat = 0;
    double final_ratio_lrp = 0, final_ratio_norm = 0, final_ratio_ep1 = 0, final_ratio_ep2 = 0;
    double s_com = 0;
    // diagnostics; all provably zero for in-range gamma, counted rather than assumed
    std::uint64_t eq8_violations = 0;
    std::uint64_t assumption1_violations = 0;
    std::uint64_t wtcrit_violations = 0;
    std::uint64_t gap_short_rows = 0;   // rows whose chosen box lacked the full height gap
    std::uint64_t height_rejections = 0;  // Step-3 widest box rejected for height (zero-gap mode)
};

struct TraceEvent {
    enum class Kind : std::uint8_t { ActiveChosen, StripeCut, Placed, Failed } kind;
    std::uint64_t t = 0;
    std::uint32_t box_created_at = 0;  // ActiveChosen: creation time of the chosen box
    BoxClass box_cls = BoxClass::Stripe;
};

struct RunSinks {
    std::function<void(const CriticalEvent&)> on_critical;
    std::function<void(const StatSnapshot&)> on_snapshot;
    std::function<void(std::uint64_t placed, const class Engine&)> on_checkpoint;
    std::function<void(const TraceEvent&)> trace;
};

/// The Slack-Pack state machine (Steps 1-5).
///
/// Boxes are stored with sides normalized w <= h, but the active box keeps the
/// roles fixed at row start: `cross` is the side the row's details span with
/// their widths, `along` is the remaining run the row grows into. Step 2
/// compares `along` against h(D_n) + 1/N^gamma; widths need no check mid-row
/// because cross >= w(D_N) + gap >= w(D_n). The Step-3 pick places its first
/// detail along the chosen box's greater side.
class Engine {
public:
    explicit Engine(const EngineConfig& cfg) : cfg_(cfg), store_(cfg.layout_mode) {
        cfg_.validate();
        sheet_ = SheetSpec::make(cfg_.kind, cfg_.n0);
        t_ = cfg_.n0;
        row_start_ = cfg_.n0;
        lrp_ax_ = sheet_.side;
        lrp_ay_ = sheet_.side;
        lrp_x_ = 0.0;
        lrp_y_ = 0.0;
        s_com_.add(sheet_.area);
        gap_row_ = gap_at(row_start_);
    }

    const EngineConfig& config() const { return cfg_; }
    const SheetSpec& sheet() const { return sheet_; }
    const BoxStore& store() const { return store_; }
    std::uint64_t time() const { return t_; }
    std::uint64_t row_start() const { return row_start_; }
    std::uint64_t placed() const { return placed_; }
    double s_com() const { return s_com_.value(); }
    double lrp_w() const { return std::min(lrp_ax_, lrp_ay_); }
    double lrp_h() const { return std::max(lrp_ax_, lrp_ay_); }
    double lrp_area() const { return lrp_ax_ * lrp_ay_; }
    std::optional<std::uint64_t> t0() const { return t0_; }
    std::uint64_t k0() const { return k0_; }
    double sigma_hat() const { return have_sigma_ ? sigma_hat_ : 0.0; }
    double stripe_width_sum() const { return stripe_width_sum_.value(); }
    bool failed() const { return failed_; }

    /// Runs until `max_details` have been placed, Step 4 fails, or
    /// `stop_after` details have been placed in this call (0 = no extra stop).
    RunSummary run(const RunSinks& sinks = {}, std::uint64_t stop_after = 0) {
        const std::uint64_t stop_at =
            stop_after == 0 ? cfg_.max_details
                            : std::min(cfg_.max_details, placed_ + stop_after);
        while (placed_ < stop_at && !failed_) {
            maybe_snapshot(sinks);
            step_one(sinks);
            if (!failed_ && cfg_.checkpoint_every > 0 && sinks.on_checkpoint &&
                placed_ % cfg_.checkpoint_every == 0 && placed_ < stop_at)
                sinks.on_checkpoint(placed_, *this);
        }
        if (!failed_) maybe_snapshot(sinks, /*force=*/true);
        return summarize(stop_at);
    }

    RunSummary summarize(std::uint64_t stop_at) const {
        RunSummary s;
        if (failed_)
            s.status = RunStatus::FailedStep4;
        else if (placed_ >= cfg_.max_details)
            s.status = RunStatus::Completed;
        else
            s.status = RunStatus::BudgetExhausted;
        (void)stop_at;
        s.last_t = t_;
        s.t0 = t0_;
        s.k0 = first_row_done_ ? k0_ : row_count_;
        s.placed = placed_;
        s.critical_count = critical_count_;
        s.stripe_count = stripe_count_;
        s.sigma_hat = sigma_hat();
        const double sc = s_com_.value();
        if (sc > 0) {
            s.final_ratio_lrp = lrp_area() / sc;
            s.final_ratio_norm =
                (store_.area(BoxClass::Norm1) + store_.area(BoxClass::Norm2)) / sc;
            s.final_ratio_ep1 = store_.area(BoxClass::Ep1) / sc;
            s.final_ratio_ep2 = store_.area(BoxClass::Ep2) / sc;
        }
        s.s_com = sc;
        s.eq8_violations = eq8_violations_;
        s.assumption1_violations = assumption1_violations_;
        s.wtcrit_violations = wtcrit_violations_;
        s.gap_short_rows = gap_short_rows_;
        s.height_rejections = height_rejections_;
        return s;
    }

    StatSnapshot snapshot() const {
        StatSnapshot s;
        s.t = t_;
        const double sc = s_com_.value();
        if (sc > 0) {
            s.ratio_lrp = lrp_area() / sc;
            s.ratio_norm = (store_.area(BoxClass::Norm1) + store_.area(BoxClass::Norm2)) / sc;
            s.ratio_ep1 = store_.area(BoxClass::Ep1) / sc;
            s.ratio_ep2 = store_.area(BoxClass::Ep2) / sc;
        }
        s.max_shape_norm = max_shape_norm_;
        s.ep2_count = store_.count(BoxClass::Ep2);
        s.ep2_mean_hw = s.ep2_count ? ep2_hw_sum_.value() / static_cast<double>(s.ep2_count) : 0.0;
        s.sigma_hat = sigma_hat();
        return s;
    }

    Layout layout() const {
        if (!cfg_.layout_mode) throw std::logic_error("layout requires layout_mode");
        Layout l;
        l.kind = cfg_.kind;
        l.n0 = cfg_.n0;
        l.side = sheet_.side;
        l.details = details_;
        l.stripes = stripe_rects_;
        l.lrp = {lrp_x_, lrp_y_, lrp_ax_, lrp_ay_};
        store_.for_each_live([&](BoxStore::Id id, const BoxRec& rec) {
            const BoxPos& g = store_.geometry(id);
            l.boxes.push_back({{g.x, g.y, g.gw, g.gh}, rec.cls, rec.created_at});
        });
        return l;
    }

    // --- checkpoint support -------------------------------------------------

    struct ActiveState {
        bool present = false;
        BoxStore::Id id = BoxStore::npos;
        double cross = 0, along = 0;
        bool along_is_x = false;
        double x = 0, y = 0;  // active box origin (layout mode)
        BoxClass ep_cls = BoxClass::Ep1, norm_cls = BoxClass::Norm1;
    };

    struct RawState {
        std::uint64_t t, row_start, placed, row_count;
        bool first_row_done;
        std::uint64_t k0;
        std::optional<std::uint64_t> t0;
        double lrp_x, lrp_y, lrp_ax, lrp_ay;
        CompensatedSum s_com, ep2_hw_sum, stripe_width_sum;
        double max_shape_norm, sigma_hat;
        bool have_sigma;
        std::vector<Dims> first_row_norms;
        std::uint64_t critical_count, stripe_count;
        std::uint64_t eq8_violations, assumption1_violations, wtcrit_violations;
        std::uint64_t gap_short_rows, height_rejections;
        std::uint64_t last_snapshot_t;
        ActiveState active;
    };

    RawState raw_state() const {
        RawState r{t_, row_start_, placed_, row_count_, first_row_done_, k0_, t0_,
                   lrp_x_, lrp_y_, lrp_ax_, lrp_ay_, s_com_, ep2_hw_sum_,
                   stripe_width_sum_, max_shape_norm_, sigma_hat_, have_sigma_,
                   first_row_norms_, critical_count_, stripe_count_,
                   eq8_violations_, assumption1_violations_, wtcrit_violations_,
                   gap_short_rows_, height_rejections_, last_snapshot_t_, active_};
        return r;
    }

    void restore_raw_state(const RawState& r) {
        t_ = r.t; row_start_ = r.row_start; placed_ = r.placed; row_count_ = r.row_count;
        first_row_done_ = r.first_row_done; k0_ = r.k0; t0_ = r.t0;
        lrp_x_ = r.lrp_x; lrp_y_ = r.lrp_y; lrp_ax_ = r.lrp_ax; lrp_ay_ = r.lrp_ay;
        s_com_ = r.s_com; ep2_hw_sum_ = r.ep2_hw_sum; stripe_width_sum_ = r.stripe_width_sum;
        max_shape_norm_ = r.max_shape_norm; sigma_hat_ = r.sigma_hat; have_sigma_ = r.have_sigma;
        first_row_norms_ = r.first_row_norms;
        critical_count_ = r.critical_count; stripe_count_ = r.stripe_count;
        eq8_violations_ = r.eq8_violations; assumption1_violations_ = r.assumption1_violations;
        wtcrit_violations_ = r.wtcrit_violations; gap_short_rows_ = r.gap_short_rows;
        height_rejections_ = r.height_rejections; last_snapshot_t_ = r.last_snapshot_t;
        active_ = r.active;
        gap_row_ = gap_at(row_start_);
    }

    BoxStore& mutable_store() { return store_; }
    std::vector<PlacedDetail>& mutable_details() { return details_; }
    std::vector<LayoutRect>& mutable_stripe_rects() { return stripe_rects_; }
    const std::vector<PlacedDetail>& placed_details() const { return details_; }
    const std::vector<LayoutRect>& stripe_rects() const { return stripe_rects_; }

private:
    double gap_at(std::uint64_t n) const {
        return cfg_.zero_gap ? 0.0 : gap_term(n, cfg_.gamma.value);
    }

    void maybe_snapshot(const RunSinks& sinks, bool force = false) {
        if (!sinks.on_snapshot) return;
        if (!force && (cfg_.stats_stride == 0 || t_ % cfg_.stats_stride != 0)) return;
        if (t_ == last_snapshot_t_) return;
        last_snapshot_t_ = t_;
        sinks.on_snapshot(snapshot());
    }

    void step_one(const RunSinks& sinks) {
        const std::uint64_t t = t_;
        const double h_d = detail_height(t);
        const double w_d = detail_width(cfg_.kind, t);

        // Step 2
        bool have_act = active_.present && active_.along >= h_d + gap_row_;
        if (!have_act) {
            end_row();
            // Step 3
            row_start_ = t;
            gap_row_ = gap_at(t);
            bool selected = false;
            if (auto id = store_.max_width()) {
                const BoxRec& b = store_.get(*id);
                if (b.w >= w_d + gap_row_) {
                    if (b.h >= h_d) {
                        select_active(*id, b, sinks);
                        if (b.h < h_d + gap_row_) gap_short_rows_++;
                        selected = true;
                    } else {
                        // cannot happen for in-range gamma (w+gap >= h(D)); in
                        // zero-gap mode the widest box may be too short
                        height_rejections_++;
                    }
                }
            }
            if (!selected && !cut_stripe(t, h_d, w_d, sinks)) return;  // Step 4 failed
        }

        place_detail(t, h_d, w_d, sinks);  // Step 5
        t_ = t + 1;
    }

    void end_row() {
        if (!first_row_done_ && row_count_ > 0) {
            k0_ = row_count_;
            first_row_done_ = true;
            if (!first_row_norms_.empty() && !cfg_.zero_gap) {
                // 1+sigma from the last normal box of the first stripe (~B)
                const Dims last = first_row_norms_.back();
                sigma_hat_ = last.w / pow_gamma(last.h, cfg_.gamma.value) - 1.0;
                have_sigma_ = true;
                for (const Dims& d : first_row_norms_) check_assumption1(d.w, d.h);
                first_row_norms_.clear();
            }
        }
        row_count_ = 0;
        active_.present = false;
    }

    void select_active(BoxStore::Id id, const BoxRec& b, const RunSinks& sinks) {
        active_.present = true;
        active_.id = id;
        active_.cross = b.w;
        active_.along = b.h;
        active_.ep_cls =
            (b.cls == BoxClass::Stripe || b.cls == BoxClass::Ep1) ? BoxClass::Ep1 : BoxClass::Ep2;
        active_.norm_cls = (b.cls == BoxClass::Stripe) ? BoxClass::Norm1 : BoxClass::Norm2;
        if (cfg_.layout_mode) {
            const BoxPos& g = store_.geometry(id);
            active_.x = g.x;
            active_.y = g.y;
            active_.along_is_x = g.gw > g.gh;  // greater side carries the row
        }
        if ((b.cls == BoxClass::Norm1 || b.cls == BoxClass::Norm2) && !t0_) t0_ = t_;
        if (sinks.trace)
            sinks.trace({TraceEvent::Kind::ActiveChosen, t_, b.created_at, b.cls});
    }

    bool cut_stripe(std::uint64_t t, double h_d, double w_d, const RunSinks& sinks) {
        emit_critical(t, sinks);
        const double lrp_w_ = lrp_w();
        if (lrp_w_ < h_d + gap_row_) {
            failed_ = true;
            if (sinks.trace) sinks.trace({TraceEvent::Kind::Failed, t, 0, BoxClass::Stripe});
            return false;
        }
        const double tau = w_d + gap_row_;
        const bool portrait = lrp_ay_ >= lrp_ax_;
        double sx = lrp_x_, sy = lrp_y_;
        double length;
        if (portrait) {
            length = lrp_ax_;
            lrp_y_ += tau;
            lrp_ay_ -= tau;
        } else {
            length = lrp_ay_;
            lrp_x_ += tau;
            lrp_ax_ -= tau;
        }
        stripe_count_++;
        stripe_width_sum_.add(tau);

        BoxRec rec;
        rec.w = std::min(tau, length);
        rec.h = std::max(tau, length);
        rec.cls = BoxClass::Stripe;
        rec.created_at = static_cast<std::uint32_t>(t);
        rec.origin_n = static_cast<std::uint32_t>(t);
        BoxStore::Id id;
        if (cfg_.layout_mode) {
            const BoxPos pos = portrait ? BoxPos{sx, sy, length, tau} : BoxPos{sx, sy, tau, length};
            stripe_rects_.push_back({pos.x, pos.y, pos.gw, pos.gh});
            id = store_.insert(rec, pos);
            active_.x = sx;
            active_.y = sy;
            active_.along_is_x = portrait;
        } else {
            id = store_.insert(rec);
        }
        active_.present = true;
        active_.id = id;
        active_.cross = tau;
        active_.along = length;
        active_.ep_cls = BoxClass::Ep1;
        active_.norm_cls = BoxClass::Norm1;
        if (sinks.trace) sinks.trace({TraceEvent::Kind::StripeCut, t, 0, BoxClass::Stripe});
        return true;
    }

    void emit_critical(std::uint64_t t, const RunSinks& sinks) {
        critical_count_++;
        CriticalEvent ev;
        ev.t = t;
        ev.s_lrp = lrp_area();
        ev.s_norm1 = store_.area(BoxClass::Norm1);
        ev.s_norm2 = store_.area(BoxClass::Norm2);
        ev.s_ep1 = store_.area(BoxClass::Ep1);
        ev.s_ep2 = store_.area(BoxClass::Ep2);
        ev.s_com = s_com_.value();
        ev.ratio = ev.s_com > 0 ? ev.s_lrp / ev.s_com : 0.0;
        if (auto id = store_.max_width()) ev.max_w = store_.get(*id).w;
        const double bound = 1.0 / static_cast<double>(t) + gap_term(t, cfg_.gamma.value);
        if (!(ev.max_w < bound) && !cfg_.zero_gap) wtcrit_violations_++;
        if (sinks.on_snapshot) {
            if (t != last_snapshot_t_) {
                last_snapshot_t_ = t;
                sinks.on_snapshot(snapshot());
            }
        }
        if (sinks.on_critical) sinks.on_critical(ev);
    }

    void check_shape_at_creation(double w, double h) {
        const double hg = pow_gamma(h, cfg_.gamma.value);
        const double ratio = w / hg;
        if (ratio > max_shape_norm_) max_shape_norm_ = ratio;
        if (w < hg * (1.0 - 1e-12)) eq8_violations_++;  // Eq. (8): h^gamma <= w
        if (have_sigma_) {
            if (w > (1.0 + sigma_hat_) * hg * (1.0 + 1e-12)) assumption1_violations_++;
        } else if (!first_row_done_) {
            first_row_norms_.push_back({w, h});
        }
    }

    void check_assumption1(double w, double h) {
        const double hg = pow_gamma(h, cfg_.gamma.value);
        if (w > (1.0 + sigma_hat_) * hg * (1.0 + 1e-12)) assumption1_violations_++;
    }

    void place_detail(std::uint64_t t, double h_d, double w_d, const RunSinks& sinks) {
        const double cross = active_.cross;
        const double along = active_.along;
        const double ep_along = along - h_d;
        const double norm_w = cross - w_d;

        if (sinks.trace)
            sinks.trace({TraceEvent::Kind::Placed, t,
                         store_.get(active_.id).created_at, store_.get(active_.id).cls});

        // consuming a live second-kind endpoint takes its h/w back out of the
        // running mean; same division as at insert, so the sum cancels exactly
        {
            const BoxRec& act = store_.get(active_.id);
            if (act.cls == BoxClass::Ep2) ep2_hw_sum_.add(-(act.h / act.w));
        }
        store_.remove(active_.id);

        // normal box beside the detail
        if (norm_w > 0.0) {
            BoxRec nb;
            nb.w = std::min(h_d, norm_w);
            nb.h = std::max(h_d, norm_w);
            nb.cls = active_.norm_cls;
            nb.created_at = static_cast<std::uint32_t>(t);
            nb.origin_n = static_cast<std::uint32_t>(t);
            if (!cfg_.zero_gap) check_shape_at_creation(nb.w, nb.h);
            if (cfg_.layout_mode) {
                BoxPos pos = active_.along_is_x
                                 ? BoxPos{active_.x, active_.y + w_d, h_d, norm_w}
                                 : BoxPos{active_.x + w_d, active_.y, norm_w, h_d};
                store_.insert(nb, pos);
            } else {
                store_.insert(nb);
            }
        }

        // detail itself (layout record)
        if (cfg_.layout_mode) {
            const LayoutRect r = active_.along_is_x
                                     ? LayoutRect{active_.x, active_.y, h_d, w_d}
                                     : LayoutRect{active_.x, active_.y, w_d, h_d};
            details_.push_back({static_cast<std::uint32_t>(t), r});
        }

        // endpoint continues the row
        if (ep_along > 0.0) {
            BoxRec eb;
            eb.w = std::min(cross, ep_along);
            eb.h = std::max(cross, ep_along);
            eb.cls = active_.ep_cls;
            eb.created_at = static_cast<std::uint32_t>(t);
            eb.origin_n = static_cast<std::uint32_t>(row_start_);
            BoxPos pos;
            if (cfg_.layout_mode) {
                pos = active_.along_is_x
                          ? BoxPos{active_.x + h_d, active_.y, ep_along, cross}
                          : BoxPos{active_.x, active_.y + h_d, cross, ep_along};
                active_.id = store_.insert(eb, pos);
                active_.x = pos.x;
                active_.y = pos.y;
            } else {
                active_.id = store_.insert(eb);
            }
            if (eb.cls == BoxClass::Ep2) ep2_hw_sum_.add(eb.h / eb.w);
            active_.along = ep_along;
        } else {
            active_.present = false;
        }

        s_com_.add(-(w_d * h_d));
        placed_++;
        row_count_++;
    }

    EngineConfig cfg_;
    SheetSpec sheet_{};
    BoxStore store_;

    std::uint64_t t_ = 0;
    std::uint64_t row_start_ = 0;
    double gap_row_ = 0.0;
    std::uint64_t placed_ = 0;
    std::uint64_t row_count_ = 0;
    bool first_row_done_ = false;
    std::uint64_t k0_ = 0;
    std::optional<std::uint64_t> t0_;
    bool failed_ = false;

    double lrp_x_ = 0, lrp_y_ = 0, lrp_ax_ = 0, lrp_ay_ = 0;
    CompensatedSum s_com_;
    CompensatedSum ep2_hw_sum_;
    CompensatedSum stripe_width_sum_;
    double max_shape_norm_ = 0.0;
    double sigma_hat_ = 0.0;
    bool have_sigma_ = false;
    std::vector<Dims> first_row_norms_;

    std::uint64_t critical_count_ = 0;
    std::uint64_t stripe_count_ = 0;
    std::uint64_t eq8_violations_ = 0;
    std::uint64_t assumption1_violations_ = 0;
    std::uint64_t wtcrit_violations_ = 0;
    std::uint64_t gap_short_rows_ = 0;
    std::uint64_t height_rejections_ = 0;
    std::uint64_t last_snapshot_t_ = 0;

    ActiveState active_;
    std::vector<PlacedDetail> details_;
    std::vector<LayoutRect> stripe_rects_;
};

}  // namespace slackpack
