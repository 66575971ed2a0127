#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "core.hpp"

namespace slackpack {

/// Lineage class of an empty box. Stripes are cut from the LRP; endpoints and
/// normal boxes come from the two guillotine cuts of a placement. First kind:
/// ancestry through stripes / first-kind endpoints only; second kind otherwise.
enum class BoxClass : std::uint8_t { Stripe = 0, Ep1, Ep2, Norm1, Norm2 };

inline const char* to_string(BoxClass c) {
    switch (c) {
        case BoxClass::Stripe: return "stripe";
        case BoxClass::Ep1: return "ep1";
        case BoxClass::Ep2: return "ep2";
        case BoxClass::Norm1: return "norm1";
        case BoxClass::Norm2: return "norm2";
    }
    return "?";
}

constexpr int kBoxClassCount = 5;

/// One empty box. Sides are stored normalized, w <= h. origin_n is the detail
/// index n for a normal box B_n, or the row-start index N for endpoints and
/// stripes. created_at is the time moment t of creation.
struct BoxRec {
    double w = 0.0;
    double h = 0.0;
    std::uint32_t created_at = 0;
    std::uint32_t origin_n = 0;
    BoxClass cls = BoxClass::Stripe;
};

/// Geometric placement of a box, kept only in layout mode.
struct BoxPos {
    double x = 0.0, y = 0.0, gw = 0.0, gh = 0.0;
};

struct ClassAggregate {
    CompensatedSum area;
    std::uint64_t count = 0;
};

/// The set B(t) of live boxes: dense slot storage with a free list plus an
/// indexed binary max-heap ordered by (w desc, created_at asc, id asc), so
/// insert / remove(id) / max_width are all O(log n) with 16-byte heap entries.
/// ~10^8 live boxes fit desk-scale RAM; ids are slot indices and get reused.
class BoxStore {
public:
    using Id = std::uint32_t;
    static constexpr Id npos = std::numeric_limits<Id>::max();

    explicit BoxStore(bool layout_mode = false) : layout_mode_(layout_mode) {}

    Id insert(const BoxRec& rec) {
        if (!(rec.w > 0.0) || rec.w > rec.h)
            throw std::invalid_argument("BoxRec requires 0 < w <= h");
        Id id;
        if (!free_.empty()) {
            id = free_.back();
            free_.pop_back();
            recs_[id] = rec;
        } else {
            id = static_cast<Id>(recs_.size());
            recs_.push_back(rec);
            pos_.push_back(npos);
            if (layout_mode_) geo_.emplace_back();
        }
        if (pos_[id] != npos) throw std::logic_error("duplicate box id");
        heap_push(id);
        auto& agg = agg_[static_cast<int>(rec.cls)];
        agg.area.add(rec.w * rec.h);
        agg.count++;
        return id;
    }

    Id insert(const BoxRec& rec, const BoxPos& pos) {
        Id id = insert(rec);
        if (layout_mode_) geo_[id] = pos;
        return id;
    }

    BoxRec remove(Id id) {
        if (id >= recs_.size() || pos_[id] == npos)
            throw std::out_of_range("box id not found");
        heap_erase(pos_[id]);
        const BoxRec rec = recs_[id];
        auto& agg = agg_[static_cast<int>(rec.cls)];
        agg.area.add(-(rec.w * rec.h));
        agg.count--;
        free_.push_back(id);
        return rec;
    }

    /// Widest live box; ties to the earliest created_at, then the smallest id.
    std::optional<Id> max_width() const {
        if (heap_.empty()) return std::nullopt;
        return heap_[0].id;
    }

    bool contains(Id id) const { return id < recs_.size() && pos_[id] != npos; }
    const BoxRec& get(Id id) const {
        if (!contains(id)) throw std::out_of_range("box id not found");
        return recs_[id];
    }
    const BoxPos& geometry(Id id) const {
        if (!layout_mode_) throw std::logic_error("geometry only kept in layout mode");
        return geo_[id];
    }

    std::uint64_t size() const { return heap_.size(); }
    bool empty() const { return heap_.empty(); }
    bool layout_mode() const { return layout_mode_; }

    double area(BoxClass c) const { return agg_[static_cast<int>(c)].area.value(); }
    std::uint64_t count(BoxClass c) const { return agg_[static_cast<int>(c)].count; }
    double total_area() const {
        double s = 0.0;
        for (const auto& a : agg_) s += a.area.value();
        return s;
    }

    template <typename Fn>
    void for_each_live(Fn&& fn) const {
        for (const auto& e : heap_) fn(e.id, recs_[e.id]);
    }

    // Checkpoint support: raw access to rebuild an identical store, including
    // the free-list order (id assignment must replay identically on resume).
    const std::vector<Id>& free_list() const { return free_; }
    std::size_t slot_count() const { return recs_.size(); }
    const ClassAggregate& aggregate(BoxClass c) const { return agg_[static_cast<int>(c)]; }

    void restore_begin(bool layout_mode, std::size_t slots) {
        layout_mode_ = layout_mode;
        recs_.assign(slots, {});
        pos_.assign(slots, npos);
        geo_.assign(layout_mode ? slots : 0, {});
        heap_.clear();
        free_.clear();
        for (auto& a : agg_) { a.area.reset(); a.count = 0; }
    }
    void restore_box(Id id, const BoxRec& rec, const BoxPos* pos) {
        recs_[id] = rec;
        if (layout_mode_ && pos) geo_[id] = *pos;
        heap_push(id);
    }
    void restore_free_list(std::vector<Id> free_list) { free_ = std::move(free_list); }
    void restore_aggregate(BoxClass c, double sum, double comp, std::uint64_t count) {
        auto& a = agg_[static_cast<int>(c)];
        a.area.sum = sum;
        a.area.comp = comp;
        a.count = count;
    }

private:
    struct HeapEnt {
        double w;
        std::uint32_t created_at;
        Id id;
    };

    // a orders before b when a should sit closer to the heap top
    static bool before(const HeapEnt& a, const HeapEnt& b) {
        if (a.w != b.w) return a.w > b.w;
        if (a.created_at != b.created_at) return a.created_at < b.created_at;
        return a.id < b.id;
    }

    void heap_push(Id id) {
        heap_.push_back({recs_[id].w, recs_[id].created_at, id});
        pos_[id] = static_cast<Id>(heap_.size() - 1);
        sift_up(heap_.size() - 1);
    }

    void heap_erase(std::size_t i) {
        pos_[heap_[i].id] = npos;
        if (i + 1 == heap_.size()) {
            heap_.pop_back();
            return;
        }
        heap_[i] = heap_.back();
        heap_.pop_back();
        pos_[heap_[i].id] = static_cast<Id>(i);
        if (i > 0 && before(heap_[i], heap_[(i - 1) / 2]))
            sift_up(i);
        else
            sift_down(i);
    }

    void sift_up(std::size_t i) {
        HeapEnt e = heap_[i];
        while (i > 0) {
            std::size_t p = (i - 1) / 2;
            if (!before(e, heap_[p])) break;
            heap_[i] = heap_[p];
            pos_[heap_[i].id] = static_cast<Id>(i);
            i = p;
        }
        heap_[i] = e;
        pos_[e.id] = static_cast<Id>(i);
    }

    void sift_down(std::size_t i) {
        HeapEnt e = heap_[i];
        const std::size_t n = heap_.size();
        for (;;) {
            std::size_t c = 2 * i + 1;
            if (c >= n) break;
            if (c + 1 < n && before(heap_[c + 1], heap_[c])) ++c;
            if (!before(heap_[c], e)) break;
            heap_[i] = heap_[c];
            pos_[heap_[i].id] = static_cast<Id>(i);
            i = c;
        }
        heap_[i] = e;
        pos_[e.id] = static_cast<Id>(i);
    }

    bool layout_mode_;
    std::vector<BoxRec> recs_;
    std::vector<BoxPos> geo_;
    std::vector<Id> pos_;  // slot -> heap index, npos when dead
    std::vector<Id> free_;
    std::vector<HeapEnt> heap_;
    ClassAggregate agg_[kBoxClassCount];
};

}  // namespace slackpack
