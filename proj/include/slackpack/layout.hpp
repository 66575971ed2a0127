#pragma once

#include <cstdint>
#include <vector>

#include "box_store.hpp"
#include "core.hpp"

namespace slackpack {

struct LayoutRect {
    double x = 0.0, y = 0.0, w = 0.0, h = 0.0;
};

struct PlacedDetail {
    std::uint32_t n = 0;
    LayoutRect rect;
};

struct PlacedBox {
    LayoutRect rect;
    BoxClass cls = BoxClass::Ep1;
    std::uint32_t created_at = 0;
};

/// Geometric record of a layout-mode run: the sheet, every placed detail,
/// every live box, the LRP, and the outlines of all stripes ever cut.
struct Layout {
    DetailKind kind = DetailKind::Rect;
    std::uint64_t n0 = 1;
    double side = 1.0;
    std::vector<PlacedDetail> details;
    std::vector<PlacedBox> boxes;
    std::vector<LayoutRect> stripes;
    LayoutRect lrp;
};

}  // namespace slackpack
