#pragma once

#include <algorithm>
#include <cstdio>
#include <stdexcept>
#include <string>

#include "layout.hpp"

namespace slackpack {

/// Figure colors: endpoints in shades of green, normal boxes in shades of
/// yellow, first kind dark and second kind light.
struct Palette {
    std::string stripe_outline = "#555555";
    std::string detail_fill = "#e8e8e8";
    std::string detail_outline = "#888888";
    std::string ep1_fill = "#2e7d32";   // dark green
    std::string ep2_fill = "#a5d6a7";   // light green
    std::string norm1_fill = "#f9a825"; // dark yellow
    std::string norm2_fill = "#fff59d"; // light yellow
    std::string lrp_fill = "#ffffff";
    std::string lrp_outline = "#bbbbbb";
};

struct RenderOptions {
    std::size_t label_max_details = 200;  // index labels drawn at or below this count
    double label_scale = 0.35;            // font size as a fraction of detail height
    double stroke_scale = 5e-4;           // stroke width relative to the sheet side
};

namespace detail {

inline void fmt12(std::string& out, double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    out += buf;
}

/// One rect element; y flipped so the sheet origin sits bottom-left.
inline void svg_rect(std::string& out, const LayoutRect& r, double side,
                     const std::string& fill, const std::string& stroke, double stroke_w) {
    out += "<rect x=\"";
    fmt12(out, r.x);
    out += "\" y=\"";
    fmt12(out, side - r.y - r.h);
    out += "\" width=\"";
    fmt12(out, r.w);
    out += "\" height=\"";
    fmt12(out, r.h);
    out += "\" fill=\"" + fill + "\"";
    if (!stroke.empty()) {
        out += " stroke=\"" + stroke + "\" stroke-width=\"";
        fmt12(out, stroke_w);
        out += "\"";
    }
    out += "/>\n";
}

}  // namespace detail

/// Deterministic SVG for a layout: one rect per detail, per live box and the
/// LRP, plus stripe outlines; byte-stable for identical input.
inline std::string render_svg(const Layout& layout, const Palette& pal = {},
                              const RenderOptions& opt = {}) {
    if (layout.details.empty() && layout.boxes.empty() && !(layout.lrp.w > 0))
        throw std::invalid_argument(
            "layout has no geometry; run the engine in layout mode to render");
    const double side = layout.side;
    const double sw = opt.stroke_scale * side;
    std::string out;
    out.reserve(4096 + 128 * (layout.details.size() + layout.boxes.size()));
    out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 ";
    detail::fmt12(out, side);
    out += " ";
    detail::fmt12(out, side);
    out += "\">\n";

    detail::svg_rect(out, layout.lrp, side, pal.lrp_fill, pal.lrp_outline, sw);
    for (const auto& b : layout.boxes) {
        const std::string* fill = &pal.ep1_fill;
        switch (b.cls) {
            case BoxClass::Ep1: fill = &pal.ep1_fill; break;
            case BoxClass::Ep2: fill = &pal.ep2_fill; break;
            case BoxClass::Norm1: fill = &pal.norm1_fill; break;
            case BoxClass::Norm2: fill = &pal.norm2_fill; break;
            case BoxClass::Stripe: fill = &pal.lrp_fill; break;
        }
        detail::svg_rect(out, b.rect, side, *fill, "", 0.0);
    }
    const bool label = layout.details.size() <= opt.label_max_details;
    for (const auto& d : layout.details) {
        detail::svg_rect(out, d.rect, side, pal.detail_fill, pal.detail_outline, sw);
        if (label) {
            const double fs = opt.label_scale * std::min(d.rect.w, d.rect.h);
            out += "<text x=\"";
            detail::fmt12(out, d.rect.x + d.rect.w / 2);
            out += "\" y=\"";
            detail::fmt12(out, side - d.rect.y - d.rect.h / 2 + fs / 3);
            out += "\" font-size=\"";
            detail::fmt12(out, fs);
            out += "\" font-family=\"sans-serif\" text-anchor=\"middle\">";
            out += std::to_string(d.n);
            out += "</text>\n";
        }
    }
    for (const auto& s : layout.stripes)
        detail::svg_rect(out, s, side, "none", pal.stripe_outline, sw);
    out += "</svg>\n";
    return out;
}

}  // namespace slackpack
