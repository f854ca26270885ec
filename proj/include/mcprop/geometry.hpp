#pragma once

#include <cmath>

#include "mcprop/error.hpp"

namespace mcprop {

// Geometry of the proposal window: n_fields high power fields of area_mm2
// each, laid out as a single rectangle with the given aspect ratio.
struct HpfSpec {
    double area_mm2 = 0.237;
    int n_fields = 10;
    double aspect_w_over_h = 4.0 / 3.0;

    void validate() const {
        if (!(area_mm2 > 0.0)) throw DomainError("hpf area_mm2 must be positive");
        if (n_fields < 1) throw DomainError("hpf n_fields must be >= 1");
        if (!(aspect_w_over_h > 0.0))
            throw DomainError("hpf aspect ratio must be positive");
    }
};

struct WindowSize {
    int width_px = 0;
    int height_px = 0;

    friend bool operator==(const WindowSize&, const WindowSize&) = default;

    std::int64_t area() const {
        return static_cast<std::int64_t>(width_px) * height_px;
    }
};

// Window size in pixels covering n_fields * area_mm2 at the stated scanner
// resolution (um/px):
//   w = round(sqrt(n * aspect * A) / r * 1000)
//   h = round(sqrt(n / aspect * A) / r * 1000)
// Rounding is to nearest, ties away from zero; dimensions clamp to >= 1.
inline WindowSize hpf_window_pixels(const HpfSpec& spec,
                                    double resolution_um_per_px) {
    spec.validate();
    if (!(resolution_um_per_px > 0.0))
        throw DomainError("resolution_um_per_px must be positive");

    const double n = static_cast<double>(spec.n_fields);
    const double w_mm = std::sqrt(n * spec.aspect_w_over_h * spec.area_mm2);
    const double h_mm = std::sqrt(n / spec.aspect_w_over_h * spec.area_mm2);
    const double um_per_mm = 1000.0;

    WindowSize out;
    out.width_px = static_cast<int>(
        std::max<long long>(1, std::llround(w_mm * um_per_mm / resolution_um_per_px)));
    out.height_px = static_cast<int>(
        std::max<long long>(1, std::llround(h_mm * um_per_mm / resolution_um_per_px)));
    return out;
}

// Window size on a grid downsampled by `scale` (nearest, clamped to >= 1).
inline WindowSize window_at_scale(WindowSize w, int scale) {
    if (scale < 1) throw DomainError("window scale must be >= 1");
    WindowSize out;
    out.width_px = static_cast<int>(std::max<long long>(
        1, std::llround(static_cast<double>(w.width_px) / scale)));
    out.height_px = static_cast<int>(std::max<long long>(
        1, std::llround(static_cast<double>(w.height_px) / scale)));
    return out;
}

} // namespace mcprop
