#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "mcprop/error.hpp"
#include "mcprop/geometry.hpp"
#include "mcprop/integral.hpp"
#include "mcprop/parallel.hpp"
#include "mcprop/raster.hpp"

namespace mcprop {

// Valid-mask pipeline parameters. closing_radius_px is at the downsampled
// scale (radius 2 = 5x5 structuring element).
struct MaskParams {
    int downsample = 32;
    int closing_radius_px = 2;
    double coverage_threshold = 0.95;

    void validate() const {
        if (downsample < 1) throw DomainError("mask downsample must be >= 1");
        if (closing_radius_px < 0) throw DomainError("closing radius must be >= 0");
        if (!(coverage_threshold > 0.0 && coverage_threshold <= 1.0))
            throw DomainError("coverage threshold must be in (0,1]");
    }
};

// Rec.601 luma, rounded to nearest. Identity on grayscale inputs.
inline SlideRaster to_grayscale(const SlideRaster& raster) {
    raster.validate();
    if (raster.channels == 1) return raster;
    SlideRaster out = SlideRaster::gray(raster.width_px, raster.height_px, 0,
                                        raster.resolution_um_per_px);
    for (int y = 0; y < raster.height_px; ++y) {
        for (int x = 0; x < raster.width_px; ++x) {
            const double luma = 0.299 * raster.at(x, y, 0) +
                                0.587 * raster.at(x, y, 1) +
                                0.114 * raster.at(x, y, 2);
            out.at(x, y) = static_cast<std::uint8_t>(std::llround(luma));
        }
    }
    return out;
}

// Global threshold maximizing between-class variance (class A: value <= t,
// class B: value > t), smallest t on ties. The score for a split is
// d^2 / (cntA*cntB) with d = sumA*cntB - sumB*cntA; all aggregates are
// exact integers, so equal splits compare equal regardless of code path.
inline int otsu_threshold(const SlideRaster& gray) {
    gray.validate();
    if (gray.channels != 1) throw DomainError("otsu_threshold: expected grayscale");

    std::array<std::int64_t, 256> hist{};
    for (std::uint8_t v : gray.pixels) ++hist[v];
    const std::int64_t total = static_cast<std::int64_t>(gray.pixels.size());
    std::int64_t total_sum = 0;
    for (int v = 0; v < 256; ++v) total_sum += hist[v] * v;

    int best_t = -1;
    long double best_score = 0.0L;
    std::int64_t cnt_a = 0;
    std::int64_t sum_a = 0;
    for (int t = 0; t < 256; ++t) {
        cnt_a += hist[t];
        sum_a += hist[t] * t;
        const std::int64_t cnt_b = total - cnt_a;
        if (cnt_a == 0 || cnt_b == 0) continue;
        const std::int64_t sum_b = total_sum - sum_a;
        const std::int64_t d = sum_a * cnt_b - sum_b * cnt_a;
        const long double score =
            static_cast<long double>(static_cast<__int128>(d) * d) /
            (static_cast<long double>(cnt_a) * static_cast<long double>(cnt_b));
        if (score > best_score) {
            best_score = score;
            best_t = t;
        }
    }
    if (best_t < 0)
        throw DegenerateInputError("otsu_threshold: constant image has no threshold");
    return best_t;
}

// Tissue is darker than the bright slide background: bit = 1 where <= t.
inline BinaryMask tissue_mask(const SlideRaster& gray, int threshold) {
    gray.validate();
    if (gray.channels != 1) throw DomainError("tissue_mask: expected grayscale");
    BinaryMask m = BinaryMask::zeros(gray.width_px, gray.height_px, 1);
    for (std::size_t i = 0; i < gray.pixels.size(); ++i)
        m.bits[i] = gray.pixels[i] <= threshold ? 1 : 0;
    return m;
}

// Dilation with a (2r+1)^2 square element; pixels outside the image are 0.
inline BinaryMask dilate(const BinaryMask& mask, int radius) {
    mask.validate();
    if (radius < 0) throw DomainError("dilate: radius must be >= 0");
    if (radius == 0) return mask;
    const auto ii = integral(mask);
    BinaryMask out = BinaryMask::zeros(mask.width_px, mask.height_px, mask.scale);
    for (int y = 0; y < mask.height_px; ++y) {
        const int y0 = std::max(0, y - radius);
        const int y1 = std::min(mask.height_px, y + radius + 1);
        for (int x = 0; x < mask.width_px; ++x) {
            const int x0 = std::max(0, x - radius);
            const int x1 = std::min(mask.width_px, x + radius + 1);
            const std::int64_t ones =
                ii.window_sum({x0, y0}, {x1 - x0, y1 - y0});
            out.at(x, y) = ones > 0 ? 1 : 0;
        }
    }
    return out;
}

// Erosion with a (2r+1)^2 square element; pixels outside the image are 1,
// so only the in-bounds part of the element must be set.
inline BinaryMask erode(const BinaryMask& mask, int radius) {
    mask.validate();
    if (radius < 0) throw DomainError("erode: radius must be >= 0");
    if (radius == 0) return mask;
    const auto ii = integral(mask);
    BinaryMask out = BinaryMask::zeros(mask.width_px, mask.height_px, mask.scale);
    for (int y = 0; y < mask.height_px; ++y) {
        const int y0 = std::max(0, y - radius);
        const int y1 = std::min(mask.height_px, y + radius + 1);
        for (int x = 0; x < mask.width_px; ++x) {
            const int x0 = std::max(0, x - radius);
            const int x1 = std::min(mask.width_px, x + radius + 1);
            const std::int64_t area =
                static_cast<std::int64_t>(x1 - x0) * (y1 - y0);
            const std::int64_t ones =
                ii.window_sum({x0, y0}, {x1 - x0, y1 - y0});
            out.at(x, y) = ones == area ? 1 : 0;
        }
    }
    return out;
}

// Morphological closing: dilation then erosion. Extensive and idempotent
// under the border conventions above.
inline BinaryMask close(const BinaryMask& mask, int radius) {
    return erode(dilate(mask, radius), radius);
}

// Exact smallest integer k with k >= threshold * area, where threshold is
// taken at its binary64 value. Avoids the double-rounding of
// ceil(threshold * (double)area).
inline std::int64_t coverage_requirement(double threshold, std::int64_t area) {
    if (!(threshold > 0.0) || area < 1)
        throw DomainError("coverage_requirement: threshold > 0 and area >= 1 required");
    int exp = 0;
    const double frac = std::frexp(threshold, &exp); // threshold = frac * 2^exp
    const auto mant = static_cast<std::int64_t>(std::ldexp(frac, 53)); // exact
    const int shift = 53 - exp;
    const __int128 num = static_cast<__int128>(mant) * area;
    if (shift <= 0) return static_cast<std::int64_t>(num << -shift);
    if (shift >= 127) return num > 0 ? 1 : 0;
    const __int128 one = 1;
    return static_cast<std::int64_t>((num + (one << shift) - 1) >> shift);
}

struct ValidMaskStats {
    int otsu_threshold = 0;
    double tissue_fraction = 0.0; // after closing, at the downsampled scale
    std::int64_t valid_origins = 0;
};

// The valid mask: downsample, grayscale, Otsu, tissue mask, closing, then a
// moving average of the proposal window; a bit at (x,y) marks the window
// [x, x+w) x [y, y+h) (at the downsampled scale) as covered to at least
// coverage_threshold with tissue. Origins whose window would leave the map
// are 0.
inline BinaryMask valid_mask(const SlideRaster& raster, WindowSize window,
                             const MaskParams& params, int threads = 1,
                             ValidMaskStats* stats = nullptr) {
    params.validate();
    const SlideRaster ds = downsample(raster, params.downsample);
    const SlideRaster gray = to_grayscale(ds);
    const int threshold = otsu_threshold(gray);
    const BinaryMask tissue = close(tissue_mask(gray, threshold),
                                    params.closing_radius_px);

    const WindowSize win = window_at_scale(window, params.downsample);
    if (win.width_px > tissue.width_px || win.height_px > tissue.height_px)
        throw DomainError("valid_mask: window larger than the downsampled slide");
    const std::int64_t required =
        coverage_requirement(params.coverage_threshold, win.area());

    const auto ii = integral(tissue);
    BinaryMask out =
        BinaryMask::zeros(tissue.width_px, tissue.height_px, params.downsample);
    const int last_x = tissue.width_px - win.width_px;
    const int last_y = tissue.height_px - win.height_px;
    parallel_rows(last_y + 1, threads, [&](int y0, int y1) {
        for (int y = y0; y < y1; ++y)
            for (int x = 0; x <= last_x; ++x)
                out.at(x, y) = ii.window_sum({x, y}, win) >= required ? 1 : 0;
    });

    if (stats) {
        stats->otsu_threshold = threshold;
        stats->tissue_fraction =
            static_cast<double>(tissue.popcount()) /
            (static_cast<double>(tissue.width_px) * tissue.height_px);
        stats->valid_origins = out.popcount();
    }
    return out;
}

} // namespace mcprop
