#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "mcprop/error.hpp"

namespace mcprop {

struct Point {
    int x = 0;
    int y = 0;

    friend bool operator==(const Point&, const Point&) = default;
    friend auto operator<=>(const Point&, const Point&) = default;
};

// 8-bit pixel grid for a slide (or a downsampled view of one).
// Grayscale rasters have channels == 1, RGB rasters channels == 3 with
// interleaved samples. resolution_um_per_px is the physical resolution r.
struct SlideRaster {
    int width_px = 0;
    int height_px = 0;
    int channels = 1;
    std::vector<std::uint8_t> pixels; // row-major, channel-interleaved
    double resolution_um_per_px = 0.25;

    static SlideRaster gray(int width, int height, std::uint8_t fill = 0,
                            double resolution = 0.25) {
        SlideRaster r;
        r.width_px = width;
        r.height_px = height;
        r.channels = 1;
        r.pixels.assign(static_cast<std::size_t>(width) * height, fill);
        r.resolution_um_per_px = resolution;
        r.validate();
        return r;
    }

    std::uint8_t at(int x, int y, int c = 0) const {
        return pixels[(static_cast<std::size_t>(y) * width_px + x) * channels + c];
    }

    std::uint8_t& at(int x, int y, int c = 0) {
        return pixels[(static_cast<std::size_t>(y) * width_px + x) * channels + c];
    }

    void validate() const {
        if (width_px < 1 || height_px < 1)
            throw DomainError("raster dimensions must be positive");
        if (channels != 1 && channels != 3)
            throw DomainError("raster channels must be 1 or 3");
        if (!(resolution_um_per_px > 0.0))
            throw DomainError("resolution_um_per_px must be positive");
        const std::size_t expected =
            static_cast<std::size_t>(width_px) * height_px * channels;
        if (pixels.size() != expected)
            throw DomainError("raster pixel buffer size mismatch");
    }
};

// Per-pixel mitotic activity map M. scale is the downsample factor of the
// grid relative to full slide resolution (1 = full resolution).
struct DensityMap {
    int width_px = 0;
    int height_px = 0;
    std::vector<float> values; // row-major
    int scale = 1;

    static DensityMap zeros(int width, int height, int scale = 1) {
        DensityMap m;
        m.width_px = width;
        m.height_px = height;
        m.values.assign(static_cast<std::size_t>(width) * height, 0.0f);
        m.scale = scale;
        m.validate();
        return m;
    }

    float at(int x, int y) const {
        return values[static_cast<std::size_t>(y) * width_px + x];
    }

    float& at(int x, int y) {
        return values[static_cast<std::size_t>(y) * width_px + x];
    }

    void validate() const {
        if (width_px < 1 || height_px < 1)
            throw DomainError("density map dimensions must be positive");
        if (scale < 1)
            throw DomainError("density map scale must be >= 1");
        if (values.size() != static_cast<std::size_t>(width_px) * height_px)
            throw DomainError("density map value buffer size mismatch");
        for (float v : values) {
            if (!std::isfinite(v) || v < 0.0f)
                throw DomainError("density map values must be finite and >= 0");
        }
    }
};

// Per-pixel {0,1} grid at a stated scale. Used for the tissue mask, the
// valid mask (bit indexed by window origin) and segmentation ground truth.
struct BinaryMask {
    int width_px = 0;
    int height_px = 0;
    std::vector<std::uint8_t> bits; // row-major, each 0 or 1
    int scale = 1;

    static BinaryMask zeros(int width, int height, int scale = 1) {
        BinaryMask m;
        m.width_px = width;
        m.height_px = height;
        m.bits.assign(static_cast<std::size_t>(width) * height, 0);
        m.scale = scale;
        return m;
    }

    std::uint8_t at(int x, int y) const {
        return bits[static_cast<std::size_t>(y) * width_px + x];
    }

    std::uint8_t& at(int x, int y) {
        return bits[static_cast<std::size_t>(y) * width_px + x];
    }

    std::int64_t popcount() const {
        std::int64_t n = 0;
        for (std::uint8_t b : bits) n += b;
        return n;
    }

    void validate() const {
        if (width_px < 1 || height_px < 1)
            throw DomainError("mask dimensions must be positive");
        if (scale < 1)
            throw DomainError("mask scale must be >= 1");
        if (bits.size() != static_cast<std::size_t>(width_px) * height_px)
            throw DomainError("mask bit buffer size mismatch");
        for (std::uint8_t b : bits) {
            if (b > 1) throw DomainError("mask bits must be 0 or 1");
        }
    }
};

// Pixel-center downsampling grid. Downsampled cell i covers full-resolution
// rows/columns [i*scale, (i+1)*scale) and samples the cell's center pixel,
// clamped to the image for the partial cells on the far edge.
inline int downsampled_extent(int full_extent, int scale) {
    return (full_extent + scale - 1) / scale;
}

inline int sample_coord(int ds_coord, int scale, int full_extent) {
    return std::min(ds_coord * scale + scale / 2, full_extent - 1);
}

inline SlideRaster downsample(const SlideRaster& src, int scale) {
    src.validate();
    if (scale < 1) throw DomainError("downsample scale must be >= 1");
    if (scale == 1) return src;

    SlideRaster out;
    out.width_px = downsampled_extent(src.width_px, scale);
    out.height_px = downsampled_extent(src.height_px, scale);
    out.channels = src.channels;
    out.resolution_um_per_px = src.resolution_um_per_px * scale;
    out.pixels.resize(static_cast<std::size_t>(out.width_px) * out.height_px *
                      out.channels);
    for (int y = 0; y < out.height_px; ++y) {
        const int sy = sample_coord(y, scale, src.height_px);
        for (int x = 0; x < out.width_px; ++x) {
            const int sx = sample_coord(x, scale, src.width_px);
            for (int c = 0; c < out.channels; ++c)
                out.at(x, y, c) = src.at(sx, sy, c);
        }
    }
    return out;
}

} // namespace mcprop
