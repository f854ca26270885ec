#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <vector>

#include "mcprop/error.hpp"
#include "mcprop/parallel.hpp"
#include "mcprop/raster.hpp"

namespace mcprop {

// Radius of the filled ground-truth circle drawn around each annotation,
// in full-resolution pixels.
struct CircleSpec {
    int radius_px = 25;

    void validate() const {
        if (radius_px < 1) throw DomainError("circle radius must be >= 1");
    }
};

inline int isqrt_floor(std::int64_t v) {
    if (v < 0) return 0;
    int r = static_cast<int>(std::sqrt(static_cast<double>(v)));
    while (static_cast<std::int64_t>(r + 1) * (r + 1) <= v) ++r;
    while (static_cast<std::int64_t>(r) * r > v) --r;
    return r;
}

// Lattice pixels within euclidean distance radius of a point.
inline std::int64_t circle_pixel_count(int radius) {
    std::int64_t n = 0;
    const std::int64_t r2 = static_cast<std::int64_t>(radius) * radius;
    for (int dy = -radius; dy <= radius; ++dy)
        n += 2 * isqrt_floor(r2 - static_cast<std::int64_t>(dy) * dy) + 1;
    return n;
}

// Render the union of filled circles around the points onto a mask at
// 1/scale resolution. A mask pixel is set iff its sampled full-resolution
// position lies within radius of some point (pixel-center sampling grid, so
// the scale-s map equals the downsampling of the scale-1 map).
inline BinaryMask render_gt_map(std::span<const Point> points, int width,
                                int height, CircleSpec circle, int scale,
                                int threads = 1) {
    circle.validate();
    if (width < 1 || height < 1)
        throw DomainError("render_gt_map: dimensions must be positive");
    if (scale < 1) throw DomainError("render_gt_map: scale must be >= 1");
    for (const Point& p : points) {
        if (p.x < 0 || p.x >= width || p.y < 0 || p.y >= height)
            throw DomainError("render_gt_map: point out of bounds");
    }

    BinaryMask mask = BinaryMask::zeros(downsampled_extent(width, scale),
                                        downsampled_extent(height, scale), scale);
    const int radius = circle.radius_px;
    const std::int64_t r2 = static_cast<std::int64_t>(radius) * radius;

    parallel_rows(mask.height_px, threads, [&](int y0, int y1) {
        std::vector<Point> row_points;
        for (int y = y0; y < y1; ++y) {
            const int v = sample_coord(y, scale, height);
            row_points.clear();
            for (const Point& p : points) {
                if (std::abs(v - p.y) <= radius) row_points.push_back(p);
            }
            if (row_points.empty()) continue;
            for (int x = 0; x < mask.width_px; ++x) {
                const int u = sample_coord(x, scale, width);
                for (const Point& p : row_points) {
                    const std::int64_t dx = u - p.x;
                    const std::int64_t dy = v - p.y;
                    if (dx * dx + dy * dy <= r2) {
                        mask.at(x, y) = 1;
                        break;
                    }
                }
            }
        }
    });
    return mask;
}

// How patch overlap is stated: PerSide discards margin_px on each side of a
// patch (stride = patch - 2*margin); Total shares margin_px between
// neighbors (stride = patch - margin, margin/2 discarded per side).
enum class OverlapMode { PerSide, Total };

// Overlapping patch tiling of a slide. Origins advance by the stride with
// the final row/column clamped so no patch exceeds the slide.
struct PatchGrid {
    int width_px = 0;
    int height_px = 0;
    int patch_size_px = 512;
    int margin_px = 64;
    int side_discard_px = 64; // margin removed per patch side when stitching
    std::vector<int> xs;
    std::vector<int> ys;

    std::size_t patch_count() const { return xs.size() * ys.size(); }

    // Row-major origin list (y outer, x inner).
    std::vector<Point> origins() const {
        std::vector<Point> out;
        out.reserve(patch_count());
        for (int y : ys)
            for (int x : xs) out.push_back({x, y});
        return out;
    }
};

namespace detail {

inline std::vector<int> grid_axis(int extent, int patch, int stride) {
    std::vector<int> origins;
    int pos = 0;
    while (true) {
        if (pos + patch >= extent) {
            const int last = extent - patch;
            if (origins.empty() || origins.back() != last) origins.push_back(last);
            break;
        }
        origins.push_back(pos);
        pos += stride;
    }
    return origins;
}

// Axis-wise ownership boundaries: patch k owns [b[k], b[k+1]), with the
// first core extended to the slide edge and ties in clamped overlaps going
// to the later patch.
inline std::vector<int> ownership_bounds(const std::vector<int>& origins,
                                         int extent, int discard) {
    std::vector<int> bounds(origins.size() + 1);
    bounds[0] = 0;
    for (std::size_t k = 1; k < origins.size(); ++k)
        bounds[k] = origins[k] + discard;
    bounds[origins.size()] = extent;
    return bounds;
}

} // namespace detail

inline PatchGrid make_patch_grid(int width, int height, int patch_size = 512,
                                 int margin = 64,
                                 OverlapMode mode = OverlapMode::PerSide) {
    if (margin < 0) throw DomainError("patch margin must be >= 0");
    const int stride =
        mode == OverlapMode::PerSide ? patch_size - 2 * margin : patch_size - margin;
    if (patch_size < 1 || stride < 1)
        throw DomainError("patch stride must be >= 1 (patch too small for margin)");
    if (width < patch_size || height < patch_size)
        throw DomainError("slide smaller than one patch");

    PatchGrid grid;
    grid.width_px = width;
    grid.height_px = height;
    grid.patch_size_px = patch_size;
    grid.margin_px = margin;
    grid.side_discard_px = mode == OverlapMode::PerSide ? margin : margin / 2;
    grid.xs = detail::grid_axis(width, patch_size, stride);
    grid.ys = detail::grid_axis(height, patch_size, stride);
    return grid;
}

// Extract the full patches (margins included) for each grid origin,
// row-major over origins.
inline std::vector<DensityMap> cut_patches(const DensityMap& map,
                                           const PatchGrid& grid) {
    map.validate();
    if (map.width_px != grid.width_px || map.height_px != grid.height_px)
        throw DomainError("cut_patches: map does not match grid dimensions");
    std::vector<DensityMap> patches;
    patches.reserve(grid.patch_count());
    const int p = grid.patch_size_px;
    for (int oy : grid.ys) {
        for (int ox : grid.xs) {
            DensityMap patch = DensityMap::zeros(p, p, map.scale);
            for (int y = 0; y < p; ++y)
                for (int x = 0; x < p; ++x) patch.at(x, y) = map.at(ox + x, oy + y);
            patches.push_back(std::move(patch));
        }
    }
    return patches;
}

// Reassemble a whole-slide map from per-origin patch predictions. Every
// output pixel is taken from exactly one patch: the one owning the pixel
// under the axis-wise core partition. No blending.
inline DensityMap stitch_predictions(const PatchGrid& grid,
                                     std::span<const DensityMap> patches,
                                     int threads = 1) {
    if (patches.size() != grid.patch_count())
        throw DomainError("stitch_predictions: expected " +
                          std::to_string(grid.patch_count()) + " patches, got " +
                          std::to_string(patches.size()));
    const int p = grid.patch_size_px;
    for (const DensityMap& patch : patches) {
        patch.validate();
        if (patch.width_px != p || patch.height_px != p)
            throw DomainError("stitch_predictions: patch has wrong dimensions");
        for (float v : patch.values) {
            if (v > 1.0f)
                throw DomainError("stitch_predictions: patch values must be in [0,1]");
        }
    }

    const std::vector<int> bx =
        detail::ownership_bounds(grid.xs, grid.width_px, grid.side_discard_px);
    const std::vector<int> by =
        detail::ownership_bounds(grid.ys, grid.height_px, grid.side_discard_px);

    DensityMap out = DensityMap::zeros(grid.width_px, grid.height_px,
                                       patches.empty() ? 1 : patches[0].scale);
    parallel_rows(static_cast<int>(grid.ys.size()), threads, [&](int k0, int k1) {
        for (int ky = k0; ky < k1; ++ky) {
            const int oy = grid.ys[ky];
            for (std::size_t kx = 0; kx < grid.xs.size(); ++kx) {
                const int ox = grid.xs[kx];
                const DensityMap& patch = patches[ky * grid.xs.size() + kx];
                for (int y = by[ky]; y < by[ky + 1]; ++y)
                    for (int x = bx[kx]; x < bx[kx + 1]; ++x)
                        out.at(x, y) = patch.at(x - ox, y - oy);
            }
        }
    });
    return out;
}

} // namespace mcprop
