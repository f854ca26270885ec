#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mcprop/annotations.hpp"
#include "mcprop/error.hpp"
#include "mcprop/geometry.hpp"
#include "mcprop/integral.hpp"
#include "mcprop/maskgen.hpp"
#include "mcprop/parallel.hpp"
#include "mcprop/raster.hpp"

namespace mcprop {

// The chosen 10-HPF window, in full-resolution pixels. activity_score is
// the mean activity inside the window at the map's scale; gt_mc is filled
// when annotations are available.
struct RegionProposal {
    int origin_x = 0;
    int origin_y = 0;
    WindowSize window;
    double activity_score = 0.0;
    std::optional<std::int64_t> gt_mc;
};

struct ArgmaxResult {
    Point origin;
    double window_sum = 0.0;
    double score = 0.0; // window mean
};

// Best window origin by activity sum among origins marked valid. A set bit
// whose window would leave the map does not count as a valid origin. Ties
// break to the smallest row-major index (y, then x); the band-parallel scan
// reduces with the same (sum, y, x) order, so results are thread-count
// independent.
inline ArgmaxResult masked_argmax(const DensityMap& activity,
                                  const BinaryMask& valid, WindowSize window,
                                  int threads = 1) {
    activity.validate();
    valid.validate();
    if (activity.width_px != valid.width_px || activity.height_px != valid.height_px)
        throw DomainError("masked_argmax: map and mask dimensions differ");
    if (activity.scale != valid.scale)
        throw DomainError("masked_argmax: map and mask scales differ");
    if (window.width_px < 1 || window.height_px < 1)
        throw DomainError("masked_argmax: window must be positive");
    if (window.width_px > activity.width_px || window.height_px > activity.height_px)
        throw DomainError("masked_argmax: window larger than the map");

    const auto ii = integral(activity);
    const int last_x = activity.width_px - window.width_px;
    const int last_y = activity.height_px - window.height_px;

    struct Best {
        bool found = false;
        double sum = 0.0;
        int y = 0;
        int x = 0;
    };
    const int bands = std::min(resolve_threads(threads), last_y + 1);
    std::vector<Best> best(static_cast<std::size_t>(std::max(bands, 1)));

    parallel_rows(last_y + 1, bands, [&](int y0, int y1) {
        // Identify the band by its start row; band layout is deterministic.
        Best b;
        for (int y = y0; y < y1; ++y) {
            for (int x = 0; x <= last_x; ++x) {
                if (!valid.at(x, y)) continue;
                const double s = ii.window_sum({x, y}, window);
                if (!b.found || s > b.sum) {
                    b = {true, s, y, x};
                }
            }
        }
        const std::size_t band_index =
            static_cast<std::size_t>(static_cast<long long>(y0) * bands / (last_y + 1));
        best[std::min(band_index, best.size() - 1)] = b;
    });

    Best overall;
    for (const Best& b : best) {
        if (!b.found) continue;
        if (!overall.found || b.sum > overall.sum ||
            (b.sum == overall.sum &&
             (b.y < overall.y || (b.y == overall.y && b.x < overall.x))))
            overall = b;
    }
    if (!overall.found)
        throw EmptyMaskError("masked_argmax: no valid window origin");

    ArgmaxResult out;
    out.origin = {overall.x, overall.y};
    out.window_sum = overall.sum;
    out.score = overall.sum / static_cast<double>(window.area());
    return out;
}

// Full pipeline: window geometry from the slide resolution, valid mask from
// the raster, masked argmax over the activity map, origin rescaled to full
// resolution. The activity map's scale must equal params.downsample so the
// mask and the map live on the same grid.
inline RegionProposal propose(const SlideRaster& raster, const DensityMap& activity,
                              const HpfSpec& spec, const MaskParams& params,
                              const AnnotationSet* annotations = nullptr,
                              int threads = 1, ValidMaskStats* stats = nullptr) {
    raster.validate();
    activity.validate();
    if (activity.scale != params.downsample)
        throw DomainError("propose: activity map scale must equal the mask downsample");
    if (activity.width_px != downsampled_extent(raster.width_px, params.downsample) ||
        activity.height_px != downsampled_extent(raster.height_px, params.downsample))
        throw DomainError("propose: activity map does not match the slide dimensions");

    const WindowSize window = hpf_window_pixels(spec, raster.resolution_um_per_px);
    const BinaryMask valid = valid_mask(raster, window, params, threads, stats);
    const WindowSize map_window = window_at_scale(window, params.downsample);
    const ArgmaxResult arg = masked_argmax(activity, valid, map_window, threads);

    RegionProposal proposal;
    proposal.origin_x = arg.origin.x * params.downsample;
    proposal.origin_y = arg.origin.y * params.downsample;
    proposal.window = window;
    proposal.activity_score = arg.score;
    if (annotations) {
        const std::vector<Point> points = agreed_mitoses(*annotations);
        proposal.gt_mc = window_count(points, {proposal.origin_x, proposal.origin_y},
                                      window);
    }
    return proposal;
}

// Ground-truth window counts at every valid origin of a stride grid (stride
// in map-grid units), with quartiles by linear interpolation between order
// statistics.
struct McDistribution {
    std::vector<std::int64_t> counts; // row-major origin order
    double q1 = 0.0;
    double q2 = 0.0;
    double q3 = 0.0;
};

namespace detail {

inline double quantile_sorted(const std::vector<std::int64_t>& sorted, double p) {
    const std::size_t n = sorted.size();
    if (n == 1) return static_cast<double>(sorted[0]);
    const double pos = p * static_cast<double>(n - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, n - 1);
    const double frac = pos - static_cast<double>(lo);
    return static_cast<double>(sorted[lo]) +
           frac * static_cast<double>(sorted[hi] - sorted[lo]);
}

} // namespace detail

inline McDistribution mc_distribution(std::span<const Point> points,
                                      const BinaryMask& valid, WindowSize window,
                                      int stride) {
    valid.validate();
    if (stride < 1) throw DomainError("mc_distribution: stride must be >= 1");
    const WindowSize map_window = window_at_scale(window, valid.scale);
    const int last_x = valid.width_px - map_window.width_px;
    const int last_y = valid.height_px - map_window.height_px;

    McDistribution dist;
    for (int y = 0; y <= last_y; y += stride) {
        for (int x = 0; x <= last_x; x += stride) {
            if (!valid.at(x, y)) continue;
            const Point full_origin{x * valid.scale, y * valid.scale};
            dist.counts.push_back(window_count(points, full_origin, window));
        }
    }
    if (dist.counts.empty())
        throw EmptyMaskError("mc_distribution: no valid origin on the stride grid");

    std::vector<std::int64_t> sorted = dist.counts;
    std::sort(sorted.begin(), sorted.end());
    dist.q1 = detail::quantile_sorted(sorted, 0.25);
    dist.q2 = detail::quantile_sorted(sorted, 0.50);
    dist.q3 = detail::quantile_sorted(sorted, 0.75);
    return dist;
}

enum class Quartile { Q1, Q2, Q3, Q4 };

inline const char* to_string(Quartile q) {
    switch (q) {
        case Quartile::Q1: return "Q1";
        case Quartile::Q2: return "Q2";
        case Quartile::Q3: return "Q3";
        case Quartile::Q4: return "Q4";
    }
    return "?";
}

// Ties resolve upward, so an all-equal distribution places everything in Q4.
inline Quartile quartile_placement(std::int64_t proposal_mc,
                                   const McDistribution& dist) {
    const double mc = static_cast<double>(proposal_mc);
    if (mc >= dist.q3) return Quartile::Q4;
    if (mc >= dist.q2) return Quartile::Q3;
    if (mc >= dist.q1) return Quartile::Q2;
    return Quartile::Q1;
}

} // namespace mcprop
