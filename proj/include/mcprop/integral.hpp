#pragma once

#include <cstdint>
#include <vector>

#include "mcprop/error.hpp"
#include "mcprop/geometry.hpp"
#include "mcprop/raster.hpp"

namespace mcprop {

// Summed-area table with one zero row/column of padding: entry (i,j) holds
// the sum of all input values strictly above-left of (j,i), so any
// rectangular window sum is four lookups. Accumulator is int64 for
// binary/count inputs and double for float maps.
template <typename Acc>
class IntegralImage {
public:
    IntegralImage(int width, int height)
        : width_(width), height_(height),
          sums_(static_cast<std::size_t>(width + 1) * (height + 1), Acc(0)) {
        if (width < 1 || height < 1)
            throw DomainError("integral image dimensions must be positive");
    }

    template <typename Source>
    static IntegralImage build(const Source& src) {
        IntegralImage ii(src.width_px, src.height_px);
        for (int y = 0; y < ii.height_; ++y) {
            Acc row_sum = Acc(0);
            const std::size_t prev = static_cast<std::size_t>(y) * (ii.width_ + 1);
            const std::size_t cur = prev + (ii.width_ + 1);
            for (int x = 0; x < ii.width_; ++x) {
                row_sum += Acc(src.at(x, y));
                ii.sums_[cur + x + 1] = ii.sums_[prev + x + 1] + row_sum;
            }
        }
        return ii;
    }

    int width() const { return width_; }
    int height() const { return height_; }

    // Prefix sum over [0,x) x [0,y).
    Acc prefix(int x, int y) const {
        return sums_[static_cast<std::size_t>(y) * (width_ + 1) + x];
    }

    Acc window_sum(Point origin, WindowSize size) const {
        if (size.width_px < 1 || size.height_px < 1)
            throw DomainError("window_sum: window must be positive");
        if (origin.x < 0 || origin.y < 0 || origin.x + size.width_px > width_ ||
            origin.y + size.height_px > height_)
            throw DomainError("window_sum: window out of bounds");
        const int x0 = origin.x, y0 = origin.y;
        const int x1 = origin.x + size.width_px, y1 = origin.y + size.height_px;
        return prefix(x1, y1) - prefix(x1, y0) - prefix(x0, y1) + prefix(x0, y0);
    }

private:
    int width_;
    int height_;
    std::vector<Acc> sums_;
};

inline IntegralImage<std::int64_t> integral(const BinaryMask& mask) {
    return IntegralImage<std::int64_t>::build(mask);
}

inline IntegralImage<double> integral(const DensityMap& map) {
    return IntegralImage<double>::build(map);
}

} // namespace mcprop
