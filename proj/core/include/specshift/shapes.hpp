#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "specshift/random.hpp"
#include "specshift/types.hpp"

// Procedural defect shapes shared by the synthetic dataset generator and the
// pseudo-anomaly generator. Every shape has an exact pixel count.
namespace specshift::shapes {

// Smooth value noise in [0,1] on a w x h grid, lattice spacing `cell` pixels,
// bicubic-smoothstep interpolated.
std::vector<float> smooth_noise(int width, int height, int cell, Rng& rng);

// Inclusive pixel-count range [ceil(lo*N), floor(hi*N)] for N = w*h.
// Throws Error when the range is empty or its lower end is below one pixel.
std::pair<std::size_t, std::size_t> area_bounds(int width, int height, double lo, double hi);

// Draws an integer pixel count uniformly from area_bounds.
std::size_t draw_area(int width, int height, double lo, double hi, Rng& rng);

// Best-first region growth from (x, y) over `field`, always absorbing the
// highest-valued frontier pixel, until `area` pixels are set. The result is
// one 4-connected region.
PixelMask grow_region(const std::vector<float>& field, int width, int height, int x, int y, std::size_t area);

// Irregular blob: growth over smoothed noise (noise, smooth, threshold).
PixelMask blob(int width, int height, std::size_t area, Rng& rng);

// Compact, roughly round spot.
PixelMask spot(int width, int height, std::size_t area, Rng& rng);

// Thin stroke whose bounding box has aspect ratio >= 4.
PixelMask scratch(int width, int height, std::size_t area, Rng& rng);

// Adjusts masked pixels of `out` so each one differs from `src` after 8-bit
// quantization in at least one channel. Unmasked pixels are not touched.
void force_distinct(const Image& src, Image& out, const PixelMask& mask);

struct BoundingBox {
    int x0 = 0, y0 = 0, x1 = -1, y1 = -1;  // inclusive
    int width() const { return x1 - x0 + 1; }
    int height() const { return y1 - y0 + 1; }
};

BoundingBox bounding_box(const PixelMask& mask);

}  // namespace specshift::shapes
