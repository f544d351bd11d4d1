#include "specshift/shapes.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <queue>

#include "specshift/dataset_io.hpp"
#include "specshift/error.hpp"

namespace specshift::shapes {

std::vector<float> smooth_noise(int width, int height, int cell, Rng& rng) {
    cell = std::max(cell, 1);
    const int gw = width / cell + 2;
    const int gh = height / cell + 2;
    std::vector<float> lattice(static_cast<std::size_t>(gw) * static_cast<std::size_t>(gh));
    for (auto& v : lattice) v = static_cast<float>(rng.uniform());

    auto fade = [](double t) { return t * t * (3.0 - 2.0 * t); };
    std::vector<float> field(static_cast<std::size_t>(width) * static_cast<std::size_t>(height));
    for (int y = 0; y < height; ++y) {
        const int cy = y / cell;
        const double ty = fade(static_cast<double>(y % cell) / cell);
        for (int x = 0; x < width; ++x) {
            const int cx = x / cell;
            const double tx = fade(static_cast<double>(x % cell) / cell);
            auto l = [&](int gx, int gy) { return static_cast<double>(lattice[static_cast<std::size_t>(gy) * gw + gx]); };
            const double top = l(cx, cy) * (1 - tx) + l(cx + 1, cy) * tx;
            const double bot = l(cx, cy + 1) * (1 - tx) + l(cx + 1, cy + 1) * tx;
            field[static_cast<std::size_t>(y) * width + x] = static_cast<float>(top * (1 - ty) + bot * ty);
        }
    }
    return field;
}

std::pair<std::size_t, std::size_t> area_bounds(int width, int height, double lo, double hi) {
    if (width <= 0 || height <= 0) throw Error("mask dimensions must be positive");
    if (!(lo > 0.0 && hi < 1.0 && lo <= hi)) throw Error("area fraction range must satisfy 0 < lo <= hi < 1");
    const double n = static_cast<double>(width) * static_cast<double>(height);
    if (lo * n < 1.0) throw Error("area fraction lower bound is below one pixel at this resolution");
    const auto min_px = static_cast<std::size_t>(std::ceil(lo * n - 1e-9));
    const auto max_px = static_cast<std::size_t>(std::floor(hi * n + 1e-9));
    if (min_px > max_px) throw Error("area fraction range holds no integer pixel count at this resolution");
    return {min_px, max_px};
}

std::size_t draw_area(int width, int height, double lo, double hi, Rng& rng) {
    const auto [a, b] = area_bounds(width, height, lo, hi);
    return a + static_cast<std::size_t>(rng.below(b - a + 1));
}

PixelMask grow_region(const std::vector<float>& field, int width, int height, int x, int y, std::size_t area) {
    PixelMask mask(width, height);
    if (area == 0) return mask;
    if (area > mask.pixel_count()) throw Error("requested region larger than the image");

    using Item = std::pair<float, std::size_t>;  // (value, index); ties resolved by lower index
    auto cmp = [](const Item& a, const Item& b) {
        if (a.first != b.first) return a.first < b.first;
        return a.second > b.second;
    };
    std::priority_queue<Item, std::vector<Item>, decltype(cmp)> frontier(cmp);
    std::vector<std::uint8_t> queued(mask.pixel_count(), 0);

    const auto start = static_cast<std::size_t>(y) * width + x;
    frontier.push({field[start], start});
    queued[start] = 1;
    std::size_t filled = 0;
    while (filled < area && !frontier.empty()) {
        const auto [value, idx] = frontier.top();
        frontier.pop();
        mask.data[idx] = 1;
        ++filled;
        const int px = static_cast<int>(idx % width);
        const int py = static_cast<int>(idx / width);
        const int dx[4] = {1, -1, 0, 0};
        const int dy[4] = {0, 0, 1, -1};
        for (int k = 0; k < 4; ++k) {
            const int nx = px + dx[k];
            const int ny = py + dy[k];
            if (nx < 0 || ny < 0 || nx >= width || ny >= height) continue;
            const auto n = static_cast<std::size_t>(ny) * width + nx;
            if (queued[n]) continue;
            queued[n] = 1;
            frontier.push({field[n], n});
        }
    }
    return mask;
}

namespace {

std::pair<int, int> pick_center(int width, int height, std::size_t area, Rng& rng) {
    // Keep a margin of roughly the region radius so growth is not clipped.
    const int r = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(area))));
    const int mx = std::min(r, (width - 1) / 2);
    const int my = std::min(r, (height - 1) / 2);
    return {rng.range(mx, width - 1 - mx), rng.range(my, height - 1 - my)};
}

}  // namespace

PixelMask blob(int width, int height, std::size_t area, Rng& rng) {
    const int cell = std::max(2, static_cast<int>(std::sqrt(static_cast<double>(area)) / 2));
    auto field = smooth_noise(width, height, cell, rng);
    const auto [cx, cy] = pick_center(width, height, area, rng);
    // Mild pull towards the centre keeps the blob from snaking away.
    const double scale = std::sqrt(static_cast<double>(area));
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            const double d = std::hypot(x - cx, y - cy) / scale;
            field[static_cast<std::size_t>(y) * width + x] -= static_cast<float>(0.35 * d);
        }
    }
    return grow_region(field, width, height, cx, cy, area);
}

PixelMask spot(int width, int height, std::size_t area, Rng& rng) {
    const auto [cx, cy] = pick_center(width, height, area, rng);
    std::vector<float> field(static_cast<std::size_t>(width) * static_cast<std::size_t>(height));
    const double jitter = 0.3;
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            field[static_cast<std::size_t>(y) * width + x] =
                static_cast<float>(-std::hypot(x - cx, y - cy) + jitter * rng.uniform());
        }
    }
    return grow_region(field, width, height, cx, cy, area);
}

PixelMask scratch(int width, int height, std::size_t area, Rng& rng) {
    const bool vertical = rng.coin();
    const int along = vertical ? height : width;
    const int across = vertical ? width : height;

    int thickness = 1 + static_cast<int>(std::sqrt(static_cast<double>(area)) / 12.0);
    const int max_len = std::max(1, along - 2);
    thickness = std::max(thickness, static_cast<int>((area + max_len - 1) / max_len));
    const int length = static_cast<int>((area + thickness - 1) / thickness);
    if (length < 4 * thickness || length > along || thickness > across) {
        throw Error("scratch of this area cannot keep aspect ratio >= 4 at this resolution");
    }
    const int amp = std::clamp(static_cast<int>(std::floor((length / 4.0 - thickness) / 2.0)), 0, 3);
    const int max_amp = std::max(0, (across - thickness) / 2);
    const int wobble = std::min(amp, max_amp);

    const int s0 = rng.range(0, along - length);
    const int t0 = rng.range(wobble, across - thickness - wobble);
    const double period = std::max(8.0, length / rng.uniform(1.0, 2.5));
    const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);

    PixelMask mask(width, height);
    std::size_t filled = 0;
    for (int s = 0; s < length && filled < area; ++s) {
        const int offset = static_cast<int>(std::lround(wobble * std::sin(2.0 * std::numbers::pi * s / period + phase)));
        for (int k = 0; k < thickness && filled < area; ++k) {
            const int a = s0 + s;
            const int b = t0 + offset + k;
            if (vertical) mask.at(b, a) = 1; else mask.at(a, b) = 1;
            ++filled;
        }
    }
    return mask;
}

void force_distinct(const Image& src, Image& out, const PixelMask& mask) {
    const int ch = src.channels;
    for (std::size_t p = 0; p < mask.pixel_count(); ++p) {
        if (!mask.data[p]) continue;
        bool differs = false;
        for (int c = 0; c < ch; ++c) {
            const auto i = p * ch + c;
            differs = differs || quantize(out.data[i]) != quantize(src.data[i]);
        }
        if (differs) continue;
        for (int c = 0; c < ch; ++c) {
            const auto i = p * ch + c;
            const float step = 3.0f / 255.0f;
            out.data[i] = src.data[i] < 0.5f ? std::min(1.0f, src.data[i] + step) : std::max(0.0f, src.data[i] - step);
        }
    }
}

BoundingBox bounding_box(const PixelMask& mask) {
    BoundingBox box{mask.width, mask.height, -1, -1};
    for (int y = 0; y < mask.height; ++y) {
        for (int x = 0; x < mask.width; ++x) {
            if (!mask.at(x, y)) continue;
            box.x0 = std::min(box.x0, x);
            box.y0 = std::min(box.y0, y);
            box.x1 = std::max(box.x1, x);
            box.y1 = std::max(box.y1, y);
        }
    }
    return box;
}

}  // namespace specshift::shapes
