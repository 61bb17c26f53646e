#include "wheelplan/render.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "wheelplan/errors.hpp"
#include "wheelplan/io.hpp"

namespace wheelplan {

namespace {

using Rgb = std::array<std::uint16_t, 3>;

Rgb palette(CellState s) {
    switch (s) {
        case CellState::Free: return {255, 255, 255};
        case CellState::Occupied: return {0, 0, 0};
        case CellState::Unknown: return {128, 128, 128};
    }
    return {255, 0, 255};
}

// Continuous image coordinates (pixels) of a parent-frame point.
Vec2 to_image(const Costmap& map, Vec2 p, int scale) {
    const Vec2 g = transform_to(map.origin(), p);
    return {g.x / map.resolution() * scale, (map.height() - g.y / map.resolution()) * scale};
}

}  // namespace

std::string render_ppm(const Costmap& map, const PlannedPath* path, int scale, const std::vector<std::string>& comments) {
    if (scale < 1) throw ContractViolation("render: scale must be at least 1");
    const int w = map.width() * scale, h = map.height() * scale;
    std::vector<Rgb> px(static_cast<std::size_t>(w) * h);
    for (int y = 0; y < h; ++y) {
        const int row = map.height() - 1 - y / scale;
        for (int x = 0; x < w; ++x) px[static_cast<std::size_t>(y) * w + x] = palette(map.at({row, x / scale}));
    }
    auto dot = [&](Vec2 c, double radius, Rgb color) {
        for (int y = std::max(0, int(c.y - radius)); y <= std::min(h - 1, int(c.y + radius) + 1); ++y) {
            for (int x = std::max(0, int(c.x - radius)); x <= std::min(w - 1, int(c.x + radius) + 1); ++x) {
                if (std::hypot(x + 0.5 - c.x, y + 0.5 - c.y) <= radius) px[static_cast<std::size_t>(y) * w + x] = color;
            }
        }
    };
    if (path && !path->nodes.empty()) {
        const Rgb red{220, 30, 30};
        for (std::size_t i = 1; i < path->nodes.size(); ++i) {
            const Vec2 a = to_image(map, path->nodes[i - 1].position(), scale);
            const Vec2 b = to_image(map, path->nodes[i].position(), scale);
            const int steps = std::max(1, static_cast<int>(std::ceil(distance(a, b))));
            for (int k = 0; k <= steps; ++k) dot(a + (double(k) / steps) * (b - a), 0.6 + scale * 0.15, red);
        }
        for (const auto& n : path->nodes) dot(to_image(map, n.position(), scale), 1.0 + scale * 0.3, red);
        dot(to_image(map, path->goal().position(), scale), 2.0 + scale * 0.5, {30, 60, 220});
    }
    io::Netpbm img{'6', w, h, 255, comments, {}};
    img.samples.reserve(px.size() * 3);
    for (const auto& c : px) img.samples.insert(img.samples.end(), c.begin(), c.end());
    return io::encode_netpbm(img);
}

std::string render_svg(const Costmap& map, const PlannedPath* path, int scale, const std::vector<std::string>& comments) {
    if (scale < 1) throw ContractViolation("render: scale must be at least 1");
    std::ostringstream out;
    const int w = map.width() * scale, h = map.height() * scale;
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    for (const auto& c : comments) out << "<!-- " << c << " -->\n";
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\" viewBox=\"0 0 " << w
        << ' ' << h << "\">\n";
    out << "<rect width=\"" << w << "\" height=\"" << h << "\" fill=\"#808080\"/>\n";
    for (int row = 0; row < map.height(); ++row) {
        const int y = (map.height() - 1 - row) * scale;
        int col = 0;
        while (col < map.width()) {
            const CellState s = map.at({row, col});
            int end = col + 1;
            while (end < map.width() && map.at({row, end}) == s) ++end;
            if (s != CellState::Unknown) {
                out << "<rect x=\"" << col * scale << "\" y=\"" << y << "\" width=\"" << (end - col) * scale
                    << "\" height=\"" << scale << "\" fill=\"" << (s == CellState::Free ? "#ffffff" : "#000000") << "\"/>\n";
            }
            col = end;
        }
    }
    if (path && !path->nodes.empty()) {
        out << "<polyline fill=\"none\" stroke=\"#dc1e1e\" stroke-width=\"" << std::max(1.0, scale * 0.4) << "\" points=\"";
        for (const auto& n : path->nodes) {
            const Vec2 p = to_image(map, n.position(), scale);
            out << io::format_double(p.x) << ',' << io::format_double(p.y) << ' ';
        }
        out << "\"/>\n";
        const Vec2 g = to_image(map, path->goal().position(), scale);
        out << "<circle cx=\"" << io::format_double(g.x) << "\" cy=\"" << io::format_double(g.y) << "\" r=\""
            << 2.0 + scale * 0.5 << "\" fill=\"#1e3cdc\"/>\n";
    }
    out << "</svg>\n";
    return out.str();
}

}  // namespace wheelplan
