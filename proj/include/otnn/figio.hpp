#pragma once

#include <array>
#include <string>
#include <vector>

#include "otnn/data.hpp"
#include "otnn/verify.hpp"

namespace otnn::fig {

struct SvgFigure {
    std::array<double, 4> bbox{-2.0, -2.0, 2.0, 2.0};  // xmin, ymin, xmax, ymax
    int size_px = 640;

    const data::Dataset* points = nullptr;               // class-colored scatter
    std::vector<verify::Segment> contour;                // red dashed 0-level set
    std::vector<verify::Segment> transport_segments;     // [x, x_delta] pairs
};

// SVG 1.1 document; deterministic output for fixed inputs.
std::string render_svg(const SvgFigure& fig);
void write_svg(const std::string& path, const SvgFigure& fig);

// 8-bit binary PGM (P5), values max-normalized over the map.
void write_pgm(const std::string& path, const Tensor& map, std::size_t height, std::size_t width);

}  // namespace otnn::fig
