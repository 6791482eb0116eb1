#include "otnn/figio.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "otnn/errors.hpp"

namespace otnn::fig {

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return buf;
}

}  // namespace

std::string render_svg(const SvgFigure& fig) {
    const double xmin = fig.bbox[0], ymin = fig.bbox[1], xmax = fig.bbox[2], ymax = fig.bbox[3];
    if (!(xmax > xmin) || !(ymax > ymin)) throw DimensionError("render_svg: empty bbox");
    const double s = static_cast<double>(fig.size_px);
    const auto px = [&](double x) { return (x - xmin) / (xmax - xmin) * s; };
    const auto py = [&](double y) { return s - (y - ymin) / (ymax - ymin) * s; };  // y up

    std::string out;
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" +
           std::to_string(fig.size_px) + "\" height=\"" + std::to_string(fig.size_px) + "\">\n";
    out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

    if (fig.points != nullptr) {
        static const char* kClassColors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728"};
        const auto& ds = *fig.points;
        out += "<g class=\"points\">\n";
        for (std::size_t i = 0; i < ds.size(); ++i) {
            const char* color = kClassColors[ds.labels[i] % 4];
            out += "<circle cx=\"" + fmt(px(ds.inputs.at(i, 0))) + "\" cy=\"" +
                   fmt(py(ds.inputs.at(i, 1))) + "\" r=\"1.5\" fill=\"" + color + "\"/>\n";
        }
        out += "</g>\n";
    }

    if (!fig.transport_segments.empty()) {
        out += "<g class=\"segments\" stroke=\"#555555\" stroke-width=\"0.6\">\n";
        for (const auto& seg : fig.transport_segments) {
            out += "<line x1=\"" + fmt(px(seg.x0)) + "\" y1=\"" + fmt(py(seg.y0)) + "\" x2=\"" +
                   fmt(px(seg.x1)) + "\" y2=\"" + fmt(py(seg.y1)) + "\"/>\n";
        }
        out += "</g>\n";
    }

    if (!fig.contour.empty()) {
        out += "<g class=\"contour\" stroke=\"red\" stroke-width=\"1.2\" stroke-dasharray=\"4 3\">\n";
        for (const auto& seg : fig.contour) {
            out += "<line x1=\"" + fmt(px(seg.x0)) + "\" y1=\"" + fmt(py(seg.y0)) + "\" x2=\"" +
                   fmt(px(seg.x1)) + "\" y2=\"" + fmt(py(seg.y1)) + "\"/>\n";
        }
        out += "</g>\n";
    }

    out += "</svg>\n";
    return out;
}

void write_svg(const std::string& path, const SvgFigure& fig) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("write_svg: cannot open " + path);
    out << render_svg(fig);
    if (!out) throw IoError("write_svg: write failed");
}

void write_pgm(const std::string& path, const Tensor& map, std::size_t height, std::size_t width) {
    if (map.size() != height * width) throw DimensionError("write_pgm: map size != height*width");
    double hi = 0.0;
    for (std::size_t i = 0; i < map.size(); ++i) hi = std::max(hi, std::fabs(map.at(i)));
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("write_pgm: cannot open " + path);
    out << "P5\n" << width << " " << height << "\n255\n";
    for (std::size_t i = 0; i < map.size(); ++i) {
        const double v = hi > 0.0 ? std::fabs(map.at(i)) / hi : 0.0;
        out.put(static_cast<char>(std::lround(255.0 * v)));
    }
    if (!out) throw IoError("write_pgm: write failed");
}

}  // namespace otnn::fig
