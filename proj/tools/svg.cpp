#include "svg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "commands.hpp"

namespace condepth::cli {

namespace {

constexpr double kSize = 480.0;
constexpr double kPad = 48.0;

std::string escape(const std::string& s) {
    std::string out;
    for (const char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

struct Frame {
    Eigen::Vector2d lower;
    Eigen::Vector2d upper;

    void include(const Eigen::Vector2d& p) {
        lower = lower.cwiseMin(p);
        upper = upper.cwiseMax(p);
    }
    Eigen::Vector2d map(const Eigen::Vector2d& p) const {
        const Eigen::Vector2d span = (upper - lower).cwiseMax(Eigen::Vector2d::Constant(1e-300));
        return {kPad + (p.x() - lower.x()) / span.x() * (kSize - 2 * kPad),
                kSize - kPad - (p.y() - lower.y()) / span.y() * (kSize - 2 * kPad)};
    }
};

}  // namespace

std::string render_svg(const ScatterPlot& plot) {
    Frame frame{Eigen::Vector2d::Constant(std::numeric_limits<double>::infinity()),
                Eigen::Vector2d::Constant(-std::numeric_limits<double>::infinity())};
    for (Eigen::Index i = 0; i < plot.points.rows(); ++i) frame.include(plot.points.row(i).transpose());
    for (const auto& line : plot.contour) {
        for (Eigen::Index i = 0; i < line.vertices.rows(); ++i) frame.include(line.vertices.row(i).transpose());
    }
    for (const auto& m : plot.markers) frame.include(m.at);
    if (!std::isfinite(frame.lower.x())) frame = {Eigen::Vector2d::Zero(), Eigen::Vector2d::Ones()};
    for (int d = 0; d < 2; ++d) {
        double margin = 0.05 * (frame.upper(d) - frame.lower(d));
        if (margin <= 0) margin = 0.5;
        frame.lower(d) -= margin;
        frame.upper(d) += margin;
    }

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kSize << "\" height=\"" << kSize
        << "\" viewBox=\"0 0 " << kSize << ' ' << kSize << "\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg << "<text x=\"" << kSize / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">" << escape(plot.title)
        << "</text>\n";
    svg << "<rect x=\"" << kPad << "\" y=\"" << kPad << "\" width=\"" << kSize - 2 * kPad << "\" height=\""
        << kSize - 2 * kPad << "\" fill=\"none\" stroke=\"#888\"/>\n";
    svg << "<text x=\"" << kSize / 2 << "\" y=\"" << kSize - 12 << "\" text-anchor=\"middle\" font-size=\"12\">"
        << escape(plot.x_label) << "</text>\n";
    svg << "<text x=\"14\" y=\"" << kSize / 2 << "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 14 "
        << kSize / 2 << ")\">" << escape(plot.y_label) << "</text>\n";
    svg << "<text x=\"" << kPad << "\" y=\"" << kSize - kPad + 14 << "\" font-size=\"10\">" << fmt6(frame.lower.x())
        << "</text>\n";
    svg << "<text x=\"" << kSize - kPad << "\" y=\"" << kSize - kPad + 14 << "\" font-size=\"10\" text-anchor=\"end\">"
        << fmt6(frame.upper.x()) << "</text>\n";
    svg << "<text x=\"" << kPad - 4 << "\" y=\"" << kSize - kPad << "\" font-size=\"10\" text-anchor=\"end\">"
        << fmt6(frame.lower.y()) << "</text>\n";
    svg << "<text x=\"" << kPad - 4 << "\" y=\"" << kPad + 8 << "\" font-size=\"10\" text-anchor=\"end\">"
        << fmt6(frame.upper.y()) << "</text>\n";

    for (const auto& line : plot.contour) {
        svg << "<path fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\" d=\"";
        for (Eigen::Index i = 0; i < line.vertices.rows(); ++i) {
            const Eigen::Vector2d q = frame.map(line.vertices.row(i).transpose());
            svg << (i ? " L" : "M") << fmt6(q.x()) << ' ' << fmt6(q.y());
        }
        if (line.closed) svg << " Z";
        svg << "\"/>\n";
    }
    for (Eigen::Index i = 0; i < plot.points.rows(); ++i) {
        const Eigen::Vector2d q = frame.map(plot.points.row(i).transpose());
        svg << "<circle cx=\"" << fmt6(q.x()) << "\" cy=\"" << fmt6(q.y()) << "\" r=\"2.5\" fill=\"#444\"/>\n";
    }
    for (const auto& m : plot.markers) {
        const Eigen::Vector2d q = frame.map(m.at);
        if (m.shape == Marker::Shape::Circle) {
            svg << "<circle cx=\"" << fmt6(q.x()) << "\" cy=\"" << fmt6(q.y())
                << "\" r=\"7\" fill=\"none\" stroke=\"#d62728\" stroke-width=\"2\"><title>" << escape(m.label)
                << "</title></circle>\n";
        } else {
            svg << "<path stroke=\"#2ca02c\" stroke-width=\"2\" d=\"M" << fmt6(q.x() - 6) << ' ' << fmt6(q.y() - 6)
                << " L" << fmt6(q.x() + 6) << ' ' << fmt6(q.y() + 6) << " M" << fmt6(q.x() - 6) << ' '
                << fmt6(q.y() + 6) << " L" << fmt6(q.x() + 6) << ' ' << fmt6(q.y() - 6) << "\"><title>"
                << escape(m.label) << "</title></path>\n";
        }
    }
    svg << "</svg>\n";
    return svg.str();
}

}  // namespace condepth::cli
