#include "vtp/io/svg.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

#include "vtp/io/csv.hpp"

namespace vtp::io {

namespace {

constexpr double kSize = 600.0;
constexpr double kMargin = 50.0;
constexpr std::array<const char*, 8> kColors{"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                             "#9467bd", "#8c564b", "#e377c2", "#17becf"};

struct Frame {
    double east_min, east_max, north_min, north_max;

    double px(double east) const { return kMargin + (east - east_min) / (east_max - east_min) * (kSize - 2 * kMargin); }
    double py(double north) const {
        return kSize - kMargin - (north - north_min) / (north_max - north_min) * (kSize - 2 * kMargin);
    }
};

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string num(double v) {
    std::ostringstream s;
    s.precision(6);
    s << v;
    return s.str();
}

void open_svg(std::ostringstream& out, const std::string& title, const Frame& f, const char* x_label,
              const char* y_label) {
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kSize << "\" height=\"" << kSize << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << kSize / 2 << "\" y=\"25\" text-anchor=\"middle\" font-size=\"16\">" << escape(title)
        << "</text>\n";
    out << "<rect x=\"" << kMargin << "\" y=\"" << kMargin << "\" width=\"" << kSize - 2 * kMargin << "\" height=\""
        << kSize - 2 * kMargin << "\" fill=\"none\" stroke=\"black\"/>\n";
    out << "<text x=\"" << kSize / 2 << "\" y=\"" << kSize - 12 << "\" text-anchor=\"middle\" font-size=\"12\">"
        << x_label << " [" << num(f.east_min) << ", " << num(f.east_max) << "]</text>\n";
    out << "<text x=\"14\" y=\"" << kSize / 2 << "\" font-size=\"12\" transform=\"rotate(-90 14 " << kSize / 2
        << ")\" text-anchor=\"middle\">" << y_label << " [" << num(f.north_min) << ", " << num(f.north_max)
        << "]</text>\n";
}

}  // namespace

std::string scatter_svg(const std::vector<ScatterSeries>& series, const std::vector<Trajectory>& lines,
                        const std::string& title) {
    double e_lo = std::numeric_limits<double>::infinity(), e_hi = -e_lo, n_lo = e_lo, n_hi = -e_lo;
    auto extend = [&](double north, double east) {
        n_lo = std::min(n_lo, north);
        n_hi = std::max(n_hi, north);
        e_lo = std::min(e_lo, east);
        e_hi = std::max(e_hi, east);
    };
    for (const auto& s : series)
        for (Eigen::Index r = 0; r < s.points.rows(); ++r) extend(s.points(r, 0), s.points(r, 1));
    for (const auto& t : lines)
        for (Eigen::Index r = 0; r < t.positions.rows(); ++r) extend(t.positions(r, 0), t.positions(r, 1));
    if (!std::isfinite(e_lo)) e_lo = n_lo = -1.0, e_hi = n_hi = 1.0;
    // equal scale on both axes
    const double span = std::max({e_hi - e_lo, n_hi - n_lo, 1e-9}) * 1.05;
    const double ec = 0.5 * (e_lo + e_hi), nc = 0.5 * (n_lo + n_hi);
    const Frame f{ec - span / 2, ec + span / 2, nc - span / 2, nc + span / 2};

    std::ostringstream out;
    open_svg(out, title, f, "east", "north");
    for (std::size_t s = 0; s < series.size(); ++s) {
        const char* color = kColors[s % kColors.size()];
        out << "<g fill=\"" << color << "\" fill-opacity=\"0.4\">\n";
        for (Eigen::Index r = 0; r < series[s].points.rows(); ++r)
            out << "<circle cx=\"" << num(f.px(series[s].points(r, 1))) << "\" cy=\"" << num(f.py(series[s].points(r, 0)))
                << "\" r=\"1.5\"/>\n";
        out << "</g>\n";
        out << "<text x=\"" << kSize - kMargin - 5 << "\" y=\"" << kMargin + 15 + 15 * static_cast<double>(s)
            << "\" text-anchor=\"end\" font-size=\"12\" fill=\"" << color << "\">" << escape(series[s].label)
            << "</text>\n";
    }
    for (const auto& t : lines) {
        out << "<polyline fill=\"none\" stroke=\"black\" stroke-width=\"2\" points=\"";
        for (Eigen::Index r = 0; r < t.positions.rows(); ++r)
            out << num(f.px(t.positions(r, 1))) << "," << num(f.py(t.positions(r, 0))) << " ";
        out << "\"/>\n";
    }
    out << "</svg>\n";
    return out.str();
}

std::string heatmap_svg(const predict::PdfGrid& grid, const std::string& title) {
    // xs is the first (north) axis, ys the second (east) axis.
    const double dx = grid.xs.size() > 1 ? grid.xs[1] - grid.xs[0] : 1.0;
    const double dy = grid.ys.size() > 1 ? grid.ys[1] - grid.ys[0] : 1.0;
    const Frame f{grid.ys.front() - dy / 2, grid.ys.back() + dy / 2, grid.xs.front() - dx / 2, grid.xs.back() + dx / 2};
    const double peak = grid.values.maxCoeff() > 0 ? grid.values.maxCoeff() : 1.0;
    std::ostringstream out;
    open_svg(out, title, f, "east", "north");
    const double w = (kSize - 2 * kMargin) / static_cast<double>(grid.ys.size());
    const double h = (kSize - 2 * kMargin) / static_cast<double>(grid.xs.size());
    for (std::size_t i = 0; i < grid.xs.size(); ++i)
        for (std::size_t j = 0; j < grid.ys.size(); ++j) {
            const double v = grid.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) / peak;
            if (v < 1e-3) continue;
            const int shade = static_cast<int>(std::lround(255.0 * (1.0 - v)));
            out << "<rect x=\"" << num(f.px(grid.ys[j]) - w / 2) << "\" y=\"" << num(f.py(grid.xs[i]) - h / 2)
                << "\" width=\"" << num(w) << "\" height=\"" << num(h) << "\" fill=\"rgb(" << shade << "," << shade
                << ",255)\"/>\n";
        }
    out << "</svg>\n";
    return out.str();
}

}  // namespace vtp::io
