#include "sfd/svg.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

namespace sfd {

void write_scatter_svg(const std::string& path, const Matrix& points, int size_px) {
    if (points.cols < 2) throw DimensionMismatch("scatter plot needs at least 2 columns");
    double min_x = points(0, 0), max_x = min_x, min_y = points(0, 1), max_y = min_y;
    for (std::size_t i = 0; i < points.rows; ++i) {
        min_x = std::min(min_x, points(i, 0));
        max_x = std::max(max_x, points(i, 0));
        min_y = std::min(min_y, points(i, 1));
        max_y = std::max(max_y, points(i, 1));
    }
    double span_x = max_x - min_x > 0 ? max_x - min_x : 1.0;
    double span_y = max_y - min_y > 0 ? max_y - min_y : 1.0;
    const double pad = 20.0;
    const double inner = size_px - 2 * pad;

    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size_px << "\" height=\""
        << size_px << "\" viewBox=\"0 0 " << size_px << ' ' << size_px << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    char buf[96];
    for (std::size_t i = 0; i < points.rows; ++i) {
        double px = pad + (points(i, 0) - min_x) / span_x * inner;
        double py = pad + (max_y - points(i, 1)) / span_y * inner;  // y grows downward
        std::snprintf(buf, sizeof(buf),
                      "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"2\" fill=\"#1f77b4\" fill-opacity=\"0.5\"/>\n",
                      px, py);
        out << buf;
    }
    out << "</svg>\n";
    if (!out) throw IoError("write failed: " + path);
}

}  // namespace sfd
