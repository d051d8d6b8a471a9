#pragma once

#include <cmath>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

namespace refa::test {

struct Point {
    double x = 0, y = 0;
};

struct RadarProbe {
    std::vector<std::string> polygon_classes;
    std::vector<std::vector<Point>> polygons;
    int axis_labels = 0;
    std::vector<double> ring_radii;  // in document order
    Point centre;
};

inline int count_of(const std::string& haystack, const std::string& needle) {
    int n = 0;
    for (auto pos = haystack.find(needle); pos != std::string::npos; pos = haystack.find(needle, pos + 1)) ++n;
    return n;
}

inline RadarProbe probe_radar(const std::string& svg) {
    RadarProbe p;
    std::regex poly(R"re(<polygon class="([^"]*)" points="([^"]*)")re");
    for (auto it = std::sregex_iterator(svg.begin(), svg.end(), poly); it != std::sregex_iterator(); ++it) {
        p.polygon_classes.push_back((*it)[1]);
        std::vector<Point> pts;
        std::istringstream in((*it)[2].str());
        std::string pair;
        while (in >> pair) {
            auto comma = pair.find(',');
            pts.push_back({std::stod(pair.substr(0, comma)), std::stod(pair.substr(comma + 1))});
        }
        p.polygons.push_back(pts);
    }
    p.axis_labels = count_of(svg, "class=\"axis-label\"");
    std::regex ring(R"re(<circle class="ring"[^>]* cx="([-0-9.]+)" cy="([-0-9.]+)" r="([-0-9.]+)")re");
    for (auto it = std::sregex_iterator(svg.begin(), svg.end(), ring); it != std::sregex_iterator(); ++it) {
        p.centre = {std::stod((*it)[1]), std::stod((*it)[2])};
        p.ring_radii.push_back(std::stod((*it)[3]));
    }
    return p;
}

inline double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

}  // namespace refa::test
