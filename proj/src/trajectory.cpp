#include "plnav/trajectory.hpp"

#include <array>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>

#include "plnav/error.hpp"

namespace plnav {

namespace {

constexpr double kPixelsPerMeter = 50.0;

std::ofstream open_for_write(const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::trunc);
    if (!out)
        throw IoError("cannot open " + path.string() + " for writing");
    return out;
}

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};

} // namespace

void write_trajectory_csv(std::ostream& out, const TrajectoryLog& log)
{
    out << kTrajectoryCsvHeader << '\n';
    char buf[256];
    for (const auto& r : log.rows) {
        std::snprintf(buf, sizeof buf, "%d,%d,%d,%.3f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,", r.episode, r.agent, r.step,
                      r.time, r.pose.position.x, r.pose.position.y, r.pose.heading, r.action[0], r.action[1], r.reward);
        out << buf << to_string(r.status) << '\n';
    }
}

void export_trajectories(const TrajectoryLog& log, const std::filesystem::path& path)
{
    auto out = open_for_write(path);
    write_trajectory_csv(out, log);
    if (!out)
        throw IoError("failed writing " + path.string());
}

void write_trajectory_svg(std::ostream& out, const Scenario& scenario, const TrajectoryLog& log)
{
    const Bounds& b = scenario.bounds;
    const double width = (b.x1 - b.x0) * kPixelsPerMeter;
    const double height = (b.y1 - b.y0) * kPixelsPerMeter;
    // Maps world metres to SVG pixels with y pointing up.
    auto px = [&](Vec2 p) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.2f,%.2f", (p.x - b.x0) * kPixelsPerMeter, (b.y1 - p.y) * kPixelsPerMeter);
        return std::string(buf);
    };

    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
        << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
    out << "  <rect x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << height
        << "\" fill=\"white\" stroke=\"black\"/>\n";
    for (const auto& h : scenario.hazards) {
        out << "  <path class=\"hazard\" fill=\"#9ecae1\" fill-opacity=\"0.6\" d=\"M";
        for (std::size_t i = 0; i < h.region.size(); ++i)
            out << (i ? " L" : "") << px(h.region[i]);
        out << " Z\"/>\n";
    }
    for (const auto& o : scenario.obstacles) {
        out << "  <polygon class=\"obstacle\" fill=\"#555555\" fill-opacity=\"" << (o.z_lo > 0.0 ? "0.4" : "0.8")
            << "\" points=\"";
        for (std::size_t i = 0; i < o.footprint.size(); ++i)
            out << (i ? " " : "") << px(o.footprint[i]);
        out << "\"/>\n";
    }

    std::map<std::pair<int, int>, std::vector<Vec2>> tracks;
    for (const auto& r : log.rows)
        tracks[{r.episode, r.agent}].push_back(r.pose.position);
    for (const auto& [key, points] : tracks) {
        out << "  <polyline class=\"trajectory\" fill=\"none\" stroke-width=\"2\" stroke=\""
            << kPalette[static_cast<std::size_t>(key.second) % std::size(kPalette)] << "\" points=\"";
        for (std::size_t i = 0; i < points.size(); ++i)
            out << (i ? " " : "") << px(points[i]);
        out << "\"/>\n";
    }
    out << "</svg>\n";
}

void export_trajectory_svg(const Scenario& scenario, const TrajectoryLog& log, const std::filesystem::path& path)
{
    auto out = open_for_write(path);
    write_trajectory_svg(out, scenario, log);
    if (!out)
        throw IoError("failed writing " + path.string());
}

} // namespace plnav
