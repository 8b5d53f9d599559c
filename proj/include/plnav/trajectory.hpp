#pragma once

#include <filesystem>
#include <iosfwd>
#include <vector>

#include "plnav/env.hpp"

namespace plnav {

struct TrajectoryRow {
    int episode = 0;
    int agent = 0;
    int step = 0;    ///< 1-based step that produced this state
    double time = 0; ///< step * dt
    Pose pose;
    std::array<double, 2> action{};
    double reward = 0.0;
    AgentStatus status = AgentStatus::Running;
};

struct TrajectoryLog {
    std::vector<TrajectoryRow> rows;
};

inline constexpr const char* kTrajectoryCsvHeader = "episode,agent,step,time,x,y,theta,a1,a2,reward,status";

void write_trajectory_csv(std::ostream& out, const TrajectoryLog& log);
void export_trajectories(const TrajectoryLog& log, const std::filesystem::path& path);

/// Scene outline, obstacles as polygons, hazards as paths, one polyline per (episode, agent).
void write_trajectory_svg(std::ostream& out, const Scenario& scenario, const TrajectoryLog& log);
void export_trajectory_svg(const Scenario& scenario, const TrajectoryLog& log, const std::filesystem::path& path);

} // namespace plnav
