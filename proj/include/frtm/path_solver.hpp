#pragma once

// Minimum-average-cost monotone paths through a layered grid graph.
//
// Stage j has times t_j and up to M nodes. A path occupies consecutive stages
// s..e (s < e) with one node per stage; its objective is the summed transition
// cost divided by t_e - t_s. The ratio is minimized exactly by Dinkelbach's
// parametric iteration over single-label shortest-path passes.

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <vector>

namespace frtm {

struct LayeredGraph {
    Eigen::VectorXd t;                                            // stage times, strictly increasing
    Eigen::Index width = 0;                                       // nodes per stage
    Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> active;   // stages x width
    Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> start;    // admissible first nodes
    Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> end;      // admissible last nodes

    Eigen::Index stages() const { return t.size(); }
};

/// Fills cost(k1, k2) for the transition from stage j to stage j+1; +inf marks a forbidden edge.
using TransitionCost = std::function<void(Eigen::Index j, Eigen::Ref<Eigen::MatrixXd> cost)>;

struct PathSolution {
    Eigen::Index first_stage = -1;
    std::vector<Eigen::Index> nodes;  // node index for stages first_stage .. first_stage + nodes.size() - 1
    double raw_cost = 0;
    double objective = 0;

    Eigen::Index last_stage() const { return first_stage + Eigen::Index(nodes.size()) - 1; }
    bool found() const { return first_stage >= 0; }
};

struct PathStats {
    std::uint64_t relaxations = 0;
};

/// Exact minimum-average path; returns a solution with found() == false if none exists.
PathSolution solve_min_average_path(const LayeredGraph& graph, const TransitionCost& cost,
                                    PathStats* stats = nullptr);

}  // namespace frtm
