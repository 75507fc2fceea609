#include <gtest/gtest.h>

#include <random>

#include "frtm/path_solver.hpp"
#include "oracles.hpp"

using namespace frtm;

namespace {

struct Instance {
    LayeredGraph graph;
    std::vector<Eigen::MatrixXd> cost;  // per stage transition
};

Instance random_instance(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> nt(1, 5), mx(1, 4);
    std::uniform_real_distribution<double> u(0, 1);
    Instance in;
    const int J = nt(rng) + 1, M = mx(rng);
    auto& g = in.graph;
    g.t.resize(J);
    g.t(0) = u(rng);
    for (int j = 1; j < J; ++j) g.t(j) = g.t(j - 1) + 0.1 + u(rng);
    g.width = M;
    g.active.resize(J, M);
    g.start.resize(J, M);
    g.end.resize(J, M);
    for (int j = 0; j < J; ++j)
        for (int k = 0; k < M; ++k) {
            g.active(j, k) = u(rng) < 0.9;
            g.start(j, k) = u(rng) < 0.4;
            g.end(j, k) = u(rng) < 0.4;
        }
    for (int j = 0; j + 1 < J; ++j) {
        Eigen::MatrixXd c(M, M);
        for (int a = 0; a < M; ++a)
            for (int b = 0; b < M; ++b)
                c(a, b) = u(rng) < 0.15 ? std::numeric_limits<double>::infinity() : 10 * u(rng);
        in.cost.push_back(c);
    }
    return in;
}

}  // namespace

TEST(PathSolver, MatchesEnumeration) {
    std::mt19937_64 rng(2024);
    int solved = 0;
    for (int trial = 0; trial < 2000; ++trial) {
        Instance in = random_instance(rng);
        auto best = oracle::enumerate_paths(in.graph, [&](Eigen::Index j, Eigen::Index a, Eigen::Index b) {
            return in.cost[j](a, b);
        });
        auto sol = solve_min_average_path(in.graph, [&](Eigen::Index j, Eigen::Ref<Eigen::MatrixXd> c) {
            c = in.cost[j];
        });
        ASSERT_EQ(sol.found(), best.first >= 0);
        if (!sol.found()) continue;
        ++solved;
        EXPECT_NEAR(sol.objective, best.objective, 1e-12);
        // recomputed cost along the returned path agrees with the reported objective
        double acc = 0;
        for (std::size_t i = 1; i < sol.nodes.size(); ++i)
            acc += in.cost[sol.first_stage + i - 1](sol.nodes[i - 1], sol.nodes[i]);
        EXPECT_NEAR(acc / (in.graph.t(sol.last_stage()) - in.graph.t(sol.first_stage)), sol.objective, 1e-12);
        if (best.second - best.objective > 1e-9) {
            EXPECT_EQ(sol.first_stage, best.first);
            EXPECT_EQ(sol.nodes, best.nodes);
        }
    }
    EXPECT_GT(solved, 500);
}

TEST(PathSolver, EmptyWhenNoStart) {
    LayeredGraph g;
    g.t = Eigen::VectorXd::LinSpaced(3, 0, 1);
    g.width = 2;
    g.active.setConstant(3, 2, true);
    g.start.setConstant(3, 2, false);
    g.end.setConstant(3, 2, true);
    auto sol = solve_min_average_path(g, [](Eigen::Index, Eigen::Ref<Eigen::MatrixXd> c) { c.setZero(); });
    EXPECT_FALSE(sol.found());
}

TEST(PathSolver, PrefersLongerPathOnTies) {
    LayeredGraph g;
    g.t = Eigen::VectorXd::LinSpaced(4, 0, 3);
    g.width = 1;
    g.active.setConstant(4, 1, true);
    g.start.setConstant(4, 1, false);
    g.start(0, 0) = true;
    g.end.setConstant(4, 1, true);
    auto sol = solve_min_average_path(g, [](Eigen::Index, Eigen::Ref<Eigen::MatrixXd> c) { c.setConstant(1.0); });
    EXPECT_EQ(sol.last_stage(), 3);
    EXPECT_DOUBLE_EQ(sol.objective, 1.0);
}
