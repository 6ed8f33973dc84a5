#pragma once

// Standard k-clustering plug-ins over weighted point sets: an exhaustive
// solver (exact discrete optimum; exact 1-D dynamic program) and a seeded
// iterative solver (distance-weighted seeding + refinement / swap search).

#include <cstdint>
#include <vector>

#include "relclust/types.hpp"

namespace relclust {

enum class Strategy { Auto, Exhaustive, Iterative };

struct SolverSpec {
    Objective objective = Objective::kMedian;
    Mode mode = Mode::Geometric;
    Strategy strategy = Strategy::Auto;
    int k = 1;
    std::uint64_t seed = 0;
    int restarts = 4;
    int max_iters = 60;
    // Exhaustive enumeration cap on C(distinct, k); above it the solver
    // falls back to the iterative strategy.
    std::uint64_t subset_limit = 200000;
};

struct ClusterResult {
    std::vector<Point> centers;
    double cost = 0;
    bool exhaustive = false;  // true when the exact search ran
};

// Clustering cost of `centers` over the weighted points (median: weighted
// distance sum; means: weighted squared-distance sum).
double clustering_cost(const WeightedPointSet& pts, const std::vector<Point>& centers,
                       Objective objective);

// Nearest-center assignment, ties broken toward the lowest center index.
std::vector<int> assign_points(const WeightedPointSet& pts,
                               const std::vector<Point>& centers);

// k centers for the weighted point set under the given spec.  Geometric mode
// may return centers off the input points (1-D exact segments, centroid
// refinement); discrete mode returns input points only.
ClusterResult weighted_cluster(const WeightedPointSet& pts, const SolverSpec& spec);

// Snaps each center to its nearest input point (ties toward the lower point
// index).  Median cost at most doubles; means cost at most quadruples.
std::vector<Point> discrete_from_geometric(const WeightedPointSet& pts,
                                           const std::vector<Point>& centers);

// Duplicates centers until there are exactly k (no-op when |centers| >= k or
// centers is empty).
std::vector<Point> pad_centers(std::vector<Point> centers, int k);

}  // namespace relclust
