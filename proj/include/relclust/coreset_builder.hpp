#pragma once

// Weighted coresets for k-median / k-means over a join result, built from
// rectangle counts and samples only — the join itself is never materialized.
// Around each center of a given approximate solution an exponential grid is
// laid; populated cells close enough to "their" center contribute one
// representative point whose weight is an exact count (slow variant) or a
// sample-estimated count (fast variant).

#include <cstdint>
#include <vector>

#include "relclust/geometry.hpp"
#include "relclust/rect_engine.hpp"
#include "relclust/std_clustering.hpp"
#include "relclust/types.hpp"

namespace relclust {

struct CoresetParams {
    double epsilon = 0.25;
    Objective objective = Objective::kMedian;
    Algorithm algorithm = Algorithm::Slow;
    double alpha = 2.0;  // approximation guarantee of the centers the grids wrap
    // Per-cell sample budget for the fast variant.  The theoretical sample
    // count is far beyond practical reach, so it is capped here; the
    // estimation guarantees then hold at reduced confidence.
    std::uint64_t sample_cap = 25000;
    std::uint64_t seed = 1;
};

// Lattice fold used in the cell pitch, per algorithm/objective.
double grid_fold(const CoresetParams& p);

// Book-keeping per coreset point, enough for a test to recompute the exact
// population of the region the point stands for.
struct CoresetPointInfo {
    Box cell;                      // grid cell the point represents
    size_t blocked_prefix = 0;     // ledger boxes that predate this cell
    std::uint64_t cell_count = 0;  // exact |q(D) ∩ cell| (projected)
    double sample_fraction = 0;    // fast only: g / M for this cell
};

struct Coreset {
    WeightedPointSet points;
    std::vector<Box> ledger;  // processed cells, in admission order
    std::vector<CoresetPointInfo> info;
    std::uint64_t n = 0;  // |q(D)|
    size_t cells_examined = 0;
    size_t cells_admitted = 0;
    int grids = 0;
    std::uint64_t fast_samples_per_cell = 0;
    double fast_tau = 0;
};

// Builds the coreset over the subspace `attrs` around `centers`, an
// alpha-approximate solution whose cost is at most r.  With r == 0 the
// result is the exact compressed multiset of the projection.  Weights sum
// to |q(D)| exactly in the slow variant.
Coreset build_coreset(const RectEngine& eng, const std::vector<int>& attrs,
                      const std::vector<Point>& centers, double r,
                      const CoresetParams& p);

// Upper bound on the optimal cost derived from the plug-in solution's cost
// on the coreset (valid for any candidate centers, by the two-sided coreset
// guarantee; per algorithm/objective inflation).
double cost_upper_bound(double coreset_cost, const CoresetParams& p);

struct CoresetSolve {
    std::vector<Point> centers;
    double coreset_cost = 0;
    double r_u = 0;  // certified upper bound on the optimal cost
    bool exhaustive = false;
};

// Clusters the coreset with the plug-in solver and wraps the cost into the
// upper bound the recursion needs.
CoresetSolve solve_on_coreset(const Coreset& cs, SolverSpec solver,
                              const CoresetParams& p);

}  // namespace relclust
