#pragma once

// Brute-force reference implementations used by tests and the --oracle CLI
// flag.  Everything here works on explicitly materialized join results via
// plain nested-loop matching; it deliberately shares no machinery with the
// join-tree/counting path it is used to check.

#include <cstdint>
#include <optional>
#include <vector>

#include "relclust/types.hpp"

namespace relclust::oracle {

inline constexpr std::uint64_t kDefaultTupleLimit = 20000;   // materialized join results
inline constexpr std::uint64_t kDefaultSubsetLimit = 10000;  // candidate center subsets

// Fully materialized join result: each row is a complete d-dimensional
// tuple in global attribute order.
struct MaterializedJoin {
    int dims = 0;
    std::vector<JoinTuple> tuples;
    size_t size() const { return tuples.size(); }
};

// Nested-loop natural join of all relations.  Throws budget_error if the
// result (or an intermediate) would exceed `limit` rows.
MaterializedJoin materialize(const JoinQuery& q,
                             std::uint64_t limit = kDefaultTupleLimit);

// Exact clustering cost of `centers` over the projection of `mj` onto the
// attribute set `attrs` (median: sum of distances, means: sum of squares).
double exact_cost(const MaterializedJoin& mj, const std::vector<int>& attrs,
                  const std::vector<Point>& centers, Objective objective);

// Same, but over an explicit weighted point set (used to cross-check coreset
// costs without touching the clustering module).
double exact_cost(const WeightedPointSet& pts, const std::vector<Point>& centers,
                  Objective objective);

struct DiscreteOpt {
    std::vector<Point> centers;
    double cost = 0;
};

// Exact optimum over center sets drawn from the distinct projected points
// (the discrete optimum).  Enumerates all k-subsets; throws budget_error if
// C(distinct, k) exceeds `subset_limit`.
DiscreteOpt discrete_opt(const MaterializedJoin& mj, const std::vector<int>& attrs,
                         int k, Objective objective,
                         std::uint64_t subset_limit = kDefaultSubsetLimit);

DiscreteOpt discrete_opt(const WeightedPointSet& pts, int k, Objective objective,
                         std::uint64_t subset_limit = kDefaultSubsetLimit);

// Projection of the materialized join onto `attrs`, as a weighted multiset
// (distinct locations with multiplicities).
WeightedPointSet project(const MaterializedJoin& mj, const std::vector<int>& attrs);

// Count of materialized rows inside a closed/open box over a subset of
// attributes: bounds[i] constrains attrs[i]; lo_open/hi_open give the face
// openness.  Used to verify rectangle counting.
std::uint64_t count_in_box(const MaterializedJoin& mj, const std::vector<int>& attrs,
                           const std::vector<double>& lo, const std::vector<double>& hi,
                           const std::vector<bool>& lo_open, const std::vector<bool>& hi_open);

}  // namespace relclust::oracle
