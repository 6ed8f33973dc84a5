#pragma once

// End-to-end clustering of a join result: a balanced binary tree over the
// attributes is solved bottom-up.  Leaves cluster the exact weighted
// projection onto one attribute; an internal node crosses its children's
// centers into a candidate solution, wraps it in a coreset built from
// rectangle counts/samples, and re-solves.  The join result itself is never
// materialized.  Cyclic queries are supported through a hypertree
// decomposition whose bags are materialized under a budget.

#include <cstdint>
#include <string>
#include <vector>

#include "relclust/coreset_builder.hpp"
#include "relclust/instrument.hpp"
#include "relclust/relational_core.hpp"
#include "relclust/std_clustering.hpp"
#include "relclust/types.hpp"

namespace relclust {

struct PipelineOptions {
    int k = 1;
    double epsilon = 0.25;
    Objective objective = Objective::kMedian;
    Mode mode = Mode::Geometric;
    Algorithm algorithm = Algorithm::Slow;
    Strategy strategy = Strategy::Auto;
    std::uint64_t seed = 1;
    std::uint64_t sample_cap = 25000;
    int solver_restarts = 4;
    int solver_max_iters = 60;
    std::uint64_t bag_budget = 1000000;  // row budget for decomposition bags
};

// One attribute-tree node's solution, in post order (root last).
struct NodeReport {
    std::vector<int> attrs;            // global attribute ids, ascending
    int left = -1, right = -1;         // child report indices; -1 at leaves
    std::vector<Point> centers;        // S_u (padded to k)
    double r_u = 0;                    // certified upper bound on opt cost
    double gamma = 1;                  // plug-in factor used for the parent
    double alpha = 0;                  // grid alpha (internal nodes only)
    bool exhaustive = false;
    size_t coreset_size = 0;
    size_t cells_examined = 0;
    size_t cells_admitted = 0;
    std::uint64_t samples_per_cell = 0;
};

struct PipelineResult {
    std::vector<Point> centers;  // final centers over all attributes
    double r = 0;                // certified upper bound on the optimal cost
    std::uint64_t join_size = 0;
    int dims = 0;
    std::vector<NodeReport> nodes;
    Counters counters;
};

// Hypertree decomposition: named attribute bags connected by tree edges.
// Every relation must fit inside some bag; each is materialized into
// exactly one covering bag.
struct GHDSpec {
    std::vector<std::vector<std::string>> bags;
    std::vector<std::pair<int, int>> edges;  // bag indices
};

// Structural checks: bags resolve and are covered, edges span, and each
// attribute's bags form a connected subtree.  Throws schema_error.
void validate_ghd(const JoinQuery& q, const GHDSpec& ghd);

// Joins each bag's assigned relations into one relation per bag (at most
// `budget` rows per intermediate).  The result is an acyclic query over the
// bag tree, equivalent to the input query with exact multiplicities.
JoinQuery materialize_ghd_bags(const JoinQuery& q, const GHDSpec& ghd,
                               std::uint64_t budget, Counters* counters = nullptr);

// Join tree over the materialized bags (the GHD's own tree).
JoinTree bag_join_tree(const JoinQuery& bagq, const GHDSpec& ghd);

// Clusters the join result of an acyclic query.  Throws not_acyclic_error
// when no join tree exists (pass a decomposition instead).
PipelineResult cluster_join(const JoinQuery& q, const PipelineOptions& opt);

// Clusters via a hypertree decomposition (for cyclic queries).
PipelineResult cluster_join_ghd(const JoinQuery& q, const GHDSpec& ghd,
                                const PipelineOptions& opt);

}  // namespace relclust
