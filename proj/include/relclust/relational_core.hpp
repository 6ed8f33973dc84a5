#pragma once

// Acyclic join machinery: join-tree construction (GYO ear removal),
// semi-join reduction, and linear-time join-result counting with
// per-root-tuple counts.

#include <cstdint>
#include <vector>

#include "relclust/instrument.hpp"
#include "relclust/types.hpp"

namespace relclust {

// Rooted join tree over the relations of a query.  `order` lists relation
// indices parents-first; every child shares its join key (the attribute
// intersection with its parent) as required for Yannakakis passes.
struct JoinTree {
    int root = -1;
    std::vector<int> parent;                 // -1 for root
    std::vector<std::vector<int>> children;  // child relation indices
    std::vector<std::vector<int>> join_attrs;  // per relation: shared attrs with parent
    std::vector<int> order;                  // parents before children

    size_t size() const { return parent.size(); }
};

// Builds a join tree by GYO ear removal (ties broken by declaration order).
// Throws not_acyclic_error when the query has no join tree.  When root >= 0
// the tree is re-rooted at that relation.
JoinTree build_join_tree(const JoinQuery& q, int root = -1);

// Re-roots an existing tree at `root` (join-tree validity is a property of
// the undirected tree, so any relation can serve as root).
JoinTree reroot(const JoinQuery& q, const JoinTree& tree, int root);

// Builds a join tree from explicit undirected edges (used for decomposition
// bag trees whose shape is given).  Edges must form a spanning tree.
JoinTree tree_from_edges(const JoinQuery& q,
                         const std::vector<std::pair<int, int>>& edges, int root);

// Removes all dangling tuples (tuples that extend to no full join result).
// Row order within each relation is preserved.
JoinQuery semi_join_reduce(const JoinQuery& q, const JoinTree& tree,
                           Counters* counters = nullptr);

// Number of join results, by one bottom-up counting pass (checked uint64).
std::uint64_t count_join_results(const JoinQuery& q, const JoinTree& tree,
                                 Counters* counters = nullptr);

// For each tuple h of the root relation: the number of join results that
// extend h.  Sums to count_join_results.
std::vector<std::uint64_t> root_tuple_counts(const JoinQuery& q, const JoinTree& tree,
                                             Counters* counters = nullptr);

// Weighted projection of the join result onto a single attribute, computed
// at a relation containing it: distinct values with exact multiplicities,
// sorted by value.  `rel` must contain global attribute `attr`, and the
// instance should already be semi-join reduced.
std::vector<std::pair<double, std::uint64_t>> leaf_weighted_projection(
    const JoinQuery& q, int rel, int attr, Counters* counters = nullptr);

}  // namespace relclust
