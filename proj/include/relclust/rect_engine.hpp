#pragma once

// Rectangle queries over a join result without materializing it: filter the
// base relations by an axis-parallel rectangle, count matching join results
// exactly, and draw uniform samples by count-weighted top-down descents.

#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <vector>

#include "relclust/geometry.hpp"
#include "relclust/instrument.hpp"
#include "relclust/relational_core.hpp"
#include "relclust/types.hpp"

namespace relclust {

// Rectangle over the global attribute space; unconstrained attributes admit
// everything.  Faces may be open to match grid-cell tiling.
struct Rectangle {
    struct RFace {
        double lo, hi;
        bool lo_open = false, hi_open = false;
    };
    std::vector<std::optional<RFace>> faces;  // size = query dims

    explicit Rectangle(int dims = 0) : faces(dims) {}

    void constrain(int attr, double lo, double hi, bool lo_open = false,
                   bool hi_open = false) {
        faces[attr] = RFace{lo, hi, lo_open, hi_open};
    }
    bool contains(const JoinTuple& t) const;
};

// A box over the subspace `attrs` as a global-space rectangle.
Rectangle box_to_rectangle(const Box& b, const std::vector<int>& attrs, int dims);

struct SampleSet {
    std::uint64_t count = 0;          // |q(D) ∩ R|
    std::vector<JoinTuple> tuples;    // drawn uniformly with replacement
};

// Query context: join tree plus per-column sorted indexes so rectangle
// filters probe only qualifying rows.  At construction one counting pass per
// rooting is run over the full instance; a query then picks the rooting that
// lets every subtree the rectangle does not constrain reuse those static
// aggregates instead of being iterated again.
class RectEngine {
  public:
    RectEngine(const JoinQuery& q, JoinTree tree, Counters* counters = nullptr);
    ~RectEngine();

    const JoinQuery& query() const { return *q_; }
    const JoinTree& tree() const { return tree_; }
    Counters* counters() const { return counters_; }

    // Exact |q(D)| (precomputed; free per call).
    std::uint64_t total_count() const;

    // Row ids (ascending) of each relation that satisfy the rectangle.
    std::vector<std::vector<int>> filter_rows(const Rectangle& r) const;

    // Exact |q(D) ∩ R| via one counting pass over the filtered rows.
    std::uint64_t count_rect(const Rectangle& r) const;

    // One counting pass, then z independent count-weighted descents; returns
    // the exact count alongside the samples (empty when the count is 0).
    SampleSet sample_rect(const Rectangle& r, std::uint64_t z, std::mt19937_64& rng) const;

  private:
    struct Prepared;  // filtered rows + chosen rooting (defined in the .cpp)
    struct Statics;   // per-rooting full-instance counting passes
    struct BestRange {
        int col = -1;  // -1 when the rectangle constrains no column
        size_t lo = 0, hi = 0;
    };

    Prepared prepare(const Rectangle& r) const;
    BestRange best_range(size_t ri, const Rectangle& r) const;
    std::vector<int> scan_range(size_t ri, const Rectangle& r, const BestRange& b) const;

    const JoinQuery* q_;
    JoinTree tree_;
    Counters* counters_;
    // per relation / per column: row ids sorted by value, plus sorted values
    std::vector<std::vector<std::vector<int>>> rows_by_val_;
    std::vector<std::vector<std::vector<double>>> sorted_vals_;
    std::vector<JoinTree> tree_by_root_;
    std::shared_ptr<const Statics> statics_;
};

// Standalone instance filter (copies qualifying rows; row order preserved).
JoinQuery filter_by_rect(const JoinQuery& q, const Rectangle& r,
                         Counters* counters = nullptr);

// Projection of sampled join tuples onto `attrs`, duplicates preserved.
std::vector<Point> project_samples(const std::vector<JoinTuple>& tuples,
                                   const std::vector<int>& attrs);

}  // namespace relclust
