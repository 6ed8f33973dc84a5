#pragma once

// Geometry over projected subspaces: axis-parallel boxes with per-face
// openness, exponential grids around candidate centers, and exact
// partitioning of a box minus a set of boxes into disjoint boxes.

#include <cstdint>
#include <vector>

#include "relclust/types.hpp"

namespace relclust {

// Axis-parallel box in a d-dimensional subspace.  Faces are closed by
// default; openness flags make grids tile space without double-counting
// boundary points.
struct Box {
    std::vector<double> lo, hi;
    std::vector<char> lo_open, hi_open;

    Box() = default;
    Box(std::vector<double> l, std::vector<double> h)
        : lo(std::move(l)), hi(std::move(h)),
          lo_open(lo.size(), 0), hi_open(lo.size(), 0) {}

    int dims() const { return static_cast<int>(lo.size()); }
    bool contains(const double* p) const;
    bool empty() const;  // symbolically empty (some face pair excludes everything)
    bool intersects(const Box& other) const;
    // Intersection (symbolic openness-aware); result may be empty().
    Box intersect(const Box& other) const;
};

// Euclidean diameter of a box (from its extents; openness immaterial).
double box_diam(const Box& b);

// Euclidean distance from point x to the closure of box b (0 if inside).
double point_box_distance(const double* x, const Box& b);
double point_box_distance(const Point& x, const Box& b);

// min over centers of point_box_distance.
double set_box_distance(const std::vector<Point>& centers, const Box& b);

// Exponential grid around one center: nested squares Q_j of side 2^j * phi
// for levels j = 0..J, each annulus V_j = Q_j \ Q_{j-1} subdivided into a
// lattice of cells with pitch eps_grid * 2^j * phi / (10 * alpha * d).
// Cells are not materialized; the grid exposes the annulus slab boxes and
// the lattice geometry, and builders enumerate only populated cells.
struct ExponentialGrid {
    Point center;
    double phi = 0;
    double alpha = 1;
    std::uint64_t n = 0;
    double eps_grid = 0;
    int d = 0;
    int max_level = 0;  // J; levels are 0..J inclusive

    int level_count() const { return max_level + 1; }
    double level_halfside(int j) const;  // half side of Q_j
    double pitch(int j) const;           // cell side length at level j
    // Outer square Q_j as a closed box.
    Box level_box(int j) const;
    // Disjoint boxes covering annulus V_j (one box for j = 0, else up to 2d
    // slabs; faces adjacent to the inner hole are open, outer faces closed).
    std::vector<Box> annulus_slabs(int j) const;
};

// The number of levels guarantees the outermost square reaches L-inf radius
// alpha * n * phi from the center.
ExponentialGrid build_exponential_grid(const Point& center, double phi, double alpha,
                                       std::uint64_t n, double eps_grid);

// Number of lattice cells along each axis of a slab at the given pitch, and
// the box of one lattice cell range [t0, t1) on a given axis (interior
// boundaries are closed-low/open-high; slab boundary faces keep the slab's
// openness).  Helpers for populated-cell discovery.
std::vector<std::int64_t> lattice_extents(const Box& slab, double pitch);
Box lattice_range_box(const Box& slab, double pitch,
                      const std::vector<std::int64_t>& t0,
                      const std::vector<std::int64_t>& t1);

// Exact partition of `within` minus the union of `blocked` into disjoint
// boxes (coordinate slab decomposition on elementary intervals; adjacent
// free slabs merged greedily per axis).  Every point of `within` outside
// every blocked box lies in exactly one returned box.
std::vector<Box> complement_partition(const std::vector<Box>& blocked, const Box& within);

}  // namespace relclust
