#include "relclust/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace relclust {

bool Box::contains(const double* p) const {
    for (int i = 0; i < dims(); ++i) {
        double v = p[i];
        if (lo_open[i] ? !(v > lo[i]) : !(v >= lo[i])) return false;
        if (hi_open[i] ? !(v < hi[i]) : !(v <= hi[i])) return false;
    }
    return true;
}

bool Box::empty() const {
    for (int i = 0; i < dims(); ++i) {
        if (lo[i] > hi[i]) return true;
        if (lo[i] == hi[i] && (lo_open[i] || hi_open[i])) return true;
    }
    return false;
}

bool Box::intersects(const Box& other) const { return !intersect(other).empty(); }

Box Box::intersect(const Box& other) const {
    Box r = *this;
    for (int i = 0; i < dims(); ++i) {
        if (other.lo[i] > r.lo[i] || (other.lo[i] == r.lo[i] && other.lo_open[i])) {
            r.lo[i] = other.lo[i];
            r.lo_open[i] = other.lo_open[i];
        }
        if (other.hi[i] < r.hi[i] || (other.hi[i] == r.hi[i] && other.hi_open[i])) {
            r.hi[i] = other.hi[i];
            r.hi_open[i] = other.hi_open[i];
        }
    }
    return r;
}

double box_diam(const Box& b) {
    double s = 0;
    for (int i = 0; i < b.dims(); ++i) {
        double e = b.hi[i] - b.lo[i];
        s += e * e;
    }
    return std::sqrt(s);
}

double point_box_distance(const double* x, const Box& b) {
    double s = 0;
    for (int i = 0; i < b.dims(); ++i) {
        double d = 0;
        if (x[i] < b.lo[i]) d = b.lo[i] - x[i];
        else if (x[i] > b.hi[i]) d = x[i] - b.hi[i];
        s += d * d;
    }
    return std::sqrt(s);
}

double point_box_distance(const Point& x, const Box& b) {
    return point_box_distance(x.data(), b);
}

double set_box_distance(const std::vector<Point>& centers, const Box& b) {
    double best = std::numeric_limits<double>::infinity();
    for (const Point& c : centers) best = std::min(best, point_box_distance(c, b));
    return best;
}

double ExponentialGrid::level_halfside(int j) const {
    return std::ldexp(phi, j - 1);  // (2^j * phi) / 2
}

double ExponentialGrid::pitch(int j) const {
    return eps_grid * std::ldexp(phi, j) / (10.0 * alpha * d);
}

Box ExponentialGrid::level_box(int j) const {
    double h = level_halfside(j);
    std::vector<double> lo(d), hi(d);
    for (int i = 0; i < d; ++i) {
        lo[i] = center[i] - h;
        hi[i] = center[i] + h;
    }
    return Box(std::move(lo), std::move(hi));
}

std::vector<Box> ExponentialGrid::annulus_slabs(int j) const {
    if (j == 0) return {level_box(0)};
    Box outer = level_box(j);
    double hin = level_halfside(j - 1);
    // For axis a: points whose first out-of-hole axis is a.  Axes before a
    // are confined to the hole's interval; axes after span the outer box.
    std::vector<Box> slabs;
    for (int a = 0; a < d; ++a) {
        for (int side = 0; side < 2; ++side) {
            Box s = outer;
            for (int b = 0; b < a; ++b) {
                s.lo[b] = center[b] - hin;
                s.hi[b] = center[b] + hin;
                s.lo_open[b] = 0;
                s.hi_open[b] = 0;
            }
            if (side == 0) {
                s.hi[a] = center[a] - hin;  // x_a < center - hin  (hole face open)
                s.hi_open[a] = 1;
            } else {
                s.lo[a] = center[a] + hin;
                s.lo_open[a] = 1;
            }
            if (!s.empty()) slabs.push_back(std::move(s));
        }
    }
    return slabs;
}

ExponentialGrid build_exponential_grid(const Point& center, double phi, double alpha,
                                       std::uint64_t n, double eps_grid) {
    ExponentialGrid g;
    g.center = center;
    g.phi = phi;
    g.alpha = alpha;
    g.n = n;
    g.eps_grid = eps_grid;
    g.d = static_cast<int>(center.size());
    double an = alpha * double(n);
    double L = std::log2(std::max(an, 1.0));
    // Enough levels that the outermost square contains the L-inf ball of
    // radius alpha*n*phi (the cost budget radius).
    std::int64_t j1 = static_cast<std::int64_t>(std::ceil(2.0 * L));
    std::int64_t j2 = static_cast<std::int64_t>(std::ceil(L)) + 1;
    g.max_level = static_cast<int>(std::max<std::int64_t>({j1, j2, 1}));
    return g;
}

std::vector<std::int64_t> lattice_extents(const Box& slab, double pitch) {
    std::vector<std::int64_t> k(slab.dims());
    for (int i = 0; i < slab.dims(); ++i) {
        double span = slab.hi[i] - slab.lo[i];
        std::int64_t n = pitch > 0 ? static_cast<std::int64_t>(std::ceil(span / pitch)) : 1;
        n = std::max<std::int64_t>(n, 1);
        // Interior boundaries must stay strictly inside the slab.
        while (n > 1 && slab.lo[i] + double(n - 1) * pitch >= slab.hi[i]) --n;
        k[i] = n;
    }
    return k;
}

Box lattice_range_box(const Box& slab, double pitch,
                      const std::vector<std::int64_t>& t0,
                      const std::vector<std::int64_t>& t1) {
    std::vector<std::int64_t> ext = lattice_extents(slab, pitch);
    Box b = slab;
    for (int i = 0; i < slab.dims(); ++i) {
        if (t0[i] > 0) {
            b.lo[i] = slab.lo[i] + double(t0[i]) * pitch;
            b.lo_open[i] = 0;  // interior boundaries are closed-low
        }
        if (t1[i] < ext[i]) {
            b.hi[i] = slab.lo[i] + double(t1[i]) * pitch;
            b.hi_open[i] = 1;  // ...and open-high
        }
    }
    return b;
}

namespace {

// One elementary 1-D piece: a breakpoint singleton or an open gap.
struct Piece {
    double lo, hi;
    bool lo_open, hi_open;
};

// g's interval on axis `i` covers the piece entirely?
bool face_covers(const Box& g, int i, const Piece& p) {
    bool lo_ok = p.lo > g.lo[i] || (p.lo == g.lo[i] && (!g.lo_open[i] || p.lo_open));
    bool hi_ok = p.hi < g.hi[i] || (p.hi == g.hi[i] && (!g.hi_open[i] || p.hi_open));
    return lo_ok && hi_ok;
}

bool piece_inside_within(const Box& w, int i, const Piece& p) {
    bool lo_ok = p.lo > w.lo[i] || (p.lo == w.lo[i] && (!w.lo_open[i] || p.lo_open));
    bool hi_ok = p.hi < w.hi[i] || (p.hi == w.hi[i] && (!w.hi_open[i] || p.hi_open));
    return lo_ok && hi_ok;
}

}  // namespace

std::vector<Box> complement_partition(const std::vector<Box>& blocked, const Box& within) {
    if (within.empty()) return {};
    std::vector<const Box*> g;
    for (const Box& b : blocked)
        if (!b.empty() && b.intersects(within)) g.push_back(&b);
    if (g.empty()) return {within};

    int d = within.dims();
    size_t words = (g.size() + 63) / 64;

    // Elementary intervals per axis: breakpoint singletons and open gaps,
    // restricted to `within`.  Pieces never straddle a blocked-box face, so
    // a candidate box intersecting a blocked box is fully inside it.
    std::vector<std::vector<Piece>> pieces(d);
    // cover[axis][piece] = bitmask over g of boxes covering the piece.
    std::vector<std::vector<std::vector<std::uint64_t>>> cover(d);
    for (int i = 0; i < d; ++i) {
        std::vector<double> vals{within.lo[i], within.hi[i]};
        for (const Box* b : g) {
            vals.push_back(std::clamp(b->lo[i], within.lo[i], within.hi[i]));
            vals.push_back(std::clamp(b->hi[i], within.lo[i], within.hi[i]));
        }
        std::sort(vals.begin(), vals.end());
        vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
        for (size_t t = 0; t < vals.size(); ++t) {
            Piece point{vals[t], vals[t], false, false};
            if (piece_inside_within(within, i, point)) pieces[i].push_back(point);
            if (t + 1 < vals.size()) {
                Piece gap{vals[t], vals[t + 1], true, true};
                if (piece_inside_within(within, i, gap)) pieces[i].push_back(gap);
            }
        }
        cover[i].resize(pieces[i].size(), std::vector<std::uint64_t>(words, 0));
        for (size_t t = 0; t < pieces[i].size(); ++t)
            for (size_t bi = 0; bi < g.size(); ++bi)
                if (face_covers(*g[bi], static_cast<int>(i), pieces[i][t]))
                    cover[i][t][bi / 64] |= (1ull << (bi % 64));
    }

    // Odometer over piece tuples; keep boxes covered by no blocked box.
    std::vector<Box> out;
    std::vector<size_t> idx(d, 0);
    std::vector<std::uint64_t> acc(words);
    while (true) {
        bool blocked_box = false;
        {
            for (size_t w = 0; w < words; ++w) acc[w] = ~0ull;
            for (int i = 0; i < d; ++i)
                for (size_t w = 0; w < words; ++w) acc[w] &= cover[i][idx[i]][w];
            for (size_t w = 0; w < words && !blocked_box; ++w)
                if (acc[w]) blocked_box = true;
        }
        if (!blocked_box) {
            Box b;
            b.lo.resize(d);
            b.hi.resize(d);
            b.lo_open.resize(d);
            b.hi_open.resize(d);
            for (int i = 0; i < d; ++i) {
                const Piece& p = pieces[i][idx[i]];
                b.lo[i] = p.lo;
                b.hi[i] = p.hi;
                b.lo_open[i] = p.lo_open;
                b.hi_open[i] = p.hi_open;
            }
            out.push_back(std::move(b));
        }
        int axis = d - 1;
        while (axis >= 0 && ++idx[axis] == pieces[axis].size()) {
            idx[axis] = 0;
            --axis;
        }
        if (axis < 0) break;
    }

    // Greedy per-axis merge of adjacent free boxes (identical on all other
    // axes and seamlessly adjacent on one).
    auto adjacent = [](const Box& a, const Box& b, int i) {
        // a.hi meets b.lo with exactly one side open (no gap, no overlap).
        return a.hi[i] == b.lo[i] && bool(a.hi_open[i]) != bool(b.lo_open[i]);
    };
    for (int axis = d - 1; axis >= 0; --axis) {
        bool merged = true;
        while (merged) {
            merged = false;
            for (size_t i = 0; i < out.size() && !merged; ++i) {
                for (size_t j = 0; j < out.size() && !merged; ++j) {
                    if (i == j) continue;
                    bool same = true;
                    for (int x = 0; x < d && same; ++x) {
                        if (x == axis) continue;
                        same = out[i].lo[x] == out[j].lo[x] && out[i].hi[x] == out[j].hi[x] &&
                               out[i].lo_open[x] == out[j].lo_open[x] &&
                               out[i].hi_open[x] == out[j].hi_open[x];
                    }
                    if (!same || !adjacent(out[i], out[j], axis)) continue;
                    out[i].hi[axis] = out[j].hi[axis];
                    out[i].hi_open[axis] = out[j].hi_open[axis];
                    out.erase(out.begin() + j);
                    merged = true;
                }
            }
        }
    }
    return out;
}

}  // namespace relclust
