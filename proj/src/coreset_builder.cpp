#include "relclust/coreset_builder.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <stdexcept>

#include "relclust/instrument.hpp"

namespace relclust {

double grid_fold(const CoresetParams& p) {
    if (p.algorithm == Algorithm::Fast) return p.epsilon / 34.0;
    return p.objective == Objective::kMedian ? p.epsilon / 4.0 : p.epsilon / 18.0;
}

double cost_upper_bound(double coreset_cost, const CoresetParams& p) {
    double eps = p.epsilon;
    if (p.algorithm == Algorithm::Slow) {
        // The slow coreset under-counts no region, so the plug-in cost is at
        // least (1 - fold) times the true optimum.
        double fold = p.objective == Objective::kMedian ? eps / 4.0 : eps / 10.0;
        return coreset_cost / (1.0 - fold);
    }
    if (p.objective == Objective::kMedian) {
        double e = eps / 34.0;
        return coreset_cost * (1.0 + 4.0 * e) / (1.0 - 9.0 * e);
    }
    double e = eps / 5.0;
    return coreset_cost * (1.0 + e) / ((1.0 - e) * (1.0 - e));
}

namespace {

bool cell_admitted(const Point& center, const std::vector<Point>& all,
                   const Box& cell) {
    double diam = box_diam(cell);
    // The relative slack absorbs floating-point ties on cell boundaries.
    return point_box_distance(center, cell) <=
           set_box_distance(all, cell) + diam + 1e-9 * diam;
}

struct CellRec {
    Box box;
    std::uint64_t count = 0;
};

class Builder {
  public:
    Builder(const RectEngine& eng, const std::vector<int>& attrs,
            const std::vector<Point>& centers, double r, const CoresetParams& p)
        : eng_(eng), attrs_(attrs), centers_(centers), r_(r), p_(p), rng_(p.seed) {}

    Coreset run();

  private:
    Rectangle rect(const Box& b) const {
        return box_to_rectangle(b, attrs_, eng_.query().dims());
    }
    std::uint64_t count(const Box& b) const { return eng_.count_rect(rect(b)); }

    void compressed_exact();
    void process_grid(const Point& center);
    std::vector<int> occupied_levels(const ExponentialGrid& g) const;
    void discover(const Box& slab, double pitch, std::vector<CellRec>& out) const;
    void slow_cell(const CellRec& cell);
    void fast_cell(const CellRec& cell);

    const RectEngine& eng_;
    const std::vector<int>& attrs_;
    const std::vector<Point>& centers_;
    double r_;
    CoresetParams p_;
    std::mt19937_64 rng_;
    Coreset cs_;
    std::uint64_t slow_sum_ = 0;
    double eps_fast_ = 0;
    double tau_ = 0;
    std::uint64_t m_cell_ = 0;
};

Coreset Builder::run() {
    if (attrs_.empty()) throw std::invalid_argument("coreset subspace is empty");
    if (r_ < 0) throw std::invalid_argument("negative cost bound");
    for (const Point& c : centers_)
        if (c.size() != attrs_.size())
            throw std::invalid_argument("center dimension does not match subspace");

    cs_.points.dims = static_cast<int>(attrs_.size());
    cs_.n = eng_.total_count();
    if (cs_.n == 0 || centers_.empty()) return std::move(cs_);

    if (r_ == 0) {
        compressed_exact();
        return std::move(cs_);
    }

    if (p_.algorithm == Algorithm::Fast) {
        int d = static_cast<int>(attrs_.size());
        eps_fast_ = p_.epsilon / 34.0;
        std::uint64_t big_n = std::max<std::uint64_t>(eng_.query().max_relation_size(), 2);
        double log2n = std::max(1.0, std::log2(double(big_n)));
        tau_ = 1.0 / (16.0 * double(centers_.size()) *
                      std::pow(eps_fast_, -double(d + 1)) * log2n);
        // log2(2 * N^(10 d)) without overflowing the power itself.
        double bits = 1.0 + 10.0 * d * std::log2(double(big_n));
        double m_formula = std::ceil(3.0 / (eps_fast_ * eps_fast_ * tau_) * bits);
        m_cell_ = m_formula < double(p_.sample_cap)
                      ? std::max<std::uint64_t>(std::uint64_t(m_formula), 1)
                      : std::max<std::uint64_t>(p_.sample_cap, 1);
        cs_.fast_samples_per_cell = m_cell_;
        cs_.fast_tau = tau_;
    }

    // A duplicate center's grid would only revisit ledgered cells.
    std::vector<Point> grid_centers;
    for (const Point& c : centers_)
        if (std::find(grid_centers.begin(), grid_centers.end(), c) == grid_centers.end())
            grid_centers.push_back(c);
    for (const Point& c : grid_centers) process_grid(c);

    if (p_.algorithm == Algorithm::Slow && slow_sum_ != cs_.n)
        throw std::logic_error("coreset weights do not sum to the join size");
    return std::move(cs_);
}

// All mass sits exactly on the centers, so the compressed multiset of
// distinct locations with exact multiplicities is the coreset.
void Builder::compressed_exact() {
    std::vector<Point> distinct;
    for (const Point& c : centers_)
        if (std::find(distinct.begin(), distinct.end(), c) == distinct.end())
            distinct.push_back(c);
    std::uint64_t covered = 0;
    for (const Point& c : distinct) {
        Box b{std::vector<double>(c), std::vector<double>(c)};
        std::uint64_t cnt = count(b);
        if (cnt == 0) continue;
        cs_.points.add(c.data(), double(cnt));
        covered = checked_add(covered, cnt);
        cs_.info.push_back({b, cs_.ledger.size(), cnt, 0.0});
        cs_.ledger.push_back(b);
    }
    if (covered != cs_.n)
        throw std::invalid_argument(
            "cost bound 0 passed but the data does not sit on the centers");
    slow_sum_ = covered;
}

void Builder::process_grid(const Point& center) {
    double an = p_.alpha * double(cs_.n);
    double phi = p_.objective == Objective::kMedian ? r_ / an : std::sqrt(r_ / an);
    ExponentialGrid g = build_exponential_grid(center, phi, p_.alpha, cs_.n, grid_fold(p_));
    ++cs_.grids;
    RELCLUST_DEBUG("coreset", "grid " << cs_.grids << ": phi=" << phi
                                      << " levels=" << g.level_count());
    for (int j : occupied_levels(g)) {
        double pitch = g.pitch(j);
        std::vector<CellRec> cells;
        for (const Box& slab : g.annulus_slabs(j)) discover(slab, pitch, cells);
        for (const CellRec& cell : cells) {
            ++cs_.cells_examined;
            if (!cell_admitted(center, centers_, cell.box)) continue;
            ++cs_.cells_admitted;
            if (p_.algorithm == Algorithm::Slow)
                slow_cell(cell);
            else
                fast_cell(cell);
        }
    }
}

// Levels whose annulus holds at least one point, found by bisecting the
// cumulative counts of the nested level boxes (empty stretches of levels
// cost one count, not one per level).
std::vector<int> Builder::occupied_levels(const ExponentialGrid& g) const {
    std::vector<int> occ;
    std::uint64_t c0 = count(g.level_box(0));
    if (c0 > 0) occ.push_back(0);
    if (g.max_level == 0) return occ;
    std::uint64_t cj = count(g.level_box(g.max_level));
    std::function<void(int, int, std::uint64_t, std::uint64_t)> steps =
        [&](int lo, int hi, std::uint64_t clo, std::uint64_t chi) {
            if (clo == chi) return;
            if (lo + 1 == hi) {
                occ.push_back(hi);
                return;
            }
            int mid = lo + (hi - lo) / 2;
            std::uint64_t cm = count(g.level_box(mid));
            steps(lo, mid, clo, cm);
            steps(mid, hi, cm, chi);
        };
    steps(0, g.max_level, c0, cj);
    return occ;
}

// Populated lattice cells of one annulus slab by count-pruned subdivision.
// Only the first half of each split is counted; the second half's count is
// the difference, since the halves tile the parent box exactly.
void Builder::discover(const Box& slab, double pitch, std::vector<CellRec>& out) const {
    if (slab.empty()) return;
    int d = slab.dims();
    std::vector<std::int64_t> ext = lattice_extents(slab, pitch);
    std::vector<std::int64_t> a(d, 0), b(ext);
    std::uint64_t total = count(lattice_range_box(slab, pitch, a, b));
    std::function<void(std::uint64_t)> rec = [&](std::uint64_t cnt) {
        if (cnt == 0) return;
        int axis = -1;
        std::int64_t width = 1;
        for (int i = 0; i < d; ++i)
            if (b[i] - a[i] > width) {
                width = b[i] - a[i];
                axis = i;
            }
        if (axis < 0) {
            out.push_back({lattice_range_box(slab, pitch, a, b), cnt});
            return;
        }
        std::int64_t mid = a[axis] + width / 2;
        std::int64_t hi_keep = b[axis];
        b[axis] = mid;
        std::uint64_t c1 = count(lattice_range_box(slab, pitch, a, b));
        rec(c1);
        b[axis] = hi_keep;
        std::int64_t lo_keep = a[axis];
        a[axis] = mid;
        rec(cnt - c1);
        a[axis] = lo_keep;
    };
    rec(total);
}

// Exact variant: the weight is the exact population of the cell minus the
// regions already spoken for, and the representative is a sampled member of
// that difference.
void Builder::slow_cell(const CellRec& cell) {
    std::vector<Box> free = complement_partition(cs_.ledger, cell.box);
    std::uint64_t k = 0;
    Point rep;
    bool have_rep = false;
    for (const Box& fb : free) {
        if (have_rep) {
            k = checked_add(k, count(fb));
            continue;
        }
        SampleSet s = eng_.sample_rect(rect(fb), 1, rng_);
        k = checked_add(k, s.count);
        if (!s.tuples.empty()) {
            rep = project_samples(s.tuples, attrs_)[0];
            have_rep = true;
        }
    }
    if (k == 0) return;
    cs_.points.add(rep.data(), double(k));
    slow_sum_ = checked_add(slow_sum_, k);
    cs_.info.push_back({cell.box, cs_.ledger.size(), cell.count, 0.0});
    cs_.ledger.push_back(cell.box);
}

// Sampled variant: the cell's not-yet-covered fraction is estimated from
// per-cell samples; cells below the heaviness threshold are dropped, heavy
// ones get a sampled representative and an estimated weight.
void Builder::fast_cell(const CellRec& cell) {
    std::vector<const Box*> overlapping;
    for (const Box& b : cs_.ledger)
        if (b.intersects(cell.box)) overlapping.push_back(&b);

    Point rep;
    double fraction = 0;
    if (overlapping.empty()) {
        // No sample could land in the ledger: the fraction is exactly 1 and
        // one draw suffices for the representative.
        SampleSet s = eng_.sample_rect(rect(cell.box), 1, rng_);
        if (s.tuples.empty()) return;
        rep = project_samples(s.tuples, attrs_)[0];
        fraction = 1.0;
    } else {
        if (complement_partition(cs_.ledger, cell.box).empty()) return;  // fully covered
        SampleSet s = eng_.sample_rect(rect(cell.box), m_cell_, rng_);
        if (s.tuples.empty()) return;
        std::vector<Point> pts = project_samples(s.tuples, attrs_);
        std::uint64_t outside = 0;
        int first = -1;
        for (size_t i = 0; i < pts.size(); ++i) {
            bool covered = false;
            for (const Box* b : overlapping)
                if (b->contains(pts[i].data())) {
                    covered = true;
                    break;
                }
            if (!covered) {
                ++outside;
                if (first < 0) first = static_cast<int>(i);
            }
        }
        fraction = double(outside) / double(m_cell_);
        if (fraction < 2.0 * tau_) return;
        rep = pts[first];
    }
    double w = fraction * double(cell.count) / (1.0 - eps_fast_);
    cs_.points.add(rep.data(), w);
    cs_.info.push_back({cell.box, cs_.ledger.size(), cell.count, fraction});
    cs_.ledger.push_back(cell.box);
}

}  // namespace

Coreset build_coreset(const RectEngine& eng, const std::vector<int>& attrs,
                      const std::vector<Point>& centers, double r,
                      const CoresetParams& p) {
    Builder b(eng, attrs, centers, r, p);
    return b.run();
}

CoresetSolve solve_on_coreset(const Coreset& cs, SolverSpec solver,
                              const CoresetParams& p) {
    CoresetSolve out;
    if (cs.points.size() == 0) return out;
    solver.objective = p.objective;
    ClusterResult res = weighted_cluster(cs.points, solver);
    out.centers = pad_centers(res.centers, solver.k);
    out.coreset_cost = res.cost;
    out.exhaustive = res.exhaustive;
    out.r_u = cost_upper_bound(res.cost, p);
    return out;
}

}  // namespace relclust
