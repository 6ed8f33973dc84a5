#include "relclust/std_clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>

#include "relclust/instrument.hpp"

namespace relclust {

namespace {

double dist2(const double* a, const double* b, int d) {
    double s = 0;
    for (int i = 0; i < d; ++i) {
        double diff = a[i] - b[i];
        s += diff * diff;
    }
    return s;
}

double nearest_dist2(const double* p, const std::vector<Point>& centers, int d,
                     int* who = nullptr) {
    double best = std::numeric_limits<double>::infinity();
    int bi = -1;
    for (size_t c = 0; c < centers.size(); ++c) {
        double v = dist2(p, centers[c].data(), d);
        if (v < best) {
            best = v;
            bi = static_cast<int>(c);
        }
    }
    if (who) *who = bi;
    return best;
}

WeightedPointSet distinct_points(const WeightedPointSet& pts) {
    std::map<Point, double> grouped;
    for (size_t i = 0; i < pts.size(); ++i) grouped[pts.point_vec(i)] += pts.weights[i];
    WeightedPointSet out;
    out.dims = pts.dims;
    for (const auto& [p, w] : grouped) out.add(p.data(), w);
    return out;
}

// ---- exact 1-D dynamic program over sorted distinct values -------------

struct Dp1Result {
    std::vector<Point> centers;
    double cost;
};

// Optimal contiguous-segment clustering of sorted weighted values.  For
// medians the optimal center of a segment is a weighted median (an input
// value); for means it is the centroid (geometric) or the input value
// nearest the centroid (discrete).
Dp1Result dp_1d(const WeightedPointSet& d, int k, Objective objective, Mode mode) {
    size_t t = d.size();
    std::vector<double> x(t), w(t);
    for (size_t i = 0; i < t; ++i) {
        x[i] = d.point(i)[0];
        w[i] = d.weights[i];
    }
    std::vector<double> W(t + 1, 0), WX(t + 1, 0), WX2(t + 1, 0);
    for (size_t i = 0; i < t; ++i) {
        W[i + 1] = W[i] + w[i];
        WX[i + 1] = WX[i] + w[i] * x[i];
        WX2[i + 1] = WX2[i] + w[i] * x[i] * x[i];
    }
    // Cost of serving x[a..b] (inclusive) with center c.
    auto seg_cost_at = [&](size_t a, size_t b, double c, bool squared) {
        if (squared)
            return (WX2[b + 1] - WX2[a]) - 2 * c * (WX[b + 1] - WX[a]) +
                   c * c * (W[b + 1] - W[a]);
        // Split at the first value >= c (values are sorted).
        size_t m = std::lower_bound(x.begin() + a, x.begin() + b + 1, c) - x.begin();
        double left = c * (W[m] - W[a]) - (WX[m] - WX[a]);
        double right = (WX[b + 1] - WX[m]) - c * (W[b + 1] - W[m]);
        return left + right;
    };
    auto seg_best = [&](size_t a, size_t b, double* center) {
        if (objective == Objective::kMeans) {
            double mass = W[b + 1] - W[a];
            double mean = (WX[b + 1] - WX[a]) / mass;
            if (mode == Mode::Geometric) {
                *center = mean;
                return seg_cost_at(a, b, mean, true);
            }
            // Best input value: the one nearest the centroid.
            size_t m = std::lower_bound(x.begin() + a, x.begin() + b + 1, mean) - x.begin();
            double best = std::numeric_limits<double>::infinity();
            for (size_t cand : {m > a ? m - 1 : a, std::min(m, b)}) {
                double c = seg_cost_at(a, b, x[cand], true);
                if (c < best) {
                    best = c;
                    *center = x[cand];
                }
            }
            return best;
        }
        // Median: optimal center is any weighted median of the segment.
        double half = (W[b + 1] - W[a]) / 2;
        size_t m = a;
        double acc = 0;
        while (m < b && acc + w[m] < half) acc += w[m++];
        *center = x[m];
        return seg_cost_at(a, b, x[m], false);
    };

    size_t kk = std::min<size_t>(k, t);
    constexpr double inf = std::numeric_limits<double>::infinity();
    std::vector<std::vector<double>> dp(kk + 1, std::vector<double>(t + 1, inf));
    std::vector<std::vector<size_t>> from(kk + 1, std::vector<size_t>(t + 1, 0));
    dp[0][0] = 0;
    for (size_t j = 1; j <= kk; ++j) {
        for (size_t i = j; i <= t; ++i) {
            for (size_t a = j - 1; a < i; ++a) {
                if (dp[j - 1][a] == inf) continue;
                double c;
                double v = dp[j - 1][a] + seg_best(a, i - 1, &c);
                if (v < dp[j][i]) {
                    dp[j][i] = v;
                    from[j][i] = a;
                }
            }
        }
    }
    Dp1Result res;
    res.cost = dp[kk][t];
    size_t i = t;
    for (size_t j = kk; j >= 1; --j) {
        size_t a = from[j][i];
        double c;
        seg_best(a, i - 1, &c);
        res.centers.push_back(Point{c});
        i = a;
    }
    std::reverse(res.centers.begin(), res.centers.end());
    return res;
}

// ---- exhaustive subset search ------------------------------------------

double combinations(size_t n, size_t k) {
    double c = 1;
    for (size_t i = 0; i < k; ++i) c = c * double(n - i) / double(i + 1);
    return c;
}

ClusterResult exhaustive_search(const WeightedPointSet& d, const SolverSpec& spec) {
    ClusterResult best;
    best.cost = std::numeric_limits<double>::infinity();
    best.exhaustive = true;
    size_t n = d.size();
    size_t kk = std::min<size_t>(spec.k, n);
    std::vector<size_t> idx(kk);
    for (size_t i = 0; i < kk; ++i) idx[i] = i;
    std::vector<Point> centers(kk);
    while (true) {
        for (size_t i = 0; i < kk; ++i) centers[i] = d.point_vec(idx[i]);
        double c = clustering_cost(d, centers, spec.objective);
        if (c < best.cost) {
            best.cost = c;
            best.centers = centers;
        }
        size_t i = kk;
        bool advanced = false;
        while (i > 0) {
            --i;
            if (idx[i] != i + n - kk) {
                ++idx[i];
                for (size_t j = i + 1; j < kk; ++j) idx[j] = idx[j - 1] + 1;
                advanced = true;
                break;
            }
        }
        if (!advanced) break;
    }
    return best;
}

// ---- iterative: distance-weighted seeding + refinement ------------------

std::vector<Point> seed_centers(const WeightedPointSet& d, const SolverSpec& spec,
                                std::mt19937_64& rng) {
    size_t n = d.size();
    size_t kk = std::min<size_t>(spec.k, n);
    std::vector<Point> centers;
    std::vector<double> score(n);
    for (size_t c = 0; c < kk; ++c) {
        double total = 0;
        for (size_t i = 0; i < n; ++i) {
            double s;
            if (centers.empty()) {
                s = d.weights[i];
            } else {
                double d2 = nearest_dist2(d.point(i), centers, d.dims);
                s = d.weights[i] *
                    (spec.objective == Objective::kMeans ? d2 : std::sqrt(d2));
            }
            score[i] = s;
            total += s;
        }
        size_t pick = 0;
        if (total > 0) {
            double u = std::uniform_real_distribution<double>(0, total)(rng);
            double acc = 0;
            for (size_t i = 0; i < n; ++i) {
                acc += score[i];
                if (u <= acc) {
                    pick = i;
                    break;
                }
            }
        } else {
            // All mass already covered; any uncovered-duplicate choice works.
            pick = std::uniform_int_distribution<size_t>(0, n - 1)(rng);
        }
        centers.push_back(d.point_vec(pick));
    }
    return centers;
}

void refine_means(const WeightedPointSet& d, std::vector<Point>& centers, int max_iters) {
    std::vector<int> prev;
    for (int it = 0; it < max_iters; ++it) {
        std::vector<int> a = assign_points(d, centers);
        if (a == prev) break;
        prev = a;
        std::vector<double> mass(centers.size(), 0);
        std::vector<Point> sum(centers.size(), Point(d.dims, 0.0));
        for (size_t i = 0; i < d.size(); ++i) {
            mass[a[i]] += d.weights[i];
            for (int x = 0; x < d.dims; ++x) sum[a[i]][x] += d.weights[i] * d.point(i)[x];
        }
        for (size_t c = 0; c < centers.size(); ++c)
            if (mass[c] > 0)
                for (int x = 0; x < d.dims; ++x) centers[c][x] = sum[c][x] / mass[c];
    }
}

// Weiszfeld updates per cluster for geometric medians.
void refine_median(const WeightedPointSet& d, std::vector<Point>& centers, int max_iters) {
    for (int it = 0; it < max_iters; ++it) {
        std::vector<int> a = assign_points(d, centers);
        bool moved = false;
        for (size_t c = 0; c < centers.size(); ++c) {
            Point y = centers[c];
            for (int inner = 0; inner < 50; ++inner) {
                Point num(d.dims, 0.0);
                double den = 0;
                bool at_point = false;
                for (size_t i = 0; i < d.size(); ++i) {
                    if (a[i] != static_cast<int>(c)) continue;
                    double dist = std::sqrt(dist2(d.point(i), y.data(), d.dims));
                    if (dist == 0) {
                        at_point = true;
                        continue;
                    }
                    double f = d.weights[i] / dist;
                    den += f;
                    for (int x = 0; x < d.dims; ++x) num[x] += f * d.point(i)[x];
                }
                if (den == 0 || at_point) break;
                Point next(d.dims);
                double delta = 0;
                for (int x = 0; x < d.dims; ++x) {
                    next[x] = num[x] / den;
                    delta += std::abs(next[x] - y[x]);
                }
                y = std::move(next);
                if (delta < 1e-12) break;
            }
            if (y != centers[c]) {
                centers[c] = y;
                moved = true;
            }
        }
        if (!moved) break;
    }
}

// Single-swap local search over distinct input points (discrete mode).
void swap_search(const WeightedPointSet& d, std::vector<Point>& centers,
                 Objective objective, int max_iters) {
    double cur = clustering_cost(d, centers, objective);
    for (int it = 0; it < max_iters; ++it) {
        bool improved = false;
        for (size_t c = 0; c < centers.size() && !improved; ++c) {
            Point saved = centers[c];
            for (size_t i = 0; i < d.size(); ++i) {
                centers[c] = d.point_vec(i);
                double v = clustering_cost(d, centers, objective);
                if (v + 1e-12 < cur) {
                    cur = v;
                    improved = true;
                    break;
                }
                centers[c] = saved;
            }
        }
        if (!improved) break;
    }
}

ClusterResult iterative_search(const WeightedPointSet& d, const SolverSpec& spec) {
    ClusterResult best;
    best.cost = std::numeric_limits<double>::infinity();
    std::mt19937_64 rng(spec.seed ^ 0x9e3779b97f4a7c15ull);
    for (int r = 0; r < std::max(1, spec.restarts); ++r) {
        std::vector<Point> centers = seed_centers(d, spec, rng);
        if (spec.mode == Mode::Geometric) {
            if (spec.objective == Objective::kMeans)
                refine_means(d, centers, spec.max_iters);
            else
                refine_median(d, centers, spec.max_iters);
        } else {
            swap_search(d, centers, spec.objective, spec.max_iters);
        }
        double c = clustering_cost(d, centers, spec.objective);
        if (c < best.cost) {
            best.cost = c;
            best.centers = std::move(centers);
        }
    }
    return best;
}

}  // namespace

double clustering_cost(const WeightedPointSet& pts, const std::vector<Point>& centers,
                       Objective objective) {
    if (pts.size() == 0) return 0;
    double total = 0;
    for (size_t i = 0; i < pts.size(); ++i) {
        double d2 = nearest_dist2(pts.point(i), centers, pts.dims);
        total += pts.weights[i] * (objective == Objective::kMeans ? d2 : std::sqrt(d2));
    }
    return total;
}

std::vector<int> assign_points(const WeightedPointSet& pts,
                               const std::vector<Point>& centers) {
    std::vector<int> a(pts.size(), -1);
    for (size_t i = 0; i < pts.size(); ++i) nearest_dist2(pts.point(i), centers, pts.dims, &a[i]);
    return a;
}

ClusterResult weighted_cluster(const WeightedPointSet& pts, const SolverSpec& spec) {
    ClusterResult res;
    if (pts.size() == 0 || spec.k <= 0) return res;
    WeightedPointSet d = distinct_points(pts);

    if (static_cast<size_t>(spec.k) >= d.size()) {
        // Every distinct location can be a center: cost is exactly 0.
        res.centers.resize(d.size());
        for (size_t i = 0; i < d.size(); ++i) res.centers[i] = d.point_vec(i);
        res.cost = 0;
        res.exhaustive = true;
        return res;
    }

    bool want_exhaustive = spec.strategy != Strategy::Iterative;
    if (want_exhaustive) {
        // The 1-D dynamic program is cubic in the number of distinct values;
        // under Auto only use it while that stays cheap.
        if (d.dims == 1 &&
            (spec.strategy == Strategy::Exhaustive || d.size() <= 512)) {
            Dp1Result r = dp_1d(d, spec.k, spec.objective, spec.mode);
            res.centers = std::move(r.centers);
            res.cost = r.cost;
            res.exhaustive = true;
            return res;
        }
        if (combinations(d.size(), spec.k) <= double(spec.subset_limit)) {
            res = exhaustive_search(d, spec);
            if (spec.mode == Mode::Geometric && spec.objective == Objective::kMeans) {
                // Centroid refinement only improves the certified solution.
                refine_means(d, res.centers, spec.max_iters);
                res.cost = clustering_cost(d, res.centers, spec.objective);
            }
            return res;
        }
        if (spec.strategy == Strategy::Exhaustive)
            RELCLUST_INFO("solver", "exhaustive search over "
                                        << d.size() << " points exceeds subset limit; "
                                        << "falling back to iterative");
    }
    res = iterative_search(d, spec);
    return res;
}

std::vector<Point> discrete_from_geometric(const WeightedPointSet& pts,
                                           const std::vector<Point>& centers) {
    std::vector<Point> out;
    out.reserve(centers.size());
    for (const Point& c : centers) {
        double best = std::numeric_limits<double>::infinity();
        size_t bi = 0;
        for (size_t i = 0; i < pts.size(); ++i) {
            double v = dist2(pts.point(i), c.data(), pts.dims);
            if (v < best) {
                best = v;
                bi = i;
            }
        }
        out.push_back(pts.point_vec(bi));
    }
    return out;
}

std::vector<Point> pad_centers(std::vector<Point> centers, int k) {
    if (centers.empty()) return centers;
    while (centers.size() < static_cast<size_t>(k)) centers.push_back(centers.back());
    return centers;
}

}  // namespace relclust
