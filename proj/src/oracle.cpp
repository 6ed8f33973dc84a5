#include "relclust/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace relclust::oracle {

MaterializedJoin materialize(const JoinQuery& q, std::uint64_t limit) {
    MaterializedJoin mj;
    mj.dims = q.dims();
    if (q.relations.empty()) return mj;

    // Seed with the first relation, then fold in the others one at a time,
    // matching every shared attribute by exact equality.
    const double unset = std::numeric_limits<double>::quiet_NaN();
    std::vector<JoinTuple> acc;
    {
        const Relation& r0 = q.relations[0];
        for (size_t i = 0; i < r0.size(); ++i) {
            JoinTuple t(mj.dims, unset);
            for (size_t c = 0; c < r0.arity(); ++c) t[r0.attrs[c]] = r0.at(i, c);
            acc.push_back(std::move(t));
            if (acc.size() > limit)
                throw budget_error("oracle materialization exceeds tuple limit");
        }
    }
    for (size_t ri = 1; ri < q.relations.size(); ++ri) {
        const Relation& r = q.relations[ri];
        std::vector<JoinTuple> next;
        for (const JoinTuple& t : acc) {
            for (size_t i = 0; i < r.size(); ++i) {
                bool ok = true;
                for (size_t c = 0; c < r.arity() && ok; ++c) {
                    double have = t[r.attrs[c]];
                    if (!std::isnan(have) && have != r.at(i, c)) ok = false;
                }
                if (!ok) continue;
                JoinTuple u = t;
                for (size_t c = 0; c < r.arity(); ++c) u[r.attrs[c]] = r.at(i, c);
                next.push_back(std::move(u));
                if (next.size() > limit)
                    throw budget_error("oracle materialization exceeds tuple limit");
            }
        }
        acc = std::move(next);
    }
    // A join over disconnected attributes could leave coordinates unset only
    // if some attribute appears in no relation; reject that as a schema bug.
    for (const JoinTuple& t : acc)
        for (double v : t)
            if (std::isnan(v)) throw schema_error("attribute not covered by any relation");
    mj.tuples = std::move(acc);
    return mj;
}

namespace {

double dist2(const double* a, const double* b, size_t d) {
    double s = 0;
    for (size_t i = 0; i < d; ++i) {
        double diff = a[i] - b[i];
        s += diff * diff;
    }
    return s;
}

double point_cost(const double* p, const std::vector<Point>& centers, size_t d,
                  Objective objective) {
    double best = std::numeric_limits<double>::infinity();
    for (const Point& c : centers) best = std::min(best, dist2(p, c.data(), d));
    return objective == Objective::kMeans ? best : std::sqrt(best);
}

}  // namespace

double exact_cost(const MaterializedJoin& mj, const std::vector<int>& attrs,
                  const std::vector<Point>& centers, Objective objective) {
    size_t d = attrs.size();
    std::vector<double> proj(d);
    double total = 0;
    for (const JoinTuple& t : mj.tuples) {
        for (size_t i = 0; i < d; ++i) proj[i] = t[attrs[i]];
        total += point_cost(proj.data(), centers, d, objective);
    }
    return total;
}

double exact_cost(const WeightedPointSet& pts, const std::vector<Point>& centers,
                  Objective objective) {
    double total = 0;
    for (size_t i = 0; i < pts.size(); ++i)
        total += pts.weights[i] * point_cost(pts.point(i), centers, pts.dims, objective);
    return total;
}

WeightedPointSet project(const MaterializedJoin& mj, const std::vector<int>& attrs) {
    WeightedPointSet out;
    out.dims = static_cast<int>(attrs.size());
    std::map<Point, double> grouped;
    Point proj(attrs.size());
    for (const JoinTuple& t : mj.tuples) {
        for (size_t i = 0; i < attrs.size(); ++i) proj[i] = t[attrs[i]];
        grouped[proj] += 1.0;
    }
    for (const auto& [p, w] : grouped) out.add(p.data(), w);
    return out;
}

DiscreteOpt discrete_opt(const WeightedPointSet& pts, int k, Objective objective,
                         std::uint64_t subset_limit) {
    DiscreteOpt best;
    best.cost = std::numeric_limits<double>::infinity();
    size_t n = pts.size();
    if (n == 0) {
        best.cost = 0;
        return best;
    }
    size_t kk = std::min<size_t>(k, n);

    // Count C(n, kk) with early exit against the limit.
    double combos = 1;
    for (size_t i = 0; i < kk; ++i) combos = combos * double(n - i) / double(i + 1);
    if (combos > double(subset_limit))
        throw budget_error("oracle center-subset enumeration exceeds limit");

    std::vector<size_t> idx(kk);
    for (size_t i = 0; i < kk; ++i) idx[i] = i;
    std::vector<Point> centers(kk);
    while (true) {
        for (size_t i = 0; i < kk; ++i) centers[i] = pts.point_vec(idx[i]);
        double c = exact_cost(pts, centers, objective);
        if (c < best.cost) {
            best.cost = c;
            best.centers = centers;
        }
        // Next combination in lexicographic order.
        size_t i = kk;
        while (i > 0) {
            --i;
            if (idx[i] != i + n - kk) {
                ++idx[i];
                for (size_t j = i + 1; j < kk; ++j) idx[j] = idx[j - 1] + 1;
                break;
            }
            if (i == 0) return best;
        }
        if (kk == 0) return best;
    }
}

DiscreteOpt discrete_opt(const MaterializedJoin& mj, const std::vector<int>& attrs,
                         int k, Objective objective, std::uint64_t subset_limit) {
    return discrete_opt(project(mj, attrs), k, objective, subset_limit);
}

std::uint64_t count_in_box(const MaterializedJoin& mj, const std::vector<int>& attrs,
                           const std::vector<double>& lo, const std::vector<double>& hi,
                           const std::vector<bool>& lo_open, const std::vector<bool>& hi_open) {
    std::uint64_t n = 0;
    for (const JoinTuple& t : mj.tuples) {
        bool in = true;
        for (size_t i = 0; i < attrs.size() && in; ++i) {
            double v = t[attrs[i]];
            if (lo_open[i] ? !(v > lo[i]) : !(v >= lo[i])) in = false;
            else if (hi_open[i] ? !(v < hi[i]) : !(v <= hi[i])) in = false;
        }
        if (in) ++n;
    }
    return n;
}

}  // namespace relclust::oracle
