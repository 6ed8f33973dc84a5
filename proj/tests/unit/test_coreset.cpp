#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "relclust/coreset_builder.hpp"
#include "relclust/oracle.hpp"

using namespace relclust;

namespace {

JoinQuery db0() {
    JoinQuery q;
    q.attributes = {"A", "B", "C"};
    Relation r1;
    r1.name = "R1";
    r1.attrs = {0, 1};
    r1.push_row({0, 0});
    r1.push_row({1, 0});
    r1.push_row({4, 2});
    Relation r2;
    r2.name = "R2";
    r2.attrs = {1, 2};
    r2.push_row({0, 1});
    r2.push_row({0, 3});
    r2.push_row({2, 5});
    q.relations = {r1, r2};
    return q;
}

JoinQuery single_unary(const std::vector<double>& vals) {
    JoinQuery q;
    q.attributes = {"A"};
    Relation r;
    r.name = "R";
    r.attrs = {0};
    for (double v : vals) r.push_row({v});
    q.relations = {r};
    return q;
}

JoinQuery random_chain(std::mt19937_64& rng, int m, int rows, int domain) {
    JoinQuery q;
    for (int i = 0; i <= m; ++i) q.attributes.push_back("X" + std::to_string(i));
    std::uniform_int_distribution<int> val(0, domain - 1);
    for (int i = 0; i < m; ++i) {
        Relation r;
        r.name = "R" + std::to_string(i);
        r.attrs = {i, i + 1};
        for (int t = 0; t < rows; ++t) r.push_row({double(val(rng)), double(val(rng))});
        q.relations.push_back(std::move(r));
    }
    return q;
}

// Exact population of "cell minus the first `prefix` ledger boxes" from the
// materialized join, projected onto attrs.
std::uint64_t region_population(const oracle::MaterializedJoin& mj,
                                const std::vector<int>& attrs, const Coreset& cs,
                                const Box& cell, size_t prefix) {
    std::uint64_t n = 0;
    std::vector<double> p(attrs.size());
    for (const auto& t : mj.tuples) {
        for (size_t i = 0; i < attrs.size(); ++i) p[i] = t[size_t(attrs[i])];
        if (!cell.contains(p.data())) continue;
        bool blocked = false;
        for (size_t b = 0; b < prefix && !blocked; ++b)
            blocked = cs.ledger[b].contains(p.data());
        if (!blocked) ++n;
    }
    return n;
}

}  // namespace

TEST_CASE("slow coreset weights are exact region populations summing to |q|") {
    JoinQuery q = db0();
    auto mj = oracle::materialize(q);
    RectEngine eng(q, build_join_tree(q));
    std::vector<int> attrs{0, 1, 2};

    // Candidate solution: the exact discrete 1-median of the join result.
    auto opt = oracle::discrete_opt(mj, attrs, 1, Objective::kMedian);

    CoresetParams p;
    p.epsilon = 0.3;
    p.objective = Objective::kMedian;
    p.algorithm = Algorithm::Slow;
    p.alpha = 2.0;
    Coreset cs = build_coreset(eng, attrs, opt.centers, opt.cost, p);

    CHECK(cs.n == 5);
    CHECK(cs.points.total_weight() == doctest::Approx(5.0).epsilon(1e-12));
    CHECK(cs.grids == 1);
    CHECK(cs.cells_admitted == cs.ledger.size());
    CHECK(cs.cells_admitted <= cs.cells_examined);
    REQUIRE(cs.info.size() == cs.points.size());

    // Points arrive cell by cell; each maximal run of identical
    // (cell, prefix) records must weigh exactly the population of
    // "cell minus the earlier ledger boxes".
    size_t i = 0;
    while (i < cs.info.size()) {
        size_t j = i;
        double w = 0;
        while (j < cs.info.size() && cs.info[j].blocked_prefix == cs.info[i].blocked_prefix &&
               cs.info[j].cell.lo == cs.info[i].cell.lo && cs.info[j].cell.hi == cs.info[i].cell.hi) {
            w += cs.points.weights[j];
            ++j;
        }
        std::uint64_t want =
            region_population(mj, attrs, cs, cs.info[i].cell, cs.info[i].blocked_prefix);
        CHECK(w == doctest::Approx(double(want)).epsilon(1e-12));
        // The recorded full-cell count is exact too.
        std::uint64_t cell_want = region_population(mj, attrs, cs, cs.info[i].cell, 0);
        CHECK(cs.info[i].cell_count == cell_want);
        i = j;
    }

    // Representatives live inside their cells.
    for (size_t t = 0; t < cs.points.size(); ++t)
        CHECK(cs.info[t].cell.contains(cs.points.point(t)));
}

TEST_CASE("slow coreset approximates costs of arbitrary center sets") {
    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 4; ++trial) {
        JoinQuery q = random_chain(rng, 2, 12, 4);
        auto mj = oracle::materialize(q);
        if (mj.size() == 0) continue;
        RectEngine eng(q, build_join_tree(q));
        std::vector<int> attrs{0, 1, 2};
        for (Objective obj : {Objective::kMedian, Objective::kMeans}) {
            auto opt = oracle::discrete_opt(mj, attrs, 2, obj);
            CoresetParams p;
            p.epsilon = 0.3;
            p.objective = obj;
            p.algorithm = Algorithm::Slow;
            p.alpha = 2.0;
            Coreset cs = build_coreset(eng, attrs, opt.centers, opt.cost, p);
            CHECK(cs.points.total_weight() == doctest::Approx(double(mj.size())).epsilon(1e-12));

            std::uniform_real_distribution<double> u(-1.0, 5.0);
            for (int c = 0; c < 10; ++c) {
                std::vector<Point> cand(2, Point(3));
                for (auto& pt : cand)
                    for (auto& x : pt) x = u(rng);
                double full = oracle::exact_cost(mj, attrs, cand, obj);
                double core = oracle::exact_cost(cs.points, cand, obj);
                CHECK(std::abs(core - full) <= p.epsilon * full + 1e-9 * (1.0 + full));
            }
        }
    }
}

TEST_CASE("zero cost bound produces the exact compressed multiset") {
    JoinQuery q = single_unary({3, 3, 3});
    RectEngine eng(q, build_join_tree(q));
    CoresetParams p;
    Coreset cs = build_coreset(eng, {0}, {{3}}, 0.0, p);
    REQUIRE(cs.points.size() == 1);
    CHECK(cs.points.point(0)[0] == 3.0);
    CHECK(cs.points.weights[0] == 3.0);
    CHECK(cs.n == 3);
}

TEST_CASE("zero cost bound with off-center data is rejected") {
    JoinQuery q = single_unary({3, 4});
    RectEngine eng(q, build_join_tree(q));
    CoresetParams p;
    CHECK_THROWS_AS(build_coreset(eng, {0}, {{3}}, 0.0, p), std::invalid_argument);
}

TEST_CASE("fast coreset: a single fully-populated cell gets weight n/(1-eps')") {
    JoinQuery q = single_unary({0, 0, 0, 0, 0});
    RectEngine eng(q, build_join_tree(q));
    CoresetParams p;
    p.epsilon = 0.34;  // eps' = 0.01
    p.objective = Objective::kMedian;
    p.algorithm = Algorithm::Fast;
    p.alpha = 2.0;
    Coreset cs = build_coreset(eng, {0}, {{0}}, 1.0, p);
    REQUIRE(cs.points.size() == 1);
    CHECK(cs.points.point(0)[0] == 0.0);
    CHECK(cs.points.weights[0] == doctest::Approx(5.0 / (1.0 - 0.01)));
    CHECK(cs.info[0].sample_fraction == 1.0);
    CHECK(cs.fast_tau > 0.0);
    CHECK(cs.fast_samples_per_cell >= 1);
}

TEST_CASE("coreset solve wraps the plug-in cost into a certified upper bound") {
    JoinQuery q = db0();
    auto mj = oracle::materialize(q);
    RectEngine eng(q, build_join_tree(q));
    std::vector<int> attrs{0, 1, 2};
    auto opt = oracle::discrete_opt(mj, attrs, 1, Objective::kMeans);

    CoresetParams p;
    p.epsilon = 0.25;
    p.objective = Objective::kMeans;
    p.algorithm = Algorithm::Slow;
    p.alpha = 4.0;
    Coreset cs = build_coreset(eng, attrs, opt.centers, opt.cost, p);

    SolverSpec sp;
    sp.k = 1;
    sp.mode = Mode::Discrete;
    CoresetSolve sol = solve_on_coreset(cs, sp, p);
    CHECK(sol.r_u == doctest::Approx(cost_upper_bound(sol.coreset_cost, p)));
    double true_cost = oracle::exact_cost(mj, attrs, sol.centers, Objective::kMeans);
    CHECK(true_cost <= sol.r_u * (1 + 1e-9));
}

TEST_CASE("cost upper bound formulas per algorithm and objective") {
    CoresetParams p;
    p.epsilon = 0.2;
    p.algorithm = Algorithm::Slow;
    p.objective = Objective::kMedian;
    CHECK(cost_upper_bound(1.0, p) == doctest::Approx(1.0 / (1.0 - 0.05)));
    p.objective = Objective::kMeans;
    CHECK(cost_upper_bound(1.0, p) == doctest::Approx(1.0 / (1.0 - 0.02)));
    p.algorithm = Algorithm::Fast;
    p.objective = Objective::kMedian;
    double e = 0.2 / 34.0;
    CHECK(cost_upper_bound(1.0, p) == doctest::Approx((1 + 4 * e) / (1 - 9 * e)));
    p.objective = Objective::kMeans;
    double e5 = 0.2 / 5.0;
    CHECK(cost_upper_bound(1.0, p) == doctest::Approx((1 + e5) / ((1 - e5) * (1 - e5))));
}
