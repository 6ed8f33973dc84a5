#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "relclust/oracle.hpp"
#include "relclust/pipeline.hpp"

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

JoinQuery triangle_instance() {
    JoinQuery q;
    q.attributes = {"A", "B", "C"};
    Relation r, s, t;
    r.name = "R";
    r.attrs = {0, 1};
    s.name = "S";
    s.attrs = {1, 2};
    t.name = "T";
    t.attrs = {2, 0};
    r.push_row({0, 0});
    r.push_row({0, 1});
    r.push_row({1, 0});
    r.push_row({5, 5});
    s.push_row({0, 0});
    s.push_row({1, 0});
    s.push_row({1, 1});
    s.push_row({5, 5});
    t.push_row({0, 0});
    t.push_row({0, 1});
    t.push_row({1, 1});
    t.push_row({5, 5});
    q.relations = {r, s, t};
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

}  // namespace

TEST_CASE("leaf nodes solve exact weighted projections") {
    JoinQuery q = db0();
    PipelineOptions opt;
    opt.k = 1;
    opt.objective = Objective::kMedian;
    opt.mode = Mode::Discrete;
    PipelineResult res = cluster_join(q, opt);
    CHECK(res.join_size == 5);
    REQUIRE(res.nodes.size() == 5);  // 3 leaves + 2 internal

    // Find the leaf for each attribute.
    for (const NodeReport& nr : res.nodes) {
        if (nr.attrs.size() != 1) continue;
        CHECK(nr.left == -1);
        CHECK(nr.exhaustive);
        CHECK(nr.gamma == 1.0);  // 1-D discrete: exact
        REQUIRE(nr.centers.size() == 1);
        if (nr.attrs[0] == 0) {  // A: {0 x2, 1 x2, 4 x1} -> median 1, cost 5
            CHECK(nr.centers[0][0] == 1.0);
            CHECK(nr.r_u == doctest::Approx(5.0));
        } else if (nr.attrs[0] == 1) {  // B: {0 x4, 2 x1} -> median 0, cost 2
            CHECK(nr.centers[0][0] == 0.0);
            CHECK(nr.r_u == doctest::Approx(2.0));
        } else {  // C: {1 x2, 3 x2, 5 x1} -> median 3, cost 6
            CHECK(nr.centers[0][0] == 3.0);
            CHECK(nr.r_u == doctest::Approx(6.0));
        }
    }

    // Root covers all attributes and carries the final answer.
    const NodeReport& root = res.nodes.back();
    CHECK(root.attrs == std::vector<int>{0, 1, 2});
    CHECK(res.centers == root.centers);
    CHECK(res.r == root.r_u);
}

TEST_CASE("means leaves use the centroid") {
    JoinQuery q = db0();
    PipelineOptions opt;
    opt.k = 1;
    opt.objective = Objective::kMeans;
    opt.mode = Mode::Geometric;
    PipelineResult res = cluster_join(q, opt);
    for (const NodeReport& nr : res.nodes) {
        if (nr.attrs.size() == 1 && nr.attrs[0] == 2) {
            CHECK(nr.centers[0][0] == doctest::Approx(13.0 / 5.0));
        }
    }
}

TEST_CASE("certified upper bounds hold at every node against brute force") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 6; ++trial) {
        JoinQuery q = random_chain(rng, 2, 10, 4);
        auto mj = oracle::materialize(q);
        if (mj.size() == 0) continue;
        for (Objective obj : {Objective::kMedian, Objective::kMeans}) {
            for (Algorithm alg : {Algorithm::Slow, Algorithm::Fast}) {
                PipelineOptions opt;
                opt.k = 2;
                opt.epsilon = 0.3;
                opt.objective = obj;
                opt.mode = Mode::Discrete;
                opt.algorithm = alg;
                opt.seed = 17 + trial;
                PipelineResult res = cluster_join(q, opt);
                CHECK(res.join_size == mj.size());
                for (const NodeReport& nr : res.nodes) {
                    double cost = oracle::exact_cost(mj, nr.attrs, nr.centers, obj);
                    CHECK(cost <= nr.r_u * (1 + 1e-9) + 1e-9);
                }
            }
        }
    }
}

TEST_CASE("discrete centers are real join tuples for acyclic queries") {
    JoinQuery q = db0();
    auto mj = oracle::materialize(q);
    PipelineOptions opt;
    opt.k = 2;
    opt.mode = Mode::Discrete;
    PipelineResult res = cluster_join(q, opt);
    REQUIRE(res.centers.size() == 2);
    // Each center, restricted to the root's attrs (= all attrs), must be a
    // point of the projected join result.
    for (const auto& c : res.centers) {
        bool found = false;
        for (const auto& t : mj.tuples) found = found || (t == c);
        CHECK(found);
    }
}

TEST_CASE("empty joins yield an empty solution") {
    JoinQuery q = db0();
    q.relations[1].data.clear();  // no R2 rows: join is empty
    PipelineOptions opt;
    PipelineResult res = cluster_join(q, opt);
    CHECK(res.join_size == 0);
    CHECK(res.centers.empty());
    CHECK(res.r == 0.0);
}

TEST_CASE("option validation") {
    JoinQuery q = db0();
    PipelineOptions opt;
    opt.k = 0;
    CHECK_THROWS_AS(cluster_join(q, opt), std::invalid_argument);
    opt.k = 1;
    opt.epsilon = 0.0;
    CHECK_THROWS_AS(cluster_join(q, opt), std::invalid_argument);
    opt.epsilon = 1.0;
    CHECK_THROWS_AS(cluster_join(q, opt), std::invalid_argument);
    opt.epsilon = 0.25;

    JoinQuery empty;
    empty.attributes = {"A"};
    CHECK_THROWS_AS(cluster_join(empty, opt), schema_error);

    JoinQuery uncovered = db0();
    uncovered.attributes.push_back("D");  // no relation mentions D
    CHECK_THROWS_AS(cluster_join(uncovered, opt), schema_error);
}

TEST_CASE("cyclic queries require a decomposition") {
    JoinQuery q = triangle_instance();
    PipelineOptions opt;
    CHECK_THROWS_AS(cluster_join(q, opt), not_acyclic_error);
}

TEST_CASE("triangle decomposition matches brute force") {
    JoinQuery q = triangle_instance();
    GHDSpec ghd;
    ghd.bags = {{"A", "B", "C"}};
    validate_ghd(q, ghd);

    auto mj = oracle::materialize(q);
    REQUIRE(mj.size() > 0);

    Counters c;
    JoinQuery bagq = materialize_ghd_bags(q, ghd, 1000, &c);
    REQUIRE(bagq.relations.size() == 1);
    JoinTree t = bag_join_tree(bagq, ghd);
    CHECK(count_join_results(bagq, t) == mj.size());

    PipelineOptions opt;
    opt.k = 1;
    opt.objective = Objective::kMedian;
    opt.mode = Mode::Discrete;
    PipelineResult res = cluster_join_ghd(q, ghd, opt);
    CHECK(res.join_size == mj.size());
    double cost = oracle::exact_cost(mj, {0, 1, 2}, res.centers, Objective::kMedian);
    CHECK(cost <= res.r * (1 + 1e-9));
}

TEST_CASE("two-bag decomposition with a shared attribute") {
    // Four-cycle A-B-C-D split into bags {A,B,C} and {A,C,D}.
    JoinQuery q;
    q.attributes = {"A", "B", "C", "D"};
    auto rel = [&](const char* name, int a0, int a1,
                   std::initializer_list<std::pair<double, double>> rows) {
        Relation r;
        r.name = name;
        r.attrs = {a0, a1};
        for (auto [x, y] : rows) r.push_row({x, y});
        return r;
    };
    q.relations = {
        rel("RAB", 0, 1, {{0, 0}, {0, 1}, {1, 1}, {2, 2}}),
        rel("RBC", 1, 2, {{0, 0}, {1, 0}, {1, 1}, {2, 2}}),
        rel("RCD", 2, 3, {{0, 0}, {0, 1}, {1, 1}, {2, 2}}),
        rel("RDA", 3, 0, {{0, 0}, {1, 0}, {1, 1}, {2, 2}}),
    };
    GHDSpec ghd;
    ghd.bags = {{"A", "B", "C"}, {"A", "C", "D"}};
    ghd.edges = {{0, 1}};
    validate_ghd(q, ghd);

    auto mj = oracle::materialize(q);
    Counters c;
    JoinQuery bagq = materialize_ghd_bags(q, ghd, 10000, &c);
    JoinTree t = bag_join_tree(bagq, ghd);
    CHECK(count_join_results(bagq, t) == mj.size());

    PipelineOptions opt;
    opt.k = 1;
    opt.mode = Mode::Discrete;
    PipelineResult res = cluster_join_ghd(q, ghd, opt);
    CHECK(res.join_size == mj.size());
    double cost = oracle::exact_cost(mj, {0, 1, 2, 3}, res.centers, Objective::kMedian);
    CHECK(cost <= res.r * (1 + 1e-9));
}

TEST_CASE("decomposition validation rejects malformed inputs") {
    JoinQuery q = triangle_instance();

    GHDSpec unknown;
    unknown.bags = {{"A", "B", "Z"}};
    CHECK_THROWS_AS(validate_ghd(q, unknown), schema_error);

    GHDSpec nocover;  // relation T(C,A) fits in no bag
    nocover.bags = {{"A", "B"}, {"B", "C"}};
    nocover.edges = {{0, 1}};
    CHECK_THROWS_AS(validate_ghd(q, nocover), schema_error);

    GHDSpec disconnected;
    disconnected.bags = {{"A", "B", "C"}, {"A", "B", "C"}};
    disconnected.edges = {};  // two bags, no edge
    CHECK_THROWS_AS(validate_ghd(q, disconnected), schema_error);

    // Running intersection violated: attribute A appears in bags 0 and 2,
    // but the path between them runs through bag 1 which lacks A.
    JoinQuery chain;
    chain.attributes = {"A", "B", "C"};
    Relation r1, r2;
    r1.name = "R1";
    r1.attrs = {0, 1};
    r1.push_row({0, 0});
    r2.name = "R2";
    r2.attrs = {1, 2};
    r2.push_row({0, 0});
    chain.relations = {r1, r2};
    GHDSpec broken;
    broken.bags = {{"A", "B"}, {"B"}, {"A", "B", "C"}};
    broken.edges = {{0, 1}, {1, 2}};
    CHECK_THROWS_AS(validate_ghd(chain, broken), schema_error);

    // Bag budget exceeded.
    GHDSpec tri;
    tri.bags = {{"A", "B", "C"}};
    CHECK_THROWS_AS(materialize_ghd_bags(q, tri, 2), budget_error);
}

TEST_CASE("per-node diagnostics are populated") {
    JoinQuery q = db0();
    PipelineOptions opt;
    opt.k = 1;
    opt.algorithm = Algorithm::Slow;
    PipelineResult res = cluster_join(q, opt);
    const NodeReport& root = res.nodes.back();
    CHECK(root.alpha > 0);
    CHECK(root.coreset_size > 0);
    CHECK(root.cells_admitted > 0);
    CHECK(root.cells_admitted <= root.cells_examined);
    CHECK(res.counters.rect_queries > 0);
}
