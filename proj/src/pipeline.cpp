#include "relclust/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

#include "relclust/rect_engine.hpp"

namespace relclust {

namespace {

// Guarantee of the crossed candidate set at an internal node, given the
// plug-in factor gamma carried up from the children.
double alpha_for(Mode mode, Objective obj, double eps, double gamma) {
    if (obj == Objective::kMedian) {
        double base = (mode == Mode::Geometric) ? (1.0 + eps) : 2.0 * (2.0 + eps);
        return base * gamma * std::sqrt(2.0);
    }
    double base = (mode == Mode::Geometric) ? (1.0 + eps) : 4.0 * (4.0 + eps);
    return base * gamma;
}

// Factor assumed for the iterative plug-in (no certificate).
double assumed_gamma(Mode mode, Objective obj) {
    if (mode == Mode::Discrete) return 2.0;
    return obj == Objective::kMedian ? 2.0 : 4.0;
}

// Factor certified by an exhaustive solve: exact over the input points, so
// 1 in discrete mode; in geometric mode the best input-point solution is a
// 2- (median) or 4- (means) approximation, except that the 1-D dynamic
// program is exact outright.
double certified_gamma(Mode mode, Objective obj, bool one_dim) {
    if (mode == Mode::Discrete || one_dim) return 1.0;
    return obj == Objective::kMedian ? 2.0 : 4.0;
}

class Run {
  public:
    Run(const JoinQuery& q, const JoinTree& tree, const PipelineOptions& opt,
        PipelineResult& out)
        : opt_(opt), out_(out), reduced_(semi_join_reduce(q, tree, &out.counters)),
          eng_(reduced_, tree, &out.counters) {}

    void solve() {
        out_.dims = reduced_.dims();
        out_.join_size = eng_.total_count();
        if (out_.join_size == 0) {
            RELCLUST_INFO("pipeline", "join result is empty; nothing to cluster");
            return;
        }
        int root = solve_node(0, reduced_.dims());
        out_.centers = out_.nodes[root].centers;
        out_.r = out_.nodes[root].r_u;
    }

  private:
    SolverSpec solver_spec() const {
        SolverSpec s;
        s.objective = opt_.objective;
        s.mode = opt_.mode;
        s.strategy = opt_.strategy;
        s.k = opt_.k;
        s.seed = opt_.seed;
        s.restarts = opt_.solver_restarts;
        s.max_iters = opt_.solver_max_iters;
        return s;
    }

    // Solves the attribute range [lo, hi); returns the report index.
    int solve_node(int lo, int hi) {
        if (hi - lo == 1) return solve_leaf(lo);
        int mid = lo + (hi - lo) / 2;
        int left = solve_node(lo, mid);
        int right = solve_node(mid, hi);
        return solve_internal(left, right);
    }

    int solve_leaf(int attr) {
        int rel = -1;
        for (size_t ri = 0; ri < reduced_.relations.size() && rel < 0; ++ri)
            if (JoinQuery::col_of(reduced_.relations[ri], attr) >= 0)
                rel = static_cast<int>(ri);
        if (rel < 0)
            throw schema_error("attribute '" + reduced_.attributes[attr] +
                               "' appears in no relation");
        WeightedPointSet h;
        h.dims = 1;
        for (auto& [v, c] : leaf_weighted_projection(reduced_, rel, attr, &out_.counters))
            h.add(&v, double(c));

        ClusterResult res = weighted_cluster(h, solver_spec());
        NodeReport rep;
        rep.attrs = {attr};
        rep.centers = pad_centers(res.centers, opt_.k);
        rep.r_u = res.cost;  // exact cost of the returned centers
        rep.exhaustive = res.exhaustive;
        rep.gamma = res.exhaustive ? certified_gamma(opt_.mode, opt_.objective, true)
                                   : assumed_gamma(opt_.mode, opt_.objective);
        RELCLUST_INFO("pipeline", "leaf " << reduced_.attributes[attr] << ": "
                                          << h.size() << " distinct values, r_u="
                                          << rep.r_u);
        out_.nodes.push_back(std::move(rep));
        return static_cast<int>(out_.nodes.size()) - 1;
    }

    int solve_internal(int left, int right) {
        const NodeReport& lv = out_.nodes[left];
        const NodeReport& rv = out_.nodes[right];
        NodeReport rep;
        rep.left = left;
        rep.right = right;
        rep.attrs = lv.attrs;
        rep.attrs.insert(rep.attrs.end(), rv.attrs.begin(), rv.attrs.end());

        // Candidate centers: all combinations of the children's centers.
        std::vector<Point> cross;
        for (const Point& a : lv.centers)
            for (const Point& b : rv.centers) {
                Point p = a;
                p.insert(p.end(), b.begin(), b.end());
                if (std::find(cross.begin(), cross.end(), p) == cross.end())
                    cross.push_back(std::move(p));
            }
        double r = lv.r_u + rv.r_u;
        double gamma = std::max(lv.gamma, rv.gamma);

        CoresetParams cp;
        cp.epsilon = opt_.epsilon;
        cp.objective = opt_.objective;
        cp.algorithm = opt_.algorithm;
        cp.alpha = alpha_for(opt_.mode, opt_.objective, opt_.epsilon, gamma);
        cp.sample_cap = opt_.sample_cap;
        cp.seed = opt_.seed + 0x9e3779b97f4a7c15ull * (out_.nodes.size() + 1);

        Coreset cs = build_coreset(eng_, rep.attrs, cross, r, cp);
        CoresetSolve sol = solve_on_coreset(cs, solver_spec(), cp);

        rep.centers = sol.centers;
        rep.r_u = sol.r_u;
        rep.exhaustive = sol.exhaustive;
        rep.gamma = sol.exhaustive
                        ? certified_gamma(opt_.mode, opt_.objective, false)
                        : assumed_gamma(opt_.mode, opt_.objective);
        rep.alpha = cp.alpha;
        rep.coreset_size = cs.points.size();
        rep.cells_examined = cs.cells_examined;
        rep.cells_admitted = cs.cells_admitted;
        rep.samples_per_cell = cs.fast_samples_per_cell;
        RELCLUST_INFO("pipeline", "node over " << rep.attrs.size() << " attrs: |X|="
                                               << cross.size() << " coreset="
                                               << cs.points.size() << " r_u=" << rep.r_u);
        out_.nodes.push_back(std::move(rep));
        return static_cast<int>(out_.nodes.size()) - 1;
    }

    const PipelineOptions& opt_;
    PipelineResult& out_;
    JoinQuery reduced_;
    RectEngine eng_;
};

void validate_options(const JoinQuery& q, const PipelineOptions& opt) {
    if (opt.k < 1) throw std::invalid_argument("k must be at least 1");
    if (!(opt.epsilon > 0) || opt.epsilon >= 1)
        throw std::invalid_argument("epsilon must lie in (0, 1)");
    if (q.dims() < 1) throw schema_error("query has no attributes");
    if (q.relations.empty()) throw schema_error("query has no relations");
    for (int a = 0; a < q.dims(); ++a) {
        bool covered = false;
        for (const Relation& r : q.relations)
            covered = covered || JoinQuery::col_of(r, a) >= 0;
        if (!covered)
            throw schema_error("attribute '" + q.attributes[a] +
                               "' appears in no relation");
    }
}

}  // namespace

PipelineResult cluster_join(const JoinQuery& q, const PipelineOptions& opt) {
    validate_options(q, opt);
    JoinTree tree = build_join_tree(q);
    PipelineResult out;
    Run run(q, tree, opt, out);
    run.solve();
    return out;
}

PipelineResult cluster_join_ghd(const JoinQuery& q, const GHDSpec& ghd,
                                const PipelineOptions& opt) {
    validate_options(q, opt);
    validate_ghd(q, ghd);
    PipelineResult out;
    JoinQuery bagq = materialize_ghd_bags(q, ghd, opt.bag_budget, &out.counters);
    JoinTree tree = bag_join_tree(bagq, ghd);
    Run run(bagq, tree, opt, out);
    run.solve();
    return out;
}

// --- hypertree decomposition support ------------------------------------

namespace {

std::vector<std::vector<int>> resolve_bags(const JoinQuery& q, const GHDSpec& ghd) {
    if (ghd.bags.empty()) throw schema_error("decomposition has no bags");
    std::vector<std::vector<int>> bags;
    for (const auto& names : ghd.bags) {
        std::vector<int> ids;
        for (const std::string& name : names) {
            int a = q.attr_id(name);
            if (a < 0) throw schema_error("decomposition names unknown attribute '" + name + "'");
            if (std::find(ids.begin(), ids.end(), a) != ids.end())
                throw schema_error("duplicate attribute '" + name + "' in a bag");
            ids.push_back(a);
        }
        if (ids.empty()) throw schema_error("decomposition has an empty bag");
        std::sort(ids.begin(), ids.end());
        bags.push_back(std::move(ids));
    }
    return bags;
}

// Relation -> first bag whose attributes cover it.
std::vector<int> assign_relations(const JoinQuery& q,
                                  const std::vector<std::vector<int>>& bags) {
    std::vector<int> assign(q.relations.size(), -1);
    for (size_t ri = 0; ri < q.relations.size(); ++ri) {
        std::vector<int> attrs = q.relations[ri].attrs;
        std::sort(attrs.begin(), attrs.end());
        for (size_t b = 0; b < bags.size() && assign[ri] < 0; ++b)
            if (std::includes(bags[b].begin(), bags[b].end(), attrs.begin(), attrs.end()))
                assign[ri] = static_cast<int>(b);
        if (assign[ri] < 0)
            throw schema_error("relation '" + q.relations[ri].name +
                               "' fits in no decomposition bag");
    }
    return assign;
}

}  // namespace

void validate_ghd(const JoinQuery& q, const GHDSpec& ghd) {
    std::vector<std::vector<int>> bags = resolve_bags(q, ghd);
    std::vector<int> assign = assign_relations(q, bags);

    // Each bag's attributes must be covered by its assigned relations, so
    // the bag has a well-defined extent.
    for (size_t b = 0; b < bags.size(); ++b) {
        std::set<int> covered;
        for (size_t ri = 0; ri < q.relations.size(); ++ri)
            if (assign[ri] == static_cast<int>(b))
                covered.insert(q.relations[ri].attrs.begin(), q.relations[ri].attrs.end());
        for (int a : bags[b])
            if (!covered.count(a))
                throw schema_error("bag " + std::to_string(b) + " attribute '" +
                                   q.attributes[a] +
                                   "' is not covered by any relation assigned to it");
    }

    // Every query attribute must appear in some bag.
    for (int a = 0; a < q.dims(); ++a) {
        bool present = false;
        for (const auto& bag : bags)
            present = present || std::binary_search(bag.begin(), bag.end(), a);
        if (!present)
            throw schema_error("attribute '" + q.attributes[a] +
                               "' appears in no decomposition bag");
    }

    // Edges must form a spanning tree over the bags.
    size_t nb = bags.size();
    if (ghd.edges.size() + 1 != nb && nb > 1)
        throw schema_error("decomposition edges do not form a spanning tree");
    std::vector<std::vector<int>> adj(nb);
    for (auto [a, b] : ghd.edges) {
        if (a < 0 || b < 0 || size_t(a) >= nb || size_t(b) >= nb || a == b)
            throw schema_error("decomposition edge names an invalid bag");
        adj[a].push_back(b);
        adj[b].push_back(a);
    }
    std::vector<char> seen(nb, 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    while (!stack.empty()) {
        int u = stack.back();
        stack.pop_back();
        for (int v : adj[u])
            if (!seen[v]) {
                seen[v] = 1;
                stack.push_back(v);
            }
    }
    for (char s : seen)
        if (!s) throw schema_error("decomposition tree is not connected");

    // Running intersection: the bags holding any given attribute must form
    // a connected subtree, or counting over the bag tree would be wrong.
    for (int a = 0; a < q.dims(); ++a) {
        std::vector<char> has(nb, 0);
        int start = -1, total = 0;
        for (size_t b = 0; b < nb; ++b)
            if (std::binary_search(bags[b].begin(), bags[b].end(), a)) {
                has[b] = 1;
                start = static_cast<int>(b);
                ++total;
            }
        if (total <= 1) continue;
        std::vector<char> vis(nb, 0);
        std::vector<int> st{start};
        vis[start] = 1;
        int reached = 1;
        while (!st.empty()) {
            int u = st.back();
            st.pop_back();
            for (int v : adj[u])
                if (has[v] && !vis[v]) {
                    vis[v] = 1;
                    ++reached;
                    st.push_back(v);
                }
        }
        if (reached != total)
            throw schema_error("attribute '" + q.attributes[a] +
                               "' does not span a connected subtree of bags");
    }
}

JoinQuery materialize_ghd_bags(const JoinQuery& q, const GHDSpec& ghd,
                               std::uint64_t budget, Counters* counters) {
    std::vector<std::vector<int>> bags = resolve_bags(q, ghd);
    std::vector<int> assign = assign_relations(q, bags);

    JoinQuery out;
    out.attributes = q.attributes;
    for (size_t b = 0; b < bags.size(); ++b) {
        Relation bag;
        bag.name = "bag" + std::to_string(b);
        bag.attrs = bags[b];
        // Nested-loop join of the assigned relations, budgeted.
        bool first = true;
        std::vector<std::vector<double>> rows;  // over bag.attrs
        const double unset = std::numeric_limits<double>::quiet_NaN();
        for (size_t ri = 0; ri < q.relations.size(); ++ri) {
            if (assign[ri] != static_cast<int>(b)) continue;
            const Relation& r = q.relations[ri];
            std::vector<int> pos(r.arity());
            for (size_t c = 0; c < r.arity(); ++c) {
                auto it = std::find(bag.attrs.begin(), bag.attrs.end(), r.attrs[c]);
                pos[c] = static_cast<int>(it - bag.attrs.begin());
            }
            if (counters) counters->tuples_touched += r.size();
            if (first) {
                for (size_t i = 0; i < r.size(); ++i) {
                    std::vector<double> row(bag.attrs.size(), unset);
                    for (size_t c = 0; c < r.arity(); ++c) row[pos[c]] = r.at(i, c);
                    rows.push_back(std::move(row));
                    if (rows.size() > budget)
                        throw budget_error("bag materialization exceeds the row budget");
                }
                first = false;
                continue;
            }
            std::vector<std::vector<double>> next;
            for (const auto& row : rows) {
                for (size_t i = 0; i < r.size(); ++i) {
                    bool match = true;
                    for (size_t c = 0; c < r.arity() && match; ++c) {
                        double have = row[pos[c]];
                        if (!std::isnan(have) && have != r.at(i, c)) match = false;
                    }
                    if (!match) continue;
                    std::vector<double> merged = row;
                    for (size_t c = 0; c < r.arity(); ++c) merged[pos[c]] = r.at(i, c);
                    next.push_back(std::move(merged));
                    if (next.size() > budget)
                        throw budget_error("bag materialization exceeds the row budget");
                }
            }
            rows = std::move(next);
        }
        for (const auto& row : rows) {
            for (double v : row)
                if (std::isnan(v))
                    throw schema_error("bag " + std::to_string(b) +
                                       " has an attribute no assigned relation sets");
            bag.push_row(row);
        }
        out.relations.push_back(std::move(bag));
    }
    return out;
}

JoinTree bag_join_tree(const JoinQuery& bagq, const GHDSpec& ghd) {
    if (bagq.relations.size() == 1) return build_join_tree(bagq);
    return tree_from_edges(bagq, ghd.edges, 0);
}

}  // namespace relclust
