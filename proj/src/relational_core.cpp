#include "relclust/relational_core.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <unordered_map>

namespace relclust {

namespace {

std::set<int> attr_set(const Relation& r) { return {r.attrs.begin(), r.attrs.end()}; }

// Join keys are tuples of attribute values matched by exact equality; -0.0
// is normalized so it keys together with +0.0.
double norm_zero(double v) { return v == 0.0 ? 0.0 : v; }

struct KeyHash {
    size_t operator()(const std::vector<double>& k) const {
        size_t h = 1469598103934665603ull;
        for (double v : k) {
            std::uint64_t bits;
            static_assert(sizeof(bits) == sizeof(v));
            __builtin_memcpy(&bits, &v, sizeof(bits));
            h = (h ^ bits) * 1099511628211ull;
        }
        return h;
    }
};

std::vector<double> make_key(const Relation& r, size_t row, const std::vector<int>& cols) {
    std::vector<double> k(cols.size());
    for (size_t i = 0; i < cols.size(); ++i) k[i] = norm_zero(r.at(row, cols[i]));
    return k;
}

std::vector<int> cols_for(const Relation& r, const std::vector<int>& attrs) {
    std::vector<int> cols;
    cols.reserve(attrs.size());
    for (int a : attrs) cols.push_back(JoinQuery::col_of(r, a));
    return cols;
}

}  // namespace

JoinTree build_join_tree(const JoinQuery& q, int root) {
    size_t m = q.relations.size();
    if (m == 0) throw schema_error("query has no relations");

    std::vector<std::set<int>> attrs(m);
    for (size_t i = 0; i < m; ++i) attrs[i] = attr_set(q.relations[i]);

    std::vector<bool> removed(m, false);
    std::vector<std::pair<int, int>> edges;  // (ear, witness)
    size_t remaining = m;
    while (remaining > 1) {
        int ear = -1, witness = -1;
        for (size_t i = 0; i < m && ear < 0; ++i) {
            if (removed[i]) continue;
            // Attributes of i shared with any other remaining relation.
            std::set<int> shared;
            for (size_t j = 0; j < m; ++j) {
                if (j == i || removed[j]) continue;
                for (int a : attrs[i])
                    if (attrs[j].count(a)) shared.insert(a);
            }
            for (size_t j = 0; j < m; ++j) {
                if (j == i || removed[j]) continue;
                if (std::includes(attrs[j].begin(), attrs[j].end(), shared.begin(),
                                  shared.end())) {
                    ear = static_cast<int>(i);
                    witness = static_cast<int>(j);
                    break;
                }
            }
        }
        if (ear < 0)
            throw not_acyclic_error(
                "query is cyclic: ear removal stalled; provide a hypertree decomposition");
        edges.emplace_back(ear, witness);
        removed[ear] = true;
        --remaining;
    }
    int last = 0;
    for (size_t i = 0; i < m; ++i)
        if (!removed[i]) last = static_cast<int>(i);

    return tree_from_edges(q, edges, root >= 0 ? root : last);
}

JoinTree tree_from_edges(const JoinQuery& q,
                         const std::vector<std::pair<int, int>>& edges, int root) {
    size_t m = q.relations.size();
    if (root < 0 || static_cast<size_t>(root) >= m)
        throw schema_error("join tree root out of range");
    std::vector<std::vector<int>> adj(m);
    for (auto [a, b] : edges) {
        adj[a].push_back(b);
        adj[b].push_back(a);
    }

    JoinTree t;
    t.root = root;
    t.parent.assign(m, -2);
    t.children.assign(m, {});
    t.join_attrs.assign(m, {});
    t.parent[root] = -1;
    t.order.push_back(root);
    for (size_t qi = 0; qi < t.order.size(); ++qi) {
        int u = t.order[qi];
        // Deterministic child order.
        std::vector<int> nb = adj[u];
        std::sort(nb.begin(), nb.end());
        for (int v : nb) {
            if (t.parent[v] != -2) continue;
            t.parent[v] = u;
            t.children[u].push_back(v);
            t.order.push_back(v);
        }
    }
    if (t.order.size() != m)
        throw schema_error("join tree edges do not span all relations");

    for (size_t v = 0; v < m; ++v) {
        if (t.parent[v] < 0) continue;
        const auto& a = q.relations[v].attrs;
        const auto& b = q.relations[t.parent[v]].attrs;
        for (int x : a)
            if (std::find(b.begin(), b.end(), x) != b.end()) t.join_attrs[v].push_back(x);
        std::sort(t.join_attrs[v].begin(), t.join_attrs[v].end());
    }
    return t;
}

JoinTree reroot(const JoinQuery& q, const JoinTree& tree, int root) {
    std::vector<std::pair<int, int>> edges;
    for (size_t v = 0; v < tree.size(); ++v)
        if (tree.parent[v] >= 0) edges.emplace_back(static_cast<int>(v), tree.parent[v]);
    return tree_from_edges(q, edges, root);
}

namespace {

// Group index over the active rows of a relation, keyed by its join
// attributes with the parent.  Groups carry checked prefix sums of subtree
// counts so sampling can binary-search inside a group.
struct GroupIndex {
    std::unordered_map<std::vector<double>, std::uint64_t, KeyHash> sum;  // key -> total
};

}  // namespace

JoinQuery semi_join_reduce(const JoinQuery& q, const JoinTree& tree, Counters* counters) {
    size_t m = q.relations.size();
    std::vector<std::vector<char>> alive(m);
    for (size_t i = 0; i < m; ++i) alive[i].assign(q.relations[i].size(), 1);

    auto key_cols = [&](int rel) { return cols_for(q.relations[rel], tree.join_attrs[rel]); };

    // Bottom-up: a parent row survives only if every child relation has a
    // matching survivor.
    for (auto it = tree.order.rbegin(); it != tree.order.rend(); ++it) {
        int u = *it;
        for (int c : tree.children[u]) {
            const Relation& rc = q.relations[c];
            std::vector<int> cols_c = key_cols(c);
            std::unordered_map<std::vector<double>, char, KeyHash> keys;
            for (size_t i = 0; i < rc.size(); ++i) {
                if (!alive[c][i]) continue;
                keys.emplace(make_key(rc, i, cols_c), 1);
            }
            const Relation& ru = q.relations[u];
            std::vector<int> cols_u = cols_for(ru, tree.join_attrs[c]);
            for (size_t i = 0; i < ru.size(); ++i) {
                if (!alive[u][i]) continue;
                if (!keys.count(make_key(ru, i, cols_u))) alive[u][i] = 0;
            }
            if (counters) counters->tuples_touched += rc.size() + ru.size();
        }
    }
    // Top-down: a child row survives only if its key appears among the
    // surviving parent rows.
    for (int u : tree.order) {
        for (int c : tree.children[u]) {
            const Relation& ru = q.relations[u];
            std::vector<int> cols_u = cols_for(ru, tree.join_attrs[c]);
            std::unordered_map<std::vector<double>, char, KeyHash> keys;
            for (size_t i = 0; i < ru.size(); ++i) {
                if (!alive[u][i]) continue;
                keys.emplace(make_key(ru, i, cols_u), 1);
            }
            const Relation& rc = q.relations[c];
            std::vector<int> cols_c = key_cols(c);
            for (size_t i = 0; i < rc.size(); ++i) {
                if (!alive[c][i]) continue;
                if (!keys.count(make_key(rc, i, cols_c))) alive[c][i] = 0;
            }
            if (counters) counters->tuples_touched += rc.size() + ru.size();
        }
    }

    JoinQuery out;
    out.attributes = q.attributes;
    out.relations.resize(m);
    for (size_t i = 0; i < m; ++i) {
        const Relation& r = q.relations[i];
        Relation& o = out.relations[i];
        o.name = r.name;
        o.attrs = r.attrs;
        for (size_t j = 0; j < r.size(); ++j)
            if (alive[i][j]) o.data.insert(o.data.end(), r.row(j), r.row(j) + r.arity());
    }
    return out;
}

namespace {

// One bottom-up counting pass over all rows; returns per-row subtree counts
// for every relation (0 for dangling rows).
std::vector<std::vector<std::uint64_t>> subtree_counts(const JoinQuery& q,
                                                       const JoinTree& tree,
                                                       Counters* counters) {
    size_t m = q.relations.size();
    std::vector<std::vector<std::uint64_t>> c(m);
    std::vector<GroupIndex> groups(m);
    if (counters) ++counters->counting_passes;

    for (auto it = tree.order.rbegin(); it != tree.order.rend(); ++it) {
        int u = *it;
        const Relation& r = q.relations[u];
        c[u].assign(r.size(), 1);
        if (counters) counters->tuples_touched += r.size();
        for (int ch : tree.children[u]) {
            const std::vector<int> cols_u = cols_for(r, tree.join_attrs[ch]);
            for (size_t i = 0; i < r.size(); ++i) {
                auto itg = groups[ch].sum.find(make_key(r, i, cols_u));
                std::uint64_t s = itg == groups[ch].sum.end() ? 0 : itg->second;
                c[u][i] = checked_mul(c[u][i], s);
            }
        }
        if (u != tree.root) {
            const std::vector<int> cols = cols_for(r, tree.join_attrs[u]);
            for (size_t i = 0; i < r.size(); ++i) {
                auto key = make_key(r, i, cols);
                auto [itg, _] = groups[u].sum.emplace(std::move(key), 0);
                itg->second = checked_add(itg->second, c[u][i]);
            }
        }
    }
    return c;
}

}  // namespace

std::uint64_t count_join_results(const JoinQuery& q, const JoinTree& tree,
                                 Counters* counters) {
    auto c = subtree_counts(q, tree, counters);
    std::uint64_t total = 0;
    for (std::uint64_t v : c[tree.root]) total = checked_add(total, v);
    return total;
}

std::vector<std::uint64_t> root_tuple_counts(const JoinQuery& q, const JoinTree& tree,
                                             Counters* counters) {
    return subtree_counts(q, tree, counters)[tree.root];
}

std::vector<std::pair<double, std::uint64_t>> leaf_weighted_projection(
    const JoinQuery& q, int rel, int attr, Counters* counters) {
    int col = JoinQuery::col_of(q.relations[rel], attr);
    if (col < 0) throw schema_error("relation does not contain the projection attribute");
    JoinTree tree = build_join_tree(q, rel);
    std::vector<std::uint64_t> counts = root_tuple_counts(q, tree, counters);

    std::map<double, std::uint64_t> grouped;
    const Relation& r = q.relations[rel];
    for (size_t i = 0; i < r.size(); ++i) {
        if (counts[i] == 0) continue;
        double v = norm_zero(r.at(i, col));
        auto [it, _] = grouped.emplace(v, 0);
        it->second = checked_add(it->second, counts[i]);
    }
    if (counters) counters->tuples_touched += r.size();
    return {grouped.begin(), grouped.end()};
}

}  // namespace relclust
