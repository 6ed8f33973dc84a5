#include "relclust/rect_engine.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

namespace relclust {

bool Rectangle::contains(const JoinTuple& t) const {
    for (size_t i = 0; i < faces.size(); ++i) {
        if (!faces[i]) continue;
        const RFace& f = *faces[i];
        double v = t[i];
        if (f.lo_open ? !(v > f.lo) : !(v >= f.lo)) return false;
        if (f.hi_open ? !(v < f.hi) : !(v <= f.hi)) return false;
    }
    return true;
}

Rectangle box_to_rectangle(const Box& b, const std::vector<int>& attrs, int dims) {
    Rectangle r(dims);
    for (size_t i = 0; i < attrs.size(); ++i)
        r.constrain(attrs[i], b.lo[i], b.hi[i], b.lo_open[i], b.hi_open[i]);
    return r;
}

namespace {

double norm_zero(double v) { return v == 0.0 ? 0.0 : v; }

struct KeyHash {
    size_t operator()(const std::vector<double>& k) const {
        size_t h = 1469598103934665603ull;
        for (double v : k) {
            std::uint64_t bits;
            __builtin_memcpy(&bits, &v, sizeof(bits));
            h = (h ^ bits) * 1099511628211ull;
        }
        return h;
    }
};

std::vector<int> cols_for(const Relation& r, const std::vector<int>& attrs) {
    std::vector<int> cols;
    cols.reserve(attrs.size());
    for (int a : attrs) cols.push_back(JoinQuery::col_of(r, a));
    return cols;
}

std::vector<double> make_key(const Relation& r, int row, const std::vector<int>& cols) {
    std::vector<double> k(cols.size());
    for (size_t i = 0; i < cols.size(); ++i) k[i] = norm_zero(r.at(row, cols[i]));
    return k;
}

bool face_ok(const Rectangle::RFace& f, double v) {
    if (f.lo_open ? !(v > f.lo) : !(v >= f.lo)) return false;
    if (f.hi_open ? !(v < f.hi) : !(v <= f.hi)) return false;
    return true;
}

// Per-relation group index for one counting pass: active rows grouped by
// join key with running (checked) count prefix sums for descent sampling.
struct Groups {
    struct Entry {
        std::vector<int> rows;
        std::vector<std::uint64_t> prefix;  // inclusive prefix of subtree counts
        std::uint64_t total = 0;
    };
    std::unordered_map<std::vector<double>, Entry, KeyHash> map;
};

// Note: `groups` may point into `owned` of this or of a statics pass.
// Element addresses inside `owned` survive moves of the Pass (the vector
// buffer is stolen wholesale), but addresses of the Pass's own members do
// not — which is why the root data is flagged rather than pointed to.
struct Pass {
    std::vector<Groups> owned;
    std::vector<const Groups*> groups;  // what parents and descents consult
    std::vector<int> owned_root_rows;
    std::vector<std::uint64_t> owned_root_prefix;
    bool root_is_static = false;  // root rows/prefix live in the statics pass
    std::uint64_t total = 0;
};

// Filtered rows for one rectangle.  Relations the rectangle does not touch
// keep `all` set instead of materializing 0..n-1; `sub_static` marks nodes
// whose whole subtree is untouched (w.r.t. the chosen rooting).
struct FilteredRows {
    std::vector<std::vector<int>> rows;
    std::vector<char> all;
    std::vector<char> sub_static;
    bool any_empty = false;
};

Pass counting_pass(const JoinQuery& q, const JoinTree& tree, const FilteredRows& f,
                   const Pass* statics, Counters* counters) {
    size_t m = q.relations.size();
    Pass p;
    p.owned.resize(m);
    p.groups.assign(m, nullptr);
    if (counters) ++counters->counting_passes;

    std::vector<std::vector<std::uint64_t>> c(m);
    for (auto it = tree.order.rbegin(); it != tree.order.rend(); ++it) {
        int u = *it;
        if (statics && f.sub_static[u]) {
            p.groups[u] = statics->groups[u];
            if (u == tree.root) {
                p.root_is_static = true;
                p.total = statics->total;
            }
            continue;
        }
        const Relation& r = q.relations[u];
        c[u].assign(r.size(), 0);
        auto each_active = [&](auto&& fn) {
            if (f.all[u]) {
                for (size_t i = 0; i < r.size(); ++i) fn(static_cast<int>(i));
            } else {
                for (int row : f.rows[u]) fn(row);
            }
        };
        if (counters)
            counters->tuples_touched += f.all[u] ? r.size() : f.rows[u].size();
        each_active([&](int row) { c[u][row] = 1; });
        for (int ch : tree.children[u]) {
            const std::vector<int> cols = cols_for(r, tree.join_attrs[ch]);
            const Groups& g = *p.groups[ch];
            each_active([&](int row) {
                if (c[u][row] == 0) return;
                auto itg = g.map.find(make_key(r, row, cols));
                std::uint64_t s = itg == g.map.end() ? 0 : itg->second.total;
                c[u][row] = checked_mul(c[u][row], s);
            });
        }
        if (u != tree.root) {
            const std::vector<int> cols = cols_for(r, tree.join_attrs[u]);
            each_active([&](int row) {
                if (c[u][row] == 0) return;
                Groups::Entry& e = p.owned[u].map[make_key(r, row, cols)];
                e.rows.push_back(row);
                e.total = checked_add(e.total, c[u][row]);
                e.prefix.push_back(e.total);
            });
            p.groups[u] = &p.owned[u];
        } else {
            each_active([&](int row) {
                if (c[u][row] == 0) return;
                p.owned_root_rows.push_back(row);
                p.total = checked_add(p.total, c[u][row]);
                p.owned_root_prefix.push_back(p.total);
            });
        }
    }
    return p;
}

}  // namespace

struct RectEngine::Statics {
    std::vector<Pass> by_root;  // index = root relation
};

struct RectEngine::Prepared {
    FilteredRows f;
    int root = 0;
};

RectEngine::~RectEngine() = default;

RectEngine::RectEngine(const JoinQuery& q, JoinTree tree, Counters* counters)
    : q_(&q), tree_(std::move(tree)), counters_(counters) {
    size_t m = q.relations.size();
    rows_by_val_.resize(m);
    sorted_vals_.resize(m);
    for (size_t ri = 0; ri < m; ++ri) {
        const Relation& r = q.relations[ri];
        rows_by_val_[ri].resize(r.arity());
        sorted_vals_[ri].resize(r.arity());
        if (counters_) counters_->tuples_touched += r.size() * r.arity();
        for (size_t c = 0; c < r.arity(); ++c) {
            std::vector<int>& rows = rows_by_val_[ri][c];
            rows.resize(r.size());
            for (size_t i = 0; i < r.size(); ++i) rows[i] = static_cast<int>(i);
            std::stable_sort(rows.begin(), rows.end(), [&](int a, int b) {
                return r.at(a, c) < r.at(b, c);
            });
            auto& vals = sorted_vals_[ri][c];
            vals.resize(r.size());
            for (size_t i = 0; i < r.size(); ++i) vals[i] = r.at(rows[i], c);
        }
    }

    // One full counting pass per rooting; queries reuse these for every
    // subtree their rectangle leaves unconstrained.
    tree_by_root_.resize(m);
    auto statics = std::make_shared<Statics>();
    statics->by_root.resize(m);
    FilteredRows full;
    full.rows.resize(m);
    full.all.assign(m, 1);
    full.sub_static.assign(m, 0);
    for (size_t rr = 0; rr < m; ++rr) {
        tree_by_root_[rr] = static_cast<int>(rr) == tree_.root
                                ? tree_
                                : reroot(q, tree_, static_cast<int>(rr));
        statics->by_root[rr] =
            counting_pass(q, tree_by_root_[rr], full, nullptr, counters_);
    }
    statics_ = std::move(statics);
}

std::uint64_t RectEngine::total_count() const {
    return statics_->by_root[tree_.root].total;
}

RectEngine::BestRange RectEngine::best_range(size_t ri, const Rectangle& rect) const {
    const Relation& r = q_->relations[ri];
    BestRange b;
    b.hi = r.size();
    for (size_t c = 0; c < r.arity(); ++c) {
        const auto& face = rect.faces[r.attrs[c]];
        if (!face) continue;
        const auto& vals = sorted_vals_[ri][c];
        auto lo_it = face->lo_open
                         ? std::upper_bound(vals.begin(), vals.end(), face->lo)
                         : std::lower_bound(vals.begin(), vals.end(), face->lo);
        auto hi_it = face->hi_open
                         ? std::lower_bound(vals.begin(), vals.end(), face->hi)
                         : std::upper_bound(vals.begin(), vals.end(), face->hi);
        size_t lo = lo_it - vals.begin();
        size_t hi = std::max<size_t>(hi_it - vals.begin(), lo);
        if (b.col < 0 || hi - lo < b.hi - b.lo) {
            b.col = static_cast<int>(c);
            b.lo = lo;
            b.hi = hi;
        }
    }
    // If even the narrowest qualifying range keeps every row, every face
    // covers its whole column: the rectangle does not constrain this
    // relation at all, so report it unconstrained and let the static
    // aggregates be reused instead of rescanning it.
    if (b.col >= 0 && b.lo == 0 && b.hi == r.size()) b.col = -1;
    return b;
}

std::vector<int> RectEngine::scan_range(size_t ri, const Rectangle& rect,
                                        const BestRange& b) const {
    const Relation& r = q_->relations[ri];
    if (counters_) counters_->tuples_touched += b.hi - b.lo;
    std::vector<int> rows;
    const auto& cand = rows_by_val_[ri][b.col];
    for (size_t t = b.lo; t < b.hi; ++t) {
        int row = cand[t];
        bool ok = true;
        for (size_t c = 0; c < r.arity() && ok; ++c) {
            const auto& face = rect.faces[r.attrs[c]];
            if (!face || static_cast<int>(c) == b.col) continue;
            ok = face_ok(*face, r.at(row, c));
        }
        if (ok) rows.push_back(row);
    }
    std::sort(rows.begin(), rows.end());
    return rows;
}

RectEngine::Prepared RectEngine::prepare(const Rectangle& rect) const {
    const JoinQuery& q = *q_;
    size_t m = q.relations.size();
    Prepared out;
    FilteredRows& f = out.f;
    f.rows.resize(m);
    f.all.assign(m, 0);
    f.sub_static.assign(m, 0);

    // Best qualifying range per relation (binary searches only; nothing is
    // touched until the scan below).
    std::vector<BestRange> best(m);
    std::vector<size_t> constrained;
    for (size_t ri = 0; ri < m; ++ri) {
        best[ri] = best_range(ri, rect);
        if (best[ri].col < 0)
            f.all[ri] = 1;
        else
            constrained.push_back(ri);
    }

    // Scan narrowest ranges first so an empty relation is discovered before
    // wider ones are touched.
    std::sort(constrained.begin(), constrained.end(), [&](size_t a, size_t b) {
        return best[a].hi - best[a].lo < best[b].hi - best[b].lo;
    });
    for (size_t ri : constrained) {
        f.rows[ri] = scan_range(ri, rect, best[ri]);
        if (f.rows[ri].empty()) {
            f.any_empty = true;
            return out;
        }
    }

    // Choose the rooting wasting the fewest full iterations: an untouched
    // relation costs nothing when its whole subtree is untouched (static
    // reuse) and a full scan otherwise.
    size_t best_waste = SIZE_MAX;
    int best_root = tree_.root;
    std::vector<char> sub(m);
    for (size_t rr = 0; rr < m; ++rr) {
        const JoinTree& t = tree_by_root_[rr];
        size_t waste = 0;
        for (auto it = t.order.rbegin(); it != t.order.rend(); ++it) {
            int u = *it;
            sub[u] = f.all[u];
            for (int ch : t.children[u]) sub[u] = sub[u] && sub[ch];
            if (f.all[u] && !sub[u]) waste += q.relations[u].size();
        }
        if (waste < best_waste) {
            best_waste = waste;
            best_root = static_cast<int>(rr);
            f.sub_static.assign(sub.begin(), sub.end());
        }
    }
    out.root = best_root;
    return out;
}

std::vector<std::vector<int>> RectEngine::filter_rows(const Rectangle& rect) const {
    std::vector<std::vector<int>> rows(q_->relations.size());
    for (size_t ri = 0; ri < rows.size(); ++ri) {
        BestRange b = best_range(ri, rect);
        if (b.col < 0) {
            rows[ri].resize(q_->relations[ri].size());
            for (size_t i = 0; i < rows[ri].size(); ++i) rows[ri][i] = static_cast<int>(i);
        } else {
            rows[ri] = scan_range(ri, rect, b);
        }
    }
    return rows;
}

std::uint64_t RectEngine::count_rect(const Rectangle& rect) const {
    if (counters_) ++counters_->rect_queries;
    Prepared p = prepare(rect);
    if (p.f.any_empty) return 0;
    return counting_pass(*q_, tree_by_root_[p.root], p.f,
                         &statics_->by_root[p.root], counters_)
        .total;
}

SampleSet RectEngine::sample_rect(const Rectangle& rect, std::uint64_t z,
                                  std::mt19937_64& rng) const {
    if (counters_) ++counters_->rect_queries;
    SampleSet out;
    Prepared prep = prepare(rect);
    if (prep.f.any_empty) return out;
    const JoinTree& tree = tree_by_root_[prep.root];
    const Pass& sp = statics_->by_root[prep.root];
    Pass p = counting_pass(*q_, tree, prep.f, &sp, counters_);
    out.count = p.total;
    if (p.total == 0 || z == 0) return out;
    const std::vector<int>& root_rows = p.root_is_static ? sp.owned_root_rows : p.owned_root_rows;
    const std::vector<std::uint64_t>& root_prefix =
        p.root_is_static ? sp.owned_root_prefix : p.owned_root_prefix;

    const JoinQuery& q = *q_;
    std::uniform_int_distribution<std::uint64_t> root_dist(0, p.total - 1);
    out.tuples.reserve(z);
    for (std::uint64_t s = 0; s < z; ++s) {
        JoinTuple t(q.dims(), 0.0);
        // Pick a root tuple with probability proportional to its extension
        // count, then extend downward the same way.
        std::uint64_t u = root_dist(rng);
        size_t idx =
            std::upper_bound(root_prefix.begin(), root_prefix.end(), u) - root_prefix.begin();
        struct Frame {
            int rel;
            int row;
        };
        std::vector<Frame> stack{{tree.root, root_rows[idx]}};
        while (!stack.empty()) {
            Frame fr = stack.back();
            stack.pop_back();
            const Relation& r = q.relations[fr.rel];
            for (size_t c = 0; c < r.arity(); ++c) t[r.attrs[c]] = r.at(fr.row, c);
            if (counters_) ++counters_->tuples_touched;
            for (int ch : tree.children[fr.rel]) {
                const std::vector<int> cols = cols_for(r, tree.join_attrs[ch]);
                const auto& e = p.groups[ch]->map.at(make_key(r, fr.row, cols));
                std::uint64_t v =
                    std::uniform_int_distribution<std::uint64_t>(0, e.total - 1)(rng);
                size_t gi = std::upper_bound(e.prefix.begin(), e.prefix.end(), v) -
                            e.prefix.begin();
                stack.push_back({ch, e.rows[gi]});
            }
        }
        out.tuples.push_back(std::move(t));
        if (counters_) ++counters_->samples_drawn;
    }
    return out;
}

JoinQuery filter_by_rect(const JoinQuery& q, const Rectangle& rect, Counters* counters) {
    JoinQuery out;
    out.attributes = q.attributes;
    out.relations.resize(q.relations.size());
    for (size_t ri = 0; ri < q.relations.size(); ++ri) {
        const Relation& r = q.relations[ri];
        Relation& o = out.relations[ri];
        o.name = r.name;
        o.attrs = r.attrs;
        if (counters) counters->tuples_touched += r.size();
        for (size_t i = 0; i < r.size(); ++i) {
            bool ok = true;
            for (size_t c = 0; c < r.arity() && ok; ++c) {
                const auto& f = rect.faces[r.attrs[c]];
                if (!f) continue;
                ok = face_ok(*f, r.at(i, c));
            }
            if (ok) o.data.insert(o.data.end(), r.row(i), r.row(i) + r.arity());
        }
    }
    return out;
}

std::vector<Point> project_samples(const std::vector<JoinTuple>& tuples,
                                   const std::vector<int>& attrs) {
    std::vector<Point> out;
    out.reserve(tuples.size());
    for (const JoinTuple& t : tuples) {
        Point p(attrs.size());
        for (size_t i = 0; i < attrs.size(); ++i) p[i] = t[attrs[i]];
        out.push_back(std::move(p));
    }
    return out;
}

}  // namespace relclust
