#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace relclust {

using Value = double;

// Errors ---------------------------------------------------------------

struct schema_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct not_acyclic_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct budget_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct count_overflow_error : std::overflow_error {
    using std::overflow_error::overflow_error;
};

// Checked 64-bit counting arithmetic: join-result counts must never wrap.
inline std::uint64_t checked_add(std::uint64_t a, std::uint64_t b) {
    std::uint64_t r;
    if (__builtin_add_overflow(a, b, &r))
        throw count_overflow_error("join count overflows 64 bits in addition");
    return r;
}

inline std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b) {
    std::uint64_t r;
    if (__builtin_mul_overflow(a, b, &r))
        throw count_overflow_error("join count overflows 64 bits in multiplication");
    return r;
}

// Relations ------------------------------------------------------------

// A relation holds real-valued tuples over a fixed list of attributes.
// Rows are stored flat (row-major); `attrs` are indices into the query's
// global attribute list.
struct Relation {
    std::string name;
    std::vector<int> attrs;     // global attribute ids, in column order
    std::vector<double> data;   // row-major, size = rows * attrs.size()

    size_t arity() const { return attrs.size(); }
    size_t size() const { return attrs.empty() ? 0 : data.size() / attrs.size(); }
    const double* row(size_t i) const { return data.data() + i * attrs.size(); }
    double at(size_t i, size_t col) const { return data[i * attrs.size() + col]; }
    void push_row(const std::vector<double>& vals) {
        data.insert(data.end(), vals.begin(), vals.end());
    }
};

// A (natural) join query plus its data: relations over a global attribute
// list.  Attribute order is declaration order and is the coordinate order
// used for all geometry.
struct JoinQuery {
    std::vector<std::string> attributes;  // global names, declaration order
    std::vector<Relation> relations;

    int dims() const { return static_cast<int>(attributes.size()); }
    int attr_id(const std::string& name) const {
        for (size_t i = 0; i < attributes.size(); ++i)
            if (attributes[i] == name) return static_cast<int>(i);
        return -1;
    }
    // Largest relation size; the N used by sampling/size formulas.
    std::uint64_t max_relation_size() const {
        std::uint64_t n = 0;
        for (const auto& r : relations) n = std::max<std::uint64_t>(n, r.size());
        return n;
    }
    // Column position of global attribute `a` in relation `rel`, or -1.
    static int col_of(const Relation& rel, int a) {
        for (size_t c = 0; c < rel.attrs.size(); ++c)
            if (rel.attrs[c] == a) return static_cast<int>(c);
        return -1;
    }
};

// A full join-result tuple (one coordinate per global attribute).
using JoinTuple = std::vector<double>;

// Points in a projected subspace.
using Point = std::vector<double>;

// Weighted point multiset over some subspace; the output type of coreset
// construction and the input type of the clustering plug-ins.
struct WeightedPointSet {
    int dims = 0;
    std::vector<double> pts;      // flat, row-major, size = size()*dims
    std::vector<double> weights;  // parallel to rows

    size_t size() const { return weights.size(); }
    const double* point(size_t i) const { return pts.data() + i * dims; }
    Point point_vec(size_t i) const {
        return Point(point(i), point(i) + dims);
    }
    void add(const double* p, double w) {
        pts.insert(pts.end(), p, p + dims);
        weights.push_back(w);
    }
    double total_weight() const {
        double s = 0;
        for (double w : weights) s += w;
        return s;
    }
};

enum class Objective { kMedian, kMeans };
enum class Mode { Geometric, Discrete };
enum class Algorithm { Slow, Fast };

}  // namespace relclust
