// Python bindings: run / count over JSON query specs.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdint>
#include <string>

#include "relclust/cli.hpp"

namespace py = pybind11;
using namespace relclust;

namespace {

Objective parse_objective(const std::string& s) {
    if (s == "median") return Objective::kMedian;
    if (s == "means") return Objective::kMeans;
    throw schema_error("objective must be 'median' or 'means', got '" + s + "'");
}

Mode parse_mode(const std::string& s) {
    if (s == "geometric") return Mode::Geometric;
    if (s == "discrete") return Mode::Discrete;
    throw schema_error("mode must be 'geometric' or 'discrete', got '" + s + "'");
}

Algorithm parse_algorithm(const std::string& s) {
    if (s == "slow") return Algorithm::Slow;
    if (s == "fast") return Algorithm::Fast;
    throw schema_error("algorithm must be 'slow' or 'fast', got '" + s + "'");
}

Strategy parse_strategy(const std::string& s) {
    if (s == "auto") return Strategy::Auto;
    if (s == "exhaustive") return Strategy::Exhaustive;
    if (s == "iterative") return Strategy::Iterative;
    throw schema_error("solver must be 'auto', 'exhaustive' or 'iterative', got '" + s + "'");
}

py::dict counters_dict(const Counters& c) {
    py::dict d;
    d["tuples_touched"] = c.tuples_touched;
    d["rect_queries"] = c.rect_queries;
    d["counting_passes"] = c.counting_passes;
    d["samples_drawn"] = c.samples_drawn;
    return d;
}

py::dict run_spec(const std::string& text, const std::string& base_dir, int k, double epsilon,
                  const std::string& objective, const std::string& mode,
                  const std::string& algorithm, const std::string& solver, std::uint64_t seed,
                  std::uint64_t sample_cap, std::uint64_t budget) {
    QuerySpec spec = parse_query_spec_json(text, base_dir);
    PipelineOptions opt;
    opt.k = k;
    opt.epsilon = epsilon;
    opt.objective = parse_objective(objective);
    opt.mode = parse_mode(mode);
    opt.algorithm = parse_algorithm(algorithm);
    opt.strategy = parse_strategy(solver);
    opt.seed = seed;
    opt.sample_cap = sample_cap;
    opt.bag_budget = budget;

    PipelineResult res = spec.has_ghd ? cluster_join_ghd(spec.query, spec.ghd, opt)
                                      : cluster_join(spec.query, opt);

    py::dict d;
    d["join_size"] = res.join_size;
    d["dims"] = res.dims;
    d["attributes"] = spec.query.attributes;
    d["centers"] = res.centers;
    d["cost_upper_bound"] = res.r;
    d["counters"] = counters_dict(res.counters);
    py::list nodes;
    for (const auto& nr : res.nodes) {
        py::dict nd;
        py::list attrs;
        for (int id : nr.attrs) attrs.append(spec.query.attributes[size_t(id)]);
        nd["attributes"] = attrs;
        nd["left"] = nr.left;
        nd["right"] = nr.right;
        nd["centers"] = nr.centers;
        nd["cost_upper_bound"] = nr.r_u;
        nd["gamma"] = nr.gamma;
        nd["alpha"] = nr.alpha;
        nd["exhaustive"] = nr.exhaustive;
        nd["coreset_size"] = nr.coreset_size;
        nd["cells_examined"] = nr.cells_examined;
        nd["cells_admitted"] = nr.cells_admitted;
        nd["samples_per_cell"] = nr.samples_per_cell;
        nodes.append(nd);
    }
    d["nodes"] = nodes;
    return d;
}

std::uint64_t count_spec(const std::string& text, const std::string& base_dir,
                         std::uint64_t budget) {
    QuerySpec spec = parse_query_spec_json(text, base_dir);
    if (spec.has_ghd) {
        validate_ghd(spec.query, spec.ghd);
        JoinQuery bagq = materialize_ghd_bags(spec.query, spec.ghd, budget);
        return count_join_results(bagq, bag_join_tree(bagq, spec.ghd));
    }
    return count_join_results(spec.query, build_join_tree(spec.query));
}

}  // namespace

PYBIND11_MODULE(_relclust, m) {
    m.doc() = "k-median / k-means clustering over join results without materializing the join";
    m.def("run", &run_spec, py::arg("spec"), py::arg("base_dir") = "", py::arg("k") = 1,
          py::arg("epsilon") = 0.25, py::arg("objective") = "median",
          py::arg("mode") = "geometric", py::arg("algorithm") = "slow", py::arg("solver") = "auto",
          py::arg("seed") = std::uint64_t(1), py::arg("sample_cap") = std::uint64_t(25000),
          py::arg("budget") = std::uint64_t(1000000),
          "Cluster the join result of a JSON query spec; returns a report dict.");
    m.def("count", &count_spec, py::arg("spec"), py::arg("base_dir") = "",
          py::arg("budget") = std::uint64_t(1000000),
          "Exact number of join results of a JSON query spec.");
}
