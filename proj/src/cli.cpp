#include "relclust/cli.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "relclust/oracle.hpp"

namespace relclust {
namespace {

using nlohmann::json;

std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_cells(const std::string& line) {
    std::vector<std::string> out;
    size_t start = 0;
    while (true) {
        size_t pos = line.find(',', start);
        if (pos == std::string::npos) {
            out.push_back(trim(line.substr(start)));
            break;
        }
        out.push_back(trim(line.substr(start, pos - start)));
        start = pos + 1;
    }
    return out;
}

double parse_value(const std::string& cell, const std::string& where) {
    double v = 0;
    const char* first = cell.data();
    const char* last = cell.data() + cell.size();
    auto [p, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || p != last || !std::isfinite(v))
        throw schema_error(where + ": '" + cell + "' is not a finite number");
    return v;
}

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};

// CSV with a mandatory header row of attribute names; blank lines skipped.
CsvTable read_csv(const std::string& path, const std::string& rel_name) {
    std::ifstream in(path);
    if (!in) throw schema_error("relation '" + rel_name + "': cannot open CSV file " + path);
    CsvTable t;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        std::vector<std::string> cells = split_cells(line);
        if (t.header.empty()) {
            t.header = std::move(cells);
            continue;
        }
        const std::string where =
            "relation '" + rel_name + "' (" + path + " line " + std::to_string(lineno) + ")";
        if (cells.size() != t.header.size())
            throw schema_error(where + ": expected " + std::to_string(t.header.size()) +
                               " values, got " + std::to_string(cells.size()));
        std::vector<double> row;
        row.reserve(cells.size());
        for (const auto& c : cells) row.push_back(parse_value(c, where));
        t.rows.push_back(std::move(row));
    }
    if (t.header.empty())
        throw schema_error("relation '" + rel_name + "': CSV file " + path + " has no header row");
    return t;
}

int attr_index(QuerySpec& spec, const std::string& name, bool explicit_attrs,
               const std::string& where) {
    int id = spec.query.attr_id(name);
    if (id >= 0) return id;
    if (explicit_attrs) throw schema_error(where + ": undeclared attribute '" + name + "'");
    spec.query.attributes.push_back(name);
    return static_cast<int>(spec.query.attributes.size()) - 1;
}

json centers_to_json(const std::vector<Point>& centers) {
    json arr = json::array();
    for (const auto& c : centers) arr.push_back(c);
    return arr;
}

json counters_to_json(const Counters& c) {
    return json{{"tuples_touched", c.tuples_touched},
                {"rect_queries", c.rect_queries},
                {"counting_passes", c.counting_passes},
                {"samples_drawn", c.samples_drawn}};
}

const char* objective_name(Objective o) { return o == Objective::kMedian ? "median" : "means"; }
const char* mode_name(Mode m) { return m == Mode::Geometric ? "geometric" : "discrete"; }
const char* algorithm_name(Algorithm a) { return a == Algorithm::Slow ? "slow" : "fast"; }

void emit(const json& report, const std::string& output) {
    std::string text = report.dump(2);
    text.push_back('\n');
    if (output.empty() || output == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(output);
    if (!out) throw std::runtime_error("cannot write output file: " + output);
    out << text;
}

struct Args {
    std::string spec_path;
    std::string output;
    int k = 1;
    double epsilon = 0.25;
    Objective objective = Objective::kMedian;
    Mode mode = Mode::Geometric;
    Algorithm algorithm = Algorithm::Slow;
    Strategy strategy = Strategy::Auto;
    std::uint64_t seed = 1;
    std::uint64_t sample_cap = 25000;
    int restarts = 4;
    int max_iters = 60;
    std::uint64_t budget = 1000000;
    bool oracle = false;
};

// Brute-force cross-check: joins the raw input relations (also for
// decomposed queries; the bag join preserves multiplicities) and evaluates
// the returned centers exactly.
json oracle_block(const QuerySpec& spec, const PipelineResult& res, const Args& a) {
    json o;
    try {
        oracle::MaterializedJoin mj = oracle::materialize(spec.query, a.budget);
        std::vector<int> attrs(res.dims);
        std::iota(attrs.begin(), attrs.end(), 0);
        double cost = oracle::exact_cost(mj, attrs, res.centers, a.objective);
        o["join_size"] = mj.size();
        o["solution_cost"] = cost;
        o["cost_upper_bound_holds"] = cost <= res.r * (1 + 1e-9) + 1e-12;
        try {
            oracle::DiscreteOpt opt = oracle::discrete_opt(mj, attrs, a.k, a.objective);
            o["discrete_opt_cost"] = opt.cost;
            if (opt.cost > 0) o["ratio_vs_discrete_opt"] = cost / opt.cost;
        } catch (const budget_error& e) {
            o["discrete_opt_skipped"] = e.what();
        }
    } catch (const budget_error& e) {
        o["skipped"] = e.what();
    }
    return o;
}

int do_run(const QuerySpec& spec, const Args& a) {
    PipelineOptions opt;
    opt.k = a.k;
    opt.epsilon = a.epsilon;
    opt.objective = a.objective;
    opt.mode = a.mode;
    opt.algorithm = a.algorithm;
    opt.strategy = a.strategy;
    opt.seed = a.seed;
    opt.sample_cap = a.sample_cap;
    opt.solver_restarts = a.restarts;
    opt.solver_max_iters = a.max_iters;
    opt.bag_budget = a.budget;

    auto t0 = std::chrono::steady_clock::now();
    PipelineResult res = spec.has_ghd ? cluster_join_ghd(spec.query, spec.ghd, opt)
                                      : cluster_join(spec.query, opt);
    double wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();

    json report{
        {"status", "ok"},
        {"k", a.k},
        {"epsilon", a.epsilon},
        {"objective", objective_name(a.objective)},
        {"mode", mode_name(a.mode)},
        {"algorithm", algorithm_name(a.algorithm)},
        {"seed", a.seed},
        {"join_size", res.join_size},
        {"dims", res.dims},
        {"attributes", spec.query.attributes},
        {"centers", centers_to_json(res.centers)},
        {"cost_upper_bound", res.r},
        {"wall_ms", wall_ms},
        {"counters", counters_to_json(res.counters)},
    };
    json nodes = json::array();
    for (const auto& nr : res.nodes) {
        json attrs = json::array();
        for (int id : nr.attrs) attrs.push_back(spec.query.attributes[static_cast<size_t>(id)]);
        nodes.push_back(json{
            {"attributes", attrs},
            {"left", nr.left},
            {"right", nr.right},
            {"centers", centers_to_json(nr.centers)},
            {"cost_upper_bound", nr.r_u},
            {"gamma", nr.gamma},
            {"alpha", nr.alpha},
            {"exhaustive", nr.exhaustive},
            {"coreset_size", nr.coreset_size},
            {"cells_examined", nr.cells_examined},
            {"cells_admitted", nr.cells_admitted},
            {"samples_per_cell", nr.samples_per_cell},
        });
    }
    report["nodes"] = nodes;
    if (a.oracle) report["oracle"] = oracle_block(spec, res, a);
    emit(report, a.output);
    return 0;
}

int do_count(const QuerySpec& spec, const Args& a) {
    Counters counters;
    std::uint64_t n = 0;
    if (spec.has_ghd) {
        validate_ghd(spec.query, spec.ghd);
        JoinQuery bagq = materialize_ghd_bags(spec.query, spec.ghd, a.budget, &counters);
        JoinTree tree = bag_join_tree(bagq, spec.ghd);
        n = count_join_results(bagq, tree, &counters);
    } else {
        JoinTree tree = build_join_tree(spec.query);
        n = count_join_results(spec.query, tree, &counters);
    }
    json rels = json::array();
    for (const auto& r : spec.query.relations)
        rels.push_back(json{{"name", r.name}, {"rows", r.size()}, {"arity", r.arity()}});
    json report{
        {"status", "ok"},
        {"join_size", n},
        {"dims", spec.query.dims()},
        {"attributes", spec.query.attributes},
        {"relations", rels},
        {"counters", counters_to_json(counters)},
    };
    emit(report, a.output);
    return 0;
}

}  // namespace

QuerySpec parse_query_spec_json(const std::string& text, const std::string& base_dir) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw schema_error(std::string("spec is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw schema_error("spec must be a JSON object");
    QuerySpec spec;
    bool explicit_attrs = false;
    try {
        if (j.contains("attributes")) {
            explicit_attrs = true;
            for (const auto& a : j.at("attributes")) {
                std::string name = a.get<std::string>();
                if (spec.query.attr_id(name) >= 0)
                    throw schema_error("duplicate attribute '" + name + "'");
                spec.query.attributes.push_back(std::move(name));
            }
        }
        if (!j.contains("relations") || !j["relations"].is_array() || j["relations"].empty())
            throw schema_error("spec needs a non-empty 'relations' array");
        int idx = 0;
        for (const auto& rj : j["relations"]) {
            ++idx;
            Relation rel;
            rel.name = rj.value("name", "R" + std::to_string(idx));
            const std::string where = "relation '" + rel.name + "'";
            std::vector<std::string> names;
            if (rj.contains("attrs"))
                for (const auto& a : rj.at("attrs")) names.push_back(a.get<std::string>());
            CsvTable csv;
            const bool has_csv = rj.contains("csv");
            if (has_csv) {
                if (rj.contains("rows"))
                    throw schema_error(where + ": give 'rows' or 'csv', not both");
                std::filesystem::path p = rj.at("csv").get<std::string>();
                if (p.is_relative() && !base_dir.empty())
                    p = std::filesystem::path(base_dir) / p;
                csv = read_csv(p.string(), rel.name);
                if (names.empty())
                    names = csv.header;
                else if (names != csv.header)
                    throw schema_error(where + ": CSV header does not match declared attrs");
            }
            if (names.empty())
                throw schema_error(where + ": needs 'attrs' or a CSV with a header row");
            for (const auto& n : names) {
                int id = attr_index(spec, n, explicit_attrs, where);
                if (std::find(rel.attrs.begin(), rel.attrs.end(), id) != rel.attrs.end())
                    throw schema_error(where + ": attribute '" + n + "' appears twice");
                rel.attrs.push_back(id);
            }
            if (has_csv) {
                for (const auto& row : csv.rows) rel.push_row(row);
            } else {
                if (!rj.contains("rows") || !rj["rows"].is_array())
                    throw schema_error(where + ": needs 'rows' (inline) or 'csv' (file)");
                size_t rn = 0;
                for (const auto& row : rj["rows"]) {
                    ++rn;
                    const std::string rwhere = where + " row " + std::to_string(rn);
                    if (!row.is_array() || row.size() != rel.attrs.size())
                        throw schema_error(rwhere + ": expected " +
                                           std::to_string(rel.attrs.size()) + " values");
                    std::vector<double> vals;
                    vals.reserve(row.size());
                    for (const auto& v : row) {
                        if (!v.is_number())
                            throw schema_error(rwhere + ": values must be numbers");
                        double d = v.get<double>();
                        if (!std::isfinite(d))
                            throw schema_error(rwhere + ": values must be finite");
                        vals.push_back(d);
                    }
                    rel.push_row(vals);
                }
            }
            spec.query.relations.push_back(std::move(rel));
        }
        if (j.contains("ghd")) {
            spec.has_ghd = true;
            const json& g = j["ghd"];
            if (!g.is_object() || !g.contains("bags") || !g["bags"].is_array() ||
                g["bags"].empty())
                throw schema_error("'ghd' needs a non-empty 'bags' array");
            for (const auto& bag : g["bags"]) {
                std::vector<std::string> names;
                for (const auto& a : bag) names.push_back(a.get<std::string>());
                spec.ghd.bags.push_back(std::move(names));
            }
            if (g.contains("edges")) {
                for (const auto& e : g["edges"]) {
                    if (!e.is_array() || e.size() != 2)
                        throw schema_error("'ghd' edges must be [i, j] bag-index pairs");
                    int u = e[0].get<int>(), v = e[1].get<int>();
                    int nb = static_cast<int>(spec.ghd.bags.size());
                    if (u < 0 || v < 0 || u >= nb || v >= nb)
                        throw schema_error("'ghd' edge bag index out of range");
                    spec.ghd.edges.emplace_back(u, v);
                }
            }
        }
    } catch (const json::exception& e) {
        throw schema_error(std::string("malformed spec: ") + e.what());
    }
    if (spec.query.attributes.empty()) throw schema_error("spec declares no attributes");
    return spec;
}

QuerySpec load_query_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw schema_error("cannot open spec file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_query_spec_json(ss.str(), std::filesystem::path(path).parent_path().string());
}

int run_cli(int argc, const char* const* argv) {
    Args a;
    CLI::App app{
        "Approximate k-median / k-means clustering over join results, "
        "computed without materializing the join"};
    app.require_subcommand(1);

    const std::map<std::string, Objective> obj_map{{"median", Objective::kMedian},
                                                   {"means", Objective::kMeans}};
    const std::map<std::string, Mode> mode_map{{"geometric", Mode::Geometric},
                                               {"discrete", Mode::Discrete}};
    const std::map<std::string, Algorithm> alg_map{{"slow", Algorithm::Slow},
                                                   {"fast", Algorithm::Fast}};
    const std::map<std::string, Strategy> strat_map{{"auto", Strategy::Auto},
                                                    {"exhaustive", Strategy::Exhaustive},
                                                    {"iterative", Strategy::Iterative}};

    CLI::App* run = app.add_subcommand("run", "cluster the join result of the query in SPEC");
    run->add_option("spec", a.spec_path, "query spec (JSON)")
        ->required()
        ->check(CLI::ExistingFile);
    run->add_option("-k,--k", a.k, "number of centers")->check(CLI::Range(1, 1 << 20));
    run->add_option("-e,--epsilon", a.epsilon, "approximation parameter in (0,1)");
    run->add_option("--objective", a.objective, "median | means")
        ->transform(CLI::CheckedTransformer(obj_map, CLI::ignore_case));
    run->add_option("--mode", a.mode, "geometric | discrete centers")
        ->transform(CLI::CheckedTransformer(mode_map, CLI::ignore_case));
    run->add_option("--algorithm", a.algorithm,
                    "slow (exact cell weights) | fast (sampled cell weights)")
        ->transform(CLI::CheckedTransformer(alg_map, CLI::ignore_case));
    run->add_option("--solver", a.strategy, "auto | exhaustive | iterative coreset solver")
        ->transform(CLI::CheckedTransformer(strat_map, CLI::ignore_case));
    run->add_option("--seed", a.seed, "random seed");
    run->add_option("--sample-cap", a.sample_cap, "per-cell sample cap for the fast algorithm");
    run->add_option("--restarts", a.restarts, "iterative solver restarts")
        ->check(CLI::Range(1, 1 << 20));
    run->add_option("--max-iters", a.max_iters, "iterative solver iteration cap")
        ->check(CLI::Range(1, 1 << 20));
    run->add_option("--budget", a.budget,
                    "row budget for decomposition bags and the --oracle join");
    run->add_option("-o,--output", a.output, "write the JSON report here instead of stdout");
    run->add_flag("--oracle", a.oracle,
                  "cross-check the result against a brute-force join (small inputs)");

    CLI::App* cnt = app.add_subcommand("count", "count the join results of the query in SPEC");
    cnt->add_option("spec", a.spec_path, "query spec (JSON)")
        ->required()
        ->check(CLI::ExistingFile);
    cnt->add_option("--budget", a.budget, "row budget for decomposition bags");
    cnt->add_option("-o,--output", a.output, "write the JSON report here instead of stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    bool had_ghd = false;
    try {
        QuerySpec spec = load_query_spec(a.spec_path);
        had_ghd = spec.has_ghd;
        return run->parsed() ? do_run(spec, a) : do_count(spec, a);
    } catch (const not_acyclic_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        if (!had_ghd)
            std::cerr << "hint: cyclic queries need a hypertree decomposition; add a \"ghd\" "
                         "section to the spec\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace relclust
