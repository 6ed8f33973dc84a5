#pragma once

// Command-line front end: JSON query specs (relations inline or as CSV
// files), the `run` and `count` subcommands, and JSON run reports.

#include <string>

#include "relclust/pipeline.hpp"

namespace relclust {

struct QuerySpec {
    JoinQuery query;
    GHDSpec ghd;
    bool has_ghd = false;
};

// Parses a query spec from a JSON string; CSV paths resolve against
// `base_dir`.  Throws schema_error on malformed input.
QuerySpec parse_query_spec_json(const std::string& text, const std::string& base_dir);

// Loads a query spec file.
QuerySpec load_query_spec(const std::string& path);

// Full CLI entry point; returns the process exit code.
int run_cli(int argc, const char* const* argv);

}  // namespace relclust
