#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

#include "ifp/ampc.hpp"
#include "ifp/analysis.hpp"
#include "ifp/environment.hpp"
#include "ifp/garch.hpp"
#include "ifp/policy.hpp"
#include "ifp/utility.hpp"

namespace ifp::io {

using Json = nlohmann::ordered_json;

std::string version();

/// Parse errors, missing files and type mismatches all surface as InputError.
Json read_json_file(const std::filesystem::path& path);
Json parse_json(const std::string& text, const std::string& what);
void write_text_file(const std::filesystem::path& path, const std::string& text);

/// {gamma, P: [[...]], states: [{beta: [[v, p], ...], r: [...], y: [...]}, ...]}
MarkovEnvironment environment_from_json(const Json& j);
Json to_json(const MarkovEnvironment& env);

/// {type: "crra"} | {type: "sin_log", delta} | {type: "tabulated", log_c, log_marginal}.
/// gamma for the first two comes from the environment.
Utility utility_from_json(const Json& j, double gamma);
Json to_json(const Utility& u);

Json to_json(const ConditionReport& r);
/// Infinite x* entries are written as the string "inf".
Json to_json(const AmpcSolution& s);

GarchSpec garch_spec_from_json(const Json& j);
Json to_json(const GarchSpec& s);
/// {spec, v_grid, eps_grid, P, returns, v_hat, state_order}
Json to_json(const GarchChain& c);
GarchChain garch_chain_from_json(const Json& j);

/// Columns a, z, c, c_over_a; one row per (state, grid point), state-major.
void write_policy_csv(std::ostream& os, const PolicySolution& sol);
void write_table_csv(std::ostream& os, const Table& t);
void write_table_csv(const std::filesystem::path& path, const Table& t);

/// One value per line; with `header` the first non-empty line is skipped. Extra
/// comma-separated columns are an error.
std::vector<double> read_returns_csv(const std::filesystem::path& path, bool header);

}  // namespace ifp::io
