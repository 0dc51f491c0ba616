#include "ifp/io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "ifp/error.hpp"

#ifndef IFP_VERSION
#define IFP_VERSION "0.0.0"
#endif

namespace ifp::io {

std::string version() { return IFP_VERSION; }

Json parse_json(const std::string& text, const std::string& what) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw InputError(what + ": malformed JSON: " + e.what());
  }
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_json(text.str(), path.string());
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out << text;
  if (!out) throw InputError("write failed: " + path.string());
}

namespace {

const Json& field(const Json& j, const char* key) {
  if (!j.is_object()) throw InputError(std::string("expected an object holding '") + key + "'");
  auto it = j.find(key);
  if (it == j.end()) throw InputError(std::string("missing field '") + key + "'");
  return *it;
}

double number(const Json& j, const char* what) {
  if (!j.is_number()) throw InputError(std::string(what) + " must be a number");
  return j.get<double>();
}

std::vector<double> numbers(const Json& j, const char* what) {
  if (!j.is_array()) throw InputError(std::string(what) + " must be an array of numbers");
  std::vector<double> out;
  out.reserve(j.size());
  for (const auto& v : j) out.push_back(number(v, what));
  return out;
}

SquareMatrix matrix_from_json(const Json& j, const char* what) {
  if (!j.is_array() || j.empty()) throw InputError(std::string(what) + " must be a non-empty array of rows");
  const std::size_t n = j.size();
  SquareMatrix m(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = numbers(j[i], what);
    if (row.size() != n) throw InputError(std::string(what) + " must be square");
    for (std::size_t k = 0; k < n; ++k) m(i, k) = row[k];
  }
  return m;
}

Json to_json(const SquareMatrix& m) {
  Json rows = Json::array();
  for (std::size_t i = 0; i < m.size(); ++i) {
    const auto r = m.row(i);
    rows.push_back(std::vector<double>(r.begin(), r.end()));
  }
  return rows;
}

DiscreteSupport support_from_json(const Json& j, const char* what) {
  if (!j.is_array() || j.empty()) throw InputError(std::string(what) + " must be a non-empty list of [value, prob]");
  DiscreteSupport s;
  for (const auto& pt : j) {
    if (!pt.is_array() || pt.size() != 2) throw InputError(std::string(what) + " entries must be [value, prob]");
    s.points.push_back({number(pt[0], what), number(pt[1], what)});
  }
  s.validate(what);
  return s;
}

Json to_json(const DiscreteSupport& s) {
  Json out = Json::array();
  for (const auto& p : s.points) out.push_back({p.value, p.prob});
  return out;
}

}  // namespace

MarkovEnvironment environment_from_json(const Json& j) {
  const double gamma = number(field(j, "gamma"), "gamma");
  TransitionMatrix p(matrix_from_json(field(j, "P"), "P"));
  const Json& states = field(j, "states");
  if (!states.is_array() || states.size() != p.size())
    throw InputError("states must list one entry per row of P");
  std::vector<StateShocks> shocks;
  for (const auto& s : states)
    shocks.push_back({support_from_json(field(s, "beta"), "beta"), support_from_json(field(s, "r"), "r"),
                      support_from_json(field(s, "y"), "y")});
  return MarkovEnvironment(std::move(p), std::move(shocks), gamma);
}

Json to_json(const MarkovEnvironment& env) {
  Json states = Json::array();
  for (const auto& s : env.shocks()) states.push_back({{"beta", to_json(s.beta)}, {"r", to_json(s.r)}, {"y", to_json(s.y)}});
  return {{"gamma", env.gamma()}, {"P", to_json(env.transition().matrix())}, {"states", states}};
}

Utility utility_from_json(const Json& j, double gamma) {
  const std::string type = j.contains("type") ? j["type"].get<std::string>() : "crra";
  if (type == "crra") return Utility::crra(gamma);
  if (type == "sin_log") return Utility(PathologicalSinLog{gamma, number(field(j, "delta"), "delta")});
  if (type == "tabulated")
    return Utility(TabulatedBrra{numbers(field(j, "log_c"), "log_c"), numbers(field(j, "log_marginal"), "log_marginal")});
  throw InputError("unknown utility type '" + type + "'");
}

Json to_json(const Utility& u) {
  return {{"description", u.describe()}, {"gamma", u.gamma()}, {"rra_lower", u.rra_lower()}, {"rra_upper", u.rra_upper()}};
}

Json to_json(const ConditionReport& r) {
  return {{"r_PDbeta", r.r_PDbeta},
          {"r_PDbetaR", r.r_PDbetaR},
          {"r_PDbetaR1mg", r.r_PDbetaR1mg},
          {"assumption2_ok", r.assumption2_ok},
          {"brra_condition_value", r.brra_condition_value},
          {"notes", r.notes}};
}

Json to_json(const AmpcSolution& s) {
  Json x = Json::array(), cls = Json::array();
  for (const auto& e : s.x_star) {
    if (e.is_infinite())
      x.push_back("inf");
    else
      x.push_back(e.value());
  }
  for (auto c : s.classification) cls.push_back(std::string(to_string(c)));
  return {{"c_bar", s.c_bar},
          {"classification", cls},
          {"x_star", x},
          {"r_PD", s.r_PD},
          {"iterations", s.iterations},
          {"converged", s.converged},
          {"upper_iterations", s.upper_iterations},
          {"seed_gap", s.seed_gap},
          {"limit_guaranteed", s.limit_guaranteed}};
}

GarchSpec garch_spec_from_json(const Json& j) {
  GarchSpec s{number(field(j, "omega"), "omega"), number(field(j, "alpha"), "alpha"), number(field(j, "rho"), "rho"),
              j.contains("mu") ? number(j["mu"], "mu") : 0.0};
  s.validate();
  return s;
}

Json to_json(const GarchSpec& s) { return {{"omega", s.omega}, {"alpha", s.alpha}, {"rho", s.rho}, {"mu", s.mu}}; }

Json to_json(const GarchChain& c) {
  return {{"spec", to_json(c.spec)},
          {"state_order", "variance-major: z = m * n_eps + n"},
          {"v_grid", c.v_grid},
          {"eps_grid", c.eps_grid},
          {"P", to_json(c.P.matrix())},
          {"returns", c.returns},
          {"v_hat", c.v_hat}};
}

GarchChain garch_chain_from_json(const Json& j) {
  GarchChain c{garch_spec_from_json(field(j, "spec")), numbers(field(j, "v_grid"), "v_grid"),
               numbers(field(j, "eps_grid"), "eps_grid"), TransitionMatrix(matrix_from_json(field(j, "P"), "P")),
               numbers(field(j, "returns"), "returns"),
               j.contains("v_hat") ? numbers(j["v_hat"], "v_hat") : std::vector<double>{}};
  const std::size_t ns = c.n_v() * c.n_eps();
  if (c.P.size() != ns || c.returns.size() != ns)
    throw InputError("GARCH chain: P and returns must have n_v * n_eps entries");
  return c;
}

void write_policy_csv(std::ostream& os, const PolicySolution& sol) {
  os << "a,z,c,c_over_a\n";
  for (std::size_t z = 0; z < sol.num_states; ++z)
    for (std::size_t i = 0; i < sol.grid.size(); ++i) {
      const double a = sol.grid.points[i], c = sol.at(i, z);
      os << format_number(a) << ',' << z << ',' << format_number(c) << ',' << format_number(c / a) << '\n';
    }
}

void write_table_csv(std::ostream& os, const Table& t) {
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t k = 0; k < cells.size(); ++k) os << (k ? "," : "") << cells[k];
    os << '\n';
  };
  line(t.header);
  for (const auto& r : t.rows) line(r);
}

void write_table_csv(const std::filesystem::path& path, const Table& t) {
  std::ostringstream os;
  write_table_csv(os, t);
  write_text_file(path, os.str());
}

std::vector<double> read_returns_csv(const std::filesystem::path& path, bool header) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  std::vector<double> out;
  std::string line;
  bool skip = header;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    if (skip) {
      skip = false;
      continue;
    }
    if (line.find(',') != std::string::npos)
      throw InputError(path.string() + ":" + std::to_string(lineno) + ": expected a single column");
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(line, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || line.find_first_not_of(" \t", used) != std::string::npos)
      throw InputError(path.string() + ":" + std::to_string(lineno) + ": not a number: '" + line + "'");
    out.push_back(v);
  }
  return out;
}

}  // namespace ifp::io
