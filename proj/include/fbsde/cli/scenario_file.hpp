#pragma once

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "fbsde/game/scenario.hpp"
#include "fbsde/game/wealth.hpp"

namespace fbsde::cli {

// Everything one scenario file configures: the game itself plus the knobs
// the commands use around it.
struct ScenarioFile {
  GameScenario game;
  double candidate_scale1 = 1.0;
  double candidate_scale2 = 1.0;
  LsmcBasis basis = LsmcBasis::quadratic;
};

// Input problem tied to a section of the file.
class ScenarioError : public InvalidArgument {
 public:
  ScenarioError(const std::string& section, const std::string& what)
      : InvalidArgument("[" + section + "] " + what), section_(section) {}
  const std::string& section() const { return section_; }

 private:
  std::string section_;
};

namespace detail {

using boost::property_tree::ptree;

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline double parse_double(const std::string& section, const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  double v = 0.0;
  const char* first = t.data();
  const char* last = t.data() + t.size();
  if (!t.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (t.empty() || ec != std::errc() || ptr != last) {
    throw ScenarioError(section, key + ": '" + t + "' is not a number");
  }
  return v;
}

inline std::uint64_t parse_unsigned(const std::string& section, const std::string& key,
                                    const std::string& text) {
  const std::string t = trim(text);
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) {
    throw ScenarioError(section, key + ": '" + t + "' is not a nonnegative integer");
  }
  return v;
}

inline std::vector<double> parse_list(const std::string& section, const std::string& key,
                                      const std::string& text) {
  std::string cleaned = text;
  for (char& ch : cleaned) {
    if (ch == ',' || ch == ';') ch = ' ';
  }
  std::istringstream in(cleaned);
  std::vector<double> out;
  std::string token;
  while (in >> token) out.push_back(parse_double(section, key, token));
  if (out.empty()) throw ScenarioError(section, key + " is empty");
  return out;
}

inline bool parse_bool(const std::string& section, const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  if (t == "true" || t == "1" || t == "yes") return true;
  if (t == "false" || t == "0" || t == "no") return false;
  throw ScenarioError(section, key + ": '" + t + "' is not a boolean");
}

// Vector of length n; one entry is broadcast.
inline Vector parse_vector(const std::string& section, const std::string& key,
                           const std::string& text, std::size_t n) {
  const auto v = parse_list(section, key, text);
  if (v.size() == 1) return Vector::Constant(static_cast<Eigen::Index>(n), v[0]);
  if (v.size() != n) {
    throw ScenarioError(section, key + ": expected " + std::to_string(n) + " entries, got " +
                                     std::to_string(v.size()));
  }
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(n));
}

// n x n matrix given row-major; one entry c means c * I.
inline Matrix parse_matrix(const std::string& section, const std::string& key,
                           const std::string& text, std::size_t n) {
  const auto v = parse_list(section, key, text);
  const auto ni = static_cast<Eigen::Index>(n);
  if (v.size() == 1) return v[0] * Matrix::Identity(ni, ni);
  if (v.size() != n * n) {
    throw ScenarioError(section, key + ": expected 1 or " + std::to_string(n * n) +
                                     " row-major entries for a " + std::to_string(n) + "x" +
                                     std::to_string(n) + " matrix, got " + std::to_string(v.size()));
  }
  Matrix m(ni, ni);
  for (Eigen::Index i = 0; i < ni; ++i) {
    for (Eigen::Index j = 0; j < ni; ++j) m(i, j) = v[static_cast<std::size_t>(i * ni + j)];
  }
  return m;
}

class Section {
 public:
  Section(std::string name, const ptree* tree, std::set<std::string> allowed)
      : name_(std::move(name)), tree_(tree), allowed_(std::move(allowed)) {
    if (!tree_) return;
    for (const auto& [key, child] : *tree_) {
      if (!allowed_.count(key)) throw ScenarioError(name_, "unknown key '" + key + "'");
      if (!child.empty()) throw ScenarioError(name_, "key '" + key + "' is malformed");
    }
  }
  const std::string& name() const { return name_; }
  std::optional<std::string> raw(const std::string& key) const {
    if (!tree_) return std::nullopt;
    const auto v = tree_->get_optional<std::string>(ptree::path_type(key, '\0'));
    if (!v) return std::nullopt;
    return *v;
  }
  double number(const std::string& key, double fallback) const {
    const auto r = raw(key);
    return r ? parse_double(name_, key, *r) : fallback;
  }
  std::uint64_t integer(const std::string& key, std::uint64_t fallback) const {
    const auto r = raw(key);
    return r ? parse_unsigned(name_, key, *r) : fallback;
  }

 private:
  std::string name_;
  const ptree* tree_;
  std::set<std::string> allowed_;
};

inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string join17(const double* data, std::size_t n) {
  std::string out;
  for (std::size_t i = 0; i < n; ++i) {
    if (i) out += ' ';
    out += fmt17(data[i]);
  }
  return out;
}

inline std::string row_major(const Matrix& m) {
  std::vector<double> v;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) v.push_back(m(i, j));
  }
  return join17(v.data(), v.size());
}

}  // namespace detail

inline const char* basis_name(LsmcBasis b) {
  switch (b) {
    case LsmcBasis::constant: return "constant";
    case LsmcBasis::linear: return "linear";
    case LsmcBasis::quadratic: return "quadratic";
  }
  return "?";
}

// Parses an INI scenario. Omitted keys take these defaults:
//   [grid] T = 1, n_steps = 128       [dims] n0 = n1 = n2 = 1
//   [market] r = 0.03, sigmaK = 0.2 I
//   [drift.K] theta = 1, delta = 0.08, zeta = 0.1, m0 = 1, P0 = I
//   [cost] L1 = L2 = 1, M1 = 2, M2 = 3, beta = 0.05
//   [terminal] kind = constant, value = 1, slope = 1, uses_unobserved = false
//   [mc] n_paths = 20000, seed = 20240501
//   [equilibrium] candidate_scale1 = candidate_scale2 = 1
//   [lsmc] basis = quadratic
inline ScenarioFile parse_scenario(std::istream& in) {
  using detail::Section;
  detail::ptree pt;
  try {
    boost::property_tree::ini_parser::read_ini(in, pt);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ScenarioError("file", std::string("unreadable INI: ") + e.message() + " at line " +
                                    std::to_string(e.line()));
  }
  std::map<std::string, const detail::ptree*> sections;
  for (const auto& [name, child] : pt) {
    if (child.empty() && !child.data().empty()) {
      throw ScenarioError("file", "key '" + name + "' outside of any section");
    }
    sections[name] = &child;
  }
  const std::set<std::string> known{"grid", "dims", "market", "drift.0", "drift.1", "drift.2",
                                    "cost", "terminal", "mc", "equilibrium", "lsmc"};
  for (const auto& [name, _] : sections) {
    if (!known.count(name)) throw ScenarioError(name, "unknown section");
  }
  auto section = [&](const std::string& name, std::set<std::string> keys) {
    const auto it = sections.find(name);
    return Section(name, it == sections.end() ? nullptr : it->second, std::move(keys));
  };

  ScenarioFile out;
  GameScenario& g = out.game;

  const Section grid = section("grid", {"T", "n_steps"});
  try {
    g.grid = make_time_grid(grid.number("T", 1.0), grid.integer("n_steps", 128));
  } catch (const InvalidArgument& e) {
    throw ScenarioError("grid", e.what());
  }

  const Section dims = section("dims", {"n0", "n1", "n2"});
  BlockDims d{};
  for (std::size_t k = 0; k < kBlocks; ++k) {
    d[k] = dims.integer("n" + std::to_string(k), 1);
    if (d[k] > 64) throw ScenarioError("dims", "n" + std::to_string(k) + " is unreasonably large");
  }
  if (d[1] == 0 || d[2] == 0) throw ScenarioError("dims", "n1 and n2 must be positive");

  const Section market = section("market", {"r", "sigma0", "sigma1", "sigma2"});
  g.rate = market.number("r", 0.03);
  for (std::size_t k = 0; k < kBlocks; ++k) {
    if (d[k] == 0) {
      if (market.raw("sigma" + std::to_string(k))) {
        throw ScenarioError("market", "sigma" + std::to_string(k) + " given for an empty block");
      }
      if (sections.count("drift." + std::to_string(k))) {
        throw ScenarioError("drift." + std::to_string(k), "section given for an empty block");
      }
      g.blocks[k].reset();
      continue;
    }
    const std::string key = "sigma" + std::to_string(k);
    BlockSpec b;
    b.sigma = detail::parse_matrix("market", key, market.raw(key).value_or("0.2"), d[k]);
    const std::string name = "drift." + std::to_string(k);
    const Section drift = section(name, {"theta", "delta", "zeta", "m0", "P0"});
    b.drift.theta = detail::parse_vector(name, "theta", drift.raw("theta").value_or("1"), d[k]);
    b.drift.delta = detail::parse_vector(name, "delta", drift.raw("delta").value_or("0.08"), d[k]);
    b.drift.zeta = detail::parse_matrix(name, "zeta", drift.raw("zeta").value_or("0.1"), d[k]);
    b.drift.m0 = detail::parse_vector(name, "m0", drift.raw("m0").value_or("1"), d[k]);
    b.drift.P0 = detail::parse_matrix(name, "P0", drift.raw("P0").value_or("1"), d[k]);
    try {
      b.drift.validate(name);
    } catch (const InvalidArgument& e) {
      throw ScenarioError(name, e.what());
    }
    try {
      (void)ObservationModel(b.sigma, constant_rate(g.rate));
    } catch (const InvalidArgument& e) {
      throw ScenarioError("market", key + ": " + e.what());
    }
    g.blocks[k] = std::move(b);
  }

  const Section cost = section("cost", {"L1", "L2", "M1", "M2", "beta"});
  g.cost = CostParams{cost.number("L1", 1.0), cost.number("L2", 1.0), cost.number("M1", 2.0),
                      cost.number("M2", 3.0), cost.number("beta", 0.05)};
  try {
    g.cost.validate();
  } catch (const InvalidArgument& e) {
    throw ScenarioError("cost", e.what());
  }

  const Section terminal = section("terminal", {"kind", "value", "slope", "uses_unobserved"});
  const std::string kind = detail::trim(terminal.raw("kind").value_or("constant"));
  if (kind == "constant") {
    g.terminal.kind = TerminalClaim::Kind::constant;
  } else if (kind == "function") {
    g.terminal.kind = TerminalClaim::Kind::function;
  } else {
    throw ScenarioError("terminal", "kind must be 'constant' or 'function', got '" + kind + "'");
  }
  g.terminal.value = terminal.number("value", 1.0);
  g.terminal.slope = terminal.number("slope", 1.0);
  if (const auto u = terminal.raw("uses_unobserved")) {
    g.terminal.uses_unobserved = detail::parse_bool("terminal", "uses_unobserved", *u);
  }
  try {
    g.terminal.validate();
  } catch (const InvalidArgument& e) {
    throw ScenarioError("terminal", e.what());
  }

  const Section mc = section("mc", {"n_paths", "seed"});
  g.n_paths = mc.integer("n_paths", 20000);
  g.seed = mc.integer("seed", 20240501);
  if (g.n_paths == 0) throw ScenarioError("mc", "n_paths must be positive");

  const Section eq = section("equilibrium", {"candidate_scale1", "candidate_scale2"});
  out.candidate_scale1 = eq.number("candidate_scale1", 1.0);
  out.candidate_scale2 = eq.number("candidate_scale2", 1.0);
  if (!(out.candidate_scale1 >= 0.0) || !(out.candidate_scale2 >= 0.0)) {
    throw ScenarioError("equilibrium", "candidate scales must be nonnegative");
  }

  const Section lsmc = section("lsmc", {"basis"});
  const std::string basis = detail::trim(lsmc.raw("basis").value_or("quadratic"));
  if (basis == "constant") {
    out.basis = LsmcBasis::constant;
  } else if (basis == "linear") {
    out.basis = LsmcBasis::linear;
  } else if (basis == "quadratic") {
    out.basis = LsmcBasis::quadratic;
  } else {
    throw ScenarioError("lsmc", "basis must be constant, linear or quadratic");
  }

  try {
    g.validate();
  } catch (const InvalidArgument& e) {
    throw ScenarioError("scenario", e.what());
  }
  return out;
}

inline ScenarioFile parse_scenario_text(const std::string& text) {
  std::istringstream in(text);
  return parse_scenario(in);
}

inline ScenarioFile load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("file", "cannot open '" + path + "'");
  return parse_scenario(in);
}

// Canonical INI text with every value spelled out at full precision;
// parsing it back gives the identical scenario.
inline std::string resolved_text(const ScenarioFile& f) {
  using detail::fmt17;
  const GameScenario& g = f.game;
  const BlockDims d = g.dims();
  std::ostringstream o;
  o << "[grid]\nT = " << fmt17(g.grid.horizon()) << "\nn_steps = " << g.grid.n_steps() << "\n\n";
  o << "[dims]\nn0 = " << d[0] << "\nn1 = " << d[1] << "\nn2 = " << d[2] << "\n\n";
  o << "[market]\nr = " << fmt17(g.rate) << "\n";
  for (std::size_t k = 0; k < kBlocks; ++k) {
    if (g.has_block(k)) o << "sigma" << k << " = " << detail::row_major(g.blocks[k]->sigma) << "\n";
  }
  for (std::size_t k = 0; k < kBlocks; ++k) {
    if (!g.has_block(k)) continue;
    const OUParams& u = g.blocks[k]->drift;
    o << "\n[drift." << k << "]\n";
    o << "theta = " << detail::join17(u.theta.data(), static_cast<std::size_t>(u.theta.size())) << "\n";
    o << "delta = " << detail::join17(u.delta.data(), static_cast<std::size_t>(u.delta.size())) << "\n";
    o << "zeta = " << detail::row_major(u.zeta) << "\n";
    o << "m0 = " << detail::join17(u.m0.data(), static_cast<std::size_t>(u.m0.size())) << "\n";
    o << "P0 = " << detail::row_major(u.P0) << "\n";
  }
  o << "\n[cost]\nL1 = " << fmt17(g.cost.L1) << "\nL2 = " << fmt17(g.cost.L2)
    << "\nM1 = " << fmt17(g.cost.M1) << "\nM2 = " << fmt17(g.cost.M2)
    << "\nbeta = " << fmt17(g.cost.beta) << "\n\n";
  o << "[terminal]\nkind = " << (g.terminal.kind == TerminalClaim::Kind::constant ? "constant" : "function")
    << "\nvalue = " << fmt17(g.terminal.value) << "\nslope = " << fmt17(g.terminal.slope)
    << "\nuses_unobserved = " << (g.terminal.uses_unobserved ? "true" : "false") << "\n\n";
  o << "[mc]\nn_paths = " << g.n_paths << "\nseed = " << g.seed << "\n\n";
  o << "[equilibrium]\ncandidate_scale1 = " << fmt17(f.candidate_scale1)
    << "\ncandidate_scale2 = " << fmt17(f.candidate_scale2) << "\n\n";
  o << "[lsmc]\nbasis = " << basis_name(f.basis) << "\n";
  return o.str();
}

}  // namespace fbsde::cli
