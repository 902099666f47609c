#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "rigidkit/common.hpp"
#include "rigidkit/dynamics.hpp"
#include "rigidkit/graph.hpp"

namespace rigidkit {

/// Flat `key = value` text with `[section]` headers and `#` comments.
class KeyValueConfig {
 public:
  static KeyValueConfig parse(std::istream& in) {
    KeyValueConfig cfg;
    std::string line;
    std::string section;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      const std::string trimmed = trim(line);
      if (trimmed.empty()) continue;
      if (trimmed.front() == '[') {
        if (trimmed.back() != ']')
          throw ParseError("line " + std::to_string(lineno) + ": unterminated section");
        section = trim(trimmed.substr(1, trimmed.size() - 2));
        continue;
      }
      const auto eq = trimmed.find('=');
      if (eq == std::string::npos)
        throw ParseError("line " + std::to_string(lineno) + ": expected key = value");
      const std::string key = trim(trimmed.substr(0, eq));
      const std::string value = trim(trimmed.substr(eq + 1));
      if (key.empty())
        throw ParseError("line " + std::to_string(lineno) + ": empty key");
      cfg.values_[section + "." + key] = value;
    }
    return cfg;
  }

  static KeyValueConfig parse_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open config file: " + path.string());
    return parse(in);
  }

  std::optional<std::string> get(const std::string& section, const std::string& key) const {
    const auto it = values_.find(section + "." + key);
    if (it == values_.end()) return std::nullopt;
    return it->second;
  }

  std::string get_or(const std::string& section, const std::string& key,
                     const std::string& fallback) const {
    return get(section, key).value_or(fallback);
  }

  double get_double(const std::string& section, const std::string& key,
                    double fallback) const {
    const auto v = get(section, key);
    if (!v) return fallback;
    try {
      std::size_t pos = 0;
      const double parsed = std::stod(*v, &pos);
      if (pos != v->size()) throw std::invalid_argument("trailing characters");
      return parsed;
    } catch (const std::exception&) {
      throw ParseError("bad numeric value for " + section + "." + key + ": " + *v);
    }
  }

  std::uint64_t get_u64(const std::string& section, const std::string& key,
                        std::uint64_t fallback) const {
    const auto v = get(section, key);
    if (!v) return fallback;
    try {
      return std::stoull(*v);
    } catch (const std::exception&) {
      throw ParseError("bad integer value for " + section + "." + key + ": " + *v);
    }
  }

 private:
  static std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) return "";
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
  }

  std::map<std::string, std::string> values_;
};

enum class InitialStateMode { Explicit, PerturbEquilibrium, Random };

/// Everything a CLI run needs, read from one config file. Relative graph
/// paths resolve against the config file's directory.
struct ExperimentConfig {
  DirectedGraph graph{1, {}};
  Eigen::VectorXd lengths;  // empty when the command does not need targets
  LawFamily family = LawFamily::Proportional;
  LawParams params;

  double sim_step = 1e-3;
  double sim_t_max = 1e3;
  double sim_converge_tol = 1e-9;
  std::uint64_t seed = 0;
  long long record_stride = 1;

  InitialStateMode init_mode = InitialStateMode::Random;
  Eigen::VectorXd init_state;         // Explicit
  double perturb_magnitude = 1e-3;    // PerturbEquilibrium
  std::uint64_t init_seed = 0;        // Random
  std::vector<int> choices;           // equilibrium branch selection

  double congruence_tol = -1.0;
  double spectrum_threshold = 1e-8;
  std::string output_dir = "out";
};

namespace detail {

inline std::vector<int> parse_choice_bits(const std::string& text) {
  std::vector<int> bits;
  for (char c : text) {
    if (c == '0')
      bits.push_back(0);
    else if (c == '1')
      bits.push_back(1);
    else if (c != ' ' && c != '\t')
      throw ParseError("choice string must contain only 0 and 1: " + text);
  }
  return bits;
}

inline Eigen::VectorXd parse_real_list(const std::string& text, const std::string& what) {
  std::istringstream in(text);
  std::vector<double> vals;
  double v = 0.0;
  while (in >> v) vals.push_back(v);
  if (!in.eof()) throw ParseError("bad real list for " + what + ": " + text);
  Eigen::VectorXd out(static_cast<Eigen::Index>(vals.size()));
  for (std::size_t i = 0; i < vals.size(); ++i)
    out(static_cast<Eigen::Index>(i)) = vals[i];
  return out;
}

inline DirectedGraph parse_inline_graph(const KeyValueConfig& cfg) {
  const auto n_text = cfg.get("graph", "n");
  const auto edges_text = cfg.get("graph", "edges");
  if (!n_text || !edges_text)
    throw ParseError("graph section needs either file= or both n= and edges=");
  int n = 0;
  try {
    n = std::stoi(*n_text);
  } catch (const std::exception&) {
    throw ParseError("bad graph.n: " + *n_text);
  }
  std::vector<Edge> edges;
  std::istringstream in(*edges_text);
  std::string pair_text;
  while (std::getline(in, pair_text, ',')) {
    std::istringstream ps(pair_text);
    int s = 0, t = 0;
    if (!(ps >> s >> t)) throw ParseError("bad edge pair: " + pair_text);
    edges.push_back({s - 1, t - 1});
  }
  try {
    return DirectedGraph(n, std::move(edges));
  } catch (const InvalidGraph& err) {
    throw ParseError(err.what());
  }
}

}  // namespace detail

inline ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  const KeyValueConfig cfg = KeyValueConfig::parse_file(path);
  ExperimentConfig exp;

  if (const auto file = cfg.get("graph", "file")) {
    std::filesystem::path graph_path(*file);
    if (graph_path.is_relative()) graph_path = path.parent_path() / graph_path;
    std::ifstream in(graph_path);
    if (!in) throw ParseError("cannot open graph file: " + graph_path.string());
    exp.graph = parse_graph(in);
  } else {
    exp.graph = detail::parse_inline_graph(cfg);
  }

  if (const auto lengths = cfg.get("lengths", "values")) {
    exp.lengths = detail::parse_real_list(*lengths, "lengths.values");
    if (exp.lengths.size() != exp.graph.m())
      throw ParseError("lengths.values must have one entry per edge");
  }

  const std::string family = cfg.get_or("law", "family", "proportional");
  if (family == "proportional")
    exp.family = LawFamily::Proportional;
  else if (family == "angle_aware")
    exp.family = LawFamily::AngleAware;
  else if (family == "planted_w_offset")
    exp.family = LawFamily::PlantedWOffset;
  else
    throw ParseError("unknown law family: " + family);
  exp.params.kappa = cfg.get_double("law", "kappa", 1.0);
  exp.params.beta = cfg.get_double("law", "beta", 0.5);
  exp.params.offset = cfg.get_double("law", "offset", 0.1);

  exp.sim_step = cfg.get_double("sim", "step", 1e-3);
  exp.sim_t_max = cfg.get_double("sim", "t_max", 1e3);
  exp.sim_converge_tol = cfg.get_double("sim", "converge_tol", 1e-9);
  exp.seed = cfg.get_u64("sim", "seed", 0);
  exp.record_stride =
      static_cast<long long>(cfg.get_u64("sim", "record_stride", 1));

  if (const auto choices = cfg.get("linearize", "choices"))
    exp.choices = detail::parse_choice_bits(*choices);
  exp.spectrum_threshold = cfg.get_double("linearize", "threshold", 1e-8);
  exp.congruence_tol = cfg.get_double("enumerate", "tol", -1.0);
  exp.output_dir = cfg.get_or("output", "dir", "out");

  if (const auto init = cfg.get("initial", "state")) {
    std::istringstream in(*init);
    std::string head;
    in >> head;
    if (head == "perturb_equilibrium") {
      exp.init_mode = InitialStateMode::PerturbEquilibrium;
      std::string magnitude, bits;
      if (!(in >> magnitude))
        throw ParseError("perturb_equilibrium needs a magnitude");
      try {
        exp.perturb_magnitude = std::stod(magnitude);
      } catch (const std::exception&) {
        throw ParseError("bad perturbation magnitude: " + magnitude);
      }
      if (in >> bits) exp.choices = detail::parse_choice_bits(bits);
    } else if (head == "random") {
      exp.init_mode = InitialStateMode::Random;
      std::uint64_t s = 0;
      if (!(in >> s)) throw ParseError("random initial state needs a seed");
      exp.init_seed = s;
    } else {
      exp.init_mode = InitialStateMode::Explicit;
      exp.init_state = detail::parse_real_list(*init, "initial.state");
      if (exp.init_state.size() != 2 * exp.graph.n())
        throw ParseError("initial.state must list 2n coordinates");
    }
  }
  return exp;
}

}  // namespace rigidkit
