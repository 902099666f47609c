// Command-line front end: every analysis is a subcommand with deterministic,
// file-based outputs. Exit codes are part of the contract:
//   0 ok, 2 parse/validation error, 3 scope limit, 4 not vertex-add
//   constructible, 5 infeasible lengths, 6 incompatible law, 7 Jacobian
//   oracle mismatch, 8 orbit on a non-two-cycles graph.

#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "rigidkit/config.hpp"
#include "rigidkit/dynamics.hpp"
#include "rigidkit/framework.hpp"
#include "rigidkit/graph.hpp"
#include "rigidkit/henneberg.hpp"
#include "rigidkit/linearization.hpp"
#include "rigidkit/rigidity.hpp"
#include "rigidkit/shape_space.hpp"
#include "rigidkit/svg.hpp"

namespace fs = std::filesystem;
using namespace rigidkit;

namespace {

std::optional<std::uint64_t> env_seed_override() {
  const char* env = std::getenv("RIGIDKIT_SEED");
  if (!env) return std::nullopt;
  try {
    return std::stoull(env);
  } catch (const std::exception&) {
    throw ParseError(std::string("RIGIDKIT_SEED is not an integer: ") + env);
  }
}

std::uint64_t effective_seed(std::uint64_t configured) {
  const auto env = env_seed_override();
  return env ? *env : configured;
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

void write_framework_file(const fs::path& path, const Framework& f, bool svg) {
  {
    auto out = open_output(path);
    write_framework(out, f);
  }
  if (svg) {
    fs::path p = path;
    p.replace_extension(".svg");
    auto out = open_output(p);
    write_framework_svg(out, f);
  }
}

DirectedGraph load_graph_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open graph file: " + path.string());
  return parse_graph(in);
}

const Eigen::VectorXd& require_lengths(const ExperimentConfig& cfg) {
  if (cfg.lengths.size() == 0)
    throw ParseError("this command needs [lengths] values in the config");
  return cfg.lengths;
}

std::vector<int> resolved_choices(const ExperimentConfig& cfg, std::size_t steps) {
  if (cfg.choices.empty()) return std::vector<int>(steps, 0);
  if (cfg.choices.size() != steps)
    throw ParseError("choice string must have one bit per construction step (" +
                     std::to_string(steps) + ")");
  return cfg.choices;
}

Framework realize_equilibrium(const ExperimentConfig& cfg) {
  const auto plan = plan_vertex_add(cfg.graph);
  if (!plan)
    throw NotVertexAddConstructible("graph has no vertex-add construction order");
  return realize_plan(cfg.graph, *plan, require_lengths(cfg),
                      resolved_choices(cfg, plan->steps.size()));
}

int run_analyze(const fs::path& graph_file, std::uint64_t seed, int samples) {
  const DirectedGraph g = load_graph_file(graph_file);
  const RigidityReport report = analyze_graph(g, effective_seed(seed), samples);
  write_report(std::cout, report);
  const AgentClassification cls = classify_agents(g);
  std::cout << "roles =";
  for (AgentRole r : cls.roles) std::cout << " " << to_string(r);
  std::cout << "\n";
  std::cout << "is_leaderless = " << format_bool(cls.is_leaderless) << "\n";
  for (const std::string& w : cls.warnings) std::cout << "warning = " << w << "\n";
  return 0;
}

int run_enumerate(const fs::path& config_file, bool svg) {
  const ExperimentConfig cfg = load_experiment_config(config_file);
  const Eigen::VectorXd& lengths = require_lengths(cfg);
  const auto frameworks = enumerate_frameworks(cfg.graph, lengths, cfg.congruence_tol);
  fs::create_directories(cfg.output_dir);
  for (std::size_t i = 0; i < frameworks.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "framework_%02zu.txt", i);
    write_framework_file(fs::path(cfg.output_dir) / name, frameworks[i], svg);
  }
  std::cout << "count = " << frameworks.size() << "\n";
  if (cfg.graph.n() >= 3) {
    const int bound = ls_lower_bound(cfg.graph.n());
    std::cout << "ls_lower_bound = " << bound << "\n";
    std::cout << "bound_satisfied = "
              << format_bool(static_cast<int>(frameworks.size()) >= bound) << "\n";
  }
  return 0;
}

int run_simulate(const fs::path& config_file, bool svg) {
  const ExperimentConfig cfg = load_experiment_config(config_file);
  const Eigen::VectorXd& lengths = require_lengths(cfg);
  const FormationProblem problem(cfg.graph, lengths,
                                 build_laws(cfg.graph, cfg.family, cfg.params));

  const CompatibilityReport compat = check_compatibility(problem);
  if (!compat.compatible()) {
    for (const auto& v : compat.violations)
      std::cerr << "incompatible: " << v.description << "\n";
    throw IncompatibleLaw("refusing to simulate an incompatible law");
  }

  Eigen::VectorXd x0;
  switch (cfg.init_mode) {
    case InitialStateMode::Explicit:
      x0 = cfg.init_state;
      break;
    case InitialStateMode::PerturbEquilibrium: {
      const Framework eq = realize_equilibrium(cfg);
      x0 = to_state(eq);
      Rng rng = Rng::derive(effective_seed(cfg.seed), 0x9e37ULL);
      for (Eigen::Index i = 0; i < x0.size(); ++i)
        x0(i) += cfg.perturb_magnitude * rng.uniform(-1.0, 1.0);
      break;
    }
    case InitialStateMode::Random: {
      Rng rng = Rng::derive(effective_seed(cfg.init_seed), 0xf00dULL);
      const double span = 2.0 * lengths.maxCoeff();
      x0.resize(2 * cfg.graph.n());
      for (Eigen::Index i = 0; i < x0.size(); ++i) x0(i) = rng.uniform(0.0, span);
      break;
    }
  }

  SimulateOptions opts;
  opts.step = cfg.sim_step;
  opts.t_max = cfg.sim_t_max;
  opts.converge_tol = cfg.sim_converge_tol;
  opts.record_stride = cfg.record_stride;
  const Trajectory traj = simulate(problem, x0, opts);

  fs::create_directories(cfg.output_dir);
  {
    auto out = open_output(fs::path(cfg.output_dir) / "trajectory.csv");
    out << "t";
    for (int v = 0; v < cfg.graph.n(); ++v)
      out << ",x" << (v + 1) << "_1,x" << (v + 1) << "_2";
    for (int l = 0; l < cfg.graph.m(); ++l) out << ",e_" << (l + 1);
    out << "\n";
    for (std::size_t k = 0; k < traj.times.size(); ++k) {
      out << format_double(traj.times[k]);
      for (Eigen::Index i = 0; i < traj.states[k].size(); ++i)
        out << "," << format_double(traj.states[k](i));
      for (Eigen::Index i = 0; i < traj.errors[k].size(); ++i)
        out << "," << format_double(traj.errors[k](i));
      out << "\n";
    }
  }
  const double final_err = traj.errors.back().cwiseAbs().maxCoeff();
  {
    auto out = open_output(fs::path(cfg.output_dir) / "report.txt");
    out << "termination = " << to_string(traj.reason) << "\n";
    out << "final_time = " << format_double(traj.times.back()) << "\n";
    out << "final_error_max = " << format_double(final_err) << "\n";
    out << "samples_recorded = " << traj.times.size() << "\n";
  }
  if (svg) {
    auto out = open_output(fs::path(cfg.output_dir) / "final_state.svg");
    write_framework_svg(out, from_state(cfg.graph, traj.states.back()));
  }
  std::cout << "termination = " << to_string(traj.reason) << "\n";
  std::cout << "final_time = " << format_double(traj.times.back()) << "\n";
  std::cout << "final_error_max = " << format_double(final_err) << "\n";
  return 0;
}

int run_linearize(const fs::path& config_file) {
  const ExperimentConfig cfg = load_experiment_config(config_file);
  const FormationProblem problem(cfg.graph, require_lengths(cfg),
                                 build_laws(cfg.graph, cfg.family, cfg.params));
  const CompatibilityReport compat = check_compatibility(problem);
  if (!compat.compatible()) {
    for (const auto& v : compat.violations)
      std::cerr << "incompatible: " << v.description << "\n";
    throw IncompatibleLaw("linearization is defined for compatible laws only");
  }
  const Framework eq = realize_equilibrium(cfg);
  const SpectrumReport report = spectrum_report(problem, eq, cfg.spectrum_threshold);

  fs::create_directories(cfg.output_dir);
  {
    auto out = open_output(fs::path(cfg.output_dir) / "report.txt");
    write_spectrum_report(out, report);
  }
  {
    auto out = open_output(fs::path(cfg.output_dir) / "eigenvalues.csv");
    write_eigenvalue_csv(out, report);
  }
  write_spectrum_report(std::cout, report);
  return 0;
}

int run_henneberg(int n, std::uint64_t seed, bool vertex_add_only,
                  const fs::path& out_dir) {
  const HennebergSequence seq = random_sequence(n, effective_seed(seed), vertex_add_only);
  const DirectedGraph g = apply_sequence(seq);
  fs::create_directories(out_dir);
  {
    auto out = open_output(out_dir / "sequence.txt");
    write_sequence(out, seq);
  }
  {
    auto out = open_output(out_dir / "graph.txt");
    write_graph(out, g);
  }
  write_sequence(std::cout, seq);
  write_graph(std::cout, g);
  return 0;
}

int run_orbit(const fs::path& config_file, bool svg) {
  const ExperimentConfig cfg = load_experiment_config(config_file);
  if (!match_two_cycles(cfg.graph))
    throw GraphMismatch("orbit requires the two-cycles graph");
  const Framework f = realize_equilibrium(cfg);
  const auto orbit = symmetry_orbit(f);

  fs::create_directories(cfg.output_dir);
  double max_dev = 0.0;
  const Eigen::VectorXd base = distance_function(f);
  for (std::size_t i = 0; i < orbit.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "orbit_%zu.txt", i);
    write_framework_file(fs::path(cfg.output_dir) / name, orbit[i], svg);
    max_dev = std::max(max_dev,
                       (distance_function(orbit[i]) - base).cwiseAbs().maxCoeff());
  }
  std::cout << "orbit_size = " << orbit.size() << "\n";
  std::cout << "distance_function_max_deviation = " << format_double(max_dev) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rigidity, realization and formation-control toolkit"};
  app.require_subcommand(1);
  std::function<int()> action;

  std::string graph_file;
  std::uint64_t analyze_seed = 0;
  int analyze_samples = 5;
  auto* analyze = app.add_subcommand("analyze", "rigidity report for a graph file");
  analyze->add_option("graph", graph_file, "graph file")->required();
  analyze->add_option("--seed", analyze_seed, "seed for random placements");
  analyze->add_option("--samples", analyze_samples, "random placements to try");
  analyze->callback([&] {
    action = [&] { return run_analyze(graph_file, analyze_seed, analyze_samples); };
  });

  std::string enum_config;
  bool enum_svg = false;
  auto* enumerate = app.add_subcommand(
      "enumerate", "all non-congruent frameworks for the given lengths");
  enumerate->add_option("config", enum_config, "experiment config")->required();
  enumerate->add_flag("--svg", enum_svg, "also write SVG renderings");
  enumerate->callback([&] {
    action = [&] { return run_enumerate(enum_config, enum_svg); };
  });

  std::string sim_config;
  bool sim_svg = false;
  auto* simulate_cmd = app.add_subcommand("simulate", "integrate the agent dynamics");
  simulate_cmd->add_option("config", sim_config, "experiment config")->required();
  simulate_cmd->add_flag("--svg", sim_svg, "render the final state");
  simulate_cmd->callback([&] {
    action = [&] { return run_simulate(sim_config, sim_svg); };
  });

  std::string lin_config;
  auto* linearize = app.add_subcommand(
      "linearize", "spectrum of the Jacobian at a design equilibrium");
  linearize->add_option("config", lin_config, "experiment config")->required();
  linearize->callback([&] {
    action = [&] { return run_linearize(lin_config); };
  });

  int henneberg_n = 4;
  std::uint64_t henneberg_seed = 0;
  bool vertex_add_only = false;
  std::string henneberg_out = "out";
  auto* henneberg = app.add_subcommand("henneberg", "random construction sequence");
  henneberg->add_option("n", henneberg_n, "number of vertices")->required();
  henneberg->add_option("--seed", henneberg_seed, "generator seed");
  henneberg->add_flag("--vertex-add-only", vertex_add_only, "no edge splits");
  henneberg->add_option("--out", henneberg_out, "output directory");
  henneberg->callback([&] {
    action = [&] {
      return run_henneberg(henneberg_n, henneberg_seed, vertex_add_only, henneberg_out);
    };
  });

  std::string orbit_config;
  bool orbit_svg = false;
  auto* orbit = app.add_subcommand("orbit", "reflection orbit of a two-cycles framework");
  orbit->add_option("config", orbit_config, "experiment config")->required();
  orbit->add_flag("--svg", orbit_svg, "also write SVG renderings");
  orbit->callback([&] {
    action = [&] { return run_orbit(orbit_config, orbit_svg); };
  });

  CLI11_PARSE(app, argc, argv);

  try {
    return action();
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const InvalidGraph& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const TooLarge& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const NotLaman& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const NotVertexAddConstructible& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const CirclesDisjoint& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 5;
  } catch (const CirclesTangent& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 5;
  } catch (const InfeasibleLengths& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 5;
  } catch (const IncompatibleLaw& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 6;
  } catch (const OracleMismatch& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 7;
  } catch (const GraphMismatch& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 8;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
