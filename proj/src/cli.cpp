#include "crm/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "crm/analysis.hpp"
#include "crm/batch.hpp"
#include "crm/errors.hpp"
#include "crm/problems.hpp"
#include "crm/verification.hpp"

namespace crm::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string fmt17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string short_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

template <class T>
std::string join(const std::vector<T>& items) {
  std::ostringstream os;
  for (std::size_t i = 0; i < items.size(); ++i) os << (i ? "," : "") << items[i];
  return os.str();
}

Vector parse_vector(const std::string& text) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      values.push_back(std::stod(item, &used));
      if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw InvalidArgument("cannot parse start vector component '" + item + "'");
    }
  }
  return Eigen::Map<Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InvalidArgument("cannot write '" + path.string() + "'");
  out << content;
}

double median(std::vector<int> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t mid = v.size() / 2;
  return v.size() % 2 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
}

struct GenerateOptions {
  Eigen::Index n = 0;
  std::vector<Eigen::Index> dims;
  Eigen::Index solution_dim = 0;
  std::uint64_t seed = 0;
  bool affine = false;
  double conditioning = 0.0;
  std::string output;
};

struct SolveOptions {
  std::string instance;
  std::string methods = "CRM,AVG,MAP,CIMMINO";
  std::vector<std::string> start_vectors;
  int starts = 1;
  std::uint64_t seed = 0;
  double start_scale = 10.0;
  double tol = 1e-10;
  int max_iters = 10000;
  bool projected_start = false;
  std::string out_dir = ".";
};

struct VerifyOptions {
  std::string instance;
  int starts = 50;
  std::uint64_t seed = 0;
  double start_scale = 10.0;
  double tol = 1e-10;
  int max_iters = 10000;
};

int do_generate(const GenerateOptions& o, bool has_conditioning, std::ostream& out) {
  GeneratorSpec spec;
  spec.ambient_dim = o.n;
  spec.subspace_dims = o.dims;
  spec.solution_dim = o.solution_dim;
  spec.seed = o.seed;
  spec.affine = o.affine;
  if (has_conditioning) spec.conditioning = o.conditioning;

  const GeneratedInstance gen = generate(spec);
  save(gen.problem, o.output, gen.metadata);
  const double r_a = contraction_factor(gen.problem);
  out << "generated n=" << spec.ambient_dim << " m=" << spec.subspace_dims.size()
      << " dims=" << join(spec.subspace_dims) << " d_S=" << spec.solution_dim
      << " r_A=" << fmt17(r_a) << " retries=" << gen.metadata.retries << " -> " << o.output << "\n";
  return kOk;
}

int do_solve(const SolveOptions& o, std::ostream& out) {
  const LoadedInstance loaded = load(o.instance);
  const ProblemInstance& problem = loaded.problem;
  const std::vector<Method> methods = parse_method_list(o.methods);
  if (problem.size() != 2 && std::find(methods.begin(), methods.end(), Method::DRM) != methods.end()) {
    throw UnsupportedConfiguration("DRM requires exactly 2 subspaces, instance has " +
                                   std::to_string(problem.size()));
  }

  SolverConfig cfg;
  cfg.tolerance = o.tol;
  cfg.max_iterations = o.max_iters;
  cfg.use_projected_start = o.projected_start;
  cfg.record_iterates = false;
  cfg.validate();

  std::vector<Vector> starts;
  for (const auto& s : o.start_vectors) {
    starts.push_back(parse_vector(s));
    require_dim(problem.ambient_dim(), starts.back(), "--start");
  }
  if (starts.empty()) {
    if (o.starts < 1) throw InvalidArgument("--starts must be at least 1");
    starts = random_starts(problem.ambient_dim(), o.starts, o.start_scale, o.seed);
  }

  const double r_a = contraction_factor(problem);
  const std::vector<SolverTrace> traces = run_batch(problem, starts, methods, cfg);

  fs::create_directories(o.out_dir);
  json summary;
  summary["instance"] = o.instance;
  summary["ambient_dim"] = problem.ambient_dim();
  summary["subspaces"] = problem.size();
  summary["solution_dim"] = problem.solution_set().dim();
  summary["r_A"] = r_a;
  if (problem.size() == 2) summary["friedrichs_cos"] = friedrichs_cos(problem.subspace(0), problem.subspace(1));
  summary["tolerance"] = cfg.tolerance;
  summary["max_iterations"] = cfg.max_iterations;
  summary["projected_start"] = cfg.use_projected_start;
  summary["starts"] = starts.size();

  bool all_converged = true;
  json runs = json::array();
  for (std::size_t i = 0; i < starts.size(); ++i) {
    for (std::size_t j = 0; j < methods.size(); ++j) {
      const SolverTrace& t = traces[i * methods.size() + j];
      std::string name(to_string(t.method));
      std::transform(name.begin(), name.end(), name.begin(), [](unsigned char c) { return std::tolower(c); });
      const std::string stem = name + "_" + std::to_string(i);
      write_file(fs::path(o.out_dir) / ("trace_" + stem + ".csv"), trace_csv(t));
      write_file(fs::path(o.out_dir) / ("series_" + stem + ".dat"), convergence_series(t));

      json run;
      run["start_index"] = i;
      run["method"] = std::string(to_string(t.method));
      run["iterations"] = t.iterations();
      run["converged"] = t.converged;
      run["final_distance"] = t.distances.back();
      if (t.rate_quotients.size() >= 8) {
        run["empirical_rate"] = empirical_rate(t);
      } else {
        run["empirical_rate"] = nullptr;
      }
      run["trace_file"] = "trace_" + stem + ".csv";
      runs.push_back(std::move(run));
      all_converged = all_converged && t.converged;
    }
  }
  summary["runs"] = runs;

  json per_method = json::object();
  out << "r_A = " << fmt17(r_a) << "\n";
  for (std::size_t j = 0; j < methods.size(); ++j) {
    std::vector<int> iters;
    bool converged = true;
    double worst_rate = -1.0;
    for (std::size_t i = 0; i < starts.size(); ++i) {
      const SolverTrace& t = traces[i * methods.size() + j];
      iters.push_back(t.iterations());
      converged = converged && t.converged;
      if (t.rate_quotients.size() >= 8) worst_rate = std::max(worst_rate, empirical_rate(t));
    }
    json m;
    m["median_iterations"] = median(iters);
    m["max_iterations_used"] = *std::max_element(iters.begin(), iters.end());
    m["all_converged"] = converged;
    m["worst_empirical_rate"] = worst_rate >= 0.0 ? json(worst_rate) : json(nullptr);
    per_method[std::string(to_string(methods[j]))] = m;
    out << to_string(methods[j]) << ": median_iterations=" << median(iters)
        << " all_converged=" << (converged ? "true" : "false")
        << " worst_empirical_rate=" << (worst_rate >= 0.0 ? short_num(worst_rate) : std::string("n/a")) << "\n";
  }
  summary["methods"] = per_method;
  write_file(fs::path(o.out_dir) / "summary.json", summary.dump(2) + "\n");
  return all_converged ? kOk : kNotConverged;
}

int do_verify(const VerifyOptions& o, std::ostream& out) {
  const LoadedInstance loaded = load(o.instance);
  const ProblemInstance& problem = loaded.problem;
  if (o.starts < 1) throw InvalidArgument("--starts must be at least 1");
  SolverConfig cfg;
  cfg.tolerance = o.tol;
  cfg.max_iterations = o.max_iters;
  cfg.validate();
  const auto starts = random_starts(problem.ambient_dim(), o.starts, o.start_scale, o.seed);
  const VerifyReport report = verify_instance(problem, starts, cfg);
  out << "instance " << o.instance << ": n=" << problem.ambient_dim() << " m=" << problem.size()
      << " d_S=" << problem.solution_set().dim() << " r_A=" << fmt17(report.r_A)
      << " starts=" << report.starts << "\n";
  for (const auto& c : report.checks) {
    out << (c.passed() ? "PASS " : "FAIL ") << c.name << " worst=" << short_num(c.worst)
        << " threshold=" << short_num(c.threshold) << "\n";
  }
  return report.passed() ? kOk : kVerifyFailed;
}

}  // namespace

std::string trace_csv(const SolverTrace& trace) {
  std::string s = "iter,dist_to_solution,step_norm,rate_quotient\n";
  for (std::size_t k = 1; k < trace.distances.size(); ++k) {
    s += std::to_string(k) + "," + fmt17(trace.distances[k]) + "," + fmt17(trace.step_norms[k - 1]) + "," +
         fmt17(trace.distances[k] / trace.distances[k - 1]) + "\n";
  }
  return s;
}

std::string convergence_series(const SolverTrace& trace) {
  std::string s = "# iter dist_to_solution\n";
  for (std::size_t k = 0; k < trace.distances.size(); ++k) {
    s += std::to_string(k) + " " + fmt17(trace.distances[k]) + "\n";
  }
  return s;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Circumcentered-reflection solver and benchmark harness"};
  app.require_subcommand(1);

  GenerateOptions gen;
  auto* generate_cmd = app.add_subcommand("generate", "Generate a random instance file");
  generate_cmd->add_option("--n", gen.n, "Ambient dimension")->required();
  generate_cmd->add_option("--dims", gen.dims, "Subspace dimensions, comma separated")
      ->required()
      ->delimiter(',');
  generate_cmd->add_option("--solution-dim", gen.solution_dim, "Dimension of the intersection")->required();
  generate_cmd->add_option("--seed", gen.seed, "Random seed");
  generate_cmd->add_flag("--affine", gen.affine, "Shift subspaces away from the origin");
  auto* cond_opt = generate_cmd->add_option("--conditioning", gen.conditioning,
                                            "Target Friedrichs cosine (m = 2 only)");
  generate_cmd->add_option("-o,--out", gen.output, "Output instance file")->required();

  SolveOptions solve;
  auto* solve_cmd = app.add_subcommand("solve", "Run solvers on an instance and write traces");
  solve_cmd->add_option("--instance", solve.instance, "Instance file")->required();
  solve_cmd->add_option("--methods", solve.methods, "Comma list of CRM,AVG,MAP,CIMMINO,DRM");
  solve_cmd->add_option("--start", solve.start_vectors, "Explicit start vector, comma separated (repeatable)");
  solve_cmd->add_option("--starts", solve.starts, "Number of random starts when no --start is given");
  solve_cmd->add_option("--seed", solve.seed, "Seed for random starts");
  solve_cmd->add_option("--start-scale", solve.start_scale, "Scale of Gaussian random starts");
  solve_cmd->add_option("--tol", solve.tol, "Stop when dist(x_k, S) <= tol");
  solve_cmd->add_option("--max-iters", solve.max_iters, "Iteration cap");
  solve_cmd->add_flag("--projected-start", solve.projected_start, "Start from P_{U_1}(x0)");
  solve_cmd->add_option("--out-dir", solve.out_dir, "Directory for traces and summary.json");

  VerifyOptions ver;
  auto* verify_cmd = app.add_subcommand("verify", "Check the convergence invariants on an instance");
  verify_cmd->add_option("--instance", ver.instance, "Instance file")->required();
  verify_cmd->add_option("--starts", ver.starts, "Number of random starts");
  verify_cmd->add_option("--seed", ver.seed, "Seed for random starts");
  verify_cmd->add_option("--start-scale", ver.start_scale, "Scale of Gaussian random starts");
  verify_cmd->add_option("--tol", ver.tol, "CRM stopping tolerance");
  verify_cmd->add_option("--max-iters", ver.max_iters, "CRM iteration cap");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  if (!reversed.empty()) reversed.pop_back();  // program name
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }

  const bool verifying = verify_cmd->parsed();
  try {
    if (generate_cmd->parsed()) return do_generate(gen, cond_opt->count() > 0, out);
    if (solve_cmd->parsed()) return do_solve(solve, out);
    return do_verify(ver, out);
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return verifying ? kVerifyFailed : kUsage;
  } catch (const EmptyIntersection& e) {
    err << "error: " << e.what() << "\n";
    return verifying ? kVerifyFailed : kUsage;
  } catch (const NumericalFailure& e) {
    err << "error: " << e.what() << "\n";
    return verifying ? kVerifyFailed : kUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }
}

}  // namespace crm::cli
