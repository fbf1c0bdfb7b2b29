#include "crm/solvers.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <string>

#include "crm/errors.hpp"
#include "crm/operators.hpp"

namespace crm {

std::string_view to_string(Method m) {
  switch (m) {
    case Method::CRM: return "CRM";
    case Method::AVG: return "AVG";
    case Method::MAP: return "MAP";
    case Method::CIMMINO: return "CIMMINO";
    case Method::DRM: return "DRM";
  }
  return "?";
}

Method parse_method(std::string_view name) {
  std::string upper(name);
  std::transform(upper.begin(), upper.end(), upper.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  for (Method m : kAllMethods) {
    if (upper == to_string(m)) return m;
  }
  throw InvalidArgument("unknown method '" + std::string(name) + "'");
}

std::vector<Method> parse_method_list(std::string_view list) {
  std::vector<Method> out;
  std::size_t pos = 0;
  while (pos <= list.size()) {
    const std::size_t comma = std::min(list.find(',', pos), list.size());
    const auto item = list.substr(pos, comma - pos);
    if (!item.empty()) {
      const Method m = parse_method(item);
      if (std::find(out.begin(), out.end(), m) == out.end()) out.push_back(m);
    }
    pos = comma + 1;
  }
  if (out.empty()) throw InvalidArgument("empty method list");
  return out;
}

void SolverConfig::validate() const {
  if (max_iterations < 1) throw InvalidArgument("max_iterations must be at least 1");
  if (!(tolerance > 0.0)) throw InvalidArgument("tolerance must be positive");
}

namespace {

using Step = std::function<Vector(const Vector&)>;
using Report = std::function<Vector(const Vector&)>;

SolverTrace drive(Method method, const ProblemInstance& problem, const Vector& x0,
                  const SolverConfig& cfg, const Step& step, const Report& report) {
  cfg.validate();
  require_dim(problem.ambient_dim(), x0, "solver start");

  SolverTrace trace;
  trace.method = method;
  trace.start = x0;

  Vector x = cfg.use_projected_start ? project(problem.subspace(0), x0) : x0;
  if (cfg.record_iterates) trace.iterates.push_back(x);

  if (cfg.use_solution_oracle) {
    // Fixed target: every method here leaves P_S invariant along its iterates.
    const Vector target = solution_projection(problem, x0);
    double dist = (report(x) - target).norm();
    trace.distances.push_back(dist);
    for (int k = 0; k < cfg.max_iterations && dist > cfg.tolerance; ++k) {
      Vector next = step(x);
      trace.step_norms.push_back((next - x).norm());
      const double next_dist = (report(next) - target).norm();
      trace.rate_quotients.push_back(next_dist / dist);
      trace.distances.push_back(next_dist);
      dist = next_dist;
      x = std::move(next);
      if (cfg.record_iterates) trace.iterates.push_back(x);
    }
    trace.converged = dist <= cfg.tolerance;
  } else {
    for (int k = 0; k < cfg.max_iterations; ++k) {
      Vector next = step(x);
      const double norm = (next - x).norm();
      if (!trace.step_norms.empty() && trace.step_norms.back() > 0.0) {
        trace.rate_quotients.push_back(norm / trace.step_norms.back());
      }
      trace.step_norms.push_back(norm);
      x = std::move(next);
      if (cfg.record_iterates) trace.iterates.push_back(x);
      if (norm <= cfg.tolerance) {
        trace.converged = true;
        break;
      }
    }
  }
  trace.final_point = report(x);
  return trace;
}

Vector identity(const Vector& x) { return x; }

}  // namespace

SolverTrace run_crm(const ProblemInstance& problem, const Vector& x0, const SolverConfig& cfg) {
  return drive(
      Method::CRM, problem, x0, cfg,
      [&](const Vector& x) { return circumcenter(problem, x).point; }, identity);
}

SolverTrace run_averaged(const ProblemInstance& problem, const Vector& x0, const SolverConfig& cfg) {
  return drive(
      Method::AVG, problem, x0, cfg, [&](const Vector& x) { return averaged_apply(problem, x); },
      identity);
}

SolverTrace run_map(const ProblemInstance& problem, const Vector& x0, const SolverConfig& cfg) {
  return drive(
      Method::MAP, problem, x0, cfg,
      [&](const Vector& x) {
        Vector y = x;
        for (const auto& u : problem.subspaces()) y = project(u, y);
        return y;
      },
      identity);
}

SolverTrace run_cimmino(const ProblemInstance& problem, const Vector& x0, const SolverConfig& cfg) {
  return drive(
      Method::CIMMINO, problem, x0, cfg,
      [&](const Vector& x) {
        Vector sum = Vector::Zero(x.size());
        for (const auto& u : problem.subspaces()) sum += project(u, x);
        return Vector(sum / static_cast<double>(problem.size()));
      },
      identity);
}

SolverTrace run_drm(const ProblemInstance& problem, const Vector& x0, const SolverConfig& cfg) {
  if (problem.size() != 2) {
    throw UnsupportedConfiguration("DRM requires exactly 2 subspaces, got " +
                                   std::to_string(problem.size()));
  }
  const AffineSubspace& first = problem.subspace(0);
  return drive(
      Method::DRM, problem, x0, cfg,
      [&](const Vector& x) { return douglas_rachford_step(problem, x); },
      [&](const Vector& x) { return project(first, x); });
}

SolverTrace run(Method method, const ProblemInstance& problem, const Vector& x0,
                const SolverConfig& cfg) {
  switch (method) {
    case Method::CRM: return run_crm(problem, x0, cfg);
    case Method::AVG: return run_averaged(problem, x0, cfg);
    case Method::MAP: return run_map(problem, x0, cfg);
    case Method::CIMMINO: return run_cimmino(problem, x0, cfg);
    case Method::DRM: return run_drm(problem, x0, cfg);
  }
  throw InvalidArgument("unknown method");
}

}  // namespace crm
