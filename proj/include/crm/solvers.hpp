#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "crm/geometry.hpp"

namespace crm {

enum class Method { CRM, AVG, MAP, CIMMINO, DRM };

inline constexpr Method kAllMethods[] = {Method::CRM, Method::AVG, Method::MAP, Method::CIMMINO,
                                         Method::DRM};

std::string_view to_string(Method m);
/// Case-insensitive; throws InvalidArgument for unknown names.
Method parse_method(std::string_view name);
/// Parses a comma-separated list such as "CRM,MAP".
std::vector<Method> parse_method_list(std::string_view list);

struct SolverConfig {
  int max_iterations = 10000;
  /// Stop once dist(x_k, S) <= tolerance.
  double tolerance = 1e-10;
  /// Iterate from P_{U_1}(x0) instead of x0. P_S is unchanged by this.
  bool use_projected_start = false;
  bool record_iterates = true;
  /// When false the solver never computes S: it stops on step_norm <= tolerance,
  /// leaves `distances` empty and forms rate quotients from successive step
  /// norms. Step norms under-estimate the error by roughly a factor (1 - r).
  bool use_solution_oracle = true;

  void validate() const;
};

struct SolverTrace {
  Method method = Method::CRM;
  Vector start;
  /// Governing iterates x_0, x_1, ... (x_0 is the projected start when enabled).
  std::vector<Vector> iterates;
  /// ||y_k - P_S(x0)|| where y_k is the reported point: x_k itself, or the
  /// shadow P_{U_1}(x_k) for DRM.
  std::vector<double> distances;
  /// ||x_{k+1} - x_k|| of the governing sequence.
  std::vector<double> step_norms;
  /// distances[k+1] / distances[k] for every k with distances[k] > 0.
  std::vector<double> rate_quotients;
  bool converged = false;
  Vector final_point;

  /// Number of steps taken.
  int iterations() const { return static_cast<int>(step_norms.size()); }
};

/// x_{k+1} = C(x_k).
SolverTrace run_crm(const ProblemInstance& problem, const Vector& x0, const SolverConfig& cfg = {});
/// x_{k+1} = A(x_k).
SolverTrace run_averaged(const ProblemInstance& problem, const Vector& x0, const SolverConfig& cfg = {});
/// Cyclic projections x_{k+1} = P_{U_m} ... P_{U_1}(x_k).
SolverTrace run_map(const ProblemInstance& problem, const Vector& x0, const SolverConfig& cfg = {});
/// Simultaneous projections x_{k+1} = (1/m) sum_i P_{U_i}(x_k).
SolverTrace run_cimmino(const ProblemInstance& problem, const Vector& x0, const SolverConfig& cfg = {});
/// Douglas-Rachford x_{k+1} = (x_k + R_{U_2} R_{U_1} x_k) / 2, reporting the
/// shadow P_{U_1}(x_k). Throws UnsupportedConfiguration unless m = 2.
SolverTrace run_drm(const ProblemInstance& problem, const Vector& x0, const SolverConfig& cfg = {});

SolverTrace run(Method method, const ProblemInstance& problem, const Vector& x0,
                const SolverConfig& cfg = {});

}  // namespace crm
