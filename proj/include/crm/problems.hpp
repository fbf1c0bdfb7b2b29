#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "crm/geometry.hpp"

namespace crm {

/// Seedable generator with a portable output stream: mt19937_64 words mapped
/// to 53-bit uniforms, Gaussians by Box-Muller (no caching of the second
/// variate). Does not depend on std::*_distribution, whose output varies
/// between standard libraries.
class Rng {
 public:
  static constexpr std::string_view kName = "mt19937_64/box-muller";

  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  /// Uniform in [0, 1).
  double uniform();
  /// Uniform integer in [lo, hi].
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);
  double gaussian();
  Vector gaussian_vector(Eigen::Index n);
  Matrix gaussian_matrix(Eigen::Index rows, Eigen::Index cols);

 private:
  std::mt19937_64 engine_;
};

struct GeneratorSpec {
  Eigen::Index ambient_dim = 2;
  std::vector<Eigen::Index> subspace_dims;
  Eigen::Index solution_dim = 0;
  std::uint64_t seed = 0;
  /// Move every subspace off the origin (common point shifted at random).
  bool affine = false;
  /// Target Friedrichs cosine; only for m = 2.
  std::optional<double> conditioning;

  /// Throws InvalidArgument on contradictory dimensions, including dimension
  /// lists whose generic intersection is larger than solution_dim.
  void validate() const;
};

/// Provenance stored alongside an instance file.
struct InstanceMetadata {
  std::optional<std::uint64_t> seed;
  std::string generator;
  int retries = 0;
  std::optional<GeneratorSpec> spec;
};

struct GeneratedInstance {
  ProblemInstance problem;
  InstanceMetadata metadata;
};

/// Random instance with intersection dimension exactly spec.solution_dim.
/// A draw with the wrong intersection dimension is discarded and redrawn from
/// seed + 1, seed + 2, ...; the count is kept in metadata.retries.
GeneratedInstance generate(const GeneratorSpec& spec);

/// Random feasible spec with 2 <= n <= max_n and 1 <= m <= max_m.
GeneratorSpec sample_spec(Rng& rng, Eigen::Index max_n, Eigen::Index max_m, bool affine);

/// Instance file (JSON) with fields ambient_dim, subspaces[].offset,
/// subspaces[].basis_columns and metadata.{seed, generator, retries, spec}.
std::string serialize(const ProblemInstance& problem, const InstanceMetadata& metadata = {});

struct LoadedInstance {
  ProblemInstance problem;
  InstanceMetadata metadata;
};

/// Throws ParseError (malformed text, with line/field context) or
/// ValidationError (inconsistent dimensions, non-orthonormal basis).
LoadedInstance parse_instance(std::string_view text);

void save(const ProblemInstance& problem, const std::filesystem::path& path,
          const InstanceMetadata& metadata = {});
LoadedInstance load(const std::filesystem::path& path);

}  // namespace crm
