#include "crm/problems.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <sstream>

#include "json.hpp"

#include "crm/errors.hpp"

namespace crm {

using nlohmann::json;

double Rng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

std::int64_t Rng::uniform_int(std::int64_t lo, std::int64_t hi) {
  if (hi < lo) throw InvalidArgument("Rng::uniform_int: empty range");
  const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
  return lo + static_cast<std::int64_t>(engine_() % span);
}

double Rng::gaussian() {
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

Vector Rng::gaussian_vector(Eigen::Index n) {
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = gaussian();
  return v;
}

Matrix Rng::gaussian_matrix(Eigen::Index rows, Eigen::Index cols) {
  Matrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = gaussian();
  return m;
}

void GeneratorSpec::validate() const {
  const Eigen::Index n = ambient_dim;
  if (n < 1) throw InvalidArgument("ambient_dim must be positive");
  if (subspace_dims.empty()) throw InvalidArgument("at least one subspace dimension is required");
  if (solution_dim < 0) throw InvalidArgument("solution_dim must be nonnegative");
  for (Eigen::Index d : subspace_dims) {
    if (d < 0 || d > n) {
      throw InvalidArgument("subspace dimension " + std::to_string(d) + " is outside [0, " +
                            std::to_string(n) + "]");
    }
    if (solution_dim > d) {
      throw InvalidArgument("solution_dim " + std::to_string(solution_dim) +
                            " exceeds subspace dimension " + std::to_string(d));
    }
  }
  const auto m = static_cast<Eigen::Index>(subspace_dims.size());
  const Eigen::Index free_dim = n - solution_dim;
  if (m == 1 && subspace_dims[0] != solution_dim) {
    throw InvalidArgument("with a single subspace, solution_dim must equal its dimension");
  }
  Eigen::Index extra = 0;
  for (Eigen::Index d : subspace_dims) extra += d - solution_dim;
  if (m >= 2 && extra > (m - 1) * free_dim) {
    throw InvalidArgument("subspace dimensions force an intersection larger than solution_dim " +
                          std::to_string(solution_dim));
  }
  if (conditioning) {
    const double c = *conditioning;
    if (m != 2) throw InvalidArgument("conditioning applies to exactly 2 subspaces");
    if (!(c > 0.0 && c < 1.0)) throw InvalidArgument("conditioning must lie in (0, 1)");
    if (subspace_dims[0] == solution_dim || subspace_dims[1] == solution_dim) {
      throw InvalidArgument("conditioning needs both subspaces strictly larger than the solution set");
    }
    if (subspace_dims[0] + subspace_dims[1] - solution_dim > n) {
      throw InvalidArgument("conditioning needs ambient_dim >= d1 + d2 - solution_dim");
    }
  }
}

namespace {

Matrix orthonormal_columns(const Matrix& a) {
  if (a.cols() == 0) return Matrix(a.rows(), 0);
  Eigen::HouseholderQR<Matrix> qr(a);
  return qr.householderQ() * Matrix::Identity(a.rows(), a.cols());
}

std::vector<Matrix> draw_bases(const GeneratorSpec& spec, Rng& rng) {
  const Eigen::Index n = spec.ambient_dim;
  const Eigen::Index ds = spec.solution_dim;
  std::vector<Matrix> bases;

  if (spec.conditioning) {
    // Orthonormal frame [core | u | v | W1 | W2]; U_1 = [core, u, W1],
    // U_2 = [core, c u + s v, W2] has a single principal cosine c.
    const Eigen::Index d1 = spec.subspace_dims[0];
    const Eigen::Index d2 = spec.subspace_dims[1];
    const Matrix frame = orthonormal_columns(rng.gaussian_matrix(n, d1 + d2 - ds));
    const double c = *spec.conditioning;
    const double s = std::sqrt(1.0 - c * c);
    const auto core = frame.leftCols(ds);
    const auto u = frame.col(ds);
    const auto v = frame.col(ds + 1);
    const auto w1 = frame.middleCols(ds + 2, d1 - ds - 1);
    const auto w2 = frame.middleCols(ds + 2 + (d1 - ds - 1), d2 - ds - 1);
    Matrix b1(n, d1), b2(n, d2);
    b1.leftCols(ds) = core;
    b1.col(ds) = u;
    b1.rightCols(d1 - ds - 1) = w1;
    b2.leftCols(ds) = core;
    b2.col(ds) = c * u + s * v;
    b2.rightCols(d2 - ds - 1) = w2;
    bases.push_back(std::move(b1));
    bases.push_back(std::move(b2));
    return bases;
  }

  const Matrix core = orthonormal_columns(rng.gaussian_matrix(n, ds));
  for (Eigen::Index d : spec.subspace_dims) {
    Matrix stacked(n, d);
    stacked.leftCols(ds) = core;
    stacked.rightCols(d - ds) = rng.gaussian_matrix(n, d - ds);
    // Householder QR keeps span(first k columns) for every k, so the core
    // stays inside U_i.
    bases.push_back(orthonormal_columns(stacked));
  }
  return bases;
}

}  // namespace

GeneratedInstance generate(const GeneratorSpec& spec) {
  spec.validate();
  constexpr int kMaxRetries = 32;
  for (int attempt = 0; attempt <= kMaxRetries; ++attempt) {
    Rng rng(spec.seed + static_cast<std::uint64_t>(attempt));
    std::vector<Matrix> bases = draw_bases(spec, rng);
    const Vector common = spec.affine ? Vector(3.0 * rng.gaussian_vector(spec.ambient_dim))
                                     : Vector(Vector::Zero(spec.ambient_dim));
    std::vector<AffineSubspace> subspaces;
    subspaces.reserve(bases.size());
    for (auto& b : bases) {
      Vector offset = common;
      // Each offset is the common point slid along the subspace's own directions.
      if (spec.affine && b.cols() > 0) offset += b * rng.gaussian_vector(b.cols());
      subspaces.emplace_back(std::move(offset), std::move(b));
    }
    ProblemInstance problem(std::move(subspaces));
    try {
      if (problem.solution_set().dim() != spec.solution_dim) continue;
    } catch (const EmptyIntersection&) {
      continue;
    }
    InstanceMetadata meta;
    meta.seed = spec.seed;
    meta.generator = std::string(Rng::kName);
    meta.retries = attempt;
    meta.spec = spec;
    return {std::move(problem), std::move(meta)};
  }
  throw NumericalFailure("generate: could not reach solution_dim " + std::to_string(spec.solution_dim) +
                         " after " + std::to_string(kMaxRetries) + " retries");
}

GeneratorSpec sample_spec(Rng& rng, Eigen::Index max_n, Eigen::Index max_m, bool affine) {
  if (max_n < 2 || max_m < 1) throw InvalidArgument("sample_spec: need max_n >= 2 and max_m >= 1");
  GeneratorSpec spec;
  spec.ambient_dim = rng.uniform_int(2, max_n);
  const auto m = rng.uniform_int(1, max_m);
  spec.affine = affine;
  spec.seed = rng.next();
  const Eigen::Index n = spec.ambient_dim;
  if (m == 1) {
    spec.solution_dim = rng.uniform_int(0, n);
    spec.subspace_dims = {spec.solution_dim};
    return spec;
  }
  spec.solution_dim = rng.uniform_int(0, n - 1);
  const Eigen::Index free_dim = n - spec.solution_dim;
  for (;;) {
    spec.subspace_dims.clear();
    Eigen::Index extra = 0;
    for (std::int64_t i = 0; i < m; ++i) {
      const auto k = rng.uniform_int(0, free_dim);
      extra += k;
      spec.subspace_dims.push_back(spec.solution_dim + k);
    }
    if (extra <= (m - 1) * free_dim) return spec;
  }
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

json vector_to_json(const Vector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

json spec_to_json(const GeneratorSpec& spec) {
  json j;
  j["ambient_dim"] = spec.ambient_dim;
  j["subspace_dims"] = spec.subspace_dims;
  j["solution_dim"] = spec.solution_dim;
  j["seed"] = spec.seed;
  j["affine"] = spec.affine;
  if (spec.conditioning) j["conditioning"] = *spec.conditioning;
  return j;
}

[[noreturn]] void field_error(const std::string& field, const std::string& what) {
  throw ParseError("instance file: field '" + field + "': " + what);
}

const json& require_field(const json& obj, const char* key, const std::string& path) {
  if (!obj.is_object()) field_error(path, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) field_error(path + "." + key, "missing");
  return *it;
}

Vector json_to_vector(const json& arr, const std::string& path) {
  if (!arr.is_array()) field_error(path, "expected an array of numbers");
  Vector v(static_cast<Eigen::Index>(arr.size()));
  for (std::size_t i = 0; i < arr.size(); ++i) {
    if (!arr[i].is_number()) field_error(path + "[" + std::to_string(i) + "]", "expected a number");
    v(static_cast<Eigen::Index>(i)) = arr[i].get<double>();
  }
  return v;
}

GeneratorSpec json_to_spec(const json& j, const std::string& path) {
  GeneratorSpec spec;
  try {
    spec.ambient_dim = j.at("ambient_dim").get<Eigen::Index>();
    spec.subspace_dims = j.at("subspace_dims").get<std::vector<Eigen::Index>>();
    spec.solution_dim = j.at("solution_dim").get<Eigen::Index>();
    spec.seed = j.at("seed").get<std::uint64_t>();
    spec.affine = j.value("affine", false);
    if (j.contains("conditioning")) spec.conditioning = j.at("conditioning").get<double>();
  } catch (const json::exception& e) {
    field_error(path, e.what());
  }
  return spec;
}

}  // namespace

std::string serialize(const ProblemInstance& problem, const InstanceMetadata& metadata) {
  json doc;
  doc["ambient_dim"] = problem.ambient_dim();
  json subspaces = json::array();
  for (const auto& u : problem.subspaces()) {
    json entry;
    entry["offset"] = vector_to_json(u.offset());
    json cols = json::array();
    for (Eigen::Index j = 0; j < u.dim(); ++j) cols.push_back(vector_to_json(u.basis().col(j)));
    entry["basis_columns"] = std::move(cols);
    subspaces.push_back(std::move(entry));
  }
  doc["subspaces"] = std::move(subspaces);

  json meta = json::object();
  if (metadata.seed) meta["seed"] = *metadata.seed;
  meta["generator"] = metadata.generator;
  meta["retries"] = metadata.retries;
  if (metadata.spec) meta["spec"] = spec_to_json(*metadata.spec);
  doc["metadata"] = std::move(meta);
  return doc.dump(2) + "\n";
}

LoadedInstance parse_instance(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("instance file: ") + e.what());
  }

  const json& nj = require_field(doc, "ambient_dim", "");
  if (!nj.is_number_integer() || nj.get<long long>() < 1) field_error("ambient_dim", "expected a positive integer");
  const auto n = static_cast<Eigen::Index>(nj.get<long long>());

  const json& subs = require_field(doc, "subspaces", "");
  if (!subs.is_array() || subs.empty()) field_error("subspaces", "expected a nonempty array");

  std::vector<AffineSubspace> subspaces;
  for (std::size_t i = 0; i < subs.size(); ++i) {
    const std::string path = "subspaces[" + std::to_string(i) + "]";
    Vector offset = json_to_vector(require_field(subs[i], "offset", path), path + ".offset");
    if (offset.size() != n) {
      throw ValidationError(path + ".offset: length " + std::to_string(offset.size()) +
                            " does not match ambient_dim " + std::to_string(n));
    }
    const json& cols = require_field(subs[i], "basis_columns", path);
    if (!cols.is_array()) field_error(path + ".basis_columns", "expected an array of columns");
    Matrix basis(n, static_cast<Eigen::Index>(cols.size()));
    for (std::size_t j = 0; j < cols.size(); ++j) {
      const std::string cpath = path + ".basis_columns[" + std::to_string(j) + "]";
      const Vector col = json_to_vector(cols[j], cpath);
      if (col.size() != n) {
        throw ValidationError(cpath + ": length " + std::to_string(col.size()) +
                              " does not match ambient_dim " + std::to_string(n));
      }
      basis.col(static_cast<Eigen::Index>(j)) = col;
    }
    if (basis.cols() > n) throw ValidationError(path + ": more basis columns than ambient_dim");
    try {
      subspaces.emplace_back(std::move(offset), std::move(basis));
    } catch (const ValidationError& e) {
      throw ValidationError(path + ": " + e.what());
    }
  }

  InstanceMetadata meta;
  if (auto it = doc.find("metadata"); it != doc.end() && it->is_object()) {
    const json& m = *it;
    if (m.contains("seed") && m["seed"].is_number_unsigned()) meta.seed = m["seed"].get<std::uint64_t>();
    if (m.contains("generator") && m["generator"].is_string()) meta.generator = m["generator"].get<std::string>();
    if (m.contains("retries") && m["retries"].is_number_integer()) meta.retries = m["retries"].get<int>();
    if (m.contains("spec")) meta.spec = json_to_spec(m["spec"], "metadata.spec");
  }
  return {ProblemInstance(std::move(subspaces)), std::move(meta)};
}

void save(const ProblemInstance& problem, const std::filesystem::path& path,
          const InstanceMetadata& metadata) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InvalidArgument("cannot open '" + path.string() + "' for writing");
  out << serialize(problem, metadata);
  if (!out) throw InvalidArgument("failed writing '" + path.string() + "'");
}

LoadedInstance load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open instance file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_instance(buf.str());
}

}  // namespace crm
