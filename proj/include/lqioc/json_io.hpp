#pragma once

#include <filesystem>
#include <optional>

#include <json.hpp>

#include "lqioc/lqr.hpp"
#include "lqioc/trajectory.hpp"

namespace lqioc {

using Json = nlohmann::ordered_json;

// Matrices are arrays of rows. A bare number is read as 1×1, and a flat array
// as a column vector.
Json to_json(const Matrix& m);
Json to_json(const SymMatrix& s);
Json to_json(const Vector& v);
Matrix matrix_from_json(const Json& j, const char* what);
SymMatrix sym_from_json(const Json& j, const char* what);
Vector vector_from_json(const Json& j, const char* what);

/// Model file: {"A_hat", "B_hat", "dt"} or {"A", "B"}, plus optional "Q",
/// "Sigma_w", "Sigma_v".
struct ModelFile {
  SystemDynamics dynamics;
  std::optional<ContinuousDynamics> continuous;
  std::optional<double> dt;
  std::optional<SymMatrix> q;
  std::optional<SymMatrix> sigma_w;
  std::optional<SymMatrix> sigma_v;
};

ModelFile parse_model(const Json& j);

/// {"kind":"uniform_box","lower","upper"} or {"kind":"gaussian","mean","covariance"}.
InitialStateDistribution init_from_json(const Json& j);
Json init_to_json(const InitialStateDistribution& init);

Json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const Json& j);

/// Gram-statistics file: {n, N, M, s_first, s_last, s_all}.
Json gram_to_json(const GramStatistics& g);
GramStatistics gram_from_json(const Json& j);

}  // namespace lqioc
