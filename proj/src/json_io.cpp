#include "lqioc/json_io.hpp"

#include <fstream>

namespace lqioc {

Json to_json(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Json to_json(const SymMatrix& s) { return to_json(s.matrix()); }

Json to_json(const Vector& v) {
  Json arr = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

namespace {

double number(const Json& j, const char* what) {
  if (!j.is_number()) {
    throw InputError(std::string(what) + ": expected a number, got " + j.dump());
  }
  return j.get<double>();
}

}  // namespace

Matrix matrix_from_json(const Json& j, const char* what) {
  if (j.is_number()) {
    return Matrix::Constant(1, 1, number(j, what));
  }
  if (!j.is_array() || j.empty()) {
    throw InputError(std::string(what) + ": expected a non-empty array");
  }
  if (!j.front().is_array()) {
    Matrix col(static_cast<Eigen::Index>(j.size()), 1);
    for (std::size_t i = 0; i < j.size(); ++i) col(static_cast<Eigen::Index>(i), 0) = number(j[i], what);
    return col;
  }
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = static_cast<Eigen::Index>(j.front().size());
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const Json& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      throw InputError(std::string(what) + ": ragged matrix rows");
    }
    for (Eigen::Index c = 0; c < cols; ++c) m(i, c) = number(row[static_cast<std::size_t>(c)], what);
  }
  require_finite(m, what);
  return m;
}

SymMatrix sym_from_json(const Json& j, const char* what) {
  return SymMatrix(matrix_from_json(j, what));
}

Vector vector_from_json(const Json& j, const char* what) {
  const Matrix m = matrix_from_json(j, what);
  if (m.cols() != 1 && m.rows() != 1) {
    throw InputError(std::string(what) + ": expected a vector");
  }
  return m.cols() == 1 ? Vector(m.col(0)) : Vector(m.row(0).transpose());
}

ModelFile parse_model(const Json& j) {
  if (!j.is_object()) throw InputError("model: expected a JSON object");
  ModelFile mf;
  if (j.contains("A_hat") || j.contains("B_hat")) {
    if (!j.contains("A_hat") || !j.contains("B_hat") || !j.contains("dt")) {
      throw InputError("model: continuous-time form needs A_hat, B_hat and dt");
    }
    ContinuousDynamics cd{matrix_from_json(j["A_hat"], "A_hat"),
                          matrix_from_json(j["B_hat"], "B_hat")};
    const double dt = number(j["dt"], "dt");
    mf.dynamics = discretize(cd, dt);
    mf.continuous = std::move(cd);
    mf.dt = dt;
  } else if (j.contains("A") && j.contains("B")) {
    mf.dynamics = SystemDynamics(matrix_from_json(j["A"], "A"), matrix_from_json(j["B"], "B"));
  } else {
    throw InputError("model: expected either {A_hat, B_hat, dt} or {A, B}");
  }
  for (const char* key : {"Q", "Q_bar"}) {
    if (j.contains(key)) mf.q = sym_from_json(j[key], key);
  }
  if (j.contains("Sigma_w")) mf.sigma_w = sym_from_json(j["Sigma_w"], "Sigma_w");
  if (j.contains("Sigma_v")) mf.sigma_v = sym_from_json(j["Sigma_v"], "Sigma_v");
  return mf;
}

InitialStateDistribution init_from_json(const Json& j) {
  if (!j.is_object()) throw InputError("init: expected a JSON object");
  const std::string kind = j.contains("kind") ? j["kind"].get<std::string>() : "uniform_box";
  auto field = [&](const char* key) -> const Json& {
    if (!j.contains(key)) throw InputError(std::string("init: missing field ") + key);
    return j[key];
  };
  if (kind == "uniform_box") {
    return UniformBox{vector_from_json(field("lower"), "init.lower"),
                      vector_from_json(field("upper"), "init.upper")};
  }
  if (kind == "gaussian") {
    return GaussianState{vector_from_json(field("mean"), "init.mean"),
                         sym_from_json(field("covariance"), "init.covariance")};
  }
  throw InputError("init: unknown kind '" + kind + "'");
}

Json init_to_json(const InitialStateDistribution& init) {
  if (const auto* box = std::get_if<UniformBox>(&init)) {
    return Json{{"kind", "uniform_box"}, {"lower", to_json(box->lower)}, {"upper", to_json(box->upper)}};
  }
  const auto& g = std::get<GaussianState>(init);
  return Json{{"kind", "gaussian"}, {"mean", to_json(g.mean)}, {"covariance", to_json(g.covariance)}};
}

Json read_json(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw InputError("cannot open " + path.string());
  try {
    return Json::parse(is);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what(), 0);
  }
}

void write_json(const std::filesystem::path& path, const Json& j) {
  std::ofstream os(path);
  if (!os) throw Error("cannot open " + path.string() + " for writing");
  os << j.dump(2) << '\n';
  if (!os) throw Error("write failed: " + path.string());
}

Json gram_to_json(const GramStatistics& g) {
  Json j;
  j["n"] = g.dim();
  j["N"] = g.horizon();
  j["M"] = g.m_count();
  j["s_first"] = to_json(g.s_first());
  j["s_last"] = to_json(g.s_last());
  j["s_all"] = to_json(g.s_all());
  return j;
}

GramStatistics gram_from_json(const Json& j) {
  for (const char* key : {"n", "N", "M", "s_first", "s_last", "s_all"}) {
    if (!j.contains(key)) throw InputError(std::string("gram statistics: missing field ") + key);
  }
  const auto n = j["n"].get<Eigen::Index>();
  GramStatistics g(sym_from_json(j["s_first"], "s_first"), sym_from_json(j["s_last"], "s_last"),
                   sym_from_json(j["s_all"], "s_all"), j["M"].get<std::int64_t>(),
                   j["N"].get<Eigen::Index>());
  if (g.dim() != n) throw InputError("gram statistics: n does not match matrix size");
  return g;
}

}  // namespace lqioc
