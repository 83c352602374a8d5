#pragma once

// Scenario documents (JSON). Complex numbers are [re, im] pairs, matrices
// row-major nested arrays of them. Doubles are written in shortest
// round-trip form, so parse(serialize(s)) reproduces s exactly.

#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "histories/scenario.hpp"

namespace histories {

using Json = nlohmann::ordered_json;

namespace io {

inline Json to_json(complex z) { return Json::array({z.real(), z.imag()}); }

inline Json to_json(const StateVector& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(to_json(v(i)));
  return a;
}

inline Json to_json(const ComplexMatrix& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(to_json(m(i, j)));
    rows.push_back(std::move(row));
  }
  return rows;
}

[[noreturn]] inline void schema_error(const std::string& path, const std::string& msg) {
  throw ParseError("schema error at " + path + ": " + msg);
}

inline const Json& require(const Json& obj, const char* key, const std::string& path) {
  if (!obj.is_object()) schema_error(path, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) schema_error(path, std::string("missing required field \"") + key + "\"");
  return *it;
}

inline double number(const Json& j, const std::string& path) {
  if (!j.is_number()) schema_error(path, "expected a number");
  return j.get<double>();
}

inline complex complex_from(const Json& j, const std::string& path) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (!j.is_array() || j.size() != 2) schema_error(path, "expected [re, im]");
  return {number(j[0], path + "[0]"), number(j[1], path + "[1]")};
}

inline StateVector vector_from(const Json& j, const std::string& path) {
  if (!j.is_array()) schema_error(path, "expected an array of complex numbers");
  StateVector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i)
    v(static_cast<Eigen::Index>(i)) = complex_from(j[i], path + "[" + std::to_string(i) + "]");
  return v;
}

inline ComplexMatrix matrix_from(const Json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) schema_error(path, "expected a non-empty array of rows");
  const std::size_t rows = j.size();
  if (!j[0].is_array()) schema_error(path + "[0]", "expected a row array");
  const std::size_t cols = j[0].size();
  ComplexMatrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < rows; ++r) {
    const std::string rp = path + "[" + std::to_string(r) + "]";
    if (!j[r].is_array() || j[r].size() != cols)
      schema_error(rp, "row length differs from " + std::to_string(cols));
    for (std::size_t c = 0; c < cols; ++c)
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          complex_from(j[r][c], rp + "[" + std::to_string(c) + "]");
  }
  return m;
}

inline std::vector<StateVector> basis_from(const Json& j, const std::string& path) {
  if (!j.is_array()) schema_error(path, "expected an array of vectors");
  std::vector<StateVector> out;
  for (std::size_t i = 0; i < j.size(); ++i)
    out.push_back(vector_from(j[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

}  // namespace io

inline Json to_json(const Scenario& s) {
  Json doc;
  doc["version"] = 1;
  doc["dimension"] = s.dimension;
  Json ham = Json::array();
  for (const auto& e : s.hamiltonian) {
    Json seg;
    seg["start"] = e.start;
    seg["matrix"] = io::to_json(e.hamiltonian);
    ham.push_back(std::move(seg));
  }
  doc["hamiltonian"] = std::move(ham);
  Json meas = Json::array();
  for (const auto& m : s.measurements) {
    Json ev;
    ev["time"] = m.time;
    ev["label"] = m.label;
    ev["matrix"] = io::to_json(m.matrix);
    if (m.basis) {
      Json b = Json::array();
      for (const auto& v : *m.basis) b.push_back(io::to_json(v));
      ev["basis"] = std::move(b);
    }
    meas.push_back(std::move(ev));
  }
  doc["measurements"] = std::move(meas);
  Json prep;
  if (const auto* p = std::get_if<PurePreparation>(&s.preparation)) {
    prep["kind"] = "pure";
    prep["vector"] = io::to_json(p->vector);
  } else if (const auto* sp = std::get_if<SubspacePreparation>(&s.preparation)) {
    prep["kind"] = "subspace";
    Json b = Json::array();
    for (const auto& v : sp->basis) b.push_back(io::to_json(v));
    prep["basis"] = std::move(b);
    if (!sp->weights.empty()) prep["weights"] = sp->weights;
  } else {
    prep["kind"] = "density";
    prep["matrix"] = io::to_json(std::get<DensityPreparation>(s.preparation).matrix);
  }
  doc["preparation"] = std::move(prep);
  if (s.postselection) {
    Json ps;
    ps["time"] = s.postselection->time;
    ps["vector"] = io::to_json(s.postselection->vector);
    doc["postselection"] = std::move(ps);
  }
  return doc;
}

inline std::string serialize(const Scenario& s) { return to_json(s).dump(1) + "\n"; }

/// Reads the document structure. Numerical invariants (Hermiticity, time
/// order, normalisation) are left to validate().
inline Scenario from_json(const Json& doc) {
  using namespace io;
  if (!doc.is_object()) schema_error("$", "document must be an object");
  const Json& version = require(doc, "version", "$");
  if (!version.is_number_integer() || version.get<int>() != 1)
    schema_error("$.version", "unsupported version (expected 1)");
  Scenario s;
  const Json& dim = require(doc, "dimension", "$");
  if (!dim.is_number_integer() || dim.get<long long>() <= 0)
    schema_error("$.dimension", "expected a positive integer");
  s.dimension = dim.get<std::size_t>();

  if (auto it = doc.find("hamiltonian"); it != doc.end()) {
    if (!it->is_array()) schema_error("$.hamiltonian", "expected an array");
    for (std::size_t k = 0; k < it->size(); ++k) {
      const std::string p = "$.hamiltonian[" + std::to_string(k) + "]";
      const Json& seg = (*it)[k];
      s.hamiltonian.push_back({number(require(seg, "start", p), p + ".start"),
                               matrix_from(require(seg, "matrix", p), p + ".matrix")});
    }
  }

  const Json& meas = require(doc, "measurements", "$");
  if (!meas.is_array()) schema_error("$.measurements", "expected an array");
  for (std::size_t k = 0; k < meas.size(); ++k) {
    const std::string p = "$.measurements[" + std::to_string(k) + "]";
    const Json& ev = meas[k];
    MeasurementEvent m;
    m.time = number(require(ev, "time", p), p + ".time");
    if (auto lab = ev.find("label"); lab != ev.end()) {
      if (!lab->is_string()) schema_error(p + ".label", "expected a string");
      m.label = lab->get<std::string>();
    }
    m.matrix = matrix_from(require(ev, "matrix", p), p + ".matrix");
    if (auto b = ev.find("basis"); b != ev.end()) m.basis = basis_from(*b, p + ".basis");
    s.measurements.push_back(std::move(m));
  }

  const Json& prep = require(doc, "preparation", "$");
  const Json& kind = require(prep, "kind", "$.preparation");
  if (!kind.is_string()) schema_error("$.preparation.kind", "expected a string");
  const std::string k = kind.get<std::string>();
  if (k == "pure") {
    s.preparation = PurePreparation{vector_from(require(prep, "vector", "$.preparation"),
                                                "$.preparation.vector")};
  } else if (k == "subspace") {
    SubspacePreparation sp;
    sp.basis = basis_from(require(prep, "basis", "$.preparation"), "$.preparation.basis");
    if (auto w = prep.find("weights"); w != prep.end()) {
      if (!w->is_array()) schema_error("$.preparation.weights", "expected an array");
      for (std::size_t i = 0; i < w->size(); ++i)
        sp.weights.push_back(number((*w)[i], "$.preparation.weights[" + std::to_string(i) + "]"));
    }
    s.preparation = std::move(sp);
  } else if (k == "density") {
    s.preparation = DensityPreparation{matrix_from(require(prep, "matrix", "$.preparation"),
                                                   "$.preparation.matrix")};
  } else {
    schema_error("$.preparation.kind", "unknown kind \"" + k + "\" (pure, subspace, density)");
  }

  if (auto ps = doc.find("postselection"); ps != doc.end()) {
    s.postselection = PostSelection{number(require(*ps, "time", "$.postselection"), "$.postselection.time"),
                                    vector_from(require(*ps, "vector", "$.postselection"),
                                                "$.postselection.vector")};
  }
  return s;
}

inline Scenario parse_scenario(const std::string& text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError("malformed document at byte " + std::to_string(e.byte) + ": " + e.what());
  }
  return from_json(doc);
}

inline Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open scenario file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

}  // namespace histories
