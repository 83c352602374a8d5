#pragma once

// Builtin scenario generators and the parameterised registry used by sweeps
// and `builtin:` pseudo-paths.

#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "histories/compiled.hpp"
#include "histories/probability.hpp"
#include "histories/scenario.hpp"

namespace histories {

namespace spin {

inline ComplexMatrix sigma_x() {
  ComplexMatrix m(2, 2);
  m << 0.0, 1.0, 1.0, 0.0;
  return m;
}

inline ComplexMatrix sigma_y() {
  ComplexMatrix m(2, 2);
  m << 0.0, complex(0.0, -1.0), complex(0.0, 1.0), 0.0;
  return m;
}

inline ComplexMatrix sigma_z() {
  ComplexMatrix m(2, 2);
  m << 1.0, 0.0, 0.0, -1.0;
  return m;
}

inline StateVector up() { return StateVector::Unit(2, 0); }
inline StateVector down() { return StateVector::Unit(2, 1); }

/// Spin-up along the Bloch direction (theta, phi).
inline StateVector bloch(double theta, double phi) {
  StateVector v(2);
  v << std::cos(theta / 2.0), std::exp(complex(0.0, phi)) * std::sin(theta / 2.0);
  return v;
}

/// Spin-down along the same direction; {bloch, bloch_orthogonal} is orthonormal.
inline StateVector bloch_orthogonal(double theta, double phi) {
  StateVector v(2);
  v << -std::exp(complex(0.0, -phi)) * std::sin(theta / 2.0), std::cos(theta / 2.0);
  return v;
}

/// cos(theta) sigma_z + sin(theta) sigma_x
inline ComplexMatrix sigma_n(double theta) {
  return std::cos(theta) * sigma_z() + std::sin(theta) * sigma_x();
}

}  // namespace spin

namespace detail {

inline void require_qubit_basis(const std::vector<StateVector>& basis, const char* what) {
  if (basis.size() != 2 || basis[0].size() != 2 || basis[1].size() != 2)
    throw DimensionError(std::string(what) + " must be two 2-component vectors");
}

/// Observable with eigenvalue k+1 on basis[k].
inline ComplexMatrix labelled_observable(const std::vector<StateVector>& basis) {
  const Eigen::Index n = basis.front().size();
  ComplexMatrix m = ComplexMatrix::Zero(n, n);
  for (std::size_t k = 0; k < basis.size(); ++k)
    m += static_cast<double>(k + 1) * outer(basis[k], basis[k]);
  return 0.5 * (m + m.adjoint());
}

}  // namespace detail

/// Spin prepared in b1, passed through two "slits" (the z basis, not
/// resolved), then measured in the c basis (outcomes C1 = 1, C2 = 2).
inline Scenario builtin_double_slit(const StateVector& b1, const std::vector<StateVector>& c_basis) {
  detail::require_qubit_basis(c_basis, "c basis");
  if (b1.size() != 2) throw DimensionError("b1 must be a 2-component vector");
  Scenario s;
  s.dimension = 2;
  s.preparation = PurePreparation{b1};
  s.measurements.push_back({1.0, "slits", ComplexMatrix::Identity(2, 2),
                            std::vector<StateVector>{spin::up(), spin::down()}});
  s.measurements.push_back({2.0, "C", detail::labelled_observable(c_basis), c_basis});
  return s;
}

/// System S and environment E (both spin-1/2, S major). The preparation
/// entangles the slit taken with E's state; C(S) is measured at t=1, then
/// D(E) at t=2.
inline Scenario builtin_eraser(const StateVector& b1, const std::vector<StateVector>& c_basis,
                               const std::vector<StateVector>& d_basis) {
  detail::require_qubit_basis(c_basis, "c basis");
  detail::require_qubit_basis(d_basis, "d basis");
  if (b1.size() != 2) throw DimensionError("b1 must be a 2-component vector");
  const StateVector plus = StateVector::Unit(2, 0);
  const StateVector minus = StateVector::Unit(2, 1);
  const ComplexMatrix id = ComplexMatrix::Identity(2, 2);

  Scenario s;
  s.dimension = 4;
  s.preparation = PurePreparation{b1(0) * tensor_product(spin::up(), plus) +
                                  b1(1) * tensor_product(spin::down(), minus)};
  std::vector<StateVector> c_env, c_d;
  for (const auto& c : c_basis) {
    c_env.push_back(tensor_product(c, plus));
    c_env.push_back(tensor_product(c, minus));
    for (const auto& d : d_basis) c_d.push_back(tensor_product(c, d));
  }
  s.measurements.push_back({1.0, "C", tensor_product(detail::labelled_observable(c_basis), id), c_env});
  s.measurements.push_back({2.0, "D", tensor_product(id, detail::labelled_observable(d_basis)), c_d});
  return s;
}

/// Two spins in the singlet state; Alice measures sigma_n(theta) on spin 1 at
/// t=1, Bob sigma_n(theta') on spin 2 at t=2. Both events share the product
/// basis |+-n> (x) |+-n'>.
inline Scenario builtin_epr(double theta, double theta_prime) {
  const StateVector ud = tensor_product(spin::up(), spin::down());
  const StateVector du = tensor_product(spin::down(), spin::up());
  const ComplexMatrix id = ComplexMatrix::Identity(2, 2);
  const StateVector a_plus = spin::bloch(theta, 0.0), a_minus = spin::bloch_orthogonal(theta, 0.0);
  const StateVector b_plus = spin::bloch(theta_prime, 0.0),
                    b_minus = spin::bloch_orthogonal(theta_prime, 0.0);
  const std::vector<StateVector> basis = {
      tensor_product(a_plus, b_plus), tensor_product(a_plus, b_minus),
      tensor_product(a_minus, b_plus), tensor_product(a_minus, b_minus)};

  Scenario s;
  s.dimension = 4;
  s.preparation = PurePreparation{(ud - du) / std::sqrt(2.0)};
  s.measurements.push_back({1.0, "alice", tensor_product(spin::sigma_n(theta), id), basis});
  s.measurements.push_back({2.0, "bob", tensor_product(id, spin::sigma_n(theta_prime)), basis});
  return s;
}

/// Spin prepared up along z at t=0, precessing under H = -omega sigma_x,
/// measured along z at time t.
inline Scenario builtin_larmor(double omega, double t) {
  if (!(omega > 0.0)) throw PreconditionError("omega must be positive");
  if (!(t >= 0.0)) throw PreconditionError("t must be non-negative");
  Scenario s;
  s.dimension = 2;
  s.hamiltonian.push_back({0.0, -omega * spin::sigma_x()});
  s.preparation = PurePreparation{spin::up()};
  s.measurements.push_back({t, "sz", spin::sigma_z(), std::nullopt});
  return s;
}

struct BuiltinParameter {
  std::string name;
  double default_value = 0.0;
};

using ParameterMap = std::map<std::string, double>;

/// A named generator together with the parameters it exposes.
struct BuiltinTemplate {
  std::string name;
  std::vector<BuiltinParameter> parameters;
  std::function<Scenario(const ParameterMap&)> generate;

  std::string parameter_names() const {
    std::string out;
    for (const auto& p : parameters) out += (out.empty() ? "" : ", ") + p.name;
    return out;
  }

  bool has_parameter(const std::string& p) const {
    for (const auto& q : parameters)
      if (q.name == p) return true;
    return false;
  }

  /// Defaults overridden by `overrides`; unknown names are rejected.
  ParameterMap resolve(const ParameterMap& overrides) const {
    ParameterMap values;
    for (const auto& p : parameters) values[p.name] = p.default_value;
    for (const auto& [k, v] : overrides) {
      if (!has_parameter(k))
        throw PreconditionError("builtin '" + name + "' has no parameter '" + k +
                                "' (available: " + parameter_names() + ")");
      values[k] = v;
    }
    return values;
  }

  Scenario instantiate(const ParameterMap& overrides = {}) const { return generate(resolve(overrides)); }
};

inline const std::vector<BuiltinTemplate>& builtin_templates() {
  static const std::vector<BuiltinTemplate> registry = [] {
    constexpr double half_pi = std::numbers::pi / 2.0;
    auto qubit_basis = [](const ParameterMap& p, const std::string& prefix) {
      const double th = p.at(prefix + "_theta"), ph = p.at(prefix + "_phi");
      return std::vector<StateVector>{spin::bloch(th, ph), spin::bloch_orthogonal(th, ph)};
    };
    std::vector<BuiltinTemplate> r;
    r.push_back({"double-slit",
                 {{"b_theta", half_pi}, {"b_phi", 0.0}, {"c_theta", half_pi}, {"c_phi", 0.0}},
                 [qubit_basis](const ParameterMap& p) {
                   return builtin_double_slit(spin::bloch(p.at("b_theta"), p.at("b_phi")),
                                              qubit_basis(p, "c"));
                 }});
    r.push_back({"eraser",
                 {{"b_theta", half_pi},
                  {"b_phi", 0.0},
                  {"c_theta", half_pi},
                  {"c_phi", 0.0},
                  {"d_theta", half_pi},
                  {"d_phi", 0.0}},
                 [qubit_basis](const ParameterMap& p) {
                   return builtin_eraser(spin::bloch(p.at("b_theta"), p.at("b_phi")),
                                         qubit_basis(p, "c"), qubit_basis(p, "d"));
                 }});
    r.push_back({"epr",
                 {{"theta", 0.0}, {"theta_prime", half_pi}},
                 [](const ParameterMap& p) { return builtin_epr(p.at("theta"), p.at("theta_prime")); }});
    r.push_back({"larmor",
                 {{"omega", 1.0}, {"t", std::numbers::pi / 4.0}},
                 [](const ParameterMap& p) { return builtin_larmor(p.at("omega"), p.at("t")); }});
    return r;
  }();
  return registry;
}

inline const BuiltinTemplate& find_builtin(const std::string& name) {
  std::string names;
  for (const auto& t : builtin_templates()) {
    if (t.name == name) return t;
    names += (names.empty() ? "" : ", ") + t.name;
  }
  throw PreconditionError("unknown builtin '" + name + "' (available: " + names + ")");
}

inline bool is_builtin_path(const std::string& path) { return path.rfind("builtin:", 0) == 0; }

/// Splits "builtin:NAME?k=v&k=v" into the template name and its overrides.
inline std::pair<std::string, ParameterMap> parse_builtin_path(const std::string& path) {
  if (!is_builtin_path(path)) throw ParseError("not a builtin path: " + path);
  const std::string rest = path.substr(8);
  const auto q = rest.find('?');
  std::pair<std::string, ParameterMap> out{rest.substr(0, q), {}};
  if (q == std::string::npos) return out;
  std::stringstream query(rest.substr(q + 1));
  std::string item;
  while (std::getline(query, item, '&')) {
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) throw ParseError("malformed builtin parameter '" + item + "'");
    const std::string value = item.substr(eq + 1);
    std::istringstream in(value);
    in.imbue(std::locale::classic());
    double v = 0.0;
    if (!(in >> v) || !(in >> std::ws).eof() || !std::isfinite(v))
      throw ParseError("builtin parameter '" + item.substr(0, eq) + "' has non-numeric value '" + value + "'");
    out.second[item.substr(0, eq)] = v;
  }
  return out;
}

inline Scenario load_builtin(const std::string& path) {
  const auto [name, params] = parse_builtin_path(path);
  return find_builtin(name).instantiate(params);
}

struct SweepPoint {
  double value = 0.0;
  HistoryDistribution distribution;
};

/// Full distribution at every grid value of `parameter`, other parameters
/// taken from `fixed` or their defaults. Points are evaluated independently
/// and returned in grid order.
inline std::vector<SweepPoint> sweep(const BuiltinTemplate& tmpl, const std::string& parameter,
                                     const std::vector<double>& grid, const ParameterMap& fixed = {},
                                     Strategy strategy = Strategy::Contraction,
                                     const EngineOptions& options = {}) {
  if (!tmpl.has_parameter(parameter))
    throw PreconditionError("builtin '" + tmpl.name + "' has no parameter '" + parameter +
                            "' (available: " + tmpl.parameter_names() + ")");
  std::vector<SweepPoint> out;
  out.reserve(grid.size());
  for (double v : grid) {
    ParameterMap p = fixed;
    p[parameter] = v;
    const CompiledScenario cs(tmpl.instantiate(p), options);
    out.push_back({v, full_distribution(cs, strategy)});
  }
  return out;
}

}  // namespace histories
