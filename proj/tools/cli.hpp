#pragma once

// Command-line front end. run_cli() takes the arguments after the program
// name and writes the payload to `out`, diagnostics to `err`.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include "histories/histories.hpp"

namespace histories::cli {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,  // numerical failure or oracle disagreement
  kValidation = 2,
  kUsage = 3,
  kBudget = 4,
  kPostSelection = 5,
};

inline constexpr double kOracleTolerance = 1e-8;

struct GlobalOptions {
  std::string strategy = "auto";
  bool oracle = false;
  std::optional<std::uint64_t> budget;
  std::optional<double> tol;
};

/// Signals a usage problem detected after argument parsing.
class UsageError : public Error {
 public:
  using Error::Error;
};

inline std::string fixed(double v) {
  if (v == 0.0) v = 0.0;  // no "-0.000..."
  return fmt::format("{:.12f}", v);
}

inline std::string general(double v) {
  if (std::abs(v) < 5e-13) v = 0.0;
  return fmt::format("{:.12g}", v);
}

inline std::string signed_general(double v) {
  if (std::abs(v) < 5e-13) v = 0.0;
  return fmt::format("{:+.12g}", v);
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
  return q + "\"";
}

inline std::string csv_row(const std::vector<std::string>& fields) {
  std::string line;
  for (std::size_t i = 0; i < fields.size(); ++i) line += (i ? "," : "") + csv_field(fields[i]);
  return line + "\n";
}

inline EngineOptions engine_options(const GlobalOptions& g) {
  EngineOptions o;
  if (g.budget) {
    o.path_budget = *g.budget;
    o.string_budget = *g.budget;
  }
  if (g.tol) {
    if (!(*g.tol > 0.0)) throw UsageError("--tol must be positive");
    o.cluster_tol = *g.tol;
  }
  return o;
}

inline Strategy primary_strategy(const GlobalOptions& g) {
  if (g.strategy == "path-sum") return Strategy::PathSum;
  if (g.strategy == "trace-formula") return Strategy::TraceFormula;
  return Strategy::Contraction;
}

/// The strategy compared against when --oracle is given.
inline Strategy oracle_strategy(Strategy primary) {
  return primary == Strategy::TraceFormula ? Strategy::PathSum : Strategy::TraceFormula;
}

inline Scenario load(const std::string& source) {
  if (is_builtin_path(source)) return load_builtin(source);
  return load_scenario(source);
}

/// "(+1,-1)", "+1,-1" or "1 -1": one eigenvalue per measurement.
inline OutcomeString parse_outcome(const CompiledScenario& cs, const std::string& text) {
  std::string body;
  for (char c : text)
    if (c != '(' && c != ')') body += c == ',' ? ' ' : c;
  std::istringstream in(body);
  in.imbue(std::locale::classic());
  std::vector<double> values;
  std::string token;
  while (in >> token) {
    std::istringstream t(token);
    t.imbue(std::locale::classic());
    double v = 0.0;
    if (!(t >> v) || !(t >> std::ws).eof()) throw IndexError("outcome token '" + token + "' is not a number");
    values.push_back(v);
  }
  if (values.size() != cs.length())
    throw IndexError("outcome string has " + std::to_string(values.size()) + " values, scenario has " +
                     std::to_string(cs.length()) + " measurements");
  OutcomeString out;
  for (std::size_t l = 0; l < values.size(); ++l) {
    const auto c = cs.observable(l).find_cluster(values[l]);
    if (!c) {
      std::string avail;
      for (const auto& cl : cs.observable(l).spectrum().clusters)
        avail += (avail.empty() ? "" : ", ") + general(cl.eigenvalue);
      throw IndexError("value " + general(values[l]) + " is not an eigenvalue of measurement " +
                       std::to_string(l + 1) + " (available: " + avail + ")");
    }
    out.push_back(*c);
  }
  return out;
}

inline std::string outcome_label(const HistoryDistribution& d, const OutcomeString& s) {
  std::string label = "P(";
  for (std::size_t l = 0; l < s.size(); ++l) label += (l ? "," : "") + signed_general(d.eigenvalue(l, s[l]));
  return label + ")";
}

inline double max_difference(const HistoryDistribution& a, const HistoryDistribution& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

inline int report_oracle(std::ostream& out, std::ostream& err, const std::string& prefix, Strategy against,
                         double difference) {
  fmt::print(out, "{}oracle {} max_abs_difference={:.3e}\n", prefix, strategy_name(against), difference);
  if (!(difference <= kOracleTolerance)) {
    fmt::print(err, "error: oracle discrepancy {:.3e} exceeds {:.0e}\n", difference, kOracleTolerance);
    return kFailure;
  }
  return kOk;
}

inline int cmd_prob(const GlobalOptions& g, const std::string& file, const std::string& outcome,
                    std::ostream& out, std::ostream& err) {
  const CompiledScenario cs(load(file), engine_options(g));
  const OutcomeString s = parse_outcome(cs, outcome);
  const Strategy strategy = primary_strategy(g);
  const double p = sequence_probability(cs, s, strategy);
  fmt::print(out, "{} strategy={}\n", fixed(p), strategy_name(strategy));
  if (!g.oracle) return kOk;
  const Strategy against = oracle_strategy(strategy);
  const double q = sequence_probability(cs, s, against);
  fmt::print(out, "{} strategy={}\n", fixed(q), strategy_name(against));
  return report_oracle(out, err, "", against, std::abs(p - q));
}

inline int cmd_distribution(const GlobalOptions& g, const std::string& file, std::ostream& out,
                            std::ostream& err) {
  const CompiledScenario cs(load(file), engine_options(g));
  const Strategy strategy = primary_strategy(g);
  const HistoryDistribution d = full_distribution(cs, strategy);
  std::optional<HistoryDistribution> check;
  if (g.oracle) check = full_distribution(cs, oracle_strategy(strategy));

  std::vector<std::string> header = d.labels();
  for (std::size_t l = 0; l < header.size(); ++l)
    if (header[l].empty()) header[l] = "m" + std::to_string(l + 1);
  header.push_back("probability");
  std::string payload = csv_row(header);
  for (std::size_t i = 0; i < d.size(); ++i) {
    const OutcomeString s = d.string_at(i);
    std::vector<std::string> row;
    for (std::size_t l = 0; l < s.size(); ++l) row.push_back(general(d.eigenvalue(l, s[l])));
    row.push_back(fixed(d[i]));
    payload += csv_row(row);
  }
  fmt::print(out, "{}# sum={} strategy={}\n", payload, fixed(d.total()), strategy_name(strategy));
  if (!check) return kOk;
  return report_oracle(out, err, "# ", oracle_strategy(strategy), max_difference(d, *check));
}

inline int cmd_paths(const GlobalOptions& g, const std::string& file, bool nonzero, std::ostream& out,
                     std::ostream& err) {
  const CompiledScenario cs(load(file), engine_options(g));
  const bool mixed = !cs.pure();
  std::vector<std::string> header;
  if (mixed) header = {"component", "weight"};
  for (std::size_t l = 0; l < cs.length(); ++l) {
    const std::string& lab = cs.observable(l).label();
    header.push_back("n_" + (lab.empty() ? std::to_string(l + 1) : lab));
  }
  for (const char* h : {"re", "im", "abs2"}) header.emplace_back(h);
  std::string payload = csv_row(header);

  HistoryDistribution from_paths = empty_distribution(cs, Strategy::PathSum);
  for (std::size_t k = 0; k < cs.ensemble().size(); ++k) {
    const auto& comp = cs.ensemble()[k];
    const PathTable table(cs, comp.state);
    if (g.oracle) {
      const HistoryDistribution part = table.distribution();
      for (std::size_t i = 0; i < part.size(); ++i) from_paths.at(i) += comp.weight * part[i];
    }
    std::vector<std::size_t> idx(cs.length(), 0);
    for (std::size_t p = 0; p < table.amplitudes().size(); ++p) {
      std::size_t rest = p;
      for (std::size_t l = cs.length(); l-- > 0;) {
        idx[l] = rest % cs.dimension();
        rest /= cs.dimension();
      }
      const complex a = table.amplitudes()[p];
      if (nonzero && !(std::abs(a) > 1e-12)) continue;
      std::vector<std::string> row;
      if (mixed) {
        row.push_back(std::to_string(k));
        row.push_back(fixed(comp.weight));
      }
      for (auto i : idx) row.push_back(std::to_string(i));
      row.push_back(fixed(a.real()));
      row.push_back(fixed(a.imag()));
      row.push_back(fixed(std::norm(a)));
      payload += csv_row(row);
    }
  }
  fmt::print(out, "{}", payload);
  if (!g.oracle) return kOk;
  const HistoryDistribution trace = full_distribution(cs, Strategy::TraceFormula);
  return report_oracle(out, err, "# ", Strategy::TraceFormula, max_difference(from_paths, trace));
}

inline int cmd_weak_value(const GlobalOptions& g, const std::string& file, const std::string& label,
                          const std::vector<double>& pointer, std::ostream& out, std::ostream& err) {
  const CompiledScenario cs(load(file), engine_options(g));
  const WeakValueResult wv = weak_value(cs, label);
  fmt::print(out, "{} {}{}i\n", fixed(wv.value.real()), wv.value.imag() < 0.0 ? "" : "+",
             fixed(wv.value.imag()));
  int code = kOk;
  if (!pointer.empty()) {
    if (pointer.size() != 2) throw UsageError("--pointer expects two values: g dim");
    const double dim = pointer[1];
    if (!(dim >= 3.0) || std::floor(dim) != dim || std::fmod(dim, 2.0) != 1.0)
      throw UsageError("--pointer dimension must be an odd integer >= 3");
    const double shift = pointer_shift(cs, label, pointer[0], static_cast<std::size_t>(dim));
    fmt::print(out, "pointer g={} dim={} estimate={} residual={}\n", general(pointer[0]),
               static_cast<std::size_t>(dim), fixed(shift), fixed(std::abs(shift - wv.real())));
  }
  if (g.oracle)
    code = report_oracle(out, err, "", Strategy::PathSum, std::abs(wv.amplitude_ratio - wv.value));
  return code;
}

inline int cmd_sample(const GlobalOptions& g, const std::string& file, long long n, std::uint64_t seed,
                      const std::string& method, std::ostream& out, std::ostream& err) {
  if (n < 1) throw UsageError("n must be at least 1 (got " + std::to_string(n) + ")");
  const CompiledScenario cs(load(file), engine_options(g));
  SampleReport report;
  if (method == "conditional") {
    report = conditional_sample(cs, static_cast<std::uint64_t>(n), seed);
  } else {
    report = sample(full_distribution(cs, primary_strategy(g)), static_cast<std::uint64_t>(n), seed);
  }
  fmt::print(out, "{}", serialize(report));
  if (!g.oracle) return kOk;
  const Strategy strategy = primary_strategy(g);
  const double diff = max_difference(full_distribution(cs, strategy), full_distribution(cs, oracle_strategy(strategy)));
  fmt::print(err, "oracle {} max_abs_difference={:.3e}\n", strategy_name(oracle_strategy(strategy)), diff);
  return diff <= kOracleTolerance ? kOk : kFailure;
}

inline int cmd_sweep(const GlobalOptions& g, const std::string& name, const std::string& parameter,
                     double from, double to, long long steps, std::ostream& out, std::ostream& err) {
  if (steps < 0) throw UsageError("steps must be non-negative");
  std::string tmpl_name = name;
  ParameterMap fixed_params;
  if (is_builtin_path(name)) std::tie(tmpl_name, fixed_params) = parse_builtin_path(name);
  const BuiltinTemplate& tmpl = find_builtin(tmpl_name);
  std::vector<double> grid;
  for (long long k = 0; k <= steps; ++k)
    grid.push_back(steps == 0 ? from
                              : from + (to - from) * static_cast<double>(k) / static_cast<double>(steps));
  const Strategy strategy = primary_strategy(g);
  const EngineOptions opts = engine_options(g);
  const auto points = sweep(tmpl, parameter, grid, fixed_params, strategy, opts);

  std::string payload;
  double worst = 0.0;
  for (std::size_t k = 0; k < points.size(); ++k) {
    const HistoryDistribution& d = points[k].distribution;
    if (k == 0) {
      std::vector<std::string> header{parameter};
      for (std::size_t i = 0; i < d.size(); ++i) header.push_back(outcome_label(d, d.string_at(i)));
      payload += csv_row(header);
    }
    std::vector<std::string> row{general(points[k].value)};
    for (std::size_t i = 0; i < d.size(); ++i) row.push_back(fixed(d[i]));
    payload += csv_row(row);
    if (g.oracle) {
      ParameterMap p = fixed_params;
      p[parameter] = points[k].value;
      const CompiledScenario cs(tmpl.instantiate(p), opts);
      worst = std::max(worst, max_difference(d, full_distribution(cs, oracle_strategy(strategy))));
    }
  }
  fmt::print(out, "{}", payload);
  if (!g.oracle) return kOk;
  return report_oracle(out, err, "# ", oracle_strategy(strategy), worst);
}

inline int cmd_validate(const GlobalOptions& g, const std::string& file, std::ostream& out,
                        std::ostream& err) {
  const Scenario s = load(file);
  const auto diags = validate(s, engine_options(g).dimension_cap);
  if (diags.empty()) {
    fmt::print(out, "ok\n");
    return kOk;
  }
  for (const auto& d : diags) fmt::print(err, "{}\n", d.to_string());
  return kValidation;
}

inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Probabilities of measurement-outcome sequences from virtual path amplitudes", "histories_cli"};
  app.require_subcommand(1);
  app.fallthrough();
  GlobalOptions g;
  app.add_option("--strategy", g.strategy, "evaluation strategy")
      ->check(CLI::IsMember({"auto", "path-sum", "contraction", "trace-formula"}));
  app.add_flag("--oracle", g.oracle, "cross-check against an independent strategy");
  app.add_option("--budget", g.budget, "cap on enumerated paths and outcome strings");
  app.add_option("--tol", g.tol, "eigenvalue clustering tolerance");

  std::string file, outcome, label, method = "inverse-cdf", parameter;
  bool nonzero = false;
  long long n = 0, steps = 0;
  std::uint64_t seed = 0;
  double from = 0.0, to = 0.0;
  std::vector<double> pointer;

  auto* prob = app.add_subcommand("prob", "probability of one outcome string");
  prob->add_option("scenario", file, "scenario file or builtin:NAME?k=v")->required();
  prob->add_option("outcome", outcome, "eigenvalues, e.g. \"(+1,-1)\"")->required();

  auto* dist = app.add_subcommand("distribution", "CSV of all outcome-string probabilities");
  dist->add_option("scenario", file)->required();

  auto* paths = app.add_subcommand("paths", "CSV of virtual path amplitudes");
  paths->add_option("scenario", file)->required();
  paths->add_flag("--nonzero", nonzero, "only paths with |A| > 1e-12");

  auto* weak = app.add_subcommand("weak-value", "weak value of a labelled measurement");
  weak->add_option("scenario", file)->required();
  weak->add_option("label", label)->required();
  weak->add_option("--pointer", pointer, "simulate a pointer: g dim")->expected(2);

  auto* samp = app.add_subcommand("sample", "seeded Monte Carlo sample report");
  samp->add_option("scenario", file)->required();
  samp->add_option("-n,--n", n, "number of draws")->required();
  samp->add_option("--seed", seed, "RNG seed");
  samp->add_option("--method", method)->check(CLI::IsMember({"inverse-cdf", "conditional"}));

  auto* swp = app.add_subcommand("sweep", "CSV of probabilities over a parameter grid");
  swp->add_option("builtin", file, "builtin name or builtin:NAME?k=v")->required();
  swp->add_option("parameter", parameter)->required();
  swp->add_option("from", from)->required();
  swp->add_option("to", to)->required();
  swp->add_option("steps", steps)->required();

  auto* val = app.add_subcommand("validate", "check a scenario document");
  val->add_option("scenario", file)->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    fmt::print(err, "usage error: {}\n", e.what());
    return kUsage;
  }

  try {
    if (*prob) return cmd_prob(g, file, outcome, out, err);
    if (*dist) return cmd_distribution(g, file, out, err);
    if (*paths) return cmd_paths(g, file, nonzero, out, err);
    if (*weak) return cmd_weak_value(g, file, label, pointer, out, err);
    if (*samp) return cmd_sample(g, file, n, seed, method, out, err);
    if (*swp) return cmd_sweep(g, file, parameter, from, to, steps, out, err);
    if (*val) return cmd_validate(g, file, out, err);
  } catch (const ValidationError& e) {
    for (const auto& d : e.diagnostics()) fmt::print(err, "validation: {}\n", d.to_string());
    return kValidation;
  } catch (const ParseError& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kValidation;
  } catch (const NotHermitianError& e) {
    fmt::print(err, "validation: {}\n", e.what());
    return kValidation;
  } catch (const BudgetExceededError& e) {
    fmt::print(err, "budget exceeded: {}\n", e.what());
    return kBudget;
  } catch (const PostSelectionError& e) {
    fmt::print(err, "degenerate post-selection: {}\n", e.what());
    return kPostSelection;
  } catch (const IndexError& e) {
    fmt::print(err, "out of range: {}\n", e.what());
    return kUsage;
  } catch (const PreconditionError& e) {
    fmt::print(err, "usage error: {}\n", e.what());
    return kUsage;
  } catch (const UsageError& e) {
    fmt::print(err, "usage error: {}\n", e.what());
    return kUsage;
  } catch (const DimensionError& e) {
    fmt::print(err, "validation: {}\n", e.what());
    return kValidation;
  } catch (const Error& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kFailure;
  }
  return kUsage;
}

}  // namespace histories::cli
