#include <gtest/gtest.h>

#include <numbers>
#include <numeric>

#include "histories/histories.hpp"
#include "oracles.hpp"
#include "random_scenarios.hpp"

using namespace histories;
using histories::testing::RandomSource;
using histories::testing::lueders_distribution;
using histories::testing::max_abs_difference;
using std::numbers::pi;

namespace {

constexpr int kScenarios = 100;

std::vector<double> probs(const Scenario& s, Strategy strategy = Strategy::Contraction) {
  return full_distribution(CompiledScenario(s), strategy).probabilities();
}

double total(const std::vector<double>& p) { return std::accumulate(p.begin(), p.end(), 0.0); }

/// Random unitary confined to the span of `basis`, acting as identity elsewhere.
std::vector<StateVector> rotate_within(RandomSource& rng, const std::vector<StateVector>& basis) {
  const ComplexMatrix u = rng.unitary(basis.size());
  std::vector<StateVector> out;
  for (std::size_t j = 0; j < basis.size(); ++j) {
    StateVector v = StateVector::Zero(basis[0].size());
    for (std::size_t k = 0; k < basis.size(); ++k)
      v += u(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)) * basis[k];
    out.push_back(v);
  }
  return out;
}

}  // namespace

TEST(Properties, StrategiesAgreeWithEachOtherAndTheDensityOracle) {
  RandomSource rng(101);
  for (int i = 0; i < kScenarios; ++i) {
    const Scenario s = rng.scenario(4, 4, i % 3);
    const CompiledScenario cs(s);
    const auto a = full_distribution(cs, Strategy::PathSum).probabilities();
    const auto b = full_distribution(cs, Strategy::Contraction).probabilities();
    const auto c = full_distribution(cs, Strategy::TraceFormula).probabilities();
    const auto ref = lueders_distribution(s);
    EXPECT_LT(max_abs_difference(a, b), 1e-9) << "scenario " << i;
    EXPECT_LT(max_abs_difference(b, c), 1e-9) << "scenario " << i;
    EXPECT_LT(max_abs_difference(a, c), 1e-9) << "scenario " << i;
    EXPECT_LT(max_abs_difference(b, ref), 1e-9) << "scenario " << i;
    EXPECT_NEAR(total(b), 1.0, 1e-9) << "scenario " << i;
    for (double p : b) EXPECT_GT(p, -1e-12);
  }
}

TEST(Properties, SingleStringsAgreeAcrossStrategies) {
  RandomSource rng(102);
  for (int i = 0; i < 30; ++i) {
    const CompiledScenario cs(rng.scenario(4, 3, i % 3));
    const auto radices = cs.cluster_counts();
    OutcomeString s;
    for (auto r : radices) s.push_back(rng.index(0, r - 1));
    const double a = sequence_probability(cs, s, Strategy::PathSum);
    EXPECT_NEAR(a, sequence_probability(cs, s, Strategy::Contraction), 1e-9);
    EXPECT_NEAR(a, sequence_probability(cs, s, Strategy::TraceFormula), 1e-9);
  }
}

TEST(Properties, MarginalOverLastEventIsTheShorterSequence) {
  RandomSource rng(103);
  int checked = 0;
  for (int i = 0; i < kScenarios; ++i) {
    const Scenario s = rng.scenario(4, 4, i % 3);
    if (s.measurements.size() < 2) continue;
    ++checked;
    const auto full = full_distribution(CompiledScenario(s));
    const auto shorter = probs(histories::testing::truncated(s, s.measurements.size() - 1));
    EXPECT_LT(max_abs_difference(marginal_drop_last(full).probabilities(), shorter), 1e-9) << "scenario " << i;
  }
  EXPECT_GT(checked, 50);
}

TEST(Properties, BornRuleForASingleNondegenerateEvent) {
  RandomSource rng(104);
  for (int i = 0; i < 30; ++i) {
    Scenario s;
    s.dimension = rng.index(2, 5);
    s.hamiltonian.push_back({0.0, rng.hermitian(s.dimension)});
    s.measurements.push_back({rng.uniform(0.1, 2.0), "q", rng.nondegenerate_observable(s.dimension), std::nullopt});
    const StateVector psi = rng.state(s.dimension);
    s.preparation = PurePreparation{psi};
    const ComplexMatrix u = histories::testing::exp_minus_i(s.hamiltonian[0].hamiltonian, s.measurements[0].time);
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(s.measurements[0].matrix);
    const auto p = probs(s);
    ASSERT_EQ(p.size(), s.dimension);
    for (std::size_t k = 0; k < s.dimension; ++k)
      EXPECT_NEAR(p[k], std::norm(es.eigenvectors().col(static_cast<Eigen::Index>(k)).dot(u * psi)), 1e-12);
  }
}

TEST(Properties, UniformSubspacePreparationIgnoresTheChoiceOfBasis) {
  RandomSource rng(105);
  for (int i = 0; i < 20; ++i) {
    Scenario s = rng.scenario(4, 3, 1);
    auto& sp = std::get<SubspacePreparation>(s.preparation);
    sp.weights.clear();
    const auto reference = probs(s);
    for (int r = 0; r < 20; ++r) {
      Scenario rotated = s;
      std::get<SubspacePreparation>(rotated.preparation).basis = rotate_within(rng, sp.basis);
      EXPECT_LT(max_abs_difference(probs(rotated), reference), 1e-10);
    }
  }
}

TEST(Properties, DegenerateMeasurementIgnoresTheChoiceOfBasis) {
  RandomSource rng(106);
  for (int i = 0; i < 20; ++i) {
    Scenario s = rng.scenario(4, 3, i % 3);
    const auto reference = probs(s);
    for (int r = 0; r < 5; ++r) {
      Scenario rotated = s;
      for (auto& m : rotated.measurements) {
        std::vector<StateVector> basis;
        for (const auto& p : histories::testing::projectors(m.matrix))
          for (const auto& v : rotate_within(rng, histories::testing::range_basis(p))) basis.push_back(v);
        m.basis = basis;
      }
      EXPECT_LT(max_abs_difference(probs(rotated), reference), 1e-10);
      EXPECT_LT(max_abs_difference(probs(rotated, Strategy::PathSum), reference), 1e-10);
    }
  }
}

TEST(Properties, TrivialEventCanBeDeleted) {
  RandomSource rng(107);
  for (int i = 0; i < 30; ++i) {
    const Scenario s = rng.scenario(4, 3, i % 3);
    Scenario with = s;
    const std::size_t at = rng.index(0, s.measurements.size() - 1);
    const double lo = at == 0 ? s.preparation_time() : s.measurements[at - 1].time;
    const double lambda = rng.uniform(-2.0, 2.0);
    const auto n = static_cast<Eigen::Index>(s.dimension);
    with.measurements.insert(with.measurements.begin() + static_cast<std::ptrdiff_t>(at),
                             {0.5 * (lo + s.measurements[at].time), "trivial",
                              lambda * ComplexMatrix::Identity(n, n), std::nullopt});
    const auto d = full_distribution(CompiledScenario(with));
    EXPECT_EQ(d.radices()[at], 1u);
    EXPECT_LT(max_abs_difference(d.probabilities(), probs(s)), 1e-10);
  }
}

TEST(Properties, TotallyMixedPreparationFactorisesAfterTheFirstEvent) {
  RandomSource rng(108);
  for (int i = 0; i < 30; ++i) {
    Scenario a = rng.scenario(4, 4, 0);
    const auto n = static_cast<Eigen::Index>(a.dimension);
    SubspacePreparation all;
    for (Eigen::Index k = 0; k < n; ++k) all.basis.push_back(StateVector::Unit(n, k));
    a.preparation = all;
    const CompiledScenario cs(a);
    const auto pa = full_distribution(cs);
    const auto& first = cs.observable(0);
    const std::size_t rest = pa.size() / first.cluster_count();
    for (std::size_t c = 0; c < first.cluster_count(); ++c) {
      const double weight = static_cast<double>(first.cluster(c).multiplicity()) / static_cast<double>(n);
      if (a.measurements.size() == 1) {
        EXPECT_NEAR(pa[c], weight, 1e-10);
        continue;
      }
      SubspacePreparation sub;
      for (std::size_t k = 0; k < first.cluster(c).multiplicity(); ++k)
        sub.basis.push_back(first.cluster(c).basis.col(static_cast<Eigen::Index>(k)));
      const auto pb = probs(histories::testing::rebased(a, 0, sub));
      ASSERT_EQ(pb.size(), rest);
      for (std::size_t j = 0; j < rest; ++j) EXPECT_NEAR(pa[c * rest + j], weight * pb[j], 1e-10);
    }
  }
}

TEST(Properties, CoarseningTheFinalEventAddsProbabilities) {
  RandomSource rng(109);
  for (int i = 0; i < 30; ++i) {
    const Scenario s = rng.scenario(4, 3, i % 3);
    const auto fine = full_distribution(CompiledScenario(s));
    const auto proj = histories::testing::projectors(s.measurements.back().matrix);
    if (proj.size() < 2) continue;
    Scenario coarse = s;
    ComplexMatrix q = ComplexMatrix::Zero(proj[0].rows(), proj[0].cols());
    for (std::size_t c = 0; c < proj.size(); ++c) q += static_cast<double>(c / 2) * proj[c];
    coarse.measurements.back().matrix = 0.5 * (q + q.adjoint());
    const auto d = full_distribution(CompiledScenario(coarse));
    const std::size_t groups = (proj.size() + 1) / 2;
    ASSERT_EQ(d.radices().back(), groups);
    for (std::size_t prefix = 0; prefix < d.size() / groups; ++prefix)
      for (std::size_t g = 0; g < groups; ++g) {
        double sum = 0.0;
        for (std::size_t c = 2 * g; c < std::min(2 * g + 2, proj.size()); ++c) sum += fine[prefix * proj.size() + c];
        EXPECT_NEAR(d[prefix * groups + g], sum, 1e-10);
      }
  }
}

TEST(Properties, RepeatingAnEventImmediatelyGivesTheSameOutcome) {
  RandomSource rng(110);
  for (int i = 0; i < 20; ++i) {
    const Scenario s = rng.scenario(3, 3, i % 3);
    const std::size_t at = rng.index(0, s.measurements.size() - 1);
    Scenario twice = s;
    MeasurementEvent copy = s.measurements[at];
    copy.time += 1e-12;
    twice.measurements.insert(twice.measurements.begin() + static_cast<std::ptrdiff_t>(at) + 1, copy);
    const auto base = full_distribution(CompiledScenario(s));
    const auto d = full_distribution(CompiledScenario(twice));
    for (std::size_t k = 0; k < d.size(); ++k) {
      OutcomeString str = d.string_at(k);
      if (str[at] != str[at + 1]) {
        EXPECT_NEAR(d[k], 0.0, 1e-9);
        continue;
      }
      str.erase(str.begin() + static_cast<std::ptrdiff_t>(at) + 1);
      EXPECT_NEAR(d[k], base.probability(str), 1e-9);
    }
  }
}

TEST(Properties, NonInteractingEnvironmentDropsOut) {
  RandomSource rng(111);
  for (int i = 0; i < 30; ++i) {
    const int kind = i % 3;
    const Scenario sys = rng.scenario(3, 3, kind);
    const std::size_t de = rng.index(2, 3);
    const auto ds = static_cast<Eigen::Index>(sys.dimension);
    const ComplexMatrix ie = ComplexMatrix::Identity(static_cast<Eigen::Index>(de), static_cast<Eigen::Index>(de));
    const ComplexMatrix is = ComplexMatrix::Identity(ds, ds);
    Scenario comp;
    comp.dimension = sys.dimension * de;
    for (const auto& seg : sys.hamiltonian)
      comp.hamiltonian.push_back({seg.start, tensor_product(seg.hamiltonian, ie) + tensor_product(is, rng.hermitian(de))});
    for (const auto& m : sys.measurements) comp.measurements.push_back({m.time, m.label, tensor_product(m.matrix, ie), std::nullopt});
    const StateVector env = rng.state(de);
    if (const auto* p = std::get_if<PurePreparation>(&sys.preparation)) {
      comp.preparation = PurePreparation{tensor_product(p->vector, env)};
    } else if (const auto* sp = std::get_if<SubspacePreparation>(&sys.preparation)) {
      SubspacePreparation cp;
      for (const auto& v : sp->basis) cp.basis.push_back(tensor_product(v, env));
      cp.weights = sp->weights;
      comp.preparation = cp;
    } else {
      comp.preparation = DensityPreparation{tensor_product(std::get<DensityPreparation>(sys.preparation).matrix,
                                                           rng.density(de))};
    }
    const auto expected = probs(sys);
    EXPECT_LT(max_abs_difference(probs(comp), expected), 1e-9) << "composite " << i;
    EXPECT_LT(max_abs_difference(probs(reduce_product_environment(comp, {sys.dimension, de})), expected), 1e-9)
        << "composite " << i;
  }
}

TEST(Properties, OrthogonalEnvironmentRecordsGiveAMixture) {
  RandomSource rng(112);
  for (int i = 0; i < 30; ++i) {
    const Scenario sys = rng.scenario(3, 3, 0);
    const std::size_t de = rng.index(2, 3);
    const std::size_t terms = rng.index(2, de);
    const ComplexMatrix records = rng.unitary(de);
    std::vector<complex> beta;
    std::vector<StateVector> states, envs;
    double norm = 0.0;
    for (std::size_t j = 0; j < terms; ++j) {
      beta.emplace_back(rng.normal(), rng.normal());
      norm += std::norm(beta.back());
      states.push_back(rng.state(sys.dimension));
      envs.push_back(records.col(static_cast<Eigen::Index>(j)));
    }
    for (auto& b : beta) b /= std::sqrt(norm);
    Scenario comp;
    comp.dimension = sys.dimension * de;
    const ComplexMatrix ie = ComplexMatrix::Identity(static_cast<Eigen::Index>(de), static_cast<Eigen::Index>(de));
    for (const auto& seg : sys.hamiltonian) comp.hamiltonian.push_back({seg.start, tensor_product(seg.hamiltonian, ie)});
    for (const auto& m : sys.measurements) comp.measurements.push_back({m.time, m.label, tensor_product(m.matrix, ie), std::nullopt});
    comp.preparation = PurePreparation{entangled_preparation(beta, states, envs)};

    std::vector<double> mixture;
    for (std::size_t j = 0; j < terms; ++j) {
      Scenario branch = sys;
      branch.preparation = PurePreparation{states[j]};
      const auto p = probs(branch);
      if (mixture.empty()) mixture.assign(p.size(), 0.0);
      for (std::size_t k = 0; k < p.size(); ++k) mixture[k] += std::norm(beta[j]) * p[k];
    }
    EXPECT_LT(max_abs_difference(probs(comp), mixture), 1e-9) << "composite " << i;
  }
}

TEST(Properties, EraserSumRuleHoldsForEveryDetectorBasis) {
  RandomSource rng(113);
  for (int i = 0; i < 50; ++i) {
    const StateVector b1 = rng.state(2);
    const double ct = rng.uniform(0, pi), cp = rng.uniform(0, 2 * pi);
    const double dt = rng.uniform(0, pi), dp = rng.uniform(0, 2 * pi);
    const std::vector<StateVector> c = {spin::bloch(ct, cp), spin::bloch_orthogonal(ct, cp)};
    const std::vector<StateVector> d = {spin::bloch(dt, dp), spin::bloch_orthogonal(dt, dp)};
    const auto dist = full_distribution(CompiledScenario(builtin_eraser(b1, c, d)));
    const double a1 = std::norm(c[0].dot(spin::up()) * b1(0)), a2 = std::norm(c[0].dot(spin::down()) * b1(1));
    EXPECT_NEAR(dist.probability({0, 0}) + dist.probability({0, 1}), a1 + a2, 1e-10);
  }
}

TEST(Properties, WeakValueFormsAgree) {
  RandomSource rng(114);
  for (int i = 0; i < 100; ++i) {
    const std::size_t n = rng.index(2, 4);
    const HermitianObservable q(rng.coin() ? rng.degenerate_observable(n, 3) : rng.nondegenerate_observable(n));
    const StateVector pre = rng.state(n), post = rng.state(n);
    const auto r = weak_value(pre, post, q, rng.unitary(n), rng.unitary(n));
    EXPECT_LT(std::abs(r.amplitude_ratio - r.value), 1e-10) << "triple " << i;
  }
}

TEST(Properties, EprDependsOnlyOnTheAngleDifference) {
  RandomSource rng(115);
  for (int i = 0; i < 20; ++i) {
    const double th = rng.uniform(0, pi), tp = rng.uniform(0, pi), shift = rng.uniform(-pi, pi);
    const auto a = probs(builtin_epr(th, tp));
    const auto b = probs(builtin_epr(th + shift, tp + shift));
    EXPECT_LT(max_abs_difference(a, b), 1e-12);
  }
}
