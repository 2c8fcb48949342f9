#pragma once

#include <random>
#include <variant>
#include <vector>

namespace cmcepi {

/// Laplace transform L(z) = E exp(-z tau) of the infectious period, with the
/// contact rate fixed to one. Only evaluated at nonnegative integers.
class LaplaceSpec {
 public:
  enum class Kind { exponential, constant };

  /// tau ~ Exp(rate): L(z) = rate / (rate + z).
  static LaplaceSpec exponential(double rate);
  /// tau = c: L(z) = exp(-z c).
  static LaplaceSpec constant(double duration);

  double operator()(double z) const;
  Kind kind() const { return kind_; }
  double parameter() const { return param_; }

 private:
  LaplaceSpec(Kind k, double p) : kind_(k), param_(p) {}
  Kind kind_;
  double param_;
};

struct PointMass {
  double t;
};
/// P(T = 1) = p = 1 - P(T = 0).
struct BernoulliEndpoints {
  double p;
};
struct DiscreteAtoms {
  struct Atom {
    double t;
    double weight;
  };
  std::vector<Atom> atoms;
};
/// Beta(alpha, alpha) on (0, 1).
struct BetaSymmetric {
  double alpha;
};
/// T = 1 - exp(-tau).
struct InfectiousPeriod {
  LaplaceSpec laplace;
};

using TransmissionVariant =
    std::variant<PointMass, BernoulliEndpoints, DiscreteAtoms, BetaSymmetric, InfectiousPeriod>;

/// Law of the per-node transmission weight T on [0, 1].
class TransmissionLaw {
 public:
  /// Validates parameters; throws ValidationError on out-of-range input.
  TransmissionLaw(TransmissionVariant v);  // NOLINT(google-explicit-constructor)

  const TransmissionVariant& variant() const { return law_; }

  /// Draws one weight. Deterministic for a given engine state.
  double sample(std::mt19937_64& rng) const;

 private:
  TransmissionVariant law_;
};

struct TMoments {
  double e_t = 0.0;      // E T
  double e_t2 = 0.0;     // E T^2
  double e_t_1mt = 0.0;  // E T(1-T)
  double e_1mt2 = 0.0;   // E (1-T)^2
};

struct QuadratureNode {
  double t;
  double weight;
};

/// Exact E(T^m).
double raw_moment(const TransmissionLaw& law, int m);

TMoments derived_moments(const TransmissionLaw& law);

/// Node/weight list reproducing E q(T) for every polynomial q of degree at
/// most max_degree. Atom laws return their atoms; continuous laws return a
/// Gauss rule with ceil((max_degree + 1) / 2) nodes.
std::vector<QuadratureNode> expectation_functional(const TransmissionLaw& law, int max_degree);

}  // namespace cmcepi
