#include "cmcepi/transmission.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <string>

#include "cmcepi/errors.hpp"
#include "cmcepi/rng.hpp"

namespace cmcepi {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

// log of a Gamma(shape, 1) draw; stays finite for small shapes where the draw
// itself underflows.
double log_gamma_draw(double shape, std::mt19937_64& rng) {
  if (shape >= 1.0) {
    std::gamma_distribution<double> g(shape, 1.0);
    return std::log(g(rng));
  }
  std::gamma_distribution<double> g(shape + 1.0, 1.0);
  const double u = 1.0 - uniform01(rng);  // (0, 1]
  return std::log(g(rng)) + std::log(u) / shape;
}

std::vector<QuadratureNode> atoms_of(const std::vector<DiscreteAtoms::Atom>& atoms) {
  std::vector<QuadratureNode> out;
  for (const auto& a : atoms)
    if (a.weight > 0.0) out.push_back({a.t, a.weight});
  return out;
}

// Golub-Welsch on a symmetric tridiagonal Jacobi matrix; total mass one.
std::vector<QuadratureNode> gauss_from_recurrence(const std::vector<long double>& alpha,
                                                  const std::vector<long double>& beta) {
  const auto n = static_cast<Eigen::Index>(alpha.size());
  Eigen::VectorXd diag(n);
  Eigen::VectorXd sub(std::max<Eigen::Index>(n - 1, 0));
  for (Eigen::Index i = 0; i < n; ++i) diag[i] = static_cast<double>(alpha[i]);
  for (Eigen::Index i = 0; i + 1 < n; ++i) sub[i] = static_cast<double>(std::sqrt(beta[i + 1]));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
  std::vector<QuadratureNode> out;
  out.reserve(alpha.size());
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double v0 = solver.eigenvectors()(0, i);
    out.push_back({std::clamp(solver.eigenvalues()[i], 0.0, 1.0), v0 * v0});
    total += v0 * v0;
  }
  for (auto& q : out) q.weight /= total;
  return out;
}

// Beta(a, b) on [0, 1] is the Jacobi weight (1-x)^(b-1) (1+x)^(a-1) under
// t = (1 + x) / 2; monic recurrence coefficients, mapped to [0, 1].
std::vector<QuadratureNode> gauss_beta(double a, double b, int nodes) {
  const long double al = b - 1.0L, be = a - 1.0L, s = al + be;
  std::vector<long double> diag(nodes), beta(nodes);
  beta[0] = 1.0L;
  diag[0] = (1.0L + (be - al) / (s + 2.0L)) / 2.0L;
  for (int k = 1; k < nodes; ++k) {
    const long double m = 2.0L * k + s;
    diag[k] = (1.0L + (be * be - al * al) / (m * (m + 2.0L))) / 2.0L;
    const long double bk =
        k == 1 ? 4.0L * (1.0L + al) * (1.0L + be) / ((2.0L + s) * (2.0L + s) * (3.0L + s))
               : 4.0L * k * (k + al) * (k + be) * (k + s) / (m * m * (m + 1.0L) * (m - 1.0L));
    beta[k] = bk / 4.0L;
  }
  return gauss_from_recurrence(diag, beta);
}

void check_unit(double t, const char* what) {
  if (!(t >= 0.0 && t <= 1.0)) throw ValidationError(std::string(what) + " must lie in [0, 1]");
}

}  // namespace

LaplaceSpec LaplaceSpec::exponential(double rate) {
  if (!(rate > 0.0) || !std::isfinite(rate))
    throw ValidationError("infectious period rate must be positive");
  return {Kind::exponential, rate};
}

LaplaceSpec LaplaceSpec::constant(double duration) {
  if (!(duration >= 0.0) || !std::isfinite(duration))
    throw ValidationError("infectious period must be nonnegative");
  return {Kind::constant, duration};
}

double LaplaceSpec::operator()(double z) const {
  return kind_ == Kind::exponential ? param_ / (param_ + z) : std::exp(-z * param_);
}

TransmissionLaw::TransmissionLaw(TransmissionVariant v) : law_(std::move(v)) {
  std::visit(Overloaded{
                 [](const PointMass& l) { check_unit(l.t, "point-mass weight"); },
                 [](const BernoulliEndpoints& l) { check_unit(l.p, "Bernoulli probability"); },
                 [](DiscreteAtoms& l) {
                   if (l.atoms.empty()) throw ValidationError("atom law has no atoms");
                   double total = 0.0;
                   for (const auto& a : l.atoms) {
                     check_unit(a.t, "atom location");
                     if (!(a.weight >= 0.0)) throw ValidationError("atom weight must be >= 0");
                     total += a.weight;
                   }
                   if (std::abs(total - 1.0) > 1e-9)
                     throw ValidationError("atom weights must sum to 1");
                   for (auto& a : l.atoms) a.weight /= total;
                 },
                 [](const BetaSymmetric& l) {
                   if (!(l.alpha > 0.0) || !std::isfinite(l.alpha))
                     throw ValidationError("Beta shape must be positive and finite");
                 },
                 [](const InfectiousPeriod&) {},
             },
             law_);
}

double TransmissionLaw::sample(std::mt19937_64& rng) const {
  return std::visit(
      Overloaded{
          [](const PointMass& l) { return l.t; },
          [&](const BernoulliEndpoints& l) { return uniform01(rng) < l.p ? 1.0 : 0.0; },
          [&](const DiscreteAtoms& l) {
            double u = uniform01(rng);
            for (const auto& a : l.atoms) {
              if (u < a.weight) return a.t;
              u -= a.weight;
            }
            return l.atoms.back().t;
          },
          [&](const BetaSymmetric& l) {
            const double lx = log_gamma_draw(l.alpha, rng);
            const double ly = log_gamma_draw(l.alpha, rng);
            return 1.0 / (1.0 + std::exp(ly - lx));
          },
          [&](const InfectiousPeriod& l) {
            const double c = l.laplace.parameter();
            if (l.laplace.kind() == LaplaceSpec::Kind::constant) return -std::expm1(-c);
            // exp(-tau) with tau ~ Exp(rate) is V^(1/rate), V uniform.
            const double v = 1.0 - uniform01(rng);
            return -std::expm1(std::log(v) / c);
          },
      },
      law_);
}

double raw_moment(const TransmissionLaw& law, int m) {
  if (m < 0) throw DomainError("moment order must be nonnegative");
  if (m == 0) return 1.0;
  return std::visit(Overloaded{
                        [&](const PointMass& l) { return std::pow(l.t, m); },
                        [&](const BernoulliEndpoints& l) { return l.p; },
                        [&](const DiscreteAtoms& l) {
                          double s = 0.0;
                          for (const auto& a : l.atoms) s += a.weight * std::pow(a.t, m);
                          return s;
                        },
                        [&](const BetaSymmetric& l) {
                          long double prod = 1.0L;
                          for (int j = 0; j < m; ++j) prod *= (l.alpha + j) / (2.0L * l.alpha + j);
                          return static_cast<double>(prod);
                        },
                        [&](const InfectiousPeriod& l) {
                          const double c = l.laplace.parameter();
                          if (l.laplace.kind() == LaplaceSpec::Kind::constant)
                            return std::pow(-std::expm1(-c), m);
                          // sum_k C(m,k) (-1)^k L(k) in closed form: T ~ Beta(1, rate)
                          long double prod = 1.0L;
                          for (int j = 1; j <= m; ++j) prod *= j / (c + j);
                          return static_cast<double>(prod);
                        },
                    },
                    law.variant());
}

TMoments derived_moments(const TransmissionLaw& law) {
  TMoments out;
  if (const auto* ip = std::get_if<InfectiousPeriod>(&law.variant())) {
    const auto& lap = ip->laplace;
    out.e_t = 1.0 - lap(1.0);
    out.e_t_1mt = lap(1.0) - lap(2.0);
    out.e_t2 = out.e_t - out.e_t_1mt;
    out.e_1mt2 = lap(2.0);
    return out;
  }
  out.e_t = raw_moment(law, 1);
  out.e_t2 = raw_moment(law, 2);
  out.e_t_1mt = out.e_t - out.e_t2;
  out.e_1mt2 = 1.0 - 2.0 * out.e_t + out.e_t2;
  return out;
}

std::vector<QuadratureNode> expectation_functional(const TransmissionLaw& law, int max_degree) {
  if (max_degree < 0) throw DomainError("polynomial degree must be nonnegative");
  const int nodes = std::max(1, (max_degree + 2) / 2);
  return std::visit(
      Overloaded{
          [](const PointMass& l) { return std::vector<QuadratureNode>{{l.t, 1.0}}; },
          [](const BernoulliEndpoints& l) {
            std::vector<QuadratureNode> out;
            if (l.p < 1.0) out.push_back({0.0, 1.0 - l.p});
            if (l.p > 0.0) out.push_back({1.0, l.p});
            return out;
          },
          [](const DiscreteAtoms& l) { return atoms_of(l.atoms); },
          [&](const BetaSymmetric& l) { return gauss_beta(l.alpha, l.alpha, nodes); },
          [&](const InfectiousPeriod& l) {
            if (l.laplace.kind() == LaplaceSpec::Kind::constant)
              return std::vector<QuadratureNode>{{-std::expm1(-l.laplace.parameter()), 1.0}};
            return gauss_beta(1.0, l.laplace.parameter(), nodes);
          },
      },
      law.variant());
}

}  // namespace cmcepi
