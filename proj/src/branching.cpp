#include "cmcepi/branching.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cmcepi/errors.hpp"

namespace cmcepi {

namespace {

double ipow(double x, int n) {
  double r = 1.0;
  while (n > 0) {
    if (n & 1) r *= x;
    x *= x;
    n >>= 1;
  }
  return r;
}

void check_coverage(double f_v) {
  if (!(f_v >= 0.0 && f_v < 1.0)) throw ValidationError("vaccination coverage must lie in [0, 1)");
}

// Monic characteristic polynomial coefficients c[0..r] (c[r] = 1).
std::vector<double> characteristic_polynomial(const MeanMatrix& m) {
  const std::size_t r = m.size();
  switch (r) {
    case 1:
      return {-m(0, 0), 1.0};
    case 2: {
      const double tr = m(0, 0) + m(1, 1);
      const double det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
      return {det, -tr, 1.0};
    }
    case 3: {
      const double tr = m(0, 0) + m(1, 1) + m(2, 2);
      const double minors = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0) + m(0, 0) * m(2, 2) -
                            m(0, 2) * m(2, 0) + m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1);
      const double det = m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1)) -
                         m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0)) +
                         m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0));
      return {-det, minors, -tr, 1.0};
    }
    default:
      throw DomainError("perron_root supports matrices of size 1 to 3");
  }
}

double horner(const std::vector<double>& c, double x) {
  double v = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) v = v * x + *it;
  return v;
}

std::vector<double> derivative(const std::vector<double>& c) {
  std::vector<double> d;
  for (std::size_t i = 1; i < c.size(); ++i) d.push_back(static_cast<double>(i) * c[i]);
  return d;
}

// Real roots of a polynomial of degree <= 2, ascending.
std::vector<double> low_degree_roots(const std::vector<double>& c) {
  if (c.size() <= 1) return {};
  if (c.size() == 2) return {-c[0] / c[1]};
  const double a = c[2], b = c[1], k = c[0];
  const double disc = b * b - 4.0 * a * k;
  if (disc < 0.0) return {};
  const double s = std::sqrt(disc);
  // Numerically stable pair.
  const double qv = -0.5 * (b + std::copysign(s, b));
  std::vector<double> roots;
  if (qv != 0.0) {
    roots = {qv / a, k / qv};
  } else {
    roots = {-b / (2.0 * a), -b / (2.0 * a)};
  }
  std::sort(roots.begin(), roots.end());
  return roots;
}

// Root of a polynomial monotone increasing on [lo, hi] with p(lo) <= 0 <= p(hi).
double bisect(const std::vector<double>& c, double lo, double hi) {
  for (int i = 0; i < 4000; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (horner(c, mid) <= 0.0 ? lo : hi) = mid;
  }
  return std::abs(horner(c, lo)) <= std::abs(horner(c, hi)) ? lo : hi;
}

}  // namespace

namespace {

// Some power of the zero pattern is all positive; (k-1)^2 + 1 powers suffice.
bool positively_regular(const MeanMatrix& m) {
  const std::size_t k = m.size();
  std::vector<char> pattern(k * k), power(k * k);
  for (std::size_t i = 0; i < k * k; ++i) pattern[i] = power[i] = m.entries[i] > 0.0;
  for (std::size_t step = 1; step <= (k - 1) * (k - 1) + 1; ++step) {
    if (std::all_of(power.begin(), power.end(), [](char c) { return c != 0; })) return true;
    std::vector<char> next(k * k, 0);
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t l = 0; l < k; ++l)
        if (power[i * k + l])
          for (std::size_t j = 0; j < k; ++j) next[i * k + j] |= pattern[l * k + j];
    power = std::move(next);
  }
  return false;
}

}  // namespace

std::array<std::array<double, 3>, 3> MeanMatrix::full() const {
  std::array<std::array<double, 3>, 3> out{};
  for (std::size_t i = 0; i < size(); ++i)
    for (std::size_t j = 0; j < size(); ++j)
      out[static_cast<std::size_t>(types[i] - 1)][static_cast<std::size_t>(types[j] - 1)] =
          (*this)(i, j);
  return out;
}

MeanMatrix forward_mean_matrix(const DegreeDistribution& dist, const TransmissionLaw& law,
                               double f_v) {
  check_coverage(f_v);
  const auto means = downshifted_means(dist);
  const bool tri = means.delta_given_delta.has_value();
  const bool sgl = means.s_given_s.has_value();
  if (!tri && !sgl) throw DomainError("degree distribution has neither single nor triangle edges");
  const auto tm = derived_moments(law);
  const double dd = means.delta_given_delta.value_or(0.0);
  const double sd = means.s_given_delta.value_or(0.0);
  const double ds = means.delta_given_s.value_or(0.0);
  const double ss = means.s_given_s.value_or(0.0);
  const std::array<std::array<double, 3>, 3> m = {{
      {2.0 * tm.e_t2 * dd, 2.0 * tm.e_t_1mt * dd, tm.e_t * sd},
      {2.0 * tm.e_t2 * dd + tm.e_t, 2.0 * tm.e_t_1mt * dd, tm.e_t * sd},
      {2.0 * tm.e_t2 * ds, 2.0 * tm.e_t_1mt * ds, tm.e_t * ss},
  }};
  MeanMatrix out;
  if (tri) out.types = {1, 2};
  if (sgl) out.types.push_back(3);
  const double g = 1.0 - f_v;
  for (int i : out.types)
    for (int j : out.types)
      out.entries.push_back(g * m[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(j - 1)]);
  return out;
}

double perron_root(const MeanMatrix& m) {
  if (m.size() == 0) return 0.0;
  double upper = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < m.size(); ++j) {
      if (!(m(i, j) >= 0.0) || !std::isfinite(m(i, j)))
        throw DomainError("mean matrix entries must be finite and nonnegative");
      row += m(i, j);
    }
    upper = std::max(upper, row);
  }
  if (upper == 0.0) return 0.0;
  const auto c = characteristic_polynomial(m);
  // The Perron root lies in [0, max row sum] and is the largest real root.
  // Split [0, hi] at the real critical points so each piece is monotone, and
  // take the right-most piece that contains a root.
  const double hi = upper * (1.0 + 1e-9) + 1e-300;
  const double tiny = 1e-13 * std::pow(upper, static_cast<double>(m.size()));
  std::vector<double> cuts = {0.0};
  for (double x : low_degree_roots(derivative(c)))
    if (x > 0.0 && x < hi) cuts.push_back(x);
  cuts.push_back(hi);
  for (std::size_t k = cuts.size() - 1; k > 0; --k) {
    const double a = cuts[k - 1], b = cuts[k];
    const double pa = horner(c, a), pb = horner(c, b);
    if (std::abs(pb) <= tiny && k + 1 < cuts.size()) return b;  // double root at a critical point
    if (pa <= 0.0 && pb >= 0.0) return bisect(c, a, b);
    if (pa >= 0.0 && pb <= 0.0) {
      // Decreasing piece; bisect on -p.
      std::vector<double> neg(c);
      for (double& v : neg) v = -v;
      return bisect(neg, a, b);
    }
  }
  return 0.0;
}

PgfEvaluator::PgfEvaluator(PgfModel model, const DegreeDistribution& dist,
                           const TransmissionLaw& law, double f_v)
    : model_(model),
      f_v_(model == PgfModel::forward || model == PgfModel::backward2 ? 0.0 : f_v),
      base_(dist),
      single_{downshifted_size_biased(dist, EdgeKind::single)},
      triangle_{downshifted_size_biased(dist, EdgeKind::triangle)},
      tm_(derived_moments(law)),
      triplet_(backward_edge_triplet(law)) {
  check_coverage(f_v);
  const bool tri = triangle_.law.has_value();
  const bool sgl = single_.law.has_value();
  if (!tri && !sgl) throw DomainError("degree distribution has neither single nor triangle edges");
  if (model_ == PgfModel::backward2) {
    active_ = {sgl, tri, false};
  } else {
    active_ = {tri, tri, sgl};
  }
  if (model_ == PgfModel::forward || model_ == PgfModel::forward_vacc)
    nodes_ = expectation_functional(law, dist.max_total_degree() + 1);
}

// Accumulated as 1 - sum p (1 - ...); the all-ones vector maps to exactly 1.
double PgfEvaluator::forward_expectation(const DegreeDistribution& law, std::span<const double> z,
                                         bool twin_factor) const {
  const double u1 = 1.0 - z[0], u2 = 1.0 - z[1], u3 = 1.0 - z[2];
  const double g = model_ == PgfModel::forward ? 1.0 : 1.0 - f_v_;
  // pair = (1-f) z1 + f is the chance a triangle member is not an infected target
  const double pair = 1.0 - g * u1;
  double deficit = 0.0;
  for (const auto& node : nodes_) {
    const double t = node.t;
    const double a = 1.0 - t * g * u3;
    const double b = 1.0 - 2.0 * t * (1.0 - t) * g * u2 - t * t * g * u1 * (1.0 + pair);
    const double c = twin_factor ? 1.0 - t * g * u1 : 1.0;
    double inner = 0.0;
    for (const auto& atom : law.atoms())
      inner += atom.probability *
               (1.0 - ipow(a, atom.degree.singles) * ipow(b, atom.degree.triangles) * c);
    deficit += node.weight * inner;
  }
  return 1.0 - deficit;
}

double PgfEvaluator::backward_expectation(const DegreeDistribution& law,
                                          std::span<const double> z) const {
  const double et = tm_.e_t;
  double l, k;
  if (model_ == PgfModel::backward2) {
    const double u = 1.0 - z[1];
    l = 1.0 - et * (1.0 - z[0]);
    k = 1.0 - triplet_.p1 * u - triplet_.p2 * u * (2.0 - u);
  } else {
    const double z1 = z[0], z2 = z[1], g = 1.0 - f_v_;
    l = 1.0 - et * (1.0 - z[2]);
    k = 1.0 - 2.0 * et * tm_.e_t_1mt * g * (1.0 - z1 * z2) - 2.0 * et * tm_.e_1mt2 * (1.0 - z1) -
        et * et * (1.0 - z1 * z1);
  }
  double deficit = 0.0;
  for (const auto& atom : law.atoms())
    deficit +=
        atom.probability * (1.0 - ipow(l, atom.degree.singles) * ipow(k, atom.degree.triangles));
  return 1.0 - deficit;
}

double PgfEvaluator::component(std::size_t index, std::span<const double> z) const {
  if (index >= dimension() || z.size() != dimension())
    throw DomainError("PGF argument has the wrong dimension");
  if (!active_[index]) throw DomainError("PGF component of an absent type evaluated");
  const double g = 1.0 - f_v_;
  switch (model_) {
    case PgfModel::forward:
    case PgfModel::forward_vacc:
      if (index == 2) return forward_expectation(*single_.law, z, false);
      return forward_expectation(*triangle_.law, z, index == 1);
    case PgfModel::backward2:
      return backward_expectation(index == 0 ? *single_.law : *triangle_.law, z);
    case PgfModel::backward_vacc3:
      if (index == 2) return 1.0 - g * (1.0 - backward_expectation(*single_.law, z));
      if (index == 1) return backward_expectation(*triangle_.law, z);
      return 1.0 - g * (1.0 - backward_expectation(*triangle_.law, z));
  }
  return 1.0;
}

std::vector<double> PgfEvaluator::operator()(std::span<const double> z) const {
  std::vector<double> out(dimension());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = component(i, z);
  return out;
}

std::vector<double> PgfEvaluator::evaluate_active(std::span<const double> z) const {
  std::vector<double> out(dimension(), 1.0);
  for (std::size_t i = 0; i < out.size(); ++i)
    if (active_[i]) out[i] = component(i, z);
  return out;
}

double PgfEvaluator::ancestor(std::span<const double> z) const {
  if (z.size() != dimension()) throw DomainError("PGF argument has the wrong dimension");
  switch (model_) {
    case PgfModel::forward:
    case PgfModel::forward_vacc:
      return forward_expectation(base_, z, false);
    case PgfModel::backward2:
      return backward_expectation(base_, z);
    case PgfModel::backward_vacc3:
      return 1.0 - (1.0 - f_v_) * (1.0 - backward_expectation(base_, z));
  }
  return 1.0;
}

std::array<double, 3> forward_offspring_pgf(const DegreeDistribution& dist,
                                            const TransmissionLaw& law, double f_v,
                                            std::span<const double, 3> z) {
  const auto v = PgfEvaluator(PgfModel::forward_vacc, dist, law, f_v)(z);
  return {v[0], v[1], v[2]};
}

std::array<double, 3> forward_offspring_pgf_unvaccinated(const DegreeDistribution& dist,
                                                         const TransmissionLaw& law,
                                                         std::span<const double, 3> z) {
  const auto v = PgfEvaluator(PgfModel::forward, dist, law)(z);
  return {v[0], v[1], v[2]};
}

double ancestor_pgf(const DegreeDistribution& dist, const TransmissionLaw& law, double f_v,
                    PgfModel model, std::span<const double> z) {
  return PgfEvaluator(model, dist, law, f_v).ancestor(z);
}

BackwardTriplet backward_edge_triplet(const TransmissionLaw& law) {
  const auto tm = derived_moments(law);
  BackwardTriplet out;
  out.p0 = (1.0 - tm.e_t) * (1.0 - tm.e_t);
  out.p2 = 3.0 * tm.e_t * tm.e_t - 2.0 * tm.e_t * tm.e_t2;
  out.p1 = std::max(0.0, 1.0 - out.p0 - out.p2);
  return out;
}

std::array<double, 2> backward_offspring_pgf(const DegreeDistribution& dist,
                                             const TransmissionLaw& law,
                                             std::span<const double, 2> z) {
  const auto v = PgfEvaluator(PgfModel::backward2, dist, law)(z);
  return {v[0], v[1]};
}

std::array<double, 3> backward_offspring_pgf_vacc(const DegreeDistribution& dist,
                                                  const TransmissionLaw& law, double f_v,
                                                  std::span<const double, 3> z) {
  const auto v = PgfEvaluator(PgfModel::backward_vacc3, dist, law, f_v)(z);
  return {v[0], v[1], v[2]};
}

FixedPointResult minimal_fixed_point(const PgfEvaluator& pgf, const FixedPointOptions& opts) {
  const std::size_t dim = pgf.dimension();
  FixedPointResult res;
  res.q.assign(dim, 0.0);
  for (std::size_t i = 0; i < dim; ++i)
    if (!pgf.active(i)) res.q[i] = 1.0;
  for (res.iterations = 1; res.iterations <= opts.max_iterations; ++res.iterations) {
    auto next = pgf.evaluate_active(res.q);
    double step = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
      step = std::max(step, std::abs(next[i] - res.q[i]));
      if (next[i] < res.q[i] - 1e-14) res.monotone = false;
    }
    res.q = std::move(next);
    if (step < opts.step_tolerance) break;
  }
  res.iterations = std::min(res.iterations, opts.max_iterations);
  const auto check = pgf.evaluate_active(res.q);
  for (std::size_t i = 0; i < dim; ++i)
    res.residual = std::max(res.residual, std::abs(check[i] - res.q[i]));
  if (res.iterations >= opts.max_iterations && res.residual > opts.residual_tolerance)
    throw ConvergenceError("fixed-point iteration did not converge", res.residual);
  return res;
}

AnalysisReport analyze(const DegreeDistribution& dist, const TransmissionLaw& law, double f_v) {
  check_coverage(f_v);
  AnalysisReport rep;
  rep.f_v = f_v;
  rep.mean_matrix = forward_mean_matrix(dist, law, 0.0);
  rep.r0 = perron_root(rep.mean_matrix);
  rep.r_v = rep.r0;
  rep.vaccinated_perron_root = perron_root(forward_mean_matrix(dist, law, f_v));
  rep.critical_coverage = rep.r0 > 1.0 ? 1.0 - 1.0 / rep.r0 : 0.0;

  const auto validation = validate_distribution(dist);
  rep.regular = positively_regular(rep.mean_matrix);
  if (!validation.a2_holds)
    rep.warnings.emplace_back(
        "regularity: P(max(D,S) >= 2) > 0 and E(D S) > 0 fails; types reduced where absent");
  if (!rep.regular)
    rep.warnings.emplace_back("regularity: no power of the mean matrix is strictly positive");

  const PgfEvaluator forward(PgfModel::forward_vacc, dist, law, f_v);
  const PgfEvaluator backward(PgfModel::backward_vacc3, dist, law, f_v);
  rep.subcritical = rep.vaccinated_perron_root <= 1.0;
  if (rep.subcritical) {
    for (auto* fp : {&rep.forward, &rep.backward}) fp->q.assign(3, 1.0);
    rep.outbreak_probability = 0.0;
    rep.final_size = 0.0;
    return rep;
  }
  rep.forward = minimal_fixed_point(forward);
  rep.backward = minimal_fixed_point(backward);
  rep.outbreak_probability = std::clamp(1.0 - forward.ancestor(rep.forward.q), 0.0, 1.0);
  rep.final_size = std::clamp(1.0 - backward.ancestor(rep.backward.q), 0.0, 1.0);
  return rep;
}

}  // namespace cmcepi
