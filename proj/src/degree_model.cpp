#include "cmcepi/degree_model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cmcepi/errors.hpp"

namespace cmcepi {

namespace {

constexpr double kMassTolerance = 1e-9;

// Sorts by degree, merges duplicates and drops zero-mass atoms.
std::vector<DegreeAtom> canonicalize(std::vector<DegreeAtom> atoms) {
  std::sort(atoms.begin(), atoms.end(),
            [](const DegreeAtom& a, const DegreeAtom& b) { return a.degree < b.degree; });
  std::vector<DegreeAtom> out;
  out.reserve(atoms.size());
  for (const auto& a : atoms) {
    if (!out.empty() && out.back().degree == a.degree) {
      out.back().probability += a.probability;
    } else {
      out.push_back(a);
    }
  }
  std::erase_if(out, [](const DegreeAtom& a) { return a.probability <= 0.0; });
  return out;
}

}  // namespace

DegreeDistribution::DegreeDistribution(std::vector<DegreeAtom> atoms) {
  if (atoms.empty()) throw ValidationError("degree distribution has no atoms");
  double total = 0.0;
  for (const auto& a : atoms) {
    if (a.degree.singles < 0 || a.degree.triangles < 0)
      throw ValidationError("degree distribution has a negative degree");
    if (!std::isfinite(a.probability) || a.probability < 0.0)
      throw ValidationError("degree distribution has a negative or non-finite mass");
    total += a.probability;
  }
  if (std::abs(total - 1.0) > kMassTolerance)
    throw ValidationError("degree distribution masses sum to " + std::to_string(total) +
                          ", expected 1");
  for (auto& a : atoms) a.probability /= total;
  atoms_ = canonicalize(std::move(atoms));
}

DegreeDistribution::DegreeDistribution(std::vector<DegreeAtom> atoms, Trusted)
    : atoms_(canonicalize(std::move(atoms))) {}

int DegreeDistribution::max_total_degree() const {
  int m = 0;
  for (const auto& a : atoms_) m = std::max(m, a.degree.total_degree());
  return m;
}

double DegreeDistribution::probability_of(JointDegree d) const {
  auto it = std::lower_bound(atoms_.begin(), atoms_.end(), d,
                             [](const DegreeAtom& a, JointDegree key) { return a.degree < key; });
  return (it != atoms_.end() && it->degree == d) ? it->probability : 0.0;
}

ValidationReport validate_distribution(const DegreeDistribution& dist) {
  const auto m = moments(dist);
  const double p_big = dist.expect([](JointDegree d) {
    return std::max(d.singles, d.triangles) >= 2 ? 1.0 : 0.0;
  });
  return {.a2_holds = p_big > 0.0 && m.mean_s_delta > 0.0,
          .has_single = m.mean_s > 0.0,
          .has_triangle = m.mean_delta > 0.0};
}

DegreeMoments moments(const DegreeDistribution& dist) {
  DegreeMoments m;
  for (const auto& a : dist.atoms()) {
    const double s = a.degree.singles;
    const double t = a.degree.triangles;
    const double p = a.probability;
    m.mean_s += p * s;
    m.mean_delta += p * t;
    m.mean_s2 += p * s * s;
    m.mean_delta2 += p * t * t;
    m.mean_s_delta += p * s * t;
  }
  return m;
}

DegreeDistribution size_biased(const DegreeDistribution& dist, EdgeKind kind) {
  auto weight = [kind](JointDegree d) {
    return static_cast<double>(kind == EdgeKind::single ? d.singles : d.triangles);
  };
  const double norm = dist.expect(weight);
  if (!(norm > 0.0))
    throw DomainError(kind == EdgeKind::single ? "size-biasing by single degree with E(S) = 0"
                                               : "size-biasing by triangle degree with E(D) = 0");
  std::vector<DegreeAtom> out;
  out.reserve(dist.size());
  for (const auto& a : dist.atoms()) {
    const double w = weight(a.degree);
    if (w > 0.0) out.push_back({a.degree, w * a.probability / norm});
  }
  return DegreeDistribution(std::move(out), DegreeDistribution::Trusted{});
}

DegreeDistribution downshift(const DegreeDistribution& dist, EdgeKind kind) {
  std::vector<DegreeAtom> out;
  out.reserve(dist.size());
  for (const auto& a : dist.atoms()) {
    JointDegree d = a.degree;
    int& count = kind == EdgeKind::single ? d.singles : d.triangles;
    if (count < 1) throw DomainError("downshift applied to an atom without the matching half-edge");
    --count;
    out.push_back({d, a.probability});
  }
  return DegreeDistribution(std::move(out), DegreeDistribution::Trusted{});
}

std::optional<DegreeDistribution> downshifted_size_biased(const DegreeDistribution& dist,
                                                          EdgeKind kind) {
  const auto m = moments(dist);
  const double norm = kind == EdgeKind::single ? m.mean_s : m.mean_delta;
  if (!(norm > 0.0)) return std::nullopt;
  return downshift(size_biased(dist, kind), kind);
}

DownshiftedMeans downshifted_means(const DegreeDistribution& dist) {
  const auto m = moments(dist);
  DownshiftedMeans out;
  if (m.mean_s > 0.0) {
    out.s_given_s = m.mean_s2 / m.mean_s - 1.0;
    out.delta_given_s = m.mean_s_delta / m.mean_s;
  }
  if (m.mean_delta > 0.0) {
    out.s_given_delta = m.mean_s_delta / m.mean_delta;
    out.delta_given_delta = m.mean_delta2 / m.mean_delta - 1.0;
  }
  return out;
}

}  // namespace cmcepi
