#pragma once

#include <compare>
#include <optional>
#include <span>
#include <vector>

namespace cmcepi {

/// Joint degree of a node: number of single half-edges and number of
/// triangle half-edge pairs (each pair is one triangle membership).
struct JointDegree {
  int singles = 0;
  int triangles = 0;

  int total_degree() const { return singles + 2 * triangles; }
  auto operator<=>(const JointDegree&) const = default;
};

struct DegreeAtom {
  JointDegree degree;
  double probability = 0.0;
};

enum class EdgeKind { single, triangle };

/// Finite-support joint pmf p(k_s, k_delta). Atoms are kept sorted by degree,
/// merged, and strictly positive.
class DegreeDistribution {
 public:
  /// Masses summing to within 1e-9 of one are renormalized; anything else,
  /// negative masses, or negative degrees throw ValidationError.
  explicit DegreeDistribution(std::vector<DegreeAtom> atoms);

  static DegreeDistribution degenerate(JointDegree d) { return DegreeDistribution({{d, 1.0}}); }

  std::span<const DegreeAtom> atoms() const { return atoms_; }
  std::size_t size() const { return atoms_.size(); }
  int max_total_degree() const;
  double probability_of(JointDegree d) const;

  template <class F>
  double expect(F&& f) const {
    double sum = 0.0;
    for (const auto& a : atoms_) sum += a.probability * f(a.degree);
    return sum;
  }

 private:
  struct Trusted {};
  DegreeDistribution(std::vector<DegreeAtom> atoms, Trusted);
  std::vector<DegreeAtom> atoms_;

  friend DegreeDistribution size_biased(const DegreeDistribution&, EdgeKind);
  friend DegreeDistribution downshift(const DegreeDistribution&, EdgeKind);
};

struct ValidationReport {
  bool a2_holds = false;  // P(max(D,S) >= 2) > 0 and E(D S) > 0
  bool has_single = false;
  bool has_triangle = false;
};

struct DegreeMoments {
  double mean_s = 0.0;
  double mean_delta = 0.0;
  double mean_s2 = 0.0;
  double mean_delta2 = 0.0;
  double mean_s_delta = 0.0;
};

/// Means of the downshifted size-biased laws. A member is empty when the
/// corresponding size-biasing has a zero normalizer.
struct DownshiftedMeans {
  std::optional<double> s_given_s;
  std::optional<double> delta_given_s;
  std::optional<double> s_given_delta;
  std::optional<double> delta_given_delta;
};

ValidationReport validate_distribution(const DegreeDistribution& dist);
DegreeMoments moments(const DegreeDistribution& dist);

/// Reweights atoms by k_s (single) or k_delta (triangle). Throws DomainError
/// if the normalizer is zero.
DegreeDistribution size_biased(const DegreeDistribution& dist, EdgeKind kind);

/// Removes the half-edge (or triangle membership) used to reach the node.
/// Every atom must have the matching count >= 1, otherwise DomainError.
DegreeDistribution downshift(const DegreeDistribution& dist, EdgeKind kind);

/// size_biased followed by downshift, or nullopt when the bias is undefined.
std::optional<DegreeDistribution> downshifted_size_biased(const DegreeDistribution& dist,
                                                          EdgeKind kind);

DownshiftedMeans downshifted_means(const DegreeDistribution& dist);

}  // namespace cmcepi
