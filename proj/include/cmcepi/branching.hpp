#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cmcepi/degree_model.hpp"
#include "cmcepi/transmission.hpp"

namespace cmcepi {

/// Approximating branching processes.
///
/// Forward process (early epidemic), types:
///   1  infected along a triangle edge, twin already (or simultaneously) infected
///      [with vaccination: twin known not to be susceptible]
///   2  infected along a triangle edge, otherwise
///   3  infected along a single edge
/// Backward process (susceptibility set), types:
///   1  reached along a single edge          2  reached along a triangle edge
/// Vaccinated backward process, types:
///   1  triangle, vaccination status unknown 2  triangle, known unvaccinated
///   3  single, vaccination status unknown
///
/// Vectors are always indexed by type - 1. Types whose size-biased degree law
/// does not exist (E(S) = 0 or E(D) = 0) are inactive: they never occur, their
/// PGF component throws DomainError, and their extinction probability is 1.
enum class PgfModel { forward, backward2, forward_vacc, backward_vacc3 };

/// Mean offspring matrix over the active types; entry (i, j) is the expected
/// number of type-j children of a type-i parent.
struct MeanMatrix {
  std::vector<int> types;       // active type labels, ascending
  std::vector<double> entries;  // row-major, types.size() squared

  std::size_t size() const { return types.size(); }
  double operator()(std::size_t row, std::size_t col) const { return entries[row * size() + col]; }
  /// 3x3 embedding with zero rows/columns for inactive types.
  std::array<std::array<double, 3>, 3> full() const;
};

struct BackwardTriplet {
  double p0;  // no other triangle member in the susceptibility set via the triangle
  double p1;
  double p2;  // both other members
};

struct FixedPointResult {
  std::vector<double> q;
  long iterations = 0;
  double residual = 0.0;  // sup-norm of q - PGF(q)
  bool monotone = true;   // every iterate was >= its predecessor (to 1e-14)
};

struct FixedPointOptions {
  double step_tolerance = 1e-13;
  double residual_tolerance = 1e-10;
  long max_iterations = 1'000'000;
};

/// Offspring PGF of one of the four processes, with its ancestor PGF.
class PgfEvaluator {
 public:
  /// f_v is ignored by the two unvaccinated models. Throws DomainError when
  /// E(S) = E(D) = 0, ValidationError when f_v is outside [0, 1).
  PgfEvaluator(PgfModel model, const DegreeDistribution& dist, const TransmissionLaw& law,
               double f_v = 0.0);

  PgfModel model() const { return model_; }
  std::size_t dimension() const { return model_ == PgfModel::backward2 ? 2 : 3; }
  bool active(std::size_t index) const { return active_[index]; }

  /// Component `index` (type index + 1) at z in the unit cube.
  double component(std::size_t index, std::span<const double> z) const;
  /// All components; DomainError if any type is inactive.
  std::vector<double> operator()(std::span<const double> z) const;
  /// Active components only; inactive entries of the result are set to 1.
  std::vector<double> evaluate_active(std::span<const double> z) const;
  /// PGF of the ancestor's offspring (un-biased degree law).
  double ancestor(std::span<const double> z) const;

 private:
  struct Branch {
    std::optional<DegreeDistribution> law;  // downshifted size-biased
  };
  // E over (S, D) ~ law and T of A(T)^S B(T)^D C(T) for the forward kernels.
  double forward_expectation(const DegreeDistribution& law, std::span<const double> z,
                             bool twin_factor) const;
  double backward_expectation(const DegreeDistribution& law, std::span<const double> z) const;

  PgfModel model_;
  double f_v_;
  DegreeDistribution base_;
  Branch single_;
  Branch triangle_;
  std::array<bool, 3> active_{};
  std::vector<QuadratureNode> nodes_;
  TMoments tm_;
  BackwardTriplet triplet_;
};

/// Forward mean matrix, scaled by (1 - f_v). Inactive types are dropped.
MeanMatrix forward_mean_matrix(const DegreeDistribution& dist, const TransmissionLaw& law,
                               double f_v);

/// Largest real eigenvalue of a nonnegative matrix of size at most 3, from
/// its characteristic polynomial.
double perron_root(const MeanMatrix& m);

/// Vaccinated forward PGF (reduces to the plain forward PGF at f_v = 0).
std::array<double, 3> forward_offspring_pgf(const DegreeDistribution& dist,
                                            const TransmissionLaw& law, double f_v,
                                            std::span<const double, 3> z);
/// Forward PGF written without vaccination terms.
std::array<double, 3> forward_offspring_pgf_unvaccinated(const DegreeDistribution& dist,
                                                         const TransmissionLaw& law,
                                                         std::span<const double, 3> z);

double ancestor_pgf(const DegreeDistribution& dist, const TransmissionLaw& law, double f_v,
                    PgfModel model, std::span<const double> z);

BackwardTriplet backward_edge_triplet(const TransmissionLaw& law);

std::array<double, 2> backward_offspring_pgf(const DegreeDistribution& dist,
                                             const TransmissionLaw& law,
                                             std::span<const double, 2> z);

std::array<double, 3> backward_offspring_pgf_vacc(const DegreeDistribution& dist,
                                                  const TransmissionLaw& law, double f_v,
                                                  std::span<const double, 3> z);

/// Iterates q <- PGF(q) from the zero vector over the active types. Throws
/// ConvergenceError if the cap is reached with residual above tolerance.
FixedPointResult minimal_fixed_point(const PgfEvaluator& pgf, const FixedPointOptions& opts = {});

struct AnalysisReport {
  double f_v = 0.0;
  double r0 = 0.0;
  double r_v = 0.0;  // perfect-vaccine reproduction number, equal to r0
  double vaccinated_perron_root = 0.0;
  double critical_coverage = 0.0;
  double outbreak_probability = 0.0;
  double final_size = 0.0;
  bool subcritical = true;
  FixedPointResult forward;   // extinction probabilities by forward type
  FixedPointResult backward;  // vaccinated backward process (3 types)
  MeanMatrix mean_matrix;     // unvaccinated
  bool regular = false;       // positively regular mean matrix expected
  std::vector<std::string> warnings;
};

AnalysisReport analyze(const DegreeDistribution& dist, const TransmissionLaw& law, double f_v);

}  // namespace cmcepi
