#pragma once

// Recovery of (X_ts, A_ts) from observed solution-flow increments.
//
// Parameters are packed as the m = ell(ell+1)/2 coordinates
// (A^1..A^ell, B^{12}, B^{13}, ..., B^{ell-1,ell}); the reconstruction
// matrix columns follow the same order.

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "roughrec/rde.hpp"
#include "roughrec/roughpath.hpp"
#include "roughrec/vectorfields.hpp"

namespace roughrec {

inline constexpr double kDefaultRankTol = 1e-10;

struct ReconstructionMatrix {
  int m = 0;
  Mat mat;                // (c d) x m
  Vec singular_values;    // nonincreasing, length min(c d, m)
  int rank = 0;
  double tol_rel = kDefaultRankTol;

  bool full_rank() const { return rank == m; }
  /// Smallest of the min(cd, m) singular values.
  double sigma_min() const;
};

ReconstructionMatrix reconstruction_matrix(const VectorFieldSet& fields, std::span<const Vec> points,
                                           double tol_rel = kDefaultRankTol);

/// Stacked y + A^i V_i + B^{j<k} [V_j,V_k] + 1/2 A^i A^j V_iV_j over the points.
Vec taylor_map(const VectorFieldSet& fields, std::span<const Vec> points, const Vec& a,
               const Mat& b);

/// Stacked exp(A^i V_i + B^{j<k} [V_j,V_k])(y), each by logode_step.
Vec flow_map(const VectorFieldSet& fields, std::span<const Vec> points, const Vec& a, const Mat& b,
             int n_sub);

struct TrustRegion {
  double eps1 = 0.0;  // 1 / |pinv(D Phi(0))| = sigma_min of the reconstruction matrix
  double eps2 = 0.0;  // 1 / (2 sum_{i,j} |V_iV_j|); +inf when all compositions vanish
};

/// Throws RankDeficient unless the reconstruction matrix has rank m.
TrustRegion trust_region(const VectorFieldSet& fields, std::span<const Vec> points,
                         double tol_rel = kDefaultRankTol);

enum class ReconstructionMethod { Taylor, Flow };

const char* to_string(ReconstructionMethod method);

struct ReconstructionOptions {
  int max_iter = 50;
  double tol = 1e-12;
  int n_sub = 32;           // RK4 substeps of the flow model
  double fd_step = 1e-6;    // Jacobian step of the flow model
  double tol_rel = kDefaultRankTol;
};

struct ReconstructionResult {
  Vec a_hat;
  Mat b_hat;
  double residual = 0.0;      // root of the final sum of squares
  double sup_residual = 0.0;  // max over points of |observed_r - model_r|
  int iterations = 0;
  double eps1 = 0.0;
  double eps2 = 0.0;
  int rank = 0;
  double sigma_min = 0.0;
  ReconstructionMethod method = ReconstructionMethod::Taylor;
  std::vector<std::string> warnings;

  RoughIncrement increment() const { return RoughIncrement(a_hat, b_hat); }
  /// Full second-level estimate 1/2 a (x) a + b.
  Mat second_level() const { return increment().second_level(); }
};

ReconstructionResult local_reconstruct_taylor(const VectorFieldSet& fields,
                                              const ObservationSet& obs,
                                              const ReconstructionOptions& options = {});

ReconstructionResult local_reconstruct_flow(const VectorFieldSet& fields, const ObservationSet& obs,
                                            const ReconstructionOptions& options = {});

ReconstructionResult local_reconstruct(const VectorFieldSet& fields, const ObservationSet& obs,
                                       ReconstructionMethod method,
                                       const ReconstructionOptions& options = {});

struct DossSussmannOptions {
  int n_sub = 256;
  double tol = 1e-12;
  int max_iter = 100;
  double max_abs = 1e3;  // bracket on |X_ts| for the Newton search
};

/// Exact increment for a single field on the line: solves exp(a V)(y) = observed.
double doss_sussmann_1d(const VectorFieldSet& field, double y, double observed,
                        const DossSussmannOptions& options = {});

/// Path whose steps are the local estimates; values start at 0.
GridRoughPath stitch(std::span<const ReconstructionResult> locals, std::vector<double> times,
                     double alpha = 0.5);

struct PointSampler {
  Vec lower;
  Vec upper;
  std::uint64_t seed = 0;
};

struct PointSearchResult {
  std::vector<Vec> points;
  ReconstructionMatrix matrix;
  int candidates_evaluated = 0;
  int candidates_rejected = 0;  // domain violations or non-finite fields
  bool success = false;
};

/// Greedy random search: grows the point set one point at a time, keeping the
/// candidate that maximizes (rank, smallest singular value), until rank m or
/// c_max points.
PointSearchResult search_points(const VectorFieldSet& fields, const PointSampler& sampler, int c_max,
                                int n_trials);

}  // namespace roughrec
