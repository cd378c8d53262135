#pragma once

// Rough differential equation integrators: the second-order Euler (Davie)
// step and the log-ODE step, plus solution-flow observations.

#include <span>
#include <vector>

#include "roughrec/roughpath.hpp"
#include "roughrec/vectorfields.hpp"

namespace roughrec {

enum class StepMethod { Euler2, LogOde };

struct Trajectory {
  std::vector<double> times;
  Mat states;  // (n+1) x d
};

/// x + V_i(x) x^i + V_jV_k(x) XX^{jk} with XX = 1/2 x (x) x + a.
Vec euler2_step(const VectorFieldSet& fields, const Vec& x, const RoughIncrement& inc);

/// Time-1 map of dz = x^i V_i(z) + a^{jk} [V_j, V_k](z), j<k, by classical
/// RK4 with n_sub uniform substeps.
Vec logode_step(const VectorFieldSet& fields, const Vec& x, const RoughIncrement& inc, int n_sub);

Trajectory solve(const VectorFieldSet& fields, const Vec& x0, const GridRoughPath& path,
                 StepMethod method, int n_sub = 8);

/// Base points, interval and observed flow images phi_ts(x_r).
struct ObservationSet {
  std::vector<Vec> base_points;
  double s = 0.0;
  double t = 0.0;
  std::vector<Vec> observed;

  int count() const { return static_cast<int>(base_points.size()); }
  /// Throws InvalidParameter / DimensionMismatch / NonFinite on broken invariants.
  void validate(int dim) const;
};

inline constexpr int kDefaultInternalSteps = 64;

/// Observes the flow over [t_i, t_j] from every base point. Each grid step
/// is read as the rough path with constant rates (x, a) / (t_{k+1} - t_k);
/// its flow is the log-ODE time-1 map, integrated with n_internal RK4
/// substeps (equivalently, n_internal Chen-split pieces).
ObservationSet observe_flow(const VectorFieldSet& fields, std::span<const Vec> points,
                            const GridRoughPath& path, int i, int j,
                            int n_internal = kDefaultInternalSteps);

}  // namespace roughrec
