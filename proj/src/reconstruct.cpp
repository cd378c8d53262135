#include "roughrec/reconstruct.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <random>

#include "roughrec/error.hpp"

namespace roughrec {

namespace {

void check_points(const VectorFieldSet& fields, std::span<const Vec> points) {
  if (points.empty()) throw Error(ErrorKind::InvalidParameter, "need at least one point");
  for (const Vec& p : points) {
    if (p.size() != fields.dim()) throw Error(ErrorKind::DimensionMismatch, "point has wrong dimension");
  }
}

void check_params(const VectorFieldSet& fields, const Vec& a, const Mat& b) {
  const int ell = fields.ell();
  if (a.size() != ell || b.rows() != ell || b.cols() != ell) {
    throw Error(ErrorKind::DimensionMismatch, "(A, B) shapes differ from field count");
  }
}

Vec stack(std::span<const Vec> points) {
  const auto d = points.front().size();
  Vec out(d * static_cast<Eigen::Index>(points.size()));
  for (std::size_t r = 0; r < points.size(); ++r) out.segment(r * d, d) = points[r];
  return out;
}

// Per-point data of the Taylor model: field values, brackets, and the
// second compositions V_iV_j.
struct TaylorData {
  Mat columns;                 // (c d) x m, the reconstruction matrix
  std::vector<Vec> second;     // index i*ell+j -> V_iV_j stacked over the points
  Vec base;
};

TaylorData taylor_data(const VectorFieldSet& fields, std::span<const Vec> points) {
  check_points(fields, points);
  const int ell = fields.ell();
  const int d = fields.dim();
  const int c = static_cast<int>(points.size());
  const int m = log_dim(ell);
  TaylorData data;
  data.columns = Mat::Zero(static_cast<Eigen::Index>(c) * d, m);
  data.second.assign(static_cast<std::size_t>(ell) * ell, Vec::Zero(static_cast<Eigen::Index>(c) * d));
  data.base = stack(points);
  for (int r = 0; r < c; ++r) {
    const Vec& y = points[r];
    std::vector<Vec> values(ell);
    std::vector<Mat> jacobians(ell);
    for (int i = 0; i < ell; ++i) {
      values[i] = fields.eval(i, y);
      jacobians[i] = fields.jac(i, y);
      data.columns.block(r * d, i, d, 1) = values[i];
    }
    for (int i = 0; i < ell; ++i)
      for (int j = 0; j < ell; ++j) data.second[i * ell + j].segment(r * d, d) = jacobians[j] * values[i];
    int col = ell;
    for (int j = 0; j < ell; ++j) {
      for (int k = j + 1; k < ell; ++k) {
        data.columns.block(r * d, col, d, 1) = jacobians[k] * values[j] - jacobians[j] * values[k];
        ++col;
      }
    }
  }
  if (!data.columns.allFinite()) {
    throw Error(ErrorKind::NonFinite, "field values or brackets are not finite at the points");
  }
  return data;
}

ReconstructionMatrix matrix_from_columns(Mat columns, int m, double tol_rel) {
  ReconstructionMatrix out;
  out.m = m;
  out.tol_rel = tol_rel;
  out.mat = std::move(columns);
  Eigen::JacobiSVD<Mat> svd(out.mat);
  out.singular_values = svd.singularValues();
  const double smax = out.singular_values.size() > 0 ? out.singular_values(0) : 0.0;
  out.rank = 0;
  if (smax > 0.0) {
    for (Eigen::Index i = 0; i < out.singular_values.size(); ++i)
      if (out.singular_values(i) > tol_rel * smax) ++out.rank;
  }
  return out;
}

Vec taylor_eval(const TaylorData& data, int ell, const Vec& p) {
  Vec out = data.base + data.columns * p;
  for (int i = 0; i < ell; ++i)
    for (int j = 0; j < ell; ++j) out += 0.5 * p(i) * p(j) * data.second[i * ell + j];
  return out;
}

Mat taylor_jacobian(const TaylorData& data, int ell, const Vec& p) {
  Mat jac = data.columns;
  for (int i = 0; i < ell; ++i)
    for (int j = 0; j < ell; ++j)
      jac.col(i) += 0.5 * p(j) * (data.second[i * ell + j] + data.second[j * ell + i]);
  return jac;
}

struct LeastSquaresOutcome {
  Vec params;
  int iterations = 0;
};

// Gauss-Newton with Levenberg damping on 1/2 |model(p) - target|^2.
LeastSquaresOutcome levenberg_marquardt(const std::function<Vec(const Vec&)>& model,
                                        const std::function<Mat(const Vec&)>& jacobian,
                                        const Vec& target, Vec p, int max_iter, double tol) {
  Vec r = model(p) - target;
  double cost = r.squaredNorm();
  double lambda = 0.0;
  for (int it = 1; it <= max_iter; ++it) {
    const Mat jac = jacobian(p);
    const Mat jtj = jac.transpose() * jac;
    const Vec g = jac.transpose() * r;
    const double scale = std::max(jtj.diagonal().maxCoeff(), 1e-300);
    for (;;) {
      Mat lhs = jtj;
      lhs.diagonal().array() += lambda * scale;
      const Vec step = -lhs.ldlt().solve(g);
      const Vec trial = p + step;
      const Vec r_trial = model(trial) - target;
      const double cost_trial = r_trial.squaredNorm();
      if (step.allFinite() && cost_trial <= cost) {
        p = trial;
        r = r_trial;
        cost = cost_trial;
        lambda = lambda > 0.0 ? lambda / 10.0 : 0.0;
        if (lambda < 1e-12) lambda = 0.0;
        if (step.norm() < tol) return {p, it};
        break;
      }
      lambda = lambda > 0.0 ? lambda * 10.0 : 1e-9;
      // No damping reduces the cost: p sits on the roundoff floor of a minimum.
      if (lambda > 1e12) return {p, it};
    }
  }
  throw Error(ErrorKind::NotConverged,
              "least squares did not converge in " + std::to_string(max_iter) + " iterations");
}

Vec pack(const Vec& a, const Mat& b) {
  Vec p(a.size() + area_dim(static_cast<int>(a.size())));
  p << a, area_coordinates(b);
  return p;
}

ReconstructionResult reconstruct_impl(const VectorFieldSet& fields, const ObservationSet& obs,
                                      const ReconstructionOptions& options,
                                      ReconstructionMethod method) {
  obs.validate(fields.dim());
  const int ell = fields.ell();
  const int m = log_dim(ell);
  const TaylorData data = taylor_data(fields, obs.base_points);
  const ReconstructionMatrix rm = matrix_from_columns(data.columns, m, options.tol_rel);
  if (!rm.full_rank()) {
    throw Error(ErrorKind::RankDeficient, "reconstruction matrix has rank " + std::to_string(rm.rank) +
                                              " < m = " + std::to_string(m));
  }
  const Vec target = stack(obs.observed);

  Vec p0 = Vec::Zero(m);
  p0.head(ell) = data.columns.leftCols(ell).completeOrthogonalDecomposition().solve(target - data.base);

  std::function<Vec(const Vec&)> model;
  std::function<Mat(const Vec&)> jacobian;
  if (method == ReconstructionMethod::Taylor) {
    model = [&](const Vec& p) { return taylor_eval(data, ell, p); };
    jacobian = [&](const Vec& p) { return taylor_jacobian(data, ell, p); };
  } else {
    model = [&](const Vec& p) {
      const RoughIncrement inc = RoughIncrement::from_coordinates(p, ell);
      return flow_map(fields, obs.base_points, inc.x(), inc.area(), options.n_sub);
    };
    jacobian = [&](const Vec& p) {
      Mat jac(target.size(), m);
      Vec q = p;
      for (int k = 0; k < m; ++k) {
        q(k) = p(k) + options.fd_step;
        const Vec fp = model(q);
        q(k) = p(k) - options.fd_step;
        const Vec fm = model(q);
        q(k) = p(k);
        jac.col(k) = (fp - fm) / (2.0 * options.fd_step);
      }
      return jac;
    };
  }

  const LeastSquaresOutcome fit = levenberg_marquardt(model, jacobian, target, p0, options.max_iter,
                                                      options.tol);
  const RoughIncrement est = RoughIncrement::from_coordinates(fit.params, ell);
  const Vec residual = model(fit.params) - target;

  ReconstructionResult out;
  out.a_hat = est.x();
  out.b_hat = est.area();
  out.residual = residual.norm();
  const int d = fields.dim();
  for (int r = 0; r < obs.count(); ++r)
    out.sup_residual = std::max(out.sup_residual, residual.segment(r * d, d).norm());
  out.iterations = fit.iterations;
  out.method = method;
  out.rank = rm.rank;
  out.sigma_min = rm.sigma_min();
  out.eps1 = out.sigma_min;
  double second_sum = 0.0;
  for (const Vec& s : data.second) second_sum += s.norm();
  out.eps2 = second_sum > 0.0 ? 1.0 / (2.0 * second_sum) : std::numeric_limits<double>::infinity();
  if (fit.params.norm() > out.eps2) out.warnings.emplace_back("TrustRegionExceeded");
  if (!std::isfinite(out.residual)) throw Error(ErrorKind::NonFinite, "residual is not finite");
  return out;
}

}  // namespace

double ReconstructionMatrix::sigma_min() const {
  return singular_values.size() > 0 ? singular_values(singular_values.size() - 1) : 0.0;
}

ReconstructionMatrix reconstruction_matrix(const VectorFieldSet& fields, std::span<const Vec> points,
                                           double tol_rel) {
  return matrix_from_columns(taylor_data(fields, points).columns, log_dim(fields.ell()), tol_rel);
}

Vec taylor_map(const VectorFieldSet& fields, std::span<const Vec> points, const Vec& a,
               const Mat& b) {
  check_params(fields, a, b);
  const TaylorData data = taylor_data(fields, points);
  return taylor_eval(data, fields.ell(), pack(a, RoughIncrement(a, b).area()));
}

Vec flow_map(const VectorFieldSet& fields, std::span<const Vec> points, const Vec& a, const Mat& b,
             int n_sub) {
  check_params(fields, a, b);
  check_points(fields, points);
  const RoughIncrement inc(a, b);
  std::vector<Vec> images;
  images.reserve(points.size());
  for (const Vec& y : points) images.push_back(logode_step(fields, y, inc, n_sub));
  return stack(images);
}

TrustRegion trust_region(const VectorFieldSet& fields, std::span<const Vec> points, double tol_rel) {
  const TaylorData data = taylor_data(fields, points);
  const int m = log_dim(fields.ell());
  const ReconstructionMatrix rm = matrix_from_columns(data.columns, m, tol_rel);
  if (!rm.full_rank()) {
    throw Error(ErrorKind::RankDeficient, "reconstruction matrix has rank " + std::to_string(rm.rank) +
                                              " < m = " + std::to_string(m));
  }
  TrustRegion out;
  out.eps1 = rm.sigma_min();
  double second_sum = 0.0;
  for (const Vec& s : data.second) second_sum += s.norm();
  out.eps2 = second_sum > 0.0 ? 1.0 / (2.0 * second_sum) : std::numeric_limits<double>::infinity();
  return out;
}

const char* to_string(ReconstructionMethod method) {
  return method == ReconstructionMethod::Taylor ? "taylor" : "flow";
}

ReconstructionResult local_reconstruct_taylor(const VectorFieldSet& fields,
                                              const ObservationSet& obs,
                                              const ReconstructionOptions& options) {
  return reconstruct_impl(fields, obs, options, ReconstructionMethod::Taylor);
}

ReconstructionResult local_reconstruct_flow(const VectorFieldSet& fields, const ObservationSet& obs,
                                            const ReconstructionOptions& options) {
  return reconstruct_impl(fields, obs, options, ReconstructionMethod::Flow);
}

ReconstructionResult local_reconstruct(const VectorFieldSet& fields, const ObservationSet& obs,
                                       ReconstructionMethod method,
                                       const ReconstructionOptions& options) {
  return reconstruct_impl(fields, obs, options, method);
}

double doss_sussmann_1d(const VectorFieldSet& field, double y, double observed,
                        const DossSussmannOptions& options) {
  if (field.ell() != 1 || field.dim() != 1) {
    throw Error(ErrorKind::DimensionMismatch, "doss_sussmann_1d needs one field on the line");
  }
  const Vec y_vec = Vec::Constant(1, y);
  if (field.eval(0, y_vec)(0) == 0.0) {
    throw Error(ErrorKind::DegenerateField, "V(y) = 0: the flow does not move y");
  }
  const Mat no_area = Mat::Zero(1, 1);
  // Residual of the flow image at time a; nullopt when the flow leaves the representable range.
  auto residual_at = [&](double a) -> std::optional<double> {
    try {
      const Vec image = logode_step(field, y_vec, RoughIncrement(Vec::Constant(1, a), no_area),
                                    options.n_sub);
      return image(0) - observed;
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::NonFinite) return std::nullopt;
      throw;
    }
  };
  double a = 0.0;
  double f = y - observed;
  for (int it = 0; it < options.max_iter; ++it) {
    const Vec image = Vec::Constant(1, observed + f);
    const double slope = field.eval(0, image)(0);  // d/da exp(aV)(y) = V(exp(aV)(y))
    if (slope == 0.0 || !std::isfinite(slope)) {
      throw Error(ErrorKind::OutOfNeighborhood, "flow reached a zero of the field");
    }
    double step = f / slope;
    if (std::abs(step) <= options.tol * std::max(1.0, std::abs(a))) return a - step;
    // Damped Newton: halve the step until the residual decreases.
    bool accepted = false;
    for (int halving = 0; halving < 60 && !accepted; ++halving, step *= 0.5) {
      if (!std::isfinite(a - step) || std::abs(a - step) > options.max_abs) continue;
      const std::optional<double> trial = residual_at(a - step);
      if (trial && std::abs(*trial) < std::abs(f)) {
        a -= step;
        f = *trial;
        accepted = true;
      }
    }
    if (!accepted) {
      if (std::abs(f) <= options.tol * std::max(1.0, std::abs(observed))) return a;
      throw Error(ErrorKind::OutOfNeighborhood, "observation is outside the flow image of y");
    }
    if (std::abs(a) > options.max_abs) {
      throw Error(ErrorKind::OutOfNeighborhood, "observation is outside the flow image of y");
    }
  }
  throw Error(ErrorKind::NotConverged, "Doss-Sussmann Newton iteration did not converge");
}

GridRoughPath stitch(std::span<const ReconstructionResult> locals, std::vector<double> times,
                     double alpha) {
  if (locals.empty() || times.size() != locals.size() + 1) {
    throw Error(ErrorKind::InvalidGrid, "stitch needs one local estimate per consecutive interval");
  }
  const auto ell = locals.front().a_hat.size();
  Mat values = Mat::Zero(static_cast<Eigen::Index>(times.size()), ell);
  std::vector<Mat> areas;
  areas.reserve(locals.size());
  for (std::size_t i = 0; i < locals.size(); ++i) {
    if (locals[i].a_hat.size() != ell) {
      throw Error(ErrorKind::DimensionMismatch, "local estimates differ in dimension");
    }
    values.row(i + 1) = values.row(i) + locals[i].a_hat.transpose();
    areas.push_back(locals[i].b_hat);
  }
  return GridRoughPath(std::move(times), std::move(values), std::move(areas), alpha);
}

PointSearchResult search_points(const VectorFieldSet& fields, const PointSampler& sampler, int c_max,
                                int n_trials) {
  const int d = fields.dim();
  if (c_max < 1 || n_trials < 1) throw Error(ErrorKind::InvalidParameter, "need c_max, n_trials >= 1");
  if (sampler.lower.size() != d || sampler.upper.size() != d) {
    throw Error(ErrorKind::DimensionMismatch, "sampling box has wrong dimension");
  }
  std::mt19937_64 rng(sampler.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int m = log_dim(fields.ell());

  PointSearchResult out;
  for (int c = 1; c <= c_max; ++c) {
    bool have_best = false;
    Vec best_point;
    ReconstructionMatrix best;
    for (int trial = 0; trial < n_trials; ++trial) {
      Vec candidate(d);
      for (int k = 0; k < d; ++k) {
        candidate(k) = sampler.lower(k) + (sampler.upper(k) - sampler.lower(k)) * unit(rng);
      }
      ++out.candidates_evaluated;
      std::vector<Vec> pts = out.points;
      pts.push_back(candidate);
      ReconstructionMatrix rm;
      try {
        rm = reconstruction_matrix(fields, pts);
      } catch (const Error&) {
        ++out.candidates_rejected;
        continue;
      }
      const bool better = !have_best || rm.rank > best.rank ||
                          (rm.rank == best.rank && rm.sigma_min() > best.sigma_min());
      if (better) {
        best = std::move(rm);
        best_point = candidate;
        have_best = true;
      }
    }
    if (!have_best) break;
    out.points.push_back(best_point);
    out.matrix = std::move(best);
    if (out.matrix.rank == m) break;
  }
  out.success = out.matrix.m == m && out.matrix.rank == m;
  return out;
}

}  // namespace roughrec
