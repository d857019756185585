// Copyright 2026 The Beamform Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "beamform/socp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>

#include "beamform/errors.hpp"

namespace beamform::socp {
namespace {

constexpr double kFoldEps = 1e-14;  // bounds at/below this act as equalities
constexpr double kFractionToBoundary = 0.99;
constexpr double kInf = std::numeric_limits<double>::infinity();

struct Cone {
  int offset;
  int dim;
  // Nesterov-Todd scaling state: W = eta * [w0, w1^T; w1, I + w1 w1^T/(1+w0)]
  double eta = 1.0;
  RVec wbar;
};

double cone_residual(const RVec& u, const Cone& c) {
  return u[c.offset] * u[c.offset] - u.segment(c.offset + 1, c.dim - 1).squaredNorm();
}

double smallest_positive_root(double a2, double a1, double a0) {
  // roots of a2 x^2 + a1 x + a0 with a0 > 0; returns +inf when none positive
  if (std::abs(a2) < 1e-300) {
    if (a1 >= 0.0) return kInf;
    return -a0 / a1;
  }
  const double disc = a1 * a1 - 4.0 * a2 * a0;
  if (disc < 0.0) return kInf;
  const double sq = std::sqrt(disc);
  const double q = -0.5 * (a1 + (a1 >= 0.0 ? sq : -sq));
  double best = kInf;
  if (std::abs(a2) > 0.0) {
    const double r = q / a2;
    if (r > 0.0) best = std::min(best, r);
  }
  if (std::abs(q) > 0.0) {
    const double r = a0 / q;
    if (r > 0.0) best = std::min(best, r);
  }
  return best;
}

// max alpha such that u + alpha du stays in the cone (u strictly interior)
double step_to_boundary(const RVec& u, const RVec& du, const Cone& c) {
  const double u0 = u[c.offset];
  const double d0 = du[c.offset];
  const auto u1 = u.segment(c.offset + 1, c.dim - 1);
  const auto d1 = du.segment(c.offset + 1, c.dim - 1);
  const double a2 = d0 * d0 - d1.squaredNorm();
  const double a1 = 2.0 * (u0 * d0 - u1.dot(d1));
  const double a0 = u0 * u0 - u1.squaredNorm();
  double alpha = smallest_positive_root(a2, a1, a0);
  if (d0 < 0.0) alpha = std::min(alpha, -u0 / d0);
  return alpha;
}

void apply_w(const Cone& c, const RVec& in, RVec& out) {
  const double w0 = c.wbar[0];
  const auto w1 = c.wbar.segment(1, c.dim - 1);
  const double x0 = in[c.offset];
  const auto x1 = in.segment(c.offset + 1, c.dim - 1);
  const double dot = w1.dot(x1);
  out[c.offset] = c.eta * (w0 * x0 + dot);
  out.segment(c.offset + 1, c.dim - 1) = c.eta * (x0 * w1 + x1 + (dot / (1.0 + w0)) * w1);
}

void apply_w_inv(const Cone& c, const RVec& in, RVec& out) {
  const double w0 = c.wbar[0];
  const auto w1 = c.wbar.segment(1, c.dim - 1);
  const double x0 = in[c.offset];
  const auto x1 = in.segment(c.offset + 1, c.dim - 1);
  const double dot = w1.dot(x1);
  out[c.offset] = (w0 * x0 - dot) / c.eta;
  out.segment(c.offset + 1, c.dim - 1) = (-x0 * w1 + x1 + (dot / (1.0 + w0)) * w1) / c.eta;
}

void jordan_mul(const Cone& c, const RVec& u, const RVec& v, RVec& out) {
  const auto u1 = u.segment(c.offset + 1, c.dim - 1);
  const auto v1 = v.segment(c.offset + 1, c.dim - 1);
  const double u0 = u[c.offset];
  const double v0 = v[c.offset];
  out[c.offset] = u0 * v0 + u1.dot(v1);
  out.segment(c.offset + 1, c.dim - 1) = u0 * v1 + v0 * u1;
}

// lambda \ d: solve Arw(lambda) x = d for strictly interior lambda
void jordan_div(const Cone& c, const RVec& lambda, const RVec& d, RVec& out) {
  const double l0 = lambda[c.offset];
  const auto l1 = lambda.segment(c.offset + 1, c.dim - 1);
  const double det = l0 * l0 - l1.squaredNorm();
  const double d0 = d[c.offset];
  const auto d1 = d.segment(c.offset + 1, c.dim - 1);
  const double dot = l1.dot(d1);
  out[c.offset] = (l0 * d0 - dot) / det;
  out.segment(c.offset + 1, c.dim - 1) = d1 / l0 + ((dot / l0 - d0) / det) * l1;
}

}  // namespace

RMat real_lift(const CMat& p) {
  const int m = static_cast<int>(p.rows());
  RMat out(2 * m, 2 * m);
  out.topLeftCorner(m, m) = p.real();
  out.topRightCorner(m, m) = -p.imag();
  out.bottomLeftCorner(m, m) = p.imag();
  out.bottomRightCorner(m, m) = p.real();
  return out;
}

RVec lift_vector(const CVec& w) {
  const int m = static_cast<int>(w.size()) / 2;
  RVec out(4 * m);
  out.segment(0, m) = w.head(m).real();
  out.segment(m, m) = w.head(m).imag();
  out.segment(2 * m, m) = w.tail(m).real();
  out.segment(3 * m, m) = w.tail(m).imag();
  return out;
}

CVec unlift_vector(const RVec& wv) {
  const int m = static_cast<int>(wv.size()) / 4;
  CVec out(2 * m);
  for (int j = 0; j < m; ++j) {
    out[j] = cplx(wv[j], wv[m + j]);
    out[m + j] = cplx(wv[2 * m + j], wv[3 * m + j]);
  }
  return out;
}

SocpProblem lift_subproblem(const lcmv::BlockCpsd& p, const CVec& a,
                            const std::vector<CVec>& interferers, RefPair refs,
                            const RVec& atf_bounds) {
  const int m = p.mics();
  const int n_int = static_cast<int>(interferers.size());
  if (a.size() != m) throw InvalidInputError("socp lift: target ATF length mismatch");
  if (atf_bounds.size() != n_int)
    throw InvalidInputError("socp lift: one bound per interferer required");

  const double a_scale = a.cwiseAbs().maxCoeff();
  const cplx a_l = a[refs.left];
  const cplx a_r = a[refs.right];
  if (std::abs(a_l) < 1e-12 * a_scale || std::abs(a_r) < 1e-12 * a_scale)
    throw DegenerateAtfError("socp lift: target reference ATF entry is degenerate");

  SocpProblem prob;
  prob.mics = m;
  prob.refs = refs;

  // scaling P leaves the argmin unchanged and keeps the cone data near unit
  prob.p_scale = p.p().real().trace() / static_cast<double>(m);
  const RMat p_lift = real_lift(p.p() / prob.p_scale);
  Eigen::LLT<RMat> llt(p_lift);
  if (llt.info() != Eigen::Success)
    throw InvalidInputError("socp lift: lifted CPSD is not positive definite");
  const RMat r_block = RMat(llt.matrixU());
  prob.r_factor = RMat::Zero(4 * m, 4 * m);
  prob.r_factor.topLeftCorner(2 * m, 2 * m) = r_block;
  prob.r_factor.bottomRightCorner(2 * m, 2 * m) = r_block;

  // equality block: Re and Im of ra_L^H wL = 1 and ra_R^H wR = 1
  const CVec ra_l = a / a_l;
  const CVec ra_r = a / a_r;
  prob.phi1 = RMat::Zero(4 * m, 4);
  prob.phi1.col(0).segment(0, m) = ra_l.real();
  prob.phi1.col(0).segment(m, m) = ra_l.imag();
  prob.phi1.col(1).segment(2 * m, m) = ra_r.real();
  prob.phi1.col(1).segment(3 * m, m) = ra_r.imag();
  prob.phi1.col(2).segment(0, m) = -ra_l.imag();
  prob.phi1.col(2).segment(m, m) = ra_l.real();
  prob.phi1.col(3).segment(2 * m, m) = -ra_r.imag();
  prob.phi1.col(3).segment(3 * m, m) = ra_r.real();
  prob.q1 = RVec::Zero(4);
  prob.q1[0] = 1.0;
  prob.q1[1] = 1.0;

  prob.cone_g.reserve(static_cast<std::size_t>(n_int));
  prob.cone_bound = RVec(n_int);
  prob.zeta = RVec(n_int);
  for (int i = 0; i < n_int; ++i) {
    const CVec& b = interferers[static_cast<std::size_t>(i)];
    if (b.size() != m) throw InvalidInputError("socp lift: interferer ATF length mismatch");
    const double b_scale = b.cwiseAbs().maxCoeff();
    const cplx b_l = b[refs.left];
    const cplx b_r = b[refs.right];
    if (std::abs(b_l) < 1e-12 * b_scale || std::abs(b_r) < 1e-12 * b_scale)
      throw DegenerateAtfError("socp lift: interferer " + std::to_string(i) +
                               " reference ATF entry is degenerate");
    const CVec rb_l = b / b_l;
    const CVec rb_r = b / b_r;
    RMat g = RMat::Zero(2, 4 * m);
    // row 0 = Re(rb_L^H wL - rb_R^H wR), row 1 = Im(...)
    g.row(0).segment(0, m) = rb_l.real().transpose();
    g.row(0).segment(m, m) = rb_l.imag().transpose();
    g.row(0).segment(2 * m, m) = -rb_r.real().transpose();
    g.row(0).segment(3 * m, m) = -rb_r.imag().transpose();
    g.row(1).segment(0, m) = -rb_l.imag().transpose();
    g.row(1).segment(m, m) = rb_l.real().transpose();
    g.row(1).segment(2 * m, m) = rb_r.imag().transpose();
    g.row(1).segment(3 * m, m) = -rb_r.real().transpose();
    prob.cone_g.push_back(std::move(g));
    // ATF-form bound -> relative-ATF scale
    prob.cone_bound[i] = atf_bounds[i] / (std::abs(b_l) * std::abs(b_r));
    prob.zeta[i] = std::abs(std::conj(a_l / a_r) * std::conj(b_r / b_l) - 1.0);
  }
  return prob;
}

SocpSolution solve_socp(const SocpProblem& prob, const SocpSettings& settings) {
  const int m = prob.mics;
  const int nw = 4 * m;
  SocpSolution sol;

  // ---- presolve: target equalities plus every zero-bound cone ----
  const int n_cones_in = static_cast<int>(prob.cone_g.size());
  const double bound_scale =
      n_cones_in > 0 ? std::max(1.0, prob.cone_bound.maxCoeff()) : 1.0;
  std::vector<int> live;
  int n_eq = 4;
  for (int i = 0; i < n_cones_in; ++i) {
    if (prob.cone_bound[i] <= kFoldEps * bound_scale)
      n_eq += 2;
    else
      live.push_back(i);
  }
  RMat eq(n_eq, nw);
  RVec rhs = RVec::Zero(n_eq);
  eq.topRows(4) = prob.phi1.transpose();
  rhs.head(4) = prob.q1;
  {
    int row = 4;
    for (int i = 0; i < n_cones_in; ++i) {
      if (prob.cone_bound[i] <= kFoldEps * bound_scale) {
        eq.middleRows(row, 2) = prob.cone_g[static_cast<std::size_t>(i)];
        row += 2;
      }
    }
  }

  Eigen::JacobiSVD<RMat> svd(eq, Eigen::ComputeFullV | Eigen::ComputeThinU);
  const double sv_max = svd.singularValues().size() > 0 ? svd.singularValues()[0] : 0.0;
  int rank = 0;
  for (int i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()[i] > 1e-12 * std::max(sv_max, 1e-300)) ++rank;
  RVec w0 = RVec::Zero(nw);
  {
    const RVec uty = svd.matrixU().transpose() * rhs;
    for (int i = 0; i < rank; ++i) w0 += (uty[i] / svd.singularValues()[i]) * svd.matrixV().col(i);
  }
  if ((eq * w0 - rhs).norm() > 1e-8 * (1.0 + rhs.norm())) {
    sol.status = SocpStatus::kInfeasible;  // inconsistent equalities
    return sol;
  }
  const RMat nullspace = svd.matrixV().rightCols(nw - rank);
  const int n_xi = static_cast<int>(nullspace.cols());

  auto finalize = [&](const RVec& w_lift) {
    sol.w_lift = w_lift;
    sol.w = unlift_vector(w_lift);
    sol.noise_power = prob.p_scale * (prob.r_factor * w_lift).squaredNorm();
    sol.t_star = std::sqrt(std::max(sol.noise_power, 0.0));
  };

  const int n_live = static_cast<int>(live.size());
  if (n_xi == 0) {
    for (int idx : live) {
      const double lhs = (prob.cone_g[static_cast<std::size_t>(idx)] * w0).norm();
      if (lhs > prob.cone_bound[idx] + settings.feas_tolerance * bound_scale) {
        sol.status = SocpStatus::kInfeasible;
        return sol;
      }
    }
    finalize(w0);
    sol.status = SocpStatus::kOptimal;
    sol.duality_gap = 0.0;
    return sol;
  }

  // ---- conic form over y = [xi; t]:  s = h - G y,  s in product of SOCs ----
  const int ny = n_xi + 1;
  const int t_col = n_xi;
  std::vector<Cone> cones;
  cones.push_back({0, 1 + nw});
  int total = 1 + nw;
  for (int i = 0; i < n_live; ++i) {
    cones.push_back({total, 3});
    total += 3;
  }
  RMat g_mat = RMat::Zero(total, ny);
  RVec h = RVec::Zero(total);
  g_mat(0, t_col) = -1.0;
  h.segment(1, nw) = prob.r_factor * w0;
  g_mat.block(1, 0, nw, n_xi) = -prob.r_factor * nullspace;
  for (int i = 0; i < n_live; ++i) {
    const int off = cones[static_cast<std::size_t>(i) + 1].offset;
    const RMat& gc = prob.cone_g[static_cast<std::size_t>(live[static_cast<std::size_t>(i)])];
    h[off] = prob.cone_bound[live[static_cast<std::size_t>(i)]];
    h.segment(off + 1, 2) = gc * w0;
    g_mat.block(off + 1, 0, 2, n_xi) = -gc * nullspace;
  }
  RVec c_vec = RVec::Zero(ny);
  c_vec[t_col] = 1.0;

  const int n_cones = static_cast<int>(cones.size());
  const double h_norm = std::max(1.0, h.norm());

  // ---- starting point: dual z = e is exactly feasible for this family ----
  RVec y = RVec::Zero(ny);
  y[t_col] = 2.0 * h.segment(1, nw).norm() + 1.0;
  RVec s = h - g_mat * y;
  for (const Cone& c : cones) {
    const double vnorm = s.segment(c.offset + 1, c.dim - 1).norm();
    const double floor0 = 1.1 * vnorm + 0.1 * std::max(1.0, vnorm);
    if (s[c.offset] < floor0) s[c.offset] = floor0;
  }
  RVec z = RVec::Zero(total);
  for (const Cone& c : cones) z[c.offset] = 1.0;

  RVec lambda(total), lam_sq(total), corr(total), ds_target(total);
  RVec tmp(total), tmp2(total), winv_g_col(total);
  RVec dz_aff(total), ds_aff(total), dz_c(total), ds_c(total);
  RMat winv_g(total, ny);
  RVec dy_aff(ny), dy_c(ny);

  double pinf0 = -1.0;
  int diverge = 0;
  int stalls = 0;

  auto cone_apply_w = [&](const RVec& in, RVec& out) {
    for (const Cone& c : cones) apply_w(c, in, out);
  };
  auto cone_apply_w_inv = [&](const RVec& in, RVec& out) {
    for (const Cone& c : cones) apply_w_inv(c, in, out);
  };

  for (int iter = 0; iter < settings.max_iterations; ++iter) {
    sol.iterations = iter;
    const RVec r_dual = g_mat.transpose() * z + c_vec;
    const RVec r_prim = g_mat * y + s - h;
    const double gap = s.dot(z);
    const double pres = r_prim.norm() / h_norm;
    const double dres = r_dual.norm() / std::max(1.0, c_vec.norm());
    const double relgap = gap / std::max(1.0, std::abs(c_vec.dot(y)));
    sol.duality_gap = gap;
    sol.primal_residual = pres;
    sol.dual_residual = dres;
    static const bool trace = std::getenv("BF_SOCP_TRACE") != nullptr;
    if (trace)
      std::fprintf(stderr, "it %d gap %.3e pres %.3e dres %.3e\n", iter, gap, pres, dres);

    if (pres <= settings.feas_tolerance && dres <= settings.feas_tolerance &&
        (gap <= settings.tolerance || relgap <= settings.tolerance)) {
      sol.status = SocpStatus::kOptimal;
      break;
    }
    const double z_norm = z.norm();
    if (z_norm > 1e-8 && (g_mat.transpose() * z).norm() <= 1e-9 * z_norm &&
        h.dot(z) < -1e-9 * z_norm) {
      sol.status = SocpStatus::kInfeasible;  // Farkas certificate
      break;
    }
    if (pinf0 < 0.0) pinf0 = std::max(pres, 1e-16);
    if (pres > 1e8 * pinf0) {
      if (++diverge >= 10) {
        sol.status = SocpStatus::kInfeasible;
        break;
      }
    } else {
      diverge = 0;
    }

    // Nesterov-Todd scalings
    bool ok = true;
    for (Cone& c : cones) {
      const double sres = cone_residual(s, c);
      const double zres = cone_residual(z, c);
      if (!(sres > 0.0) || !(zres > 0.0) || s[c.offset] <= 0.0 || z[c.offset] <= 0.0) {
        ok = false;
        break;
      }
      const RVec sbar = s.segment(c.offset, c.dim) / std::sqrt(sres);
      const RVec zbar = z.segment(c.offset, c.dim) / std::sqrt(zres);
      const double gamma = std::sqrt(0.5 * (1.0 + sbar.dot(zbar)));
      c.wbar = RVec(c.dim);
      c.wbar[0] = (sbar[0] + zbar[0]) / (2.0 * gamma);
      c.wbar.segment(1, c.dim - 1) =
          (sbar.segment(1, c.dim - 1) - zbar.segment(1, c.dim - 1)) / (2.0 * gamma);
      c.eta = std::pow(sres / zres, 0.25);
    }
    if (!ok) {
      sol.status = SocpStatus::kMaxIterations;
      break;
    }
    cone_apply_w(z, lambda);  // lambda = W z = W^{-1} s

    // reduced system matrix H = (W^{-1}G)^T (W^{-1}G)
    for (int j = 0; j < ny; ++j) {
      tmp = g_mat.col(j);
      cone_apply_w_inv(tmp, winv_g_col);
      winv_g.col(j) = winv_g_col;
    }
    RMat h_mat = winv_g.transpose() * winv_g;
    Eigen::LLT<RMat> h_llt(h_mat);
    if (h_llt.info() != Eigen::Success) {
      h_mat += 1e-12 * std::max(1.0, h_mat.trace() / ny) * RMat::Identity(ny, ny);
      h_llt.compute(h_mat);
      if (h_llt.info() != Eigen::Success) {
        sol.status = SocpStatus::kMaxIterations;
        break;
      }
    }
    auto solve_reduced = [&](const RVec& rhs) {
      RVec dy = h_llt.solve(rhs);
      dy += h_llt.solve((rhs - h_mat * dy).eval());  // one refinement round
      return dy;
    };

    RVec w2v(total);
    auto solve_direction = [&](const RVec& ds_in, RVec& dy, RVec& dz_out, RVec& ds_out) {
      for (const Cone& c : cones) jordan_div(c, lambda, ds_in, tmp);  // tmp = lambda \ ds
      cone_apply_w(tmp, tmp2);                                        // tmp2 = W(lambda \ ds)
      tmp = r_prim + tmp2;
      cone_apply_w_inv(tmp, corr);
      cone_apply_w_inv(corr, w2v);  // w2v = W^{-2}(r_prim + W(lambda \ ds))
      dy = solve_reduced((-r_dual - g_mat.transpose() * w2v).eval());
      tmp = g_mat * dy + r_prim + tmp2;
      cone_apply_w_inv(tmp, corr);
      cone_apply_w_inv(corr, dz_out);  // dz = W^{-2}(G dy + r_prim + W(lambda \ ds))
      ds_out = -r_prim - g_mat * dy;
    };

    // predictor
    for (const Cone& c : cones) jordan_mul(c, lambda, lambda, lam_sq);
    ds_target = -lam_sq;
    solve_direction(ds_target, dy_aff, dz_aff, ds_aff);
    double alpha_aff = 1.0;
    for (const Cone& c : cones) {
      alpha_aff = std::min(alpha_aff, step_to_boundary(s, ds_aff, c));
      alpha_aff = std::min(alpha_aff, step_to_boundary(z, dz_aff, c));
    }
    const double mu = gap / n_cones;
    const double mu_aff =
        (s + alpha_aff * ds_aff).dot(z + alpha_aff * dz_aff) / static_cast<double>(n_cones);
    double sigma = std::pow(std::max(0.0, mu_aff / mu), 3.0);
    // do not overshoot the gap target: late iterations land inside the
    // tolerance window instead of crashing through it, which keeps the
    // ill-conditioned final solves away from the dual residual
    const double sigma_floor = std::min(1.0, 0.5 * settings.tolerance / std::max(gap, 1e-300));
    sigma = std::clamp(std::max(sigma, sigma_floor), 0.0, 1.0);

    // corrector
    RVec winv_dsa(total), w_dza(total);
    cone_apply_w_inv(ds_aff, winv_dsa);
    cone_apply_w(dz_aff, w_dza);
    for (const Cone& c : cones) jordan_mul(c, winv_dsa, w_dza, corr);
    ds_target = -lam_sq - corr;
    for (const Cone& c : cones) ds_target[c.offset] += sigma * mu;
    solve_direction(ds_target, dy_c, dz_c, ds_c);

    double alpha_max = kInf;
    for (const Cone& c : cones) {
      alpha_max = std::min(alpha_max, step_to_boundary(s, ds_c, c));
      alpha_max = std::min(alpha_max, step_to_boundary(z, dz_c, c));
    }
    double alpha = std::min(1.0, kFractionToBoundary * alpha_max);

    // accepted steps must reduce the duality gap (line-search contract)
    bool accepted = false;
    for (int bt = 0; bt < 16; ++bt) {
      const double new_gap = (s + alpha * ds_c).dot(z + alpha * dz_c);
      if (new_gap < gap) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    y += alpha * dy_c;
    s += alpha * ds_c;
    z += alpha * dz_c;
    if (accepted) {
      stalls = 0;
      sol.gap_history.push_back(s.dot(z));
    } else if (++stalls >= 8) {
      sol.status = SocpStatus::kMaxIterations;
      break;
    }
  }

  // recover the filter from the final iterate
  const RVec w_lift = w0 + nullspace * y.head(n_xi);
  finalize(w_lift);
  sol.duality_gap = s.dot(z);
  double comp = 0.0;  // per-cone complementary slackness <s, z>
  for (const Cone& c : cones)
    comp = std::max(comp, std::abs(s.segment(c.offset, c.dim).dot(z.segment(c.offset, c.dim))));
  sol.comp_residual = comp;
  if (sol.status != SocpStatus::kOptimal && sol.status != SocpStatus::kInfeasible)
    sol.status = SocpStatus::kMaxIterations;
  return sol;
}

}  // namespace beamform::socp
