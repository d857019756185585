// Copyright 2026 The Beamform Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "beamform/lcmv.hpp"

#include <algorithm>
#include <cmath>

#include "beamform/errors.hpp"
#include "beamform/log.hpp"

namespace beamform::lcmv {
namespace {

constexpr double kRankTol = 1e-10;  // singular values below kRankTol * sigma_max count as zero

void check_rank(const ConstraintSet& cs) {
  const int d = cs.d();
  const int two_m = static_cast<int>(cs.lambda.rows());
  if (d > two_m)
    throw ConstraintError("constraints: d = " + std::to_string(d) + " > 2M = " +
                          std::to_string(two_m) + ", feasible set is empty (" + cs.method_tag + ")");
  Eigen::ColPivHouseholderQR<CMat> qr(cs.lambda);
  qr.setThreshold(kRankTol);
  const int rank = static_cast<int>(qr.rank());
  if (rank < d) {
    std::string cols;
    const auto& perm = qr.colsPermutation().indices();
    for (int i = rank; i < d; ++i) {
      if (!cols.empty()) cols += ", ";
      cols += std::to_string(perm[i]);
    }
    throw ConstraintError("constraints: rank " + std::to_string(rank) + " < d = " +
                          std::to_string(d) + "; dependent columns: [" + cols + "] (" +
                          cs.method_tag + ")");
  }
}

}  // namespace

BinauralFilter passthrough_filter(int mics, RefPair refs) {
  BinauralFilter f;
  f.w = CVec::Zero(2 * mics);
  f.w[refs.left] = cplx(1.0, 0.0);
  f.w[mics + refs.right] = cplx(1.0, 0.0);
  f.refs = refs;
  return f;
}

BlockCpsd BlockCpsd::from_noise(const CMat& p) {
  if (p.rows() != p.cols() || p.rows() == 0) throw InvalidInputError("block cpsd: P must be square");
  const double herm = (p - p.adjoint()).cwiseAbs().maxCoeff();
  const double scale = p.cwiseAbs().maxCoeff();
  if (herm > 1e-10 * std::max(scale, 1e-300))
    throw InvalidInputError("block cpsd: P is not Hermitian");
  BlockCpsd out;
  const int m = static_cast<int>(p.rows());
  const double eps = kLoadingScale * p.real().trace() / static_cast<double>(m);
  out.p_ = 0.5 * (p + p.adjoint()) + eps * CMat::Identity(m, m);
  out.llt_.compute(out.p_);
  if (out.llt_.info() != Eigen::Success)
    throw InvalidInputError("block cpsd: P is not positive definite after loading");
  return out;
}

CMat BlockCpsd::lift() const {
  const int m = mics();
  CMat t = CMat::Zero(2 * m, 2 * m);
  t.topLeftCorner(m, m) = p_;
  t.bottomRightCorner(m, m) = p_;
  return t;
}

double BlockCpsd::quad(const CVec& w) const {
  const int m = mics();
  const auto wl = w.head(m);
  const auto wr = w.tail(m);
  const cplx v = wl.dot(p_ * wl) + wr.dot(p_ * wr);
  return v.real();
}

CMat BlockCpsd::solve(const CMat& b) const { return llt_.solve(b); }

namespace {

// One orthogonal projection onto the constraint manifold. Badly conditioned
// CPSDs (50 dB noise floors give cond(P) ~ 1e8) leave Cholesky-route
// residuals around 1e-8 that the ITF ratio then amplifies; the projection
// restores machine-level residuals while moving w by O(residual).
void project_onto_constraints(const ConstraintSet& cs, CVec& w) {
  const CVec resid = cs.lambda.adjoint() * w - cs.f;
  Eigen::LDLT<CMat> gram(CMat(cs.lambda.adjoint() * cs.lambda));
  if (gram.info() == Eigen::Success) w -= cs.lambda * gram.solve(resid);
}

}  // namespace

ConstraintSet target_constraints(const CVec& a, RefPair refs) {
  const int m = static_cast<int>(a.size());
  const cplx a_l = a[refs.left];
  const cplx a_r = a[refs.right];
  if (a_l == cplx(0.0, 0.0) || a_r == cplx(0.0, 0.0))
    throw ConstraintError("target constraints: zero reference ATF entry");
  ConstraintSet cs;
  cs.lambda = CMat::Zero(2 * m, 2);
  cs.lambda.col(0).head(m) = a;
  cs.lambda.col(1).tail(m) = a;
  cs.f = CVec(2);
  cs.f[0] = std::conj(a_l);
  cs.f[1] = std::conj(a_r);
  cs.d1 = 2;
  cs.method_tag = "target";
  return cs;
}

ConstraintSet blcmv_constraints(const CVec& a, const std::vector<CVec>& interferers,
                                double eta_left, double eta_right, RefPair refs) {
  if (eta_left < 0.0 || eta_left >= 1.0 || eta_right < 0.0 || eta_right >= 1.0)
    throw ParameterError("blcmv: eta must lie in [0, 1)");
  const int m = static_cast<int>(a.size());
  const int m_max = m - 2;
  int used = static_cast<int>(interferers.size());
  int truncated = 0;
  if (used > m_max) {
    truncated = used - std::max(m_max, 0);
    used = std::max(m_max, 0);
    log::warn("blcmv: " + std::to_string(truncated) +
              " interferer(s) beyond m_max = M - 2 dropped from the constraints");
  }
  ConstraintSet cs = target_constraints(a, refs);
  cs.lambda.conservativeResize(Eigen::NoChange, 2 + 2 * used);
  cs.f.conservativeResize(2 + 2 * used);
  for (int i = 0; i < used; ++i) {
    const CVec& b = interferers[static_cast<std::size_t>(i)];
    if (b.size() != m) throw InvalidInputError("blcmv: interferer ATF length mismatch");
    cs.lambda.col(2 + 2 * i).setZero();
    cs.lambda.col(2 + 2 * i).head(m) = b;
    cs.lambda.col(3 + 2 * i).setZero();
    cs.lambda.col(3 + 2 * i).tail(m) = b;
    cs.f[2 + 2 * i] = eta_left * std::conj(b[refs.left]);
    cs.f[3 + 2 * i] = eta_right * std::conj(b[refs.right]);
  }
  cs.method_tag = "blcmv";
  cs.truncated_interferers = truncated;
  return cs;
}

ConstraintSet jblcmv_constraints(const CVec& a, const std::vector<CVec>& interferers, RefPair refs) {
  const int m = static_cast<int>(a.size());
  const int m_max = 2 * m - 3;
  int used = static_cast<int>(interferers.size());
  int truncated = 0;
  if (used > m_max) {
    truncated = used - std::max(m_max, 0);
    used = std::max(m_max, 0);
    log::warn("jblcmv: " + std::to_string(truncated) +
              " interferer(s) beyond m_max = 2M - 3 dropped from the constraints");
  }
  ConstraintSet cs = target_constraints(a, refs);
  cs.lambda.conservativeResize(Eigen::NoChange, 2 + used);
  cs.f.conservativeResize(2 + used);
  for (int i = 0; i < used; ++i) {
    const CVec& b = interferers[static_cast<std::size_t>(i)];
    if (b.size() != m) throw InvalidInputError("jblcmv: interferer ATF length mismatch");
    cs.lambda.col(2 + i).head(m) = b * b[refs.right];
    cs.lambda.col(2 + i).tail(m) = -b * b[refs.left];
    cs.f[2 + i] = cplx(0.0, 0.0);
  }
  cs.method_tag = "jblcmv";
  cs.truncated_interferers = truncated;
  return cs;
}

BinauralFilter solve_gblcmv(const BlockCpsd& p, const ConstraintSet& cs, RefPair refs) {
  check_rank(cs);
  const int m = p.mics();
  const int two_m = 2 * m;
  if (cs.lambda.rows() != two_m)
    throw InvalidInputError("solve gblcmv: constraint rows do not match 2M");
  const int d = cs.d();

  BinauralFilter out;
  out.refs = refs;
  if (d == two_m) {
    out.w = cs.lambda.adjoint().partialPivLu().solve(cs.f);
    project_onto_constraints(cs, out.w);
    return out;
  }
  // w = Ptilde^-1 Lambda (Lambda^H Ptilde^-1 Lambda)^-1 f, block by block.
  CMat pinv_lambda(two_m, d);
  pinv_lambda.topRows(m) = p.solve(cs.lambda.topRows(m));
  pinv_lambda.bottomRows(m) = p.solve(cs.lambda.bottomRows(m));
  const CMat gram = cs.lambda.adjoint() * pinv_lambda;
  Eigen::LLT<CMat> gram_llt(0.5 * (gram + gram.adjoint()));
  CVec mu;
  if (gram_llt.info() == Eigen::Success) {
    mu = gram_llt.solve(cs.f);
  } else {
    mu = gram.partialPivLu().solve(cs.f);
  }
  out.w = pinv_lambda * mu;
  project_onto_constraints(cs, out.w);
  return out;
}

BinauralFilter bmvdr(const BlockCpsd& p, const CVec& a, RefPair refs) {
  const int m = p.mics();
  if (a.size() != m) throw InvalidInputError("bmvdr: ATF length mismatch");
  if (a.isZero(0.0)) throw ConstraintError("bmvdr: zero target ATF");
  const CVec pinv_a = p.solve(a);
  const cplx denom = a.dot(pinv_a);  // a^H P^-1 a, real positive
  BinauralFilter out;
  out.refs = refs;
  out.w = CVec(2 * m);
  out.w.head(m) = pinv_a * (std::conj(a[refs.left]) / denom);
  out.w.tail(m) = pinv_a * (std::conj(a[refs.right]) / denom);
  return out;
}

namespace {

struct EtaObjective {
  // noise power N(eta) = A + 2 Re(conj(eta) g) + |eta|^2 B
  double a0;
  cplx g;
  double b0;
  double signal;  // constant numerator under the target constraints

  double noise(cplx eta) const {
    return a0 + 2.0 * (std::conj(eta) * g).real() + std::norm(eta) * b0;
  }
  double snr(cplx eta) const { return signal / noise(eta); }
};

}  // namespace

OblcmvResult oblcmv(const BlockCpsd& p, const CVec& a, const CVec& b_k, RefPair refs) {
  const int m = p.mics();
  if (m < 3) throw ParameterError("oblcmv: needs M >= 3 for spare degrees of freedom");
  if (a.size() != m || b_k.size() != m) throw InvalidInputError("oblcmv: ATF length mismatch");

  // w(eta) = w_base + eta * w_dir from the affine dependence of f on eta.
  ConstraintSet cs = target_constraints(a, refs);
  cs.lambda.conservativeResize(Eigen::NoChange, 4);
  cs.f.conservativeResize(4);
  cs.lambda.col(2).setZero();
  cs.lambda.col(2).head(m) = b_k;
  cs.lambda.col(3).setZero();
  cs.lambda.col(3).tail(m) = b_k;
  cs.method_tag = "oblcmv";

  CVec f_base = cs.f;
  f_base[2] = f_base[3] = cplx(0.0, 0.0);
  CVec f_dir = CVec::Zero(4);
  f_dir[2] = std::conj(b_k[refs.left]);
  f_dir[3] = std::conj(b_k[refs.right]);

  check_rank(cs);
  CMat pinv_lambda(2 * m, 4);
  pinv_lambda.topRows(m) = p.solve(cs.lambda.topRows(m));
  pinv_lambda.bottomRows(m) = p.solve(cs.lambda.bottomRows(m));
  const CMat gram = cs.lambda.adjoint() * pinv_lambda;
  Eigen::PartialPivLU<CMat> gram_lu(gram);
  const CVec w_base = pinv_lambda * gram_lu.solve(f_base);
  const CVec w_dir = pinv_lambda * gram_lu.solve(f_dir);

  EtaObjective obj;
  obj.a0 = p.quad(w_base);
  obj.b0 = p.quad(w_dir);
  {
    const auto wl_b = w_base.head(m), wr_b = w_base.tail(m);
    const auto wl_d = w_dir.head(m), wr_d = w_dir.tail(m);
    obj.g = wl_d.dot(p.p() * wl_b) + wr_d.dot(p.p() * wr_b);  // w_dir^H Ptilde w_base
  }
  obj.signal = std::norm(a[refs.left]) + std::norm(a[refs.right]);  // unit target PSD

  // coarse grid on the disc |eta| <= 1
  cplx best(0.0, 0.0);
  double best_snr = obj.snr(best);
  constexpr int kGrid = 41;
  for (int iu = 0; iu < kGrid; ++iu) {
    for (int iv = 0; iv < kGrid; ++iv) {
      const double u = -1.0 + 2.0 * iu / (kGrid - 1);
      const double v = -1.0 + 2.0 * iv / (kGrid - 1);
      if (u * u + v * v > 1.0) continue;
      const cplx eta(u, v);
      const double s = obj.snr(eta);
      if (s > best_snr) {
        best_snr = s;
        best = eta;
      }
    }
  }
  // Nelder-Mead refinement in (Re, Im), projected onto the unit disc
  auto project = [](cplx eta) {
    const double r = std::abs(eta);
    return r <= 1.0 ? eta : eta / r;
  };
  auto eval = [&](cplx eta) { return -obj.snr(project(eta)); };
  std::array<cplx, 3> simplex = {best, best + cplx(0.05, 0.0), best + cplx(0.0, 0.05)};
  std::array<double, 3> value;
  for (int i = 0; i < 3; ++i) value[static_cast<std::size_t>(i)] = eval(simplex[static_cast<std::size_t>(i)]);
  for (int iter = 0; iter < 200; ++iter) {
    std::array<int, 3> order = {0, 1, 2};
    std::sort(order.begin(), order.end(), [&](int x, int y) {
      return value[static_cast<std::size_t>(x)] < value[static_cast<std::size_t>(y)];
    });
    const cplx xb = simplex[static_cast<std::size_t>(order[0])];
    const cplx xm = simplex[static_cast<std::size_t>(order[1])];
    const cplx xw = simplex[static_cast<std::size_t>(order[2])];
    if (std::abs(xb - xw) < 1e-12) break;
    const cplx centroid = 0.5 * (xb + xm);
    const cplx refl = centroid + (centroid - xw);
    const double f_refl = eval(refl);
    if (f_refl < value[static_cast<std::size_t>(order[0])]) {
      const cplx expand = centroid + 2.0 * (centroid - xw);
      const double f_exp = eval(expand);
      simplex[static_cast<std::size_t>(order[2])] = f_exp < f_refl ? expand : refl;
      value[static_cast<std::size_t>(order[2])] = std::min(f_exp, f_refl);
    } else if (f_refl < value[static_cast<std::size_t>(order[1])]) {
      simplex[static_cast<std::size_t>(order[2])] = refl;
      value[static_cast<std::size_t>(order[2])] = f_refl;
    } else {
      const cplx contract = centroid + 0.5 * (xw - centroid);
      const double f_con = eval(contract);
      if (f_con < value[static_cast<std::size_t>(order[2])]) {
        simplex[static_cast<std::size_t>(order[2])] = contract;
        value[static_cast<std::size_t>(order[2])] = f_con;
      } else {
        for (int i : {order[1], order[2]}) {
          simplex[static_cast<std::size_t>(i)] = xb + 0.5 * (simplex[static_cast<std::size_t>(i)] - xb);
          value[static_cast<std::size_t>(i)] = eval(simplex[static_cast<std::size_t>(i)]);
        }
      }
    }
  }
  for (int i = 0; i < 3; ++i) {
    const cplx eta = project(simplex[static_cast<std::size_t>(i)]);
    const double s = obj.snr(eta);
    if (s > best_snr) {
      best_snr = s;
      best = eta;
    }
  }

  OblcmvResult out;
  out.eta = best;
  out.snr = best_snr;
  out.filter.refs = refs;
  out.filter.w = w_base + best * w_dir;
  cs.f = f_base + best * f_dir;
  project_onto_constraints(cs, out.filter.w);
  return out;
}

double constraint_residual(const ConstraintSet& cs, const CVec& w) {
  return (cs.lambda.adjoint() * w - cs.f).norm();
}

}  // namespace beamform::lcmv
