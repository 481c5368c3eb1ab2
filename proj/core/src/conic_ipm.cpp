// Copyright 2026 The safebiop Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "safebiop/conic.hpp"

namespace safebiop::conic {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Layout {
  int l = 0;
  std::vector<int> q_off, q_dim;
  std::vector<int> s_off, s_n;
  int m = 0;

  explicit Layout(const ConeDims& d) : l(d.l) {
    int at = l;
    for (int q : d.q) {
      q_off.push_back(at);
      q_dim.push_back(q);
      at += q;
    }
    for (int s : d.s) {
      s_off.push_back(at);
      s_n.push_back(s);
      at += s * (s + 1) / 2;
    }
    m = at;
  }

  static int svec_len(int n) { return n * (n + 1) / 2; }
};

/// Identity element of the product cone.
Vector identity_element(const Layout& L) {
  Vector e = Vector::Zero(L.m);
  e.head(L.l).setOnes();
  for (int k : L.q_off) e(k) = 1.0;
  for (std::size_t k = 0; k < L.s_off.size(); ++k) {
    int at = L.s_off[k];
    const int n = L.s_n[k];
    for (int j = 0; j < n; ++j) {
      e(at) = 1.0;
      at += n - j;
    }
  }
  return e;
}

/// Smallest "eigenvalue" of u in each cone, minimized over cones (+inf with no cones).
double min_cone_eig(const Layout& L, const Vector& u) {
  double t = kInf;
  if (L.l > 0) t = std::min(t, u.head(L.l).minCoeff());
  for (std::size_t k = 0; k < L.q_off.size(); ++k) {
    const auto seg = u.segment(L.q_off[k], L.q_dim[k]);
    t = std::min(t, seg(0) - seg.tail(L.q_dim[k] - 1).norm());
  }
  for (std::size_t k = 0; k < L.s_off.size(); ++k) {
    const Matrix S = smat(u.segment(L.s_off[k], Layout::svec_len(L.s_n[k])), L.s_n[k]);
    Eigen::SelfAdjointEigenSolver<Matrix> es(S, Eigen::EigenvaluesOnly);
    t = std::min(t, es.eigenvalues()(0));
  }
  return t;
}

/// Strict interior test used to safeguard the step length.
bool interior(const Layout& L, const Vector& u) {
  if (L.l > 0 && u.head(L.l).minCoeff() <= 0.0) return false;
  for (std::size_t k = 0; k < L.q_off.size(); ++k) {
    const auto seg = u.segment(L.q_off[k], L.q_dim[k]);
    const double r = seg.tail(L.q_dim[k] - 1).norm();
    if (!(seg(0) > r) || (seg(0) - r) * (seg(0) + r) <= 0.0) return false;
  }
  for (std::size_t k = 0; k < L.s_off.size(); ++k) {
    const Matrix S = smat(u.segment(L.s_off[k], Layout::svec_len(L.s_n[k])), L.s_n[k]);
    Eigen::LLT<Matrix> llt(S);
    if (llt.info() != Eigen::Success) return false;
  }
  return true;
}

/// Jordan product u o v.
Vector jordan_product(const Layout& L, const Vector& u, const Vector& v) {
  Vector out(L.m);
  out.head(L.l) = u.head(L.l).cwiseProduct(v.head(L.l));
  for (std::size_t k = 0; k < L.q_off.size(); ++k) {
    const int o = L.q_off[k], q = L.q_dim[k];
    const auto a = u.segment(o, q), b = v.segment(o, q);
    out(o) = a.dot(b);
    out.segment(o + 1, q - 1) = a(0) * b.tail(q - 1) + b(0) * a.tail(q - 1);
  }
  for (std::size_t k = 0; k < L.s_off.size(); ++k) {
    const int o = L.s_off[k], n = L.s_n[k], len = Layout::svec_len(n);
    const Matrix U = smat(u.segment(o, len), n), V = smat(v.segment(o, len), n);
    out.segment(o, len) = svec(0.5 * (U * V + V * U));
  }
  return out;
}

/**
 * Nesterov-Todd scaling W with W z = W^{-T} s = lambda.
 */
class NtScaling {
 public:
  explicit NtScaling(const Layout& L) : L_(L) {}

  /// Returns false when s or z is not strictly interior.
  bool compute(const Vector& s, const Vector& z) {
    lambda_.resize(L_.m);
    if (L_.l > 0) {
      const auto sl = s.head(L_.l), zl = z.head(L_.l);
      if (sl.minCoeff() <= 0.0 || zl.minCoeff() <= 0.0) return false;
      lp_d_ = sl.cwiseQuotient(zl).cwiseSqrt();
      lambda_.head(L_.l) = sl.cwiseProduct(zl).cwiseSqrt();
    }
    soc_.assign(L_.q_off.size(), Soc{});
    for (std::size_t k = 0; k < L_.q_off.size(); ++k) {
      const int o = L_.q_off[k], q = L_.q_dim[k];
      const Vector sk = s.segment(o, q), zk = z.segment(o, q);
      const double sr = sk.tail(q - 1).norm(), zr = zk.tail(q - 1).norm();
      const double sn2 = (sk(0) - sr) * (sk(0) + sr);
      const double zn2 = (zk(0) - zr) * (zk(0) + zr);
      if (sk(0) <= 0.0 || zk(0) <= 0.0 || sn2 <= 0.0 || zn2 <= 0.0) return false;
      const double sn = std::sqrt(sn2), zn = std::sqrt(zn2);
      const Vector sb = sk / sn, zb = zk / zn;
      const double g = std::sqrt(0.5 * (1.0 + sb.dot(zb)));
      Vector w(q);
      w(0) = (sb(0) + zb(0)) / (2.0 * g);
      w.tail(q - 1) = (sb.tail(q - 1) - zb.tail(q - 1)) / (2.0 * g);
      soc_[k].eta = std::sqrt(sn / zn);
      soc_[k].w = w;
      // Closed form of W z, free of the cancellation in applying W when w0 is large.
      Vector lk(q);
      lk(0) = g;
      lk.tail(q - 1) = ((g + zb(0)) * sb.tail(q - 1) + (g + sb(0)) * zb.tail(q - 1)) / (sb(0) + zb(0) + 2.0 * g);
      lambda_.segment(o, q) = std::sqrt(sn * zn) * lk;
    }
    psd_.assign(L_.s_off.size(), Psd{});
    for (std::size_t k = 0; k < L_.s_off.size(); ++k) {
      const int o = L_.s_off[k], n = L_.s_n[k], len = Layout::svec_len(n);
      const Matrix S = smat(s.segment(o, len), n), Z = smat(z.segment(o, len), n);
      Eigen::LLT<Matrix> cs(S), cz(Z);
      if (cs.info() != Eigen::Success || cz.info() != Eigen::Success) return false;
      const Matrix Ls = cs.matrixL(), Lz = cz.matrixL();
      Eigen::JacobiSVD<Matrix> svd(Lz.transpose() * Ls, Eigen::ComputeFullU | Eigen::ComputeFullV);
      const Vector lam = svd.singularValues();
      if (lam.minCoeff() <= 0.0) return false;
      const Vector rs = lam.cwiseSqrt().cwiseInverse();
      psd_[k].R = Ls * svd.matrixV() * rs.asDiagonal();
      psd_[k].Rinv = rs.asDiagonal() * svd.matrixU().transpose() * Lz.transpose();
      psd_[k].lam = lam;
      lambda_.segment(o, len) = svec(lam.asDiagonal().toDenseMatrix());
    }
    return true;
  }

  const Vector& lambda() const { return lambda_; }

  enum class Op { W, WT, Winv, WinvT };

  Vector apply(const Vector& v, Op op) const {
    Vector out(L_.m);
    if (L_.l > 0) {
      const bool inv = op == Op::Winv || op == Op::WinvT;
      if (inv) {
        out.head(L_.l) = v.head(L_.l).cwiseQuotient(lp_d_);
      } else {
        out.head(L_.l) = v.head(L_.l).cwiseProduct(lp_d_);
      }
    }
    for (std::size_t k = 0; k < L_.q_off.size(); ++k) {
      const int o = L_.q_off[k], q = L_.q_dim[k];
      out.segment(o, q) = apply_soc(k, v.segment(o, q), op == Op::Winv || op == Op::WinvT);
    }
    for (std::size_t k = 0; k < L_.s_off.size(); ++k) {
      const int o = L_.s_off[k], n = L_.s_n[k], len = Layout::svec_len(n);
      out.segment(o, len) = apply_psd(k, v.segment(o, len), op);
    }
    return out;
  }

  /// Column-wise W^{-T} on a dense block of rows belonging to second-order cone k.
  Matrix soc_winvt_block(std::size_t k, const Matrix& B) const {
    Matrix out(B.rows(), B.cols());
    for (Eigen::Index j = 0; j < B.cols(); ++j) out.col(j) = apply_soc(k, B.col(j), true);
    return out;
  }

  Matrix psd_winvt_block(std::size_t k, const Matrix& B) const {
    Matrix out(B.rows(), B.cols());
    for (Eigen::Index j = 0; j < B.cols(); ++j) out.col(j) = apply_psd(k, B.col(j), Op::WinvT);
    return out;
  }

  Vector lp_winv2() const { return lp_d_.cwiseInverse().cwiseAbs2(); }

  /// lambda \ v: the inverse of u -> lambda o u.
  Vector lambda_divide(const Vector& v) const {
    Vector out(L_.m);
    if (L_.l > 0) out.head(L_.l) = v.head(L_.l).cwiseQuotient(lambda_.head(L_.l));
    for (std::size_t k = 0; k < L_.q_off.size(); ++k) {
      const int o = L_.q_off[k], q = L_.q_dim[k];
      const Vector lk = lambda_.segment(o, q), vk = v.segment(o, q);
      const double l0 = lk(0);
      const double det = l0 * l0 - lk.tail(q - 1).squaredNorm();
      const double u0 = (l0 * vk(0) - lk.tail(q - 1).dot(vk.tail(q - 1))) / det;
      out(o) = u0;
      out.segment(o + 1, q - 1) = (vk.tail(q - 1) - u0 * lk.tail(q - 1)) / l0;
    }
    for (std::size_t k = 0; k < L_.s_off.size(); ++k) {
      const int o = L_.s_off[k], n = L_.s_n[k], len = Layout::svec_len(n);
      Matrix V = smat(v.segment(o, len), n);
      const Vector& lam = psd_[k].lam;
      for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) V(i, j) *= 2.0 / (lam(i) + lam(j));
      }
      out.segment(o, len) = svec(V);
    }
    return out;
  }

  /// Largest step a with lambda + a d in the cone (may be +inf).
  double max_step(const Vector& d) const {
    double a = kInf;
    for (int i = 0; i < L_.l; ++i) {
      if (d(i) < 0.0) a = std::min(a, -lambda_(i) / d(i));
    }
    for (std::size_t k = 0; k < L_.q_off.size(); ++k) {
      const int o = L_.q_off[k], q = L_.q_dim[k];
      const Vector lk = lambda_.segment(o, q), dk = d.segment(o, q);
      const double ln = std::sqrt(std::max(lk(0) * lk(0) - lk.tail(q - 1).squaredNorm(), 1e-300));
      const Vector lb = lk / ln;
      const double lbd = lb(0) * dk(0) - lb.tail(q - 1).dot(dk.tail(q - 1));
      const double fac = (lbd + dk(0) / ln) / (lb(0) + 1.0);
      const double rho0 = lbd / ln;
      const Vector rho1 = dk.tail(q - 1) / ln - fac * lb.tail(q - 1);
      const double smin = rho1.norm() - rho0;
      if (smin > 0.0) a = std::min(a, 1.0 / smin);
    }
    for (std::size_t k = 0; k < L_.s_off.size(); ++k) {
      const int o = L_.s_off[k], n = L_.s_n[k], len = Layout::svec_len(n);
      const Vector is = psd_[k].lam.cwiseSqrt().cwiseInverse();
      const Matrix D = is.asDiagonal() * smat(d.segment(o, len), n) * is.asDiagonal();
      Eigen::SelfAdjointEigenSolver<Matrix> es(D, Eigen::EigenvaluesOnly);
      const double emin = es.eigenvalues()(0);
      if (emin < 0.0) a = std::min(a, -1.0 / emin);
    }
    return a;
  }

 private:
  struct Soc {
    double eta = 1.0;
    Vector w;
  };
  struct Psd {
    Matrix R, Rinv;
    Vector lam;
  };

  /// W = eta [[w0, w1'], [w1, I + w1 w1'/(1 + w0)]], symmetric; the inverse flips the sign of w1 and uses 1/eta.
  Vector apply_soc(std::size_t k, const Eigen::Ref<const Vector>& v, bool inverse) const {
    const Soc& sc = soc_[k];
    const Eigen::Index q = v.size();
    const double w0 = sc.w(0);
    const auto w1 = sc.w.tail(q - 1);
    const double sgn = inverse ? -1.0 : 1.0;
    const double w1v = w1.dot(v.tail(q - 1));
    Vector out(q);
    out(0) = w0 * v(0) + sgn * w1v;
    out.tail(q - 1) = v.tail(q - 1) + (sgn * v(0) + w1v / (1.0 + w0)) * w1;
    return inverse ? Vector(out / sc.eta) : Vector(out * sc.eta);
  }

  /// W(X) = R' X R, W'(X) = R X R', W^{-1}(X) = R^{-T} X R^{-1}, W^{-T}(X) = R^{-1} X R^{-T}.
  Vector apply_psd(std::size_t k, const Eigen::Ref<const Vector>& v, Op op) const {
    const Psd& p = psd_[k];
    const int n = static_cast<int>(p.R.rows());
    const Matrix X = smat(v, n);
    switch (op) {
      case Op::W:
        return svec(p.R.transpose() * X * p.R);
      case Op::WT:
        return svec(p.R * X * p.R.transpose());
      case Op::Winv:
        return svec(p.Rinv.transpose() * X * p.Rinv);
      case Op::WinvT:
        return svec(p.Rinv * X * p.Rinv.transpose());
    }
    return Vector();
  }

  const Layout& L_;
  Vector lp_d_;
  std::vector<Soc> soc_;
  std::vector<Psd> psd_;
  Vector lambda_;
};

/**
 * Solves [0 A' G'; A 0 0; G 0 -W'W] [x; y; z] = [bx; by; bz] via the normal equations
 * H = G' W^{-1} W^{-T} G and a regularized quasidefinite LDL' of [H A'; A 0].
 */
class KktSolver {
 public:
  KktSolver(const StandardForm& P, const Layout& L, const SolverOptions& opt) : P_(P), L_(L), opt_(opt) {
    n_ = static_cast<int>(P.c.size());
    meq_ = static_cast<int>(P.A.rows());
    const Eigen::SparseMatrix<double, Eigen::RowMajor> Gr = P.G;
    Glp_ = Gr.topRows(L.l);
    auto dense_block = [&](int off, int len, std::vector<int>& support, Matrix& block) {
      const Eigen::SparseMatrix<double, Eigen::RowMajor> rows = Gr.middleRows(off, len);
      std::vector<char> used(static_cast<std::size_t>(n_), 0);
      for (int r = 0; r < rows.outerSize(); ++r) {
        for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(rows, r); it; ++it) used[it.col()] = 1;
      }
      std::vector<int> pos(static_cast<std::size_t>(n_), -1);
      for (int j = 0; j < n_; ++j) {
        if (used[j]) {
          pos[j] = static_cast<int>(support.size());
          support.push_back(j);
        }
      }
      block = Matrix::Zero(len, static_cast<Eigen::Index>(support.size()));
      for (int r = 0; r < rows.outerSize(); ++r) {
        for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(rows, r); it; ++it) {
          block(r, pos[it.col()]) = it.value();
        }
      }
    };
    soc_support_.resize(L.q_off.size());
    soc_block_.resize(L.q_off.size());
    for (std::size_t k = 0; k < L.q_off.size(); ++k) dense_block(L.q_off[k], L.q_dim[k], soc_support_[k], soc_block_[k]);
    psd_support_.resize(L.s_off.size());
    psd_block_.resize(L.s_off.size());
    for (std::size_t k = 0; k < L.s_off.size(); ++k) {
      dense_block(L.s_off[k], Layout::svec_len(L.s_n[k]), psd_support_[k], psd_block_[k]);
    }
  }

  bool factor(const NtScaling& W) {
    W_ = &W;
    std::vector<Eigen::Triplet<double>> trips;
    if (L_.l > 0) {
      const Vector d = W.lp_winv2();
      const SparseMatrix Gl = Glp_;
      const SparseMatrix Hl = SparseMatrix(Gl.transpose()) * (d.asDiagonal() * Gl);
      for (int k = 0; k < Hl.outerSize(); ++k) {
        for (SparseMatrix::InnerIterator it(Hl, k); it; ++it) trips.emplace_back(it.row(), it.col(), it.value());
      }
    }
    auto scatter = [&](const std::vector<int>& sup, const Matrix& M) {
      const Matrix H = M.transpose() * M;
      for (std::size_t a = 0; a < sup.size(); ++a) {
        for (std::size_t b = 0; b < sup.size(); ++b) trips.emplace_back(sup[a], sup[b], H(a, b));
      }
    };
    for (std::size_t k = 0; k < soc_support_.size(); ++k) scatter(soc_support_[k], W.soc_winvt_block(k, soc_block_[k]));
    for (std::size_t k = 0; k < psd_support_.size(); ++k) scatter(psd_support_[k], W.psd_winvt_block(k, psd_block_[k]));
    H_.resize(n_, n_);
    H_.setFromTriplets(trips.begin(), trips.end());
    const double delta = opt_.regularization;
    for (int j = 0; j < n_; ++j) trips.emplace_back(j, j, delta);
    for (int k = 0; k < P_.A.outerSize(); ++k) {
      for (SparseMatrix::InnerIterator it(P_.A, k); it; ++it) {
        trips.emplace_back(n_ + static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
        trips.emplace_back(static_cast<int>(it.col()), n_ + static_cast<int>(it.row()), it.value());
      }
    }
    for (int j = 0; j < meq_; ++j) trips.emplace_back(n_ + j, n_ + j, -delta);
    K_.resize(n_ + meq_, n_ + meq_);
    K_.setFromTriplets(trips.begin(), trips.end());
    ldlt_.compute(K_);
    return ldlt_.info() == Eigen::Success;
  }

  /// Solves with iterative refinement on the unreduced system.
  void solve(const Vector& bx, const Vector& by, const Vector& bz, Vector& ux, Vector& uy, Vector& uz) const {
    solve_once(bx, by, bz, ux, uy, uz);
    const double bnorm = std::max({bx.lpNorm<Eigen::Infinity>(), by.size() ? by.lpNorm<Eigen::Infinity>() : 0.0,
                                   bz.size() ? bz.lpNorm<Eigen::Infinity>() : 0.0, 1.0});
    for (int it = 0; it < opt_.refinement_steps; ++it) {
      const Vector rx = bx - P_.A.transpose() * uy - P_.G.transpose() * uz;
      const Vector ry = by - P_.A * ux;
      const Vector rz = bz - (P_.G * ux - w2(uz));
      const double rn = std::max({rx.lpNorm<Eigen::Infinity>(), ry.size() ? ry.lpNorm<Eigen::Infinity>() : 0.0,
                                  rz.size() ? rz.lpNorm<Eigen::Infinity>() : 0.0});
      if (!(rn > 1e-14 * bnorm)) break;
      Vector dx, dy, dz;
      solve_once(rx, ry, rz, dx, dy, dz);
      ux += dx;
      uy += dy;
      uz += dz;
    }
  }

 private:
  Vector w2(const Vector& v) const {
    return W_->apply(W_->apply(v, NtScaling::Op::W), NtScaling::Op::WT);
  }
  Vector winv2(const Vector& v) const {
    return W_->apply(W_->apply(v, NtScaling::Op::WinvT), NtScaling::Op::Winv);
  }

  void solve_once(const Vector& bx, const Vector& by, const Vector& bz, Vector& ux, Vector& uy, Vector& uz) const {
    Vector rhs(n_ + meq_);
    rhs.head(n_) = bx + P_.G.transpose() * winv2(bz);
    rhs.tail(meq_) = by;
    const Vector sol = ldlt_.solve(rhs);
    ux = sol.head(n_);
    uy = sol.tail(meq_);
    uz = winv2(P_.G * ux - bz);
  }

  const StandardForm& P_;
  const Layout& L_;
  const SolverOptions& opt_;
  int n_ = 0;
  int meq_ = 0;
  SparseMatrix Glp_;
  std::vector<std::vector<int>> soc_support_, psd_support_;
  std::vector<Matrix> soc_block_, psd_block_;
  SparseMatrix H_;
  SparseMatrix K_;
  Eigen::SimplicialLDLT<SparseMatrix, Eigen::Lower, Eigen::AMDOrdering<int>> ldlt_;
  const NtScaling* W_ = nullptr;
};

double safe_norm(const Vector& v) { return v.size() ? v.norm() : 0.0; }

}  // namespace

ConicSolution InteriorPointBackend::solve(const StandardForm& P, const SolverOptions& opt) const {
  const int n = static_cast<int>(P.c.size());
  const Layout L(P.dims);
  require_dim("G columns", n, P.G.cols());
  require_dim("A columns", n, P.A.rows() > 0 ? P.A.cols() : n);
  require_dim("h length", L.m, P.h.size());
  require_dim("G rows", L.m, P.G.rows());
  require_dim("b length", P.A.rows(), P.b.size());

  ConicSolution sol;
  const Vector e = identity_element(L);
  const double nu = P.dims.degree();
  const double resx0 = std::max(1.0, safe_norm(P.c));
  const double resy0 = std::max(1.0, safe_norm(P.b));
  const double resz0 = std::max(1.0, safe_norm(P.h));

  NtScaling W(L);
  KktSolver kkt(P, L, opt);

  // Starting point from two least-squares problems with identity scaling.
  if (!W.compute(e, e) || !kkt.factor(W)) {
    sol.status = SolveStatus::NumericalFailure;
    return sol;
  }
  Vector x, y, z, s, tmp;
  kkt.solve(Vector::Zero(n), P.b, P.h, x, tmp, z);
  s = -z;
  Vector xd;
  kkt.solve(-P.c, Vector::Zero(P.b.size()), Vector::Zero(L.m), xd, y, z);
  const double ts = -min_cone_eig(L, s);
  if (L.m > 0 && ts >= -1e-8 * std::max(safe_norm(s), 1.0)) s += (1.0 + ts) * e;
  const double tz = -min_cone_eig(L, z);
  if (L.m > 0 && tz >= -1e-8 * std::max(safe_norm(z), 1.0)) z += (1.0 + tz) * e;
  double tau = 1.0, kappa = 1.0;

  auto finish = [&](SolveStatus st, double scale) {
    sol.status = st;
    sol.x = x * scale;
    sol.y = y * scale;
    sol.z = z * scale;
    sol.s = s * scale;
  };

  for (int iter = 0; iter <= opt.max_iterations; ++iter) {
    sol.iterations = iter;
    const Vector hrx = -(P.A.transpose() * y) - P.G.transpose() * z;
    const Vector hry = P.A * x;
    const Vector hrz = s + P.G * x;
    const Vector rx = hrx - P.c * tau;
    const Vector ry = hry - P.b * tau;
    const Vector rz = hrz - P.h * tau;
    const double cx = P.c.dot(x), by = P.b.dot(y), hz = P.h.dot(z);
    const double rt = kappa + cx + by + hz;
    const double gap = s.dot(z);
    const double pcost = cx / tau, dcost = -(by + hz) / tau;
    const double pres = std::max(safe_norm(ry) / resy0, safe_norm(rz) / resz0) / tau;
    const double dres = safe_norm(rx) / resx0 / tau;
    const double agap = gap / (tau * tau);
    double relgap = kInf;
    if (pcost < 0.0) relgap = agap / -pcost;
    if (dcost > 0.0) relgap = agap / dcost;
    sol.residuals = Residuals{pres, dres, agap, relgap};
    sol.objective_value = pcost + P.c0;
    if (opt.verbose) {
      std::fprintf(stderr, "%3d  pcost % .9e  dcost % .9e  gap %.2e  pres %.2e  dres %.2e  tau %.2e  kappa %.2e\n",
                   iter, pcost, dcost, agap, pres, dres, tau, kappa);
    }
    if (pres <= opt.feastol && dres <= opt.feastol && (agap <= opt.abstol || relgap <= opt.reltol)) {
      finish(SolveStatus::Optimal, 1.0 / tau);
      return sol;
    }
    if (by + hz < 0.0 && safe_norm(hrx) / resx0 / -(by + hz) <= opt.feastol) {
      finish(SolveStatus::Infeasible, 1.0 / -(by + hz));
      sol.objective_value = kInf;
      return sol;
    }
    if (cx < 0.0 && std::max(safe_norm(hry) / resy0, safe_norm(hrz) / resz0) / -cx <= opt.feastol) {
      finish(SolveStatus::Unbounded, 1.0 / -cx);
      sol.objective_value = -kInf;
      return sol;
    }
    if (iter == opt.max_iterations) break;

    if (!W.compute(s, z)) {
      if (opt.verbose) std::fprintf(stderr, "scaling failed: iterate left the cone interior\n");
      break;
    }
    if (!kkt.factor(W)) {
      if (opt.verbose) std::fprintf(stderr, "KKT factorization failed\n");
      break;
    }
    const Vector& lam = W.lambda();
    const double mu = (gap + tau * kappa) / (nu + 1.0);

    Vector x1, y1, z1;
    kkt.solve(-P.c, P.b, P.h, x1, y1, z1);
    const double denom = P.c.dot(x1) + P.b.dot(y1) + P.h.dot(z1) - kappa / tau;

    struct Direction {
      Vector dx, dy, dz, ds_scaled, dz_scaled, ds;
      double dtau = 0.0, dkappa = 0.0;
    };
    // One Newton solve for complementarity right-hand sides (rc, rk) and linear residual weight eta.
    auto newton = [&](const Vector& rc, double rk, double eta, Direction& d) {
      const Vector lr = W.lambda_divide(rc);
      Vector ux, uy, uz;
      kkt.solve((1.0 - eta) * rx, -(1.0 - eta) * ry, -(1.0 - eta) * rz - W.apply(lr, NtScaling::Op::WT), ux, uy,
                uz);
      d.dtau = (-(1.0 - eta) * rt - rk / tau - P.c.dot(ux) - P.b.dot(uy) - P.h.dot(uz)) / denom;
      d.dx = ux + d.dtau * x1;
      d.dy = uy + d.dtau * y1;
      d.dz = uz + d.dtau * z1;
      d.dkappa = (rk - kappa * d.dtau) / tau;
      d.dz_scaled = W.apply(d.dz, NtScaling::Op::W);
      d.ds_scaled = lr - d.dz_scaled;
      d.ds = W.apply(d.ds_scaled, NtScaling::Op::WT);
    };
    auto step_length = [&](const Direction& d) {
      double a = std::min(W.max_step(d.ds_scaled), W.max_step(d.dz_scaled));
      if (d.dtau < 0.0) a = std::min(a, -tau / d.dtau);
      if (d.dkappa < 0.0) a = std::min(a, -kappa / d.dkappa);
      return a;
    };

    Direction aff;
    newton(-jordan_product(L, lam, lam), -tau * kappa, 0.0, aff);
    const double a_aff = std::min(1.0, step_length(aff));
    const double sigma = std::pow(std::max(0.0, 1.0 - a_aff), 3.0);

    Direction cmb;
    const Vector rc = -jordan_product(L, lam, lam) + sigma * mu * e - jordan_product(L, aff.ds_scaled, aff.dz_scaled);
    newton(rc, -tau * kappa + sigma * mu - aff.dtau * aff.dkappa, sigma, cmb);
    const double a_max = step_length(cmb);
    const double step = std::min(1.0, 0.99 * a_max);
    if (!std::isfinite(step) || !cmb.dx.allFinite() || !std::isfinite(cmb.dtau)) {
      if (opt.verbose) std::fprintf(stderr, "non-finite search direction\n");
      break;
    }

    double step_taken = step;
    for (int back = 0; back < 30; ++back) {
      if (interior(L, s + step_taken * cmb.ds) && interior(L, z + step_taken * cmb.dz)) break;
      step_taken *= 0.8;
    }
    const double step_used = step_taken;
    x += step_used * cmb.dx;
    y += step_used * cmb.dy;
    z += step_used * cmb.dz;
    s += step_used * cmb.ds;
    tau += step_used * cmb.dtau;
    kappa += step_used * cmb.dkappa;
  }
  finish(SolveStatus::NumericalFailure, 1.0 / tau);
  return sol;
}

const ConicBackend& default_backend() {
  static const InteriorPointBackend backend;
  return backend;
}

}  // namespace safebiop::conic
