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

#include "safebiop/iop.hpp"

#include <cmath>

namespace safebiop {

double inf_norm(const Matrix& M) {
  if (M.size() == 0) return 0.0;
  return M.cwiseAbs().rowwise().sum().maxCoeff();
}

double spectral_norm(const Matrix& M) {
  if (M.size() == 0) return 0.0;
  Eigen::BDCSVD<Matrix> svd(M);
  return svd.singularValues()(0);
}

ToeplitzOperator::ToeplitzOperator(Matrix column, int p_) : first_block_column(std::move(column)), p(p_) {
  if (p <= 0) throw std::invalid_argument("ToeplitzOperator: p must be positive");
  if (first_block_column.rows() % p != 0) {
    throw DimensionError("ToeplitzOperator: column height " + std::to_string(first_block_column.rows()) +
                         " is not a multiple of p = " + std::to_string(p));
  }
  m = static_cast<int>(first_block_column.cols());
  N = static_cast<int>(first_block_column.rows() / p);
}

Matrix ToeplitzOperator::expand() const {
  Matrix T = Matrix::Zero(static_cast<Eigen::Index>(p) * N, static_cast<Eigen::Index>(m) * N);
  for (int i = 0; i < N; ++i) {
    for (int j = 0; j <= i; ++j) {
      T.block(static_cast<Eigen::Index>(i) * p, static_cast<Eigen::Index>(j) * m, p, m) =
          first_block_column.block(static_cast<Eigen::Index>(i - j) * p, 0, p, m);
    }
  }
  return T;
}

Matrix toeplitz_expand(const ToeplitzOperator& op) { return op.expand(); }

ClosedLoopMaps responses_from_controller(const Matrix& K, const ToeplitzOperator& Gop) {
  const Matrix G = Gop.expand();
  require_dim("controller rows", G.cols(), K.rows());
  require_dim("controller columns", G.rows(), K.cols());
  const Eigen::Index py = G.rows(), mu = G.cols();
  const Matrix IGK = Matrix::Identity(py, py) - G * K;
  const Matrix IKG = Matrix::Identity(mu, mu) - K * G;
  ClosedLoopMaps maps;
  maps.yy = IGK.triangularView<Eigen::UnitLower>().solve(Matrix::Identity(py, py));
  maps.yu = maps.yy * G;
  maps.uy = K * maps.yy;
  maps.uu = IKG.triangularView<Eigen::UnitLower>().solve(Matrix::Identity(mu, mu));
  return maps;
}

Matrix controller_from_responses(const ClosedLoopMaps& maps) {
  require_dim("Phi_yy columns", maps.yy.rows(), maps.yy.cols());
  require_dim("Phi_uy columns", maps.yy.rows(), maps.uy.cols());
  // K Phi_yy = Phi_uy  <=>  Phi_yy^T K^T = Phi_uy^T with Phi_yy^T upper triangular.
  const Matrix Kt = maps.yy.transpose().triangularView<Eigen::Upper>().solve(maps.uy.transpose());
  return Kt.transpose();
}

ClosedLoopMaps maps_from_phi_uy(const Matrix& phi_uy, const Matrix& G) {
  require_dim("Phi_uy rows", G.cols(), phi_uy.rows());
  require_dim("Phi_uy columns", G.rows(), phi_uy.cols());
  ClosedLoopMaps maps;
  maps.uy = phi_uy;
  maps.yy = Matrix::Identity(G.rows(), G.rows()) + G * phi_uy;
  maps.yu = maps.yy * G;
  maps.uu = Matrix::Identity(G.cols(), G.cols()) + phi_uy * G;
  return maps;
}

AchievabilityResidual achievability_residual(const ClosedLoopMaps& maps, const Matrix& G) {
  const Eigen::Index py = G.rows(), mu = G.cols();
  AchievabilityResidual r;
  // [I, -G] Phi - [I, 0]
  const Matrix a1 = maps.yy - G * maps.uy - Matrix::Identity(py, py);
  const Matrix a2 = maps.yu - G * maps.uu;
  r.r1 = std::sqrt(a1.squaredNorm() + a2.squaredNorm());
  // Phi [-G; I] - [0; I]
  const Matrix b1 = -maps.yy * G + maps.yu;
  const Matrix b2 = -maps.uy * G + maps.uu - Matrix::Identity(mu, mu);
  r.r2 = std::sqrt(b1.squaredNorm() + b2.squaredNorm());
  return r;
}

AchievabilityResidual achievability_residual(const ClosedLoopMaps& maps, const ToeplitzOperator& G) {
  return achievability_residual(maps, G.expand());
}

namespace {

Matrix psd_sqrt(const Matrix& M) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(M);
  return es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() *
         es.eigenvectors().transpose();
}

double min_eig(const Matrix& M) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(M, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

Matrix block_diag_sqrt(const std::vector<Matrix>& blocks) {
  Eigen::Index n = 0;
  for (const auto& b : blocks) n += b.rows();
  Matrix out = Matrix::Zero(n, n);
  Eigen::Index off = 0;
  for (const auto& b : blocks) {
    out.block(off, off, b.rows(), b.rows()) = psd_sqrt(b);
    off += b.rows();
  }
  return out;
}

Matrix repeat_sqrt(const Matrix& S, int N) {
  const Matrix r = psd_sqrt(S);
  Matrix out = Matrix::Zero(S.rows() * N, S.rows() * N);
  for (int t = 0; t < N; ++t) out.block(t * S.rows(), t * S.rows(), S.rows(), S.rows()) = r;
  return out;
}

bool near_identity(const Matrix& M) {
  return M.rows() == M.cols() && (M - Matrix::Identity(M.rows(), M.cols())).cwiseAbs().maxCoeff() == 0.0;
}

}  // namespace

CostWeights CostWeights::identity(int p, int m, int N) {
  CostWeights w;
  w.Q_blocks.assign(N, Matrix::Identity(p, p));
  w.R_blocks.assign(N, Matrix::Identity(m, m));
  w.Sigma_v = Matrix::Identity(p, p);
  w.Sigma_w = Matrix::Identity(m, m);
  return w;
}

void CostWeights::validate(int p, int m, int N) const {
  require_dim("Q block count", N, static_cast<Eigen::Index>(Q_blocks.size()));
  require_dim("R block count", N, static_cast<Eigen::Index>(R_blocks.size()));
  for (const auto& Q : Q_blocks) {
    require_dim("Q block rows", p, Q.rows());
    require_dim("Q block columns", p, Q.cols());
    if (min_eig(Q) < -1e-10) throw std::invalid_argument("CostWeights: Q block is not PSD");
  }
  for (const auto& R : R_blocks) {
    require_dim("R block rows", m, R.rows());
    require_dim("R block columns", m, R.cols());
    if (min_eig(R) < 1e-10) throw std::invalid_argument("CostWeights: R block is not PD");
  }
  require_dim("Sigma_v rows", p, Sigma_v.rows());
  require_dim("Sigma_v columns", p, Sigma_v.cols());
  require_dim("Sigma_w rows", m, Sigma_w.rows());
  require_dim("Sigma_w columns", m, Sigma_w.cols());
  if (min_eig(Sigma_v) < -1e-10 || min_eig(Sigma_w) < -1e-10) {
    throw std::invalid_argument("CostWeights: noise covariance is not PSD");
  }
}

Matrix CostWeights::Q_sqrt() const { return block_diag_sqrt(Q_blocks); }
Matrix CostWeights::R_sqrt() const { return block_diag_sqrt(R_blocks); }
Matrix CostWeights::Sigma_v_sqrt(int N) const { return repeat_sqrt(Sigma_v, N); }
Matrix CostWeights::Sigma_w_sqrt(int N) const { return repeat_sqrt(Sigma_w, N); }

bool CostWeights::is_identity() const {
  for (const auto& Q : Q_blocks) {
    if (!near_identity(Q)) return false;
  }
  for (const auto& R : R_blocks) {
    if (!near_identity(R)) return false;
  }
  return near_identity(Sigma_v) && near_identity(Sigma_w);
}

double cost_j(const ClosedLoopMaps& maps, const Vector& y0, const CostWeights& weights) {
  const Eigen::Index py = maps.yy.rows(), mu = maps.uu.rows();
  require_dim("y0 length", py, y0.size());
  const int p = weights.Sigma_v.rows() > 0 ? static_cast<int>(weights.Sigma_v.rows()) : 1;
  const int N = static_cast<int>(py / p);
  weights.validate(p, static_cast<int>(mu / N), N);
  const Matrix Qh = weights.Q_sqrt(), Rh = weights.R_sqrt();
  const Matrix Sv = weights.Sigma_v_sqrt(N), Sw = weights.Sigma_w_sqrt(N);
  const double top = (Qh * maps.yy * Sv).squaredNorm() + (Qh * maps.yu * Sw).squaredNorm() +
                     (Qh * (maps.yy * y0)).squaredNorm();
  const double bottom = (Rh * maps.uy * Sv).squaredNorm() + (Rh * maps.uu * Sw).squaredNorm() +
                        (Rh * (maps.uy * y0)).squaredNorm();
  return std::sqrt(top + bottom);
}

double inner_cost(const ClosedLoopMaps& maps_hat, const Vector& y0_hat, double h_G, double h_y,
                  const CostWeights& weights) {
  const Matrix Qh = weights.Q_sqrt(), Rh = weights.R_sqrt();
  const double top = (1.0 + h_G + h_y) * (Qh * maps_hat.yy).squaredNorm() + (Qh * maps_hat.yu).squaredNorm() +
                     (Qh * (maps_hat.yy * y0_hat)).squaredNorm();
  const double bottom = (1.0 + h_y) * (Rh * maps_hat.uy).squaredNorm() + (Rh * maps_hat.uu).squaredNorm() +
                        (Rh * (maps_hat.uy * y0_hat)).squaredNorm();
  return std::sqrt(top + bottom);
}

namespace {

struct RowNorms {
  Vector n1;   // ||f P1||_1
  Vector n2;   // ||f P2||_1
  Vector lin;  // f P1 y0
};

RowNorms row_norms(const Matrix& F, const Matrix& P1, const Matrix& P2, const Vector& y0) {
  RowNorms r;
  if (F.rows() == 0) {
    r.n1.resize(0);
    r.n2.resize(0);
    r.lin.resize(0);
    return r;
  }
  require_dim("constraint width", P1.rows(), F.cols());
  const Matrix FP1 = F * P1, FP2 = F * P2;
  r.n1 = FP1.cwiseAbs().rowwise().sum();
  r.n2 = FP2.cwiseAbs().rowwise().sum();
  r.lin = FP1 * y0;
  return r;
}

}  // namespace

SafetyLhs worst_case_lhs(const ClosedLoopMaps& maps, const StackedConstraints& cons, const NoiseSpec& noise,
                         const Vector& y0) {
  noise.validate();
  const RowNorms ry = row_norms(cons.Fy, maps.yy, maps.yu, y0);
  const RowNorms ru = row_norms(cons.Fu, maps.uy, maps.uu, y0);
  SafetyLhs out;
  out.y = noise.v_inf * ry.n1 + noise.w_inf * ry.n2 + ry.lin;
  out.u = noise.v_inf * ru.n1 + noise.w_inf * ru.n2 + ru.lin;
  return out;
}

double h_value(double eps, double gamma, double norm2_Y) {
  if (eps < 0.0 || gamma < 0.0 || norm2_Y < 0.0) throw std::invalid_argument("h_value: arguments must be >= 0");
  const double k = 2.0 + gamma * norm2_Y;
  return eps * eps * k * k + 2.0 * eps * norm2_Y * k;
}

SafetyLhs TighteningTerms::totals() const { return SafetyLhs{t1 + t2 + t3, t4 + t5 + t6}; }

TighteningTerms tightened_terms_f(const ClosedLoopMaps& maps_hat, const StackedConstraints& cons, double tau,
                                  double eps_inf, const Matrix& G_hat, const Vector& y0_hat, const NoiseSpec& noise) {
  noise.validate();
  if (tau < 0.0 || eps_inf < 0.0) throw std::invalid_argument("tightened_lhs_f: tau and eps_inf must be >= 0");
  if (tau * eps_inf >= 1.0) throw std::invalid_argument("tightened_lhs_f: tau * eps_inf must be < 1");
  const double den = 1.0 - eps_inf * tau;
  const double cG = (1.0 + tau * inf_norm(G_hat)) / den;
  const double cy = (1.0 + tau * y0_hat.cwiseAbs().maxCoeff()) / den;
  const RowNorms ry = row_norms(cons.Fy, maps_hat.yy, maps_hat.yu, y0_hat);
  const RowNorms ru = row_norms(cons.Fu, maps_hat.uy, maps_hat.uu, y0_hat);
  TighteningTerms t;
  t.t1 = noise.v_inf * ry.n1 / den;
  t.t2 = noise.w_inf * (ry.n2 + eps_inf * cG * ry.n1);
  t.t3 = ry.lin + eps_inf * cy * ry.n1;
  t.t4 = noise.v_inf * ru.n1 / den;
  t.t5 = noise.w_inf * (ru.n2 + eps_inf * cG * ru.n1);
  t.t6 = ru.lin + eps_inf * cy * ru.n1;
  return t;
}

SafetyLhs tightened_lhs_f(const ClosedLoopMaps& maps_hat, const StackedConstraints& cons, double tau,
                          double eps_inf, const Matrix& G_hat, const Vector& y0_hat, const NoiseSpec& noise) {
  return tightened_terms_f(maps_hat, cons, tau, eps_inf, G_hat, y0_hat, noise).totals();
}

TighteningTerms oracle_terms_phi(const ClosedLoopMaps& maps, const StackedConstraints& cons, double zeta,
                                 double eps_inf, const Matrix& G_hat, const Vector& y0_hat, const NoiseSpec& noise) {
  noise.validate();
  if (zeta < 0.0 || eps_inf < 0.0) throw std::invalid_argument("oracle_lhs_phi: zeta and eps_inf must be >= 0");
  if (zeta >= 0.5) throw std::invalid_argument("oracle_lhs_phi: zeta must be < 1/2");
  const double den = 1.0 - 2.0 * zeta;
  const double cG = 2.0 * (eps_inf + zeta * inf_norm(G_hat)) / den;
  const double cy = 2.0 * (eps_inf + zeta * y0_hat.cwiseAbs().maxCoeff()) / den;
  const RowNorms ry = row_norms(cons.Fy, maps.yy, maps.yu, y0_hat);
  const RowNorms ru = row_norms(cons.Fu, maps.uy, maps.uu, y0_hat);
  TighteningTerms t;
  t.t1 = noise.v_inf * ry.n1 / den;
  t.t2 = noise.w_inf * (ry.n2 + cG * ry.n1);
  t.t3 = ry.lin + cy * ry.n1;
  t.t4 = noise.v_inf * ru.n1 / den;
  t.t5 = noise.w_inf * (ru.n2 + cG * ru.n1);
  t.t6 = ru.lin + cy * ru.n1;
  return t;
}

SafetyLhs oracle_lhs_phi(const ClosedLoopMaps& maps, const StackedConstraints& cons, double zeta, double eps_inf,
                         const Matrix& G_hat, const Vector& y0_hat, const NoiseSpec& noise) {
  return oracle_terms_phi(maps, cons, zeta, eps_inf, G_hat, y0_hat, noise).totals();
}

RowCoefficients nominal_coefficients(const NoiseSpec& noise) { return RowCoefficients{noise.v_inf, noise.w_inf}; }

RowCoefficients tightened_coefficients(double tau, double eps_inf, double G_hat_inf, double y0_hat_inf,
                                       const NoiseSpec& noise) {
  if (tau * eps_inf >= 1.0) throw std::invalid_argument("tightened_coefficients: tau * eps_inf must be < 1");
  const double den = 1.0 - eps_inf * tau;
  const double cG = (1.0 + tau * G_hat_inf) / den;
  const double cy = (1.0 + tau * y0_hat_inf) / den;
  return RowCoefficients{noise.v_inf / den + noise.w_inf * eps_inf * cG + eps_inf * cy, noise.w_inf};
}

RowCoefficients oracle_coefficients(double zeta, double eps_inf, double G_hat_inf, double y0_hat_inf,
                                    const NoiseSpec& noise) {
  if (zeta >= 0.5) throw std::invalid_argument("oracle_coefficients: zeta must be < 1/2");
  const double den = 1.0 - 2.0 * zeta;
  const double cG = 2.0 * (eps_inf + zeta * G_hat_inf) / den;
  const double cy = 2.0 * (eps_inf + zeta * y0_hat_inf) / den;
  return RowCoefficients{noise.v_inf / den + noise.w_inf * cG + cy, noise.w_inf};
}

}  // namespace safebiop
