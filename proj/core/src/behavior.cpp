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

#include "safebiop/behavior.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>

#include "safebiop/csv.hpp"
#include "safebiop/iop.hpp"
#include "safebiop/random.hpp"

namespace safebiop {

void DataRecord::validate() const {
  if (T_ini < 1) throw std::invalid_argument("DataRecord: T_ini must be >= 1");
  if (N < 1) throw std::invalid_argument("DataRecord: N must be >= 1");
  require_dim("historical_y length", historical_u.length(), historical_y.length());
  require_dim("recent_u length", T_ini, recent_u.length());
  require_dim("recent_y length", T_ini, recent_y.length());
  require_dim("recent_u block size", historical_u.dim, recent_u.dim);
  require_dim("recent_y block size", historical_y.dim, recent_y.dim);
}

bool DataRecord::satisfies_length_prerequisite(int n) const { return T() >= (m() + 1) * (n + T_ini + N) - 1; }

Matrix build_hankel(const SignalTrajectory& signal, int L) {
  const int T = signal.length();
  if (L < 1) throw std::invalid_argument("build_hankel: depth must be >= 1");
  if (L > T) {
    throw std::invalid_argument("build_hankel: depth " + std::to_string(L) + " exceeds signal length " +
                                std::to_string(T));
  }
  const int d = signal.dim;
  const int cols = T - L + 1;
  Matrix H(static_cast<Eigen::Index>(d) * L, cols);
  for (int j = 0; j < cols; ++j) {
    H.col(j) = signal.values.segment(static_cast<Eigen::Index>(j) * d, static_cast<Eigen::Index>(d) * L);
  }
  return H;
}

namespace {

int numerical_rank(const Vector& sv, double rel_tol) {
  if (sv.size() == 0 || sv(0) <= 0.0) return 0;
  const double thr = rel_tol * sv(0);
  int r = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > thr) ++r;
  }
  return r;
}

}  // namespace

PEReport check_pe(const SignalTrajectory& input, int L, double rel_tol) {
  PEReport rep;
  if (L < 1 || L > input.length()) return rep;
  const Matrix H = build_hankel(input, L);
  Eigen::BDCSVD<Matrix> svd(H);
  rep.singular_values = svd.singularValues();
  rep.rank = numerical_rank(rep.singular_values, rel_tol);
  rep.is_pe = rep.rank == H.rows();
  return rep;
}

HankelPartition partition_data(const DataRecord& record) {
  record.validate();
  const int L = record.T_ini + record.N;
  if (record.T() < L) {
    throw std::invalid_argument("partition_data: T = " + std::to_string(record.T()) + " is shorter than T_ini + N = " +
                                std::to_string(L));
  }
  const Matrix Hu = build_hankel(record.historical_u, L);
  const Matrix Hy = build_hankel(record.historical_y, L);
  const Eigen::Index mp = static_cast<Eigen::Index>(record.m()) * record.T_ini;
  const Eigen::Index pp = static_cast<Eigen::Index>(record.p()) * record.T_ini;
  HankelPartition part;
  part.U_p = Hu.topRows(mp);
  part.U_f = Hu.bottomRows(Hu.rows() - mp);
  part.Y_p = Hy.topRows(pp);
  part.Y_f = Hy.bottomRows(Hy.rows() - pp);
  return part;
}

Matrix pseudo_inverse(const Matrix& M, double rel_tol) {
  Eigen::JacobiSVD<Matrix> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& sv = svd.singularValues();
  const int r = numerical_rank(sv, rel_tol);
  if (r == 0) return Matrix::Zero(M.cols(), M.rows());
  return svd.matrixV().leftCols(r) * sv.head(r).cwiseInverse().asDiagonal() * svd.matrixU().leftCols(r).transpose();
}

namespace {

void check_partition(const HankelPartition& part, const DataRecord& record) {
  if (part.U_p.cols() == 0) throw std::invalid_argument("empty Hankel partition");
  require_dim("U_f columns", part.U_p.cols(), part.U_f.cols());
  require_dim("Y_p columns", part.U_p.cols(), part.Y_p.cols());
  require_dim("Y_f columns", part.U_p.cols(), part.Y_f.cols());
  require_dim("U_p rows", static_cast<Eigen::Index>(record.m()) * record.T_ini, part.U_p.rows());
  require_dim("Y_p rows", static_cast<Eigen::Index>(record.p()) * record.T_ini, part.Y_p.rows());
  require_dim("U_f rows", static_cast<Eigen::Index>(record.m()) * record.N, part.U_f.rows());
  require_dim("Y_f rows", static_cast<Eigen::Index>(record.p()) * record.N, part.Y_f.rows());
}

/// [I_m; 0] of height mN.
Matrix first_input_block(int m, int N) {
  Matrix E = Matrix::Zero(static_cast<Eigen::Index>(m) * N, m);
  E.topRows(m).setIdentity();
  return E;
}

EstimateBundle make_bundle(Matrix g_column, Vector y0_hat, int p) {
  EstimateBundle b;
  // Strict causality: the plant has no direct feedthrough.
  g_column.topRows(p).setZero();
  b.g_column = std::move(g_column);
  b.y0_hat = std::move(y0_hat);
  b.p = p;
  return b;
}

}  // namespace

EstimateBundle estimate_ls(const HankelPartition& part, const DataRecord& record) {
  check_partition(part, record);
  const int m = record.m(), N = record.N;
  Matrix M(part.U_p.rows() + part.Y_p.rows() + part.U_f.rows(), part.U_p.cols());
  M << part.U_p, part.Y_p, part.U_f;
  const Matrix Mp = pseudo_inverse(M);
  Matrix rhs_G = Matrix::Zero(M.rows(), m);
  rhs_G.bottomRows(part.U_f.rows()) = first_input_block(m, N);
  Vector rhs_g = Vector::Zero(M.rows());
  rhs_g.head(part.U_p.rows()) = record.recent_u.values;
  rhs_g.segment(part.U_p.rows(), part.Y_p.rows()) = record.recent_y.values;
  return make_bundle(part.Y_f * (Mp * rhs_G), part.Y_f * (Mp * rhs_g), record.p());
}

namespace {

/**
 * Reweighted least squares on the affine set {A g = b}.
 *
 * With g = g_p + Z xi (Z orthonormal null-space basis, g_p the minimum-norm particular solution)
 * each weight lambda leads to a diagonal solve in the eigenbasis of Z^T Yp^T Yp Z.
 */
class MlColumnSolver {
 public:
  MlColumnSolver(const Matrix& Yp, const Matrix& A) : Yp_(Yp) {
    Eigen::JacobiSVD<Matrix> svd(A, Eigen::ComputeThinU | Eigen::ComputeFullV);
    const Vector& sv = svd.singularValues();
    rank_ = numerical_rank(sv, kRankTolerance);
    const Matrix& V = svd.matrixV();
    Ap_ = V.leftCols(rank_) * sv.head(rank_).cwiseInverse().asDiagonal() *
          svd.matrixU().leftCols(rank_).transpose();
    A_ = A;
    Z_ = V.rightCols(A.cols() - rank_);
    const Matrix YZ = Yp_ * Z_;
    Eigen::SelfAdjointEigenSolver<Matrix> es(YZ.transpose() * YZ);
    lam_ = es.eigenvalues();
    E_ = Z_ * es.eigenvectors();
  }

  Vector solve(const Vector& b, const Vector& ry, double sigma, double d, const MlOptions& opt) const {
    const Vector gp = Ap_ * b;
    if ((A_ * gp - b).norm() > 1e-8 * std::max(1.0, b.norm())) {
      throw EstimationError("estimate_ml: input Hankel constraints are infeasible (rank " + std::to_string(rank_) +
                            " of " + std::to_string(A_.rows()) + ")");
    }
    if (E_.cols() == 0) return gp;
    // Gradient of the misfit at gp, projected on the eigenbasis; E^T gp = 0 by construction.
    const Vector c = E_.transpose() * (Yp_.transpose() * (Yp_ * gp - ry));
    const double lmax = std::max(lam_.cwiseAbs().maxCoeff(), 1.0);
    auto solve_for = [&](double weight) {
      Vector xi(c.size());
      for (Eigen::Index i = 0; i < c.size(); ++i) {
        const double den = lam_(i) + weight;
        xi(i) = std::abs(den) <= 1e-12 * lmax ? 0.0 : -c(i) / den;
      }
      return Vector(gp + E_ * xi);
    };
    const double s2 = sigma * sigma;
    double weight = 0.0;
    Vector g = solve_for(weight);
    for (int it = 0; it < opt.max_iterations; ++it) {
      const double r = (Yp_ * g - ry).squaredNorm();
      const double s = 1.0 + g.squaredNorm();
      weight = d * s2 - r / s;
      const Vector gn = solve_for(weight);
      const double step = (gn - g).norm();
      g = gn;
      if (step <= opt.rel_tol * std::max(1.0, g.norm())) break;
    }
    return g;
  }

 private:
  Matrix Yp_;
  Matrix A_;
  Matrix Ap_;
  Matrix Z_;
  Matrix E_;
  Vector lam_;
  int rank_ = 0;
};

}  // namespace

EstimateBundle estimate_ml(const HankelPartition& part, const DataRecord& record, double sigma,
                           const MlOptions& options) {
  if (!(sigma > 0.0)) throw std::invalid_argument("estimate_ml: sigma must be positive");
  check_partition(part, record);
  const int m = record.m(), p = record.p(), N = record.N, Ti = record.T_ini;
  Matrix A(part.U_p.rows() + part.U_f.rows(), part.U_p.cols());
  A << part.U_p, part.U_f;
  const MlColumnSolver solver(part.Y_p, A);
  const double d = static_cast<double>(p) * Ti;
  const Matrix E = first_input_block(m, N);
  Matrix Gml(A.cols(), m);
  for (int i = 0; i < m; ++i) {
    Vector b = Vector::Zero(A.rows());
    b.tail(E.rows()) = E.col(i);
    Gml.col(i) = solver.solve(b, Vector::Zero(part.Y_p.rows()), sigma, d, options);
  }
  Vector b = Vector::Zero(A.rows());
  b.head(part.U_p.rows()) = record.recent_u.values;
  const Vector gml = solver.solve(b, record.recent_y.values, sigma, d, options);
  return make_bundle(part.Y_f * Gml, part.Y_f * gml, p);
}

double percentile(std::vector<double> values, double q) {
  if (values.empty()) throw std::invalid_argument("percentile: empty sample");
  if (q < 0.0 || q > 100.0) throw std::invalid_argument("percentile: q must lie in [0, 100]");
  std::sort(values.begin(), values.end());
  const double pos = q / 100.0 * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

namespace {

struct ComponentErrors {
  double e2G, eiG, e2y, eiy;
};

ComponentErrors compare(const Matrix& col_a, const Vector& y_a, const Matrix& col_b, const Vector& y_b, int p) {
  const Matrix D = ToeplitzOperator(col_a - col_b, p).expand();
  const Vector d = y_a - y_b;
  return ComponentErrors{spectral_norm(D), inf_norm(D), d.norm(), d.size() ? d.cwiseAbs().maxCoeff() : 0.0};
}

EstimateBundle with_errors(EstimateBundle b, const ComponentErrors& e) {
  b.eps2_G = e.e2G;
  b.eps_inf_G = e.eiG;
  b.eps2_y = e.e2y;
  b.eps_inf_y = e.eiy;
  b.eps2 = std::max(e.e2G, e.e2y);
  b.eps_inf = std::max(e.eiG, e.eiy);
  b.errors_set = true;
  return b;
}

}  // namespace

EstimateBundle assess_errors(const EstimateBundle& bundle, const ErrorMode& mode) {
  const int p = bundle.p;
  if (const auto* oracle = std::get_if<OracleErrors>(&mode)) {
    require_dim("truth column rows", bundle.g_column.rows(), oracle->truth_column.rows());
    require_dim("truth column columns", bundle.g_column.cols(), oracle->truth_column.cols());
    require_dim("truth y0 length", bundle.y0_hat.size(), oracle->y0.size());
    return with_errors(bundle, compare(oracle->truth_column, oracle->y0, bundle.g_column, bundle.y0_hat, p));
  }
  const auto& bs = std::get<BootstrapErrors>(mode);
  if (bs.record == nullptr) throw std::invalid_argument("assess_errors: bootstrap mode needs a data record");
  if (bs.resamples < 1) throw std::invalid_argument("assess_errors: bootstrap needs at least one resample");
  std::vector<double> e2G, eiG, e2y, eiy;
  for (int r = 0; r < bs.resamples; ++r) {
    Rng rng(derive_seed(bs.seed, static_cast<std::uint64_t>(r)));
    DataRecord rec = *bs.record;
    rec.historical_y.values += gaussian_vector(rng, rec.historical_y.values.size(), bs.sigma);
    rec.recent_y.values += gaussian_vector(rng, rec.recent_y.values.size(), bs.sigma);
    const HankelPartition part = partition_data(rec);
    const EstimateBundle est = bs.estimator == Estimator::MaximumLikelihood
                                   ? estimate_ml(part, rec, std::max(bs.sigma, 1e-12))
                                   : estimate_ls(part, rec);
    const ComponentErrors e = compare(est.g_column, est.y0_hat, bundle.g_column, bundle.y0_hat, p);
    e2G.push_back(e.e2G);
    eiG.push_back(e.eiG);
    e2y.push_back(e.e2y);
    eiy.push_back(e.eiy);
  }
  const double q = bs.percentile;
  return with_errors(bundle, ComponentErrors{percentile(e2G, q), percentile(eiG, q), percentile(e2y, q),
                                             percentile(eiy, q)});
}

void write_signal_csv(const std::string& path, const SignalTrajectory& signal) {
  std::vector<std::string> header{"t"};
  for (int i = 0; i < signal.dim; ++i) header.push_back("dim_" + std::to_string(i));
  csv::Table table(header);
  for (int t = 0; t < signal.length(); ++t) {
    std::vector<std::string> row{std::to_string(t)};
    const Vector v = signal.at(t);
    for (Eigen::Index i = 0; i < v.size(); ++i) row.push_back(csv::format_double(v(i)));
    table.add_row(std::move(row));
  }
  table.save(path);
}

SignalTrajectory read_signal_csv(const std::string& path) {
  const auto rows = csv::read_file(path);
  if (rows.empty() || rows[0].empty() || rows[0][0] != "t") {
    throw std::invalid_argument(path + ": missing header row `t,dim_0,...`");
  }
  const int dim = static_cast<int>(rows[0].size()) - 1;
  if (dim < 1) throw std::invalid_argument(path + ": no signal columns");
  for (int i = 0; i < dim; ++i) {
    if (rows[0][i + 1] != "dim_" + std::to_string(i)) {
      throw std::invalid_argument(path + ": header column " + std::to_string(i + 1) + " must be dim_" +
                                  std::to_string(i));
    }
  }
  const int T = static_cast<int>(rows.size()) - 1;
  Vector values(static_cast<Eigen::Index>(dim) * T);
  for (int t = 0; t < T; ++t) {
    const auto& row = rows[t + 1];
    if (static_cast<int>(row.size()) != dim + 1) {
      throw std::invalid_argument(path + ": row " + std::to_string(t + 1) + " has the wrong width");
    }
    if (std::stoi(row[0]) != t) throw std::invalid_argument(path + ": time column must count 0, 1, ...");
    for (int i = 0; i < dim; ++i) values(static_cast<Eigen::Index>(t) * dim + i) = std::stod(row[i + 1]);
  }
  return SignalTrajectory(values, dim);
}

void save_record(const std::string& dir, const DataRecord& record) {
  record.validate();
  std::filesystem::create_directories(dir);
  const std::filesystem::path d(dir);
  write_signal_csv((d / "historical_u.csv").string(), record.historical_u);
  write_signal_csv((d / "historical_y.csv").string(), record.historical_y);
  write_signal_csv((d / "recent_u.csv").string(), record.recent_u);
  write_signal_csv((d / "recent_y.csv").string(), record.recent_y);
}

DataRecord load_record(const std::string& dir, int T_ini, int N) {
  const std::filesystem::path d(dir);
  DataRecord rec;
  rec.historical_u = read_signal_csv((d / "historical_u.csv").string());
  rec.historical_y = read_signal_csv((d / "historical_y.csv").string());
  rec.recent_u = read_signal_csv((d / "recent_u.csv").string());
  rec.recent_y = read_signal_csv((d / "recent_y.csv").string());
  rec.T_ini = T_ini;
  rec.N = N;
  rec.validate();
  return rec;
}

}  // namespace safebiop
