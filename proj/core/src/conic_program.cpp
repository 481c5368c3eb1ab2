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

#include <cmath>
#include <sstream>

#include "safebiop/conic.hpp"

namespace safebiop::conic {

AffineMatrix::AffineMatrix(double value) : rows_(1), cols_(1), coef_(1, 0), off_(Vector::Constant(1, value)) {}

AffineMatrix::AffineMatrix(Eigen::Index rows, Eigen::Index cols)
    : rows_(rows), cols_(cols), coef_(rows * cols, 0), off_(Vector::Zero(rows * cols)) {}

AffineMatrix::AffineMatrix(Eigen::Index rows, Eigen::Index cols, Matrix coefficients, Vector offset)
    : rows_(rows), cols_(cols), coef_(std::move(coefficients)), off_(std::move(offset)) {
  require_dim("affine coefficient rows", rows * cols, coef_.rows());
  require_dim("affine offset length", rows * cols, off_.size());
}

AffineMatrix AffineMatrix::constant(const Matrix& M) {
  return AffineMatrix(M.rows(), M.cols(), Matrix(M.size(), 0), Eigen::Map<const Vector>(M.data(), M.size()));
}

bool AffineMatrix::entry_is_constant(Eigen::Index e) const {
  return coef_.cols() == 0 || coef_.row(e).cwiseAbs().maxCoeff() == 0.0;
}

AffineMatrix AffineMatrix::entry(Eigen::Index i, Eigen::Index j) const { return block(i, j, 1, 1); }

AffineMatrix AffineMatrix::block(Eigen::Index i, Eigen::Index j, Eigen::Index r, Eigen::Index c) const {
  if (i < 0 || j < 0 || i + r > rows_ || j + c > cols_) throw std::out_of_range("AffineMatrix::block out of range");
  AffineMatrix out(r, c);
  out.coef_.resize(r * c, coef_.cols());
  for (Eigen::Index jj = 0; jj < c; ++jj) {
    out.coef_.middleRows(jj * r, r) = coef_.middleRows((j + jj) * rows_ + i, r);
    out.off_.segment(jj * r, r) = off_.segment((j + jj) * rows_ + i, r);
  }
  return out;
}

AffineMatrix AffineMatrix::transpose() const {
  AffineMatrix out(cols_, rows_);
  out.coef_.resize(size(), coef_.cols());
  for (Eigen::Index i = 0; i < rows_; ++i) {
    for (Eigen::Index j = 0; j < cols_; ++j) {
      out.coef_.row(j + i * cols_) = coef_.row(i + j * rows_);
      out.off_(j + i * cols_) = off_(i + j * rows_);
    }
  }
  return out;
}

AffineMatrix AffineMatrix::vec() const { return AffineMatrix(size(), 1, coef_, off_); }

AffineMatrix AffineMatrix::sum() const {
  return AffineMatrix(1, 1, coef_.colwise().sum(), Vector::Constant(1, off_.sum()));
}

AffineMatrix AffineMatrix::padded(Eigen::Index n) const {
  if (n <= coef_.cols()) return *this;
  Matrix c = Matrix::Zero(coef_.rows(), n);
  c.leftCols(coef_.cols()) = coef_;
  return AffineMatrix(rows_, cols_, std::move(c), off_);
}

Matrix AffineMatrix::evaluate(const Vector& x) const {
  if (x.size() < coef_.cols()) throw DimensionError("AffineMatrix::evaluate: variable vector too short");
  const Vector v = coef_ * x.head(coef_.cols()) + off_;
  return Eigen::Map<const Matrix>(v.data(), rows_, cols_);
}

AffineMatrix AffineMatrix::operator-() const { return AffineMatrix(rows_, cols_, -coef_, -off_); }

AffineMatrix& AffineMatrix::operator+=(const AffineMatrix& other) {
  if (other.rows_ != rows_ || other.cols_ != cols_) {
    throw DimensionError("AffineMatrix +: shape " + std::to_string(rows_) + "x" + std::to_string(cols_) + " vs " +
                         std::to_string(other.rows_) + "x" + std::to_string(other.cols_));
  }
  const Eigen::Index n = std::max(nvars(), other.nvars());
  if (n > nvars()) *this = padded(n);
  coef_.leftCols(other.nvars()) += other.coef_;
  off_ += other.off_;
  return *this;
}

AffineMatrix& AffineMatrix::operator-=(const AffineMatrix& other) { return *this += -other; }

AffineMatrix& AffineMatrix::operator*=(double s) {
  coef_ *= s;
  off_ *= s;
  return *this;
}

AffineMatrix AffineMatrix::hstack(const std::vector<AffineMatrix>& parts) {
  if (parts.empty()) return AffineMatrix(0, 0);
  const Eigen::Index r = parts.front().rows();
  Eigen::Index c = 0, n = 0;
  for (const auto& p : parts) {
    require_dim("hstack rows", r, p.rows());
    c += p.cols();
    n = std::max(n, p.nvars());
  }
  Matrix coef = Matrix::Zero(r * c, n);
  Vector off(r * c);
  Eigen::Index at = 0;
  for (const auto& p : parts) {
    coef.block(at, 0, p.size(), p.nvars()) = p.coef_;
    off.segment(at, p.size()) = p.off_;
    at += p.size();
  }
  return AffineMatrix(r, c, std::move(coef), std::move(off));
}

AffineMatrix AffineMatrix::vstack(const std::vector<AffineMatrix>& parts) {
  std::vector<AffineMatrix> t;
  t.reserve(parts.size());
  for (const auto& p : parts) t.push_back(p.transpose());
  return hstack(t).transpose();
}

AffineMatrix operator+(AffineMatrix a, const AffineMatrix& b) { return a += b; }
AffineMatrix operator-(AffineMatrix a, const AffineMatrix& b) { return a -= b; }
AffineMatrix operator*(double s, AffineMatrix a) { return a *= s; }
AffineMatrix operator*(AffineMatrix a, double s) { return a *= s; }

AffineMatrix operator*(const Matrix& L, const AffineMatrix& X) {
  require_dim("left factor columns", X.rows(), L.cols());
  const Eigen::Index r = L.rows(), c = X.cols(), n = X.nvars();
  Matrix coef(r * c, n);
  Vector off(r * c);
  for (Eigen::Index j = 0; j < c; ++j) {
    coef.middleRows(j * r, r).noalias() = L * X.coefficients().middleRows(j * X.rows(), X.rows());
    off.segment(j * r, r).noalias() = L * X.offset().segment(j * X.rows(), X.rows());
  }
  return AffineMatrix(r, c, std::move(coef), std::move(off));
}

AffineMatrix operator*(const AffineMatrix& X, const Matrix& R) {
  require_dim("right factor rows", X.cols(), R.rows());
  const Eigen::Index r = X.rows(), c = R.cols(), n = X.nvars();
  Matrix coef = Matrix::Zero(r * c, n);
  Vector off = Vector::Zero(r * c);
  for (Eigen::Index jp = 0; jp < c; ++jp) {
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
      const double w = R(j, jp);
      if (w == 0.0) continue;
      coef.middleRows(jp * r, r) += w * X.coefficients().middleRows(j * r, r);
      off.segment(jp * r, r) += w * X.offset().segment(j * r, r);
    }
  }
  return AffineMatrix(r, c, std::move(coef), std::move(off));
}

const char* to_string(ConeKind kind) {
  switch (kind) {
    case ConeKind::Nonneg:
      return "nonneg";
    case ConeKind::SecondOrder:
      return "soc";
    case ConeKind::PSD:
      return "psd";
  }
  return "?";
}

const char* to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::Optimal:
      return "Optimal";
    case SolveStatus::Infeasible:
      return "Infeasible";
    case SolveStatus::Unbounded:
      return "Unbounded";
    case SolveStatus::NumericalFailure:
      return "NumericalFailure";
  }
  return "?";
}

int ConeDims::rows() const {
  int r = l;
  for (int k : q) r += k;
  for (int k : s) r += k * (k + 1) / 2;
  return r;
}

int ConeDims::degree() const {
  int d = l + static_cast<int>(q.size());
  for (int k : s) d += k;
  return d;
}

Vector svec(const Matrix& S) {
  const Eigen::Index n = S.rows();
  Vector v(n * (n + 1) / 2);
  Eigen::Index k = 0;
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = j; i < n; ++i) v(k++) = i == j ? S(i, j) : std::sqrt(2.0) * 0.5 * (S(i, j) + S(j, i));
  }
  return v;
}

Matrix smat(const Vector& v, int n) {
  require_dim("svec length", static_cast<Eigen::Index>(n) * (n + 1) / 2, v.size());
  Matrix S(n, n);
  Eigen::Index k = 0;
  for (int j = 0; j < n; ++j) {
    for (int i = j; i < n; ++i) {
      const double x = i == j ? v(k) : v(k) / std::sqrt(2.0);
      S(i, j) = x;
      S(j, i) = x;
      ++k;
    }
  }
  return S;
}

ConicProgram::VarId ConicProgram::add_variable(const std::string& name, Eigen::Index rows, Eigen::Index cols) {
  return add_variable(name, BoolMatrix::Constant(rows, cols, true));
}

ConicProgram::VarId ConicProgram::add_variable(const std::string& name, const BoolMatrix& mask) {
  Variable v;
  v.name = name;
  v.rows = mask.rows();
  v.cols = mask.cols();
  v.index.assign(static_cast<std::size_t>(mask.size()), -1);
  for (Eigen::Index j = 0; j < mask.cols(); ++j) {
    for (Eigen::Index i = 0; i < mask.rows(); ++i) {
      if (mask(i, j)) v.index[static_cast<std::size_t>(i + j * mask.rows())] = nscalar_++;
    }
  }
  vars_.push_back(std::move(v));
  return static_cast<VarId>(vars_.size() - 1);
}

AffineMatrix ConicProgram::expr(VarId id) const {
  const Variable& v = variable(id);
  Matrix coef = Matrix::Zero(v.rows * v.cols, nscalar_);
  for (std::size_t e = 0; e < v.index.size(); ++e) {
    if (v.index[e] >= 0) coef(static_cast<Eigen::Index>(e), v.index[e]) = 1.0;
  }
  return AffineMatrix(v.rows, v.cols, std::move(coef), Vector::Zero(v.rows * v.cols));
}

void ConicProgram::add_equality(const AffineMatrix& e, const std::string& label) {
  eqs_.push_back(e.vec());
  eq_labels_.push_back(label);
}

void ConicProgram::add_nonneg(const AffineMatrix& e, const std::string& label) {
  cones_.push_back(ConeConstraint{ConeKind::Nonneg, e.vec(), label});
}

void ConicProgram::add_second_order(const AffineMatrix& t, const AffineMatrix& x, const std::string& label) {
  if (t.size() != 1) throw DimensionError("add_second_order: t must be a scalar expression");
  cones_.push_back(ConeConstraint{ConeKind::SecondOrder, AffineMatrix::vstack({t, x.vec()}), label});
}

void ConicProgram::add_psd(const AffineMatrix& S, const std::string& label) {
  require_dim("PSD expression columns", S.rows(), S.cols());
  cones_.push_back(ConeConstraint{ConeKind::PSD, S, label});
}

void ConicProgram::minimize(const AffineMatrix& objective) {
  if (objective.size() != 1) throw DimensionError("minimize: objective must be a scalar expression");
  objective_ = objective;
}

namespace {

/// Rows of a (vectorized) expression appended to triplets as -coef (G) with h = offset.
void append_rows(const Matrix& coef, const Vector& off, int row0, std::vector<Eigen::Triplet<double>>& trips,
                 Vector& h, double sign) {
  for (Eigen::Index r = 0; r < coef.rows(); ++r) {
    for (Eigen::Index k = 0; k < coef.cols(); ++k) {
      const double a = coef(r, k);
      if (a != 0.0) trips.emplace_back(row0 + static_cast<int>(r), static_cast<int>(k), sign * a);
    }
    h(row0 + r) = off(r);
  }
}

/// Symmetric part of a square affine expression packed with svec.
void psd_rows(const AffineMatrix& S, Matrix& coef, Vector& off) {
  const Eigen::Index n = S.rows();
  const Eigen::Index nv = S.nvars();
  coef.resize(n * (n + 1) / 2, nv);
  off.resize(n * (n + 1) / 2);
  Eigen::Index k = 0;
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = j; i < n; ++i) {
      const Eigen::Index a = i + j * n, b = j + i * n;
      if (i == j) {
        coef.row(k) = S.coefficients().row(a);
        off(k) = S.offset()(a);
      } else {
        const double w = std::sqrt(2.0) * 0.5;
        coef.row(k) = w * (S.coefficients().row(a) + S.coefficients().row(b));
        off(k) = w * (S.offset()(a) + S.offset()(b));
      }
      ++k;
    }
  }
}

}  // namespace

StandardForm ConicProgram::lower() const {
  StandardForm sf;
  const int n = nscalar_;
  sf.c = Vector::Zero(n);
  const AffineMatrix obj = objective_.padded(n);
  sf.c = obj.coefficients().row(0).transpose();
  sf.c0 = obj.offset()(0);

  // Equalities: coef x + off = 0  ->  A x = -off.
  int meq = 0;
  for (const auto& e : eqs_) meq += static_cast<int>(e.size());
  std::vector<Eigen::Triplet<double>> at;
  sf.b = Vector::Zero(meq);
  int row = 0;
  for (const auto& e : eqs_) {
    append_rows(e.coefficients(), -e.offset(), row, at, sf.b, 1.0);
    row += static_cast<int>(e.size());
  }
  sf.A.resize(meq, n);
  sf.A.setFromTriplets(at.begin(), at.end());

  // Cone rows: s = coef x + off in K  ->  h - G x with G = -coef, h = off.
  std::vector<const ConeConstraint*> order;
  for (ConeKind kind : {ConeKind::Nonneg, ConeKind::SecondOrder, ConeKind::PSD}) {
    for (const auto& c : cones_) {
      if (c.kind == kind) order.push_back(&c);
    }
  }
  for (const auto* c : order) {
    if (c->kind == ConeKind::Nonneg) sf.dims.l += static_cast<int>(c->expr.size());
    if (c->kind == ConeKind::SecondOrder) sf.dims.q.push_back(static_cast<int>(c->expr.size()));
    if (c->kind == ConeKind::PSD) sf.dims.s.push_back(static_cast<int>(c->expr.rows()));
  }
  const int mc = sf.dims.rows();
  std::vector<Eigen::Triplet<double>> gt;
  sf.h = Vector::Zero(mc);
  row = 0;
  for (const auto* c : order) {
    if (c->kind == ConeKind::PSD) {
      Matrix coef;
      Vector off;
      psd_rows(c->expr, coef, off);
      append_rows(coef, off, row, gt, sf.h, -1.0);
      row += static_cast<int>(coef.rows());
    } else {
      append_rows(c->expr.coefficients(), c->expr.offset(), row, gt, sf.h, -1.0);
      row += static_cast<int>(c->expr.size());
    }
  }
  sf.G.resize(mc, n);
  sf.G.setFromTriplets(gt.begin(), gt.end());
  return sf;
}

Matrix ConicProgram::value(const Vector& x, VarId id) const {
  const Variable& v = variable(id);
  Matrix out = Matrix::Zero(v.rows, v.cols);
  for (std::size_t e = 0; e < v.index.size(); ++e) {
    if (v.index[e] >= 0) out(static_cast<Eigen::Index>(e) % v.rows, static_cast<Eigen::Index>(e) / v.rows) = x(v.index[e]);
  }
  return out;
}

std::string ConicProgram::dump() const {
  const StandardForm sf = lower();
  std::ostringstream os;
  os.precision(17);
  os << "# standard form: minimize c'x + c0  s.t.  A x = b,  h - G x in K\n";
  os << "variables " << nscalar_ << "\n";
  for (const auto& v : vars_) {
    os << "var " << v.name << " " << v.rows << "x" << v.cols << " :";
    for (int k : v.index) os << " " << k;
    os << "\n";
  }
  os << "objective c0 " << sf.c0 << "\n";
  for (Eigen::Index k = 0; k < sf.c.size(); ++k) {
    if (sf.c(k) != 0.0) os << "c " << k << " " << sf.c(k) << "\n";
  }
  const Eigen::SparseMatrix<double, Eigen::RowMajor> A = sf.A, G = sf.G;
  for (Eigen::Index r = 0; r < A.rows(); ++r) {
    os << "eq " << r << " b " << sf.b(r) << " :";
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(A, r); it; ++it) {
      os << " " << it.col() << ":" << it.value();
    }
    os << "\n";
  }
  os << "cones l " << sf.dims.l;
  for (int q : sf.dims.q) os << " q " << q;
  for (int s : sf.dims.s) os << " s " << s;
  os << "\n";
  int row = 0;
  auto emit = [&](const char* tag, int count) {
    for (int k = 0; k < count; ++k, ++row) {
      os << tag << " " << row << " h " << sf.h(row) << " :";
      for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(G, row); it; ++it) {
        os << " " << it.col() << ":" << it.value();
      }
      os << "\n";
    }
  };
  emit("nonneg", sf.dims.l);
  for (int q : sf.dims.q) emit("soc", q);
  for (int s : sf.dims.s) emit("psd", s * (s + 1) / 2);
  return os.str();
}

ConicSolution solve(const ConicProgram& program, const SolverOptions& options, const ConicBackend& backend) {
  bool has_psd = false;
  for (const auto& c : program.cones()) has_psd = has_psd || c.kind == ConeKind::PSD;
  if (has_psd && !backend.supports_psd()) {
    throw std::invalid_argument("solve: backend " + backend.name() + " does not support PSD cones");
  }
  ConicSolution sol = backend.solve(program.lower(), options);
  if (sol.x.size() == program.num_scalars()) {
    for (std::size_t k = 0; k < program.variables().size(); ++k) {
      sol.values[program.variables()[k].name] = program.value(sol.x, static_cast<int>(k));
    }
  }
  return sol;
}

void add_frobenius_epigraph(ConicProgram& prog, const AffineMatrix& expr, const AffineMatrix& t) {
  prog.add_second_order(t, expr, "frobenius");
}

AffineMatrix one_norm_epigraph(ConicProgram& prog, const AffineMatrix& row, const std::string& name) {
  const AffineMatrix v = row.vec();
  std::vector<Eigen::Index> live;
  double constant_part = 0.0;
  for (Eigen::Index e = 0; e < v.size(); ++e) {
    if (v.entry_is_constant(e)) {
      constant_part += std::abs(v.offset()(e));
    } else {
      live.push_back(e);
    }
  }
  AffineMatrix total(constant_part);
  if (live.empty()) return total;
  const auto id = prog.add_variable(name, static_cast<Eigen::Index>(live.size()), 1);
  const AffineMatrix s = prog.expr(id);
  std::vector<AffineMatrix> picked;
  picked.reserve(live.size());
  for (Eigen::Index e : live) picked.push_back(v.entry(e, 0));
  const AffineMatrix a = AffineMatrix::vstack(picked);
  prog.add_nonneg(s - a, name + "+");
  prog.add_nonneg(s + a, name + "-");
  return total + s.sum();
}

void add_row_one_norm(ConicProgram& prog, const AffineMatrix& row, const AffineMatrix& bound) {
  if (bound.size() != 1) throw DimensionError("add_row_one_norm: bound must be a scalar expression");
  prog.add_nonneg(bound - one_norm_epigraph(prog, row), "one_norm");
}

void add_matrix_inf_norm(ConicProgram& prog, const AffineMatrix& M, const AffineMatrix& tau) {
  for (Eigen::Index i = 0; i < M.rows(); ++i) add_row_one_norm(prog, M.row(i), tau);
}

void add_spectral_norm(ConicProgram& prog, const AffineMatrix& M, const AffineMatrix& gamma, SpectralMode mode) {
  if (gamma.size() != 1) throw DimensionError("add_spectral_norm: gamma must be a scalar expression");
  if (mode == SpectralMode::FrobeniusSurrogate) {
    add_frobenius_epigraph(prog, M, gamma);
    return;
  }
  const Eigen::Index r = M.rows(), c = M.cols();
  // gamma * I_n as a sum of rank-one placements e_k gamma e_k^T.
  auto gamma_eye = [&](Eigen::Index n) {
    AffineMatrix out(n, n);
    for (Eigen::Index k = 0; k < n; ++k) {
      Matrix ek = Matrix::Zero(n, 1);
      ek(k, 0) = 1.0;
      Matrix ekT = Matrix::Zero(1, n);
      ekT(0, k) = 1.0;
      out += ek * gamma * ekT;
    }
    return out;
  };
  const AffineMatrix top = AffineMatrix::hstack({gamma_eye(r), M});
  const AffineMatrix bottom = AffineMatrix::hstack({M.transpose(), gamma_eye(c)});
  prog.add_psd(AffineMatrix::vstack({top, bottom}), "spectral");
}

}  // namespace safebiop::conic
