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

#ifndef SAFEBIOP_CONIC_HPP
#define SAFEBIOP_CONIC_HPP

#include <Eigen/SparseCore>

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "safebiop/types.hpp"

namespace safebiop::conic {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor>;
using BoolMatrix = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>;

/**
 * @brief Matrix whose entries are affine functions of the program variables.
 *
 * Entry (i, j) is coefficients().row(i + j * rows()) * x + offset()(i + j * rows()).
 * Expressions created before later variables were declared simply have fewer coefficient columns.
 */
class AffineMatrix {
 public:
  AffineMatrix() = default;
  /// 1x1 constant.
  AffineMatrix(double value);  // NOLINT(google-explicit-constructor)
  /// rows x cols zero matrix.
  AffineMatrix(Eigen::Index rows, Eigen::Index cols);
  AffineMatrix(Eigen::Index rows, Eigen::Index cols, Matrix coefficients, Vector offset);

  static AffineMatrix constant(const Matrix& M);

  Eigen::Index rows() const { return rows_; }
  Eigen::Index cols() const { return cols_; }
  Eigen::Index size() const { return rows_ * cols_; }
  Eigen::Index nvars() const { return coef_.cols(); }
  const Matrix& coefficients() const { return coef_; }
  const Vector& offset() const { return off_; }

  /// True when entry e (column-major) has no variable dependence.
  bool entry_is_constant(Eigen::Index e) const;
  AffineMatrix entry(Eigen::Index i, Eigen::Index j) const;
  AffineMatrix block(Eigen::Index i, Eigen::Index j, Eigen::Index r, Eigen::Index c) const;
  AffineMatrix row(Eigen::Index i) const { return block(i, 0, 1, cols_); }
  AffineMatrix col(Eigen::Index j) const { return block(0, j, rows_, 1); }
  AffineMatrix transpose() const;
  /// Column-major vectorization.
  AffineMatrix vec() const;
  /// Sum of all entries (1x1).
  AffineMatrix sum() const;
  /// Widens the coefficient matrix to n columns.
  AffineMatrix padded(Eigen::Index n) const;

  Matrix evaluate(const Vector& x) const;

  AffineMatrix operator-() const;
  AffineMatrix& operator+=(const AffineMatrix& other);
  AffineMatrix& operator-=(const AffineMatrix& other);
  AffineMatrix& operator*=(double s);

  static AffineMatrix hstack(const std::vector<AffineMatrix>& parts);
  static AffineMatrix vstack(const std::vector<AffineMatrix>& parts);

 private:
  Eigen::Index rows_ = 0;
  Eigen::Index cols_ = 0;
  Matrix coef_;
  Vector off_;
};

AffineMatrix operator+(AffineMatrix a, const AffineMatrix& b);
AffineMatrix operator-(AffineMatrix a, const AffineMatrix& b);
AffineMatrix operator*(double s, AffineMatrix a);
AffineMatrix operator*(AffineMatrix a, double s);
/// Constant times affine matrix.
AffineMatrix operator*(const Matrix& L, const AffineMatrix& X);
/// Affine matrix times constant.
AffineMatrix operator*(const AffineMatrix& X, const Matrix& R);

enum class ConeKind { Nonneg, SecondOrder, PSD };

const char* to_string(ConeKind kind);

/// Cone sizes in solver row order: all nonnegative rows, then second-order cones, then PSD blocks (svec).
struct ConeDims {
  int l = 0;
  std::vector<int> q;
  std::vector<int> s;  ///< matrix orders

  int rows() const;
  /// l + (#second-order cones) + sum of PSD orders.
  int degree() const;
};

/**
 * @brief min c'x + c0  s.t.  A x = b,  h - G x in K.
 */
struct StandardForm {
  Vector c;
  double c0 = 0.0;
  SparseMatrix A;
  Vector b;
  SparseMatrix G;
  Vector h;
  ConeDims dims;
};

enum class SolveStatus { Optimal, Infeasible, Unbounded, NumericalFailure };

const char* to_string(SolveStatus status);

struct Residuals {
  double primal = 0.0;        ///< scaled equality and cone-row residual
  double dual = 0.0;          ///< scaled dual residual
  double gap = 0.0;           ///< absolute duality gap s'z
  double relative_gap = 0.0;  ///< gap / |objective|
};

struct ConicSolution {
  SolveStatus status = SolveStatus::NumericalFailure;
  double objective_value = 0.0;
  Vector x;
  Vector y;
  Vector z;
  Vector s;
  Residuals residuals;
  int iterations = 0;
  /// Variable values by name (filled by solve(const ConicProgram&)).
  std::map<std::string, Matrix> values;
};

struct SolverOptions {
  double feastol = 1e-8;
  double abstol = 1e-8;
  double reltol = 1e-8;
  int max_iterations = 100;
  /// Static diagonal regularization of the reduced KKT system.
  double regularization = 1e-11;
  int refinement_steps = 3;
  bool verbose = false;
};

/// Solver backend interface.
class ConicBackend {
 public:
  virtual ~ConicBackend() = default;
  virtual std::string name() const = 0;
  virtual bool supports_psd() const = 0;
  virtual ConicSolution solve(const StandardForm& problem, const SolverOptions& options) const = 0;
};

/**
 * @brief Homogeneous self-dual primal-dual interior-point method with Nesterov-Todd scaling.
 *
 * Mehrotra predictor-corrector; KKT systems are reduced to normal equations and factored with a sparse LDL^T.
 */
class InteriorPointBackend : public ConicBackend {
 public:
  std::string name() const override { return "ipm-nt"; }
  bool supports_psd() const override { return true; }
  ConicSolution solve(const StandardForm& problem, const SolverOptions& options) const override;
};

const ConicBackend& default_backend();

/**
 * @brief Builder for conic programs over named matrix variables.
 */
class ConicProgram {
 public:
  struct Variable {
    std::string name;
    Eigen::Index rows = 0;
    Eigen::Index cols = 0;
    /// Solver index per entry (column-major), -1 for entries fixed to zero by the sparsity mask.
    std::vector<int> index;
  };

  struct ConeConstraint {
    ConeKind kind = ConeKind::Nonneg;
    AffineMatrix expr;  ///< column vector (Nonneg, SecondOrder: [t; x]) or symmetric matrix (PSD)
    std::string label;
  };

  using VarId = int;

  VarId add_variable(const std::string& name, Eigen::Index rows, Eigen::Index cols);
  /// Only entries with mask == true become solver variables; the rest are fixed to zero.
  VarId add_variable(const std::string& name, const BoolMatrix& mask);

  AffineMatrix expr(VarId id) const;
  const Variable& variable(VarId id) const { return vars_.at(static_cast<std::size_t>(id)); }
  const std::vector<Variable>& variables() const { return vars_; }
  int num_scalars() const { return nscalar_; }

  /// expr == 0 elementwise.
  void add_equality(const AffineMatrix& expr, const std::string& label = "");
  /// expr >= 0 elementwise.
  void add_nonneg(const AffineMatrix& expr, const std::string& label = "");
  /// ||vec(x)||_2 <= t with t a 1x1 expression.
  void add_second_order(const AffineMatrix& t, const AffineMatrix& x, const std::string& label = "");
  /// Symmetric expression S is positive semidefinite (the symmetric part is used).
  void add_psd(const AffineMatrix& S, const std::string& label = "");
  void minimize(const AffineMatrix& objective);

  const std::vector<AffineMatrix>& equalities() const { return eqs_; }
  const std::vector<ConeConstraint>& cones() const { return cones_; }
  const AffineMatrix& objective() const { return objective_; }

  StandardForm lower() const;
  Matrix value(const Vector& x, VarId id) const;
  /// Plain-text standard-form listing: objective, constraint rows, cone tags.
  std::string dump() const;

 private:
  std::vector<Variable> vars_;
  std::vector<AffineMatrix> eqs_;
  std::vector<std::string> eq_labels_;
  std::vector<ConeConstraint> cones_;
  AffineMatrix objective_{0.0};
  int nscalar_ = 0;
};

ConicSolution solve(const ConicProgram& program, const SolverOptions& options = {},
                    const ConicBackend& backend = default_backend());

/// ||vec(expr)||_2 <= t.
void add_frobenius_epigraph(ConicProgram& prog, const AffineMatrix& expr, const AffineMatrix& t);

/**
 * @brief Returns an affine scalar that upper-bounds ||row||_1 at every feasible point.
 *
 * Auxiliary variables s_i >= |row_i| are added for non-constant entries; constant entries contribute |value|.
 */
AffineMatrix one_norm_epigraph(ConicProgram& prog, const AffineMatrix& row, const std::string& name = "abs");

/// ||row||_1 <= bound.
void add_row_one_norm(ConicProgram& prog, const AffineMatrix& row, const AffineMatrix& bound);

/// Max row 1-norm of M <= tau.
void add_matrix_inf_norm(ConicProgram& prog, const AffineMatrix& M, const AffineMatrix& tau);

enum class SpectralMode { PSD, FrobeniusSurrogate };

/// ||M||_2 <= gamma. PSD mode is exact, FrobeniusSurrogate bounds ||M||_F instead.
void add_spectral_norm(ConicProgram& prog, const AffineMatrix& M, const AffineMatrix& gamma, SpectralMode mode);

/// Symmetric-matrix packing used for PSD rows (column-major lower triangle, off-diagonals scaled by sqrt 2).
Vector svec(const Matrix& S);
Matrix smat(const Vector& v, int n);

}  // namespace safebiop::conic

#endif  // SAFEBIOP_CONIC_HPP
