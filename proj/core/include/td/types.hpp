#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "td/error.hpp"

namespace td {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Signed, 1-based generator indices: +k is generator k, -k its inverse.
using Word = std::vector<int>;

/// Numerical thresholds shared by the library. Defaults are the documented
/// contract values; the CLI exposes each as a --tol-* override.
struct Tolerances {
  double det = 1e-9;          // |det - 1| after renormalization
  double word = 1e-8;         // word evaluation vs. stored matrix
  double gap_min = 1e-8;      // singular-value log-gap needed for a flag
  double transverse = 1e-10;  // transversality conditioning floor
  double dedup_quantum = 1e-6;
  double dedup_confirm = 1e-7;   // entrywise pre-filter, relative per entry
  double nondiscrete = 1e-12;    // scale-relative floor of the entrywise test
  double dedup_identity = 1e-6;  // |w'^-1 w -+ I| for a confirmed duplicate
};

/// An element of SL(d,R) together with the generator word that produced it.
///
/// The inverse is carried alongside the matrix. Products propagate both
/// factors exactly, which keeps the smallest singular values of long words
/// accurate (they are read off the inverse rather than the matrix itself).
class GroupElement {
 public:
  /// Renormalizes to det = 1 by dividing by det^(1/d). Throws SingularMatrix
  /// for (numerically) singular input and when det < 0 in even dimension.
  explicit GroupElement(Matrix m, Word word = {});

  /// Trusted constructor for a matrix/inverse pair that is already unimodular.
  static GroupElement from_pair(Matrix m, Matrix inverse, Word word = {});
  static GroupElement identity(int dim);

  int dim() const { return static_cast<int>(m_.rows()); }
  const Matrix& matrix() const { return m_; }
  const Matrix& inverse_matrix() const { return inv_; }
  const Word& word() const { return word_; }

  GroupElement inverse() const;
  GroupElement operator*(const GroupElement& rhs) const;

 private:
  GroupElement() = default;
  Matrix m_;
  Matrix inv_;
  Word word_;
};

/// Free reduction of a word (cancels adjacent x x^-1 pairs).
Word free_reduce(const Word& w);
Word invert_word(const Word& w);
/// Freely and cyclically reduced conjugate of w.
Word cyclic_reduce(const Word& w);

/// Evaluates a word over a generator list (index k-1 holds generator k).
Matrix evaluate_word(const Word& w, std::span<const GroupElement> generators);

/// True when the stored word reproduces the matrix within `tol`, relative to
/// the matrix scale. Elements with an empty word always verify.
bool verify_word(const GroupElement& g, std::span<const GroupElement> generators,
                 double tol = Tolerances{}.word);

/// A point of the model Cartan subspace: trace-zero real d-vector.
struct CartanVector {
  Vector entries;

  int dim() const { return static_cast<int>(entries.size()); }
  double operator[](int i) const { return entries(i); }
};

/// Sorted subset theta of {1, ..., d-1} (simple roots alpha_k).
class RootSubset {
 public:
  RootSubset() = default;
  RootSubset(int dim, std::vector<int> indices);

  static RootSubset full(int dim);

  int dim() const { return dim_; }
  const std::vector<int>& indices() const { return indices_; }
  std::size_t size() const { return indices_.size(); }
  bool empty() const { return indices_.empty(); }
  bool contains(int k) const;
  /// Position of k inside indices(), or -1.
  int position(int k) const;
  bool is_symmetric() const;
  /// theta union iota(theta).
  RootSubset symmetrized() const;

  bool operator==(const RootSubset&) const = default;

 private:
  int dim_ = 0;
  std::vector<int> indices_;
};

/// Coordinates in the fundamental-weight basis {omega_k : k in theta}.
/// values[i] belongs to theta.indices()[i].
struct WeightVector {
  RootSubset theta;
  std::vector<double> values;

  double at(int k) const;
  double max_abs_diff(const WeightVector& other) const;
};

/// phi = sum_{k in theta} c_k omega_k, with omega_k(H) = h_1 + ... + h_k.
struct LinearFunctional {
  RootSubset theta;
  std::vector<double> coeffs;  // aligned with theta.indices()

  double coeff(int k) const;
  double operator()(const CartanVector& h) const;
  double operator()(const WeightVector& w) const;
  LinearFunctional scaled(double c) const;

  /// omega_k alone.
  static LinearFunctional fundamental_weight(int dim, int k);
  /// alpha_k expressed in weight coordinates is only available when the
  /// weights around k are in theta; this helper builds the d=2 root alpha_1
  /// = 2 omega_1 and general sums of weights.
  static LinearFunctional from_pairs(int dim, const std::vector<std::pair<int, double>>& pairs);
};

/// Convex combination lambda*a + (1-lambda)*b on the union of both supports.
LinearFunctional combine(const LinearFunctional& a, const LinearFunctional& b, double lambda);

/// A partial flag F^{i_1} < ... < F^{i_k} in R^d.
///
/// Stored as a full orthonormal frame: for every i in theta the first i
/// columns span F^i, so nesting holds by construction.
class PartialFlag {
 public:
  PartialFlag() = default;
  /// Orthonormalizes the columns in order (Householder QR, signs fixed so
  /// the diagonal of R is non-negative).
  PartialFlag(RootSubset theta, const Matrix& frame);

  static PartialFlag standard(RootSubset theta);
  /// Frame e_d, e_{d-1}, ..., e_1: transverse to the standard flag.
  static PartialFlag opposite_standard(RootSubset theta);

  const RootSubset& theta() const { return theta_; }
  int dim() const { return theta_.dim(); }
  const Matrix& frame() const { return frame_; }
  /// Orthonormal basis (d x i) of F^i; i may be any 0..d.
  Matrix subspace(int i) const { return frame_.leftCols(i); }
  /// Orthonormal basis of the orthogonal complement of F^i.
  Matrix complement(int i) const { return frame_.rightCols(dim() - i); }

  /// g . F. The leading half of the frame is pushed by g and the trailing
  /// half (complements) by g^{-T}, so both ends stay accurate for long words.
  PartialFlag transformed(const GroupElement& g) const;

  /// Adopts an already orthonormal frame without re-factoring it.
  static PartialFlag from_frame(RootSubset theta, Matrix orthonormal_frame);

  /// Checks dim F^i = i and F^i inside F^j within tol for i < j in theta.
  bool well_formed(double tol = 1e-10) const;

 private:
  RootSubset theta_;
  Matrix frame_;
};

/// Builds an orthonormal frame whose leading columns span the leading
/// columns of `top` and whose trailing k columns span the leading k columns of
/// `bottom` (reversed). Used wherever a flag is assembled from a "forward"
/// half and a "complement" half.
Matrix assemble_frame(const Matrix& top, const Matrix& bottom);

}  // namespace td
