#include "td/types.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace td {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::SingularMatrix: return "SingularMatrix";
    case ErrorCode::DegenerateGap: return "DegenerateGap";
    case ErrorCode::NonSymmetricTheta: return "NonSymmetricTheta";
    case ErrorCode::NotTransverse: return "NotTransverse";
    case ErrorCode::EigenFailure: return "EigenFailure";
    case ErrorCode::PreconditionViolated: return "PreconditionViolated";
    case ErrorCode::BudgetExceeded: return "BudgetExceeded";
    case ErrorCode::NonDiscreteSuspect: return "NonDiscreteSuspect";
    case ErrorCode::InsufficientGrowth: return "InsufficientGrowth";
    case ErrorCode::NonSummable: return "NonSummable";
    case ErrorCode::PointOnBoundary: return "PointOnBoundary";
    case ErrorCode::NotSmoothCertificate: return "NotSmoothCertificate";
    case ErrorCode::EmptyCell: return "EmptyCell";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

namespace {

Matrix exact_inverse(const Matrix& m) {
  if (m.rows() == 2) {
    Matrix inv(2, 2);
    const double det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
    inv << m(1, 1), -m(0, 1), -m(1, 0), m(0, 0);
    return inv / det;
  }
  return m.fullPivLu().inverse();
}

}  // namespace

GroupElement::GroupElement(Matrix m, Word word) : word_(std::move(word)) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    throw Error(ErrorCode::ConfigError, "group element must be a non-empty square matrix");
  }
  const int d = static_cast<int>(m.rows());
  const double det = m.determinant();
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if (!std::isfinite(det) || std::abs(det) < 1e-300 * std::pow(scale, d)) {
    throw Error(ErrorCode::SingularMatrix, "matrix is singular");
  }
  double root;
  if (det > 0) {
    root = std::pow(det, 1.0 / d);
  } else if (d % 2 == 1) {
    root = -std::pow(-det, 1.0 / d);
  } else {
    throw Error(ErrorCode::SingularMatrix, "negative determinant in even dimension is not in SL(d,R)");
  }
  m_ = m / root;
  inv_ = exact_inverse(m_);
}

GroupElement GroupElement::from_pair(Matrix m, Matrix inverse, Word word) {
  GroupElement g;
  g.m_ = std::move(m);
  g.inv_ = std::move(inverse);
  g.word_ = std::move(word);
  return g;
}

GroupElement GroupElement::identity(int dim) {
  return from_pair(Matrix::Identity(dim, dim), Matrix::Identity(dim, dim));
}

GroupElement GroupElement::inverse() const { return from_pair(inv_, m_, invert_word(word_)); }

GroupElement GroupElement::operator*(const GroupElement& rhs) const {
  Word w = word_;
  w.insert(w.end(), rhs.word_.begin(), rhs.word_.end());
  return from_pair(m_ * rhs.m_, rhs.inv_ * inv_, free_reduce(w));
}

Word free_reduce(const Word& w) {
  Word out;
  out.reserve(w.size());
  for (int letter : w) {
    if (!out.empty() && out.back() == -letter) {
      out.pop_back();
    } else {
      out.push_back(letter);
    }
  }
  return out;
}

Word invert_word(const Word& w) {
  Word out(w.rbegin(), w.rend());
  for (int& letter : out) letter = -letter;
  return out;
}

Word cyclic_reduce(const Word& w) {
  const Word r = free_reduce(w);
  std::size_t lo = 0, hi = r.size();
  while (hi - lo >= 2 && r[lo] == -r[hi - 1]) {
    ++lo;
    --hi;
  }
  return Word(r.begin() + static_cast<long>(lo), r.begin() + static_cast<long>(hi));
}

Matrix evaluate_word(const Word& w, std::span<const GroupElement> generators) {
  if (generators.empty()) throw Error(ErrorCode::ConfigError, "no generators registered");
  const int d = generators.front().dim();
  Matrix acc = Matrix::Identity(d, d);
  for (int letter : w) {
    const int idx = std::abs(letter) - 1;
    if (letter == 0 || idx >= static_cast<int>(generators.size())) {
      throw Error(ErrorCode::ConfigError, "word letter out of range");
    }
    const auto& g = generators[static_cast<std::size_t>(idx)];
    acc = acc * (letter > 0 ? g.matrix() : g.inverse_matrix());
  }
  return acc;
}

bool verify_word(const GroupElement& g, std::span<const GroupElement> generators, double tol) {
  if (g.word().empty()) return true;
  const Matrix m = evaluate_word(g.word(), generators);
  const double scale = std::max(1.0, g.matrix().cwiseAbs().maxCoeff());
  return (m - g.matrix()).cwiseAbs().maxCoeff() <= tol * scale;
}

RootSubset::RootSubset(int dim, std::vector<int> indices) : dim_(dim), indices_(std::move(indices)) {
  std::sort(indices_.begin(), indices_.end());
  indices_.erase(std::unique(indices_.begin(), indices_.end()), indices_.end());
  for (int k : indices_) {
    if (k < 1 || k > dim - 1) {
      throw Error(ErrorCode::ConfigError,
                  "root index " + std::to_string(k) + " outside 1.." + std::to_string(dim - 1));
    }
  }
}

RootSubset RootSubset::full(int dim) {
  std::vector<int> all;
  for (int k = 1; k < dim; ++k) all.push_back(k);
  return {dim, all};
}

bool RootSubset::contains(int k) const { return position(k) >= 0; }

int RootSubset::position(int k) const {
  auto it = std::lower_bound(indices_.begin(), indices_.end(), k);
  if (it == indices_.end() || *it != k) return -1;
  return static_cast<int>(it - indices_.begin());
}

bool RootSubset::is_symmetric() const {
  return std::all_of(indices_.begin(), indices_.end(), [&](int k) { return contains(dim_ - k); });
}

RootSubset RootSubset::symmetrized() const {
  std::vector<int> all = indices_;
  for (int k : indices_) all.push_back(dim_ - k);
  return {dim_, all};
}

double WeightVector::at(int k) const {
  const int p = theta.position(k);
  if (p < 0) throw Error(ErrorCode::ConfigError, "weight index " + std::to_string(k) + " not in theta");
  return values[static_cast<std::size_t>(p)];
}

double WeightVector::max_abs_diff(const WeightVector& other) const {
  double m = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) m = std::max(m, std::abs(values[i] - other.values[i]));
  return m;
}

double LinearFunctional::coeff(int k) const {
  const int p = theta.position(k);
  return p < 0 ? 0.0 : coeffs[static_cast<std::size_t>(p)];
}

double LinearFunctional::operator()(const CartanVector& h) const {
  double total = 0.0;
  double partial = 0.0;
  int next = 0;
  const auto& idx = theta.indices();
  for (int i = 0; i < h.dim() && next < static_cast<int>(idx.size()); ++i) {
    partial += h.entries(i);
    if (idx[static_cast<std::size_t>(next)] == i + 1) {
      total += coeffs[static_cast<std::size_t>(next)] * partial;
      ++next;
    }
  }
  return total;
}

double LinearFunctional::operator()(const WeightVector& w) const {
  double total = 0.0;
  for (std::size_t i = 0; i < coeffs.size(); ++i) {
    total += coeffs[i] * w.at(theta.indices()[i]);
  }
  return total;
}

LinearFunctional LinearFunctional::scaled(double c) const {
  LinearFunctional out = *this;
  for (double& x : out.coeffs) x *= c;
  return out;
}

LinearFunctional LinearFunctional::fundamental_weight(int dim, int k) {
  return {RootSubset(dim, {k}), {1.0}};
}

LinearFunctional LinearFunctional::from_pairs(int dim, const std::vector<std::pair<int, double>>& pairs) {
  std::map<int, double> acc;
  for (auto [k, c] : pairs) acc[k] += c;
  std::vector<int> idx;
  std::vector<double> coeffs;
  for (auto [k, c] : acc) {
    idx.push_back(k);
    coeffs.push_back(c);
  }
  return {RootSubset(dim, idx), coeffs};
}

LinearFunctional combine(const LinearFunctional& a, const LinearFunctional& b, double lambda) {
  std::vector<std::pair<int, double>> pairs;
  for (std::size_t i = 0; i < a.coeffs.size(); ++i) pairs.emplace_back(a.theta.indices()[i], lambda * a.coeffs[i]);
  for (std::size_t i = 0; i < b.coeffs.size(); ++i) {
    pairs.emplace_back(b.theta.indices()[i], (1.0 - lambda) * b.coeffs[i]);
  }
  return LinearFunctional::from_pairs(a.theta.dim(), pairs);
}

PartialFlag::PartialFlag(RootSubset theta, const Matrix& frame) : theta_(std::move(theta)) {
  const int d = theta_.dim();
  if (frame.rows() != d || frame.cols() > d || frame.cols() == 0) {
    throw Error(ErrorCode::ConfigError, "flag frame has wrong shape");
  }
  Eigen::HouseholderQR<Matrix> qr(frame);
  Matrix q = qr.householderQ() * Matrix::Identity(d, d);
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < std::min<int>(d, static_cast<int>(frame.cols())); ++j) {
    if (r(j, j) < 0) q.col(j) = -q.col(j);
  }
  frame_ = std::move(q);
}

PartialFlag PartialFlag::standard(RootSubset theta) {
  const int d = theta.dim();
  return {std::move(theta), Matrix::Identity(d, d)};
}

PartialFlag PartialFlag::opposite_standard(RootSubset theta) {
  const int d = theta.dim();
  Matrix rev = Matrix::Zero(d, d);
  for (int i = 0; i < d; ++i) rev(d - 1 - i, i) = 1.0;
  return {std::move(theta), rev};
}

PartialFlag PartialFlag::transformed(const GroupElement& g) const {
  const int d = dim();
  const int h = d / 2;
  const Matrix top = g.matrix() * frame_.leftCols(h);
  // odd d: the middle direction is recovered as the complement of both ends
  const Matrix bottom = g.inverse_matrix().transpose() * frame_.rightCols(h).rowwise().reverse();
  return from_frame(theta_, assemble_frame(top, bottom));
}

PartialFlag PartialFlag::from_frame(RootSubset theta, Matrix orthonormal_frame) {
  PartialFlag f;
  f.theta_ = std::move(theta);
  f.frame_ = std::move(orthonormal_frame);
  return f;
}

Matrix assemble_frame(const Matrix& top, const Matrix& bottom) {
  const int d = static_cast<int>(top.rows());
  const int h = static_cast<int>(top.cols());
  const int b = static_cast<int>(bottom.cols());
  Matrix frame(d, d);
  Matrix bq;
  if (b > 0) {
    Eigen::HouseholderQR<Matrix> qr(bottom);
    bq = (qr.householderQ() * Matrix::Identity(d, b));
  } else {
    bq = Matrix(d, 0);
  }
  Matrix t = top - bq * (bq.transpose() * top);
  Matrix tq(d, h);
  if (h > 0) {
    Eigen::HouseholderQR<Matrix> qr(t);
    tq = qr.householderQ() * Matrix::Identity(d, h);
    // one re-orthogonalization pass against the bottom block
    tq -= bq * (bq.transpose() * tq);
    Eigen::HouseholderQR<Matrix> qr2(tq);
    tq = qr2.householderQ() * Matrix::Identity(d, h);
  }
  frame.leftCols(h) = tq;
  const int middle = d - h - b;
  if (middle > 0) {
    Matrix known(d, h + b);
    known << tq, bq;
    Eigen::HouseholderQR<Matrix> qr(known);
    const Matrix full = qr.householderQ() * Matrix::Identity(d, d);
    frame.middleCols(h, middle) = full.rightCols(middle);
  }
  frame.rightCols(b) = bq.rowwise().reverse();
  return frame;
}

bool PartialFlag::well_formed(double tol) const {
  const int d = dim();
  if (frame_.rows() != d || frame_.cols() != d) return false;
  const Matrix gram = frame_.transpose() * frame_;
  if ((gram - Matrix::Identity(d, d)).cwiseAbs().maxCoeff() > tol) return false;
  const auto& idx = theta_.indices();
  for (std::size_t a = 0; a + 1 < idx.size(); ++a) {
    const Matrix small = subspace(idx[a]);
    const Matrix big = subspace(idx[a + 1]);
    const Matrix resid = small - big * (big.transpose() * small);
    if (resid.cwiseAbs().maxCoeff() > tol) return false;
  }
  return true;
}

}  // namespace td
