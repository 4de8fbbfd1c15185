#include "td/presets.hpp"

#include <cmath>
#include <numbers>

namespace td {

namespace {

Matrix rotation(double angle) {
  Matrix r(2, 2);
  r << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
  return r;
}

Matrix diag2(double x) {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 0) = x;
  m(1, 1) = 1.0 / x;
  return m;
}

Matrix block(const Matrix& a, const Matrix& b) {
  Matrix m = Matrix::Zero(a.rows() + b.rows(), a.cols() + b.cols());
  m.topLeftCorner(a.rows(), a.cols()) = a;
  m.bottomRightCorner(b.rows(), b.cols()) = b;
  return m;
}

GroupPreset cyclic(double x, std::string name) {
  GroupPreset p;
  p.name = std::move(name);
  p.description = "cyclic group generated by diag(x, 1/x)";
  p.generators = {GroupElement(diag2(x), {1})};
  p.theta = RootSubset(2, {1});
  p.domain = "klein-disk";
  p.free = true;
  return p;
}

// Genus-2 surface group: side pairings of the regular octagon with interior
// angles pi/4. Opposite sides are paired by translations of length L with
// cosh(L/2) = 1 + sqrt 2, and the pairings satisfy a1 a2^-1 a3 a4^-1 a1^-1 a2 a3^-1 a4 = 1.
GroupPreset surface2() {
  const double half = std::acosh(1.0 + std::numbers::sqrt2);
  GroupPreset p;
  p.name = "surface2";
  p.description = "genus-2 surface group (regular octagon side pairings)";
  const Matrix t = diag2(std::exp(half));
  for (int k = 0; k < 4; ++k) {
    // rotation of the disk by k*pi/4 is rotation by k*pi/8 in SL(2,R)
    const Matrix r = rotation(-k * std::numbers::pi / 8);
    p.generators.emplace_back(Matrix(r * t * r.transpose()), Word{k + 1});
  }
  p.theta = RootSubset(2, {1});
  p.domain = "klein-disk";
  return p;
}

}  // namespace

std::vector<std::string> preset_names() {
  return {"cyclic",   "cyclic2",  "schottky", "schottky10", "schottky-bent", "sym2-schottky",
          "block",    "product",  "surface2", "elliptic",   "sanov"};
}

GroupPreset schottky_preset(double lambda, double angle) {
  GroupPreset p;
  p.name = "schottky";
  p.description = "Schottky group <a, b>, a = diag(lambda, 1/lambda), b = r a r^T";
  const Matrix a = diag2(lambda);
  const Matrix r = rotation(angle);
  p.generators = {GroupElement(a, {1}), GroupElement(Matrix(r * a * r.transpose()), {2})};
  p.theta = RootSubset(2, {1});
  p.domain = "klein-disk";
  p.free = true;
  p.subgroups = {
      {"a", {{1}}},
      {"b", {{2}}},
      {"a2b2", {{1, 1}, {2, 2}}},
      {"a4b4", {{1, 1, 1, 1}, {2, 2, 2, 2}}},
      {"ab2", {{1}, {2, 2}}},
      {"a8b8", {{1, 1, 1, 1, 1, 1, 1, 1}, {2, 2, 2, 2, 2, 2, 2, 2}}},
      // kernel of F_2 -> Z/2 counting b: finite index, same exponent as the whole group
      {"index2", {{1}, {2, 2}, {2, 1, -2}}},
  };
  return p;
}

Matrix sym2(const Matrix& a) {
  // orthonormal basis e1^2, sqrt2 e1 e2, e2^2: Sym^2 of an orthogonal matrix
  // stays orthogonal, so the singular values are sigma^2, 1, sigma^-2
  const double p = a(0, 0), q = a(0, 1), r = a(1, 0), s = a(1, 1);
  const double w = std::numbers::sqrt2;
  Matrix m(3, 3);
  m << p * p, w * p * q, q * q,  //
      w * p * r, p * s + q * r, w * q * s,  //
      r * r, w * r * s, s * s;
  return m;
}

GroupPreset sym2_preset(const GroupPreset& sl2) {
  GroupPreset p = sl2;
  p.name = "sym2-" + sl2.name;
  p.description = "symmetric square of " + sl2.name;
  p.generators.clear();
  for (const auto& g : sl2.generators) {
    p.generators.push_back(GroupElement::from_pair(sym2(g.matrix()), sym2(g.inverse_matrix()), g.word()));
  }
  p.theta = RootSubset(3, {1, 2});
  p.domain.clear();
  return p;
}

GroupPreset subgroup_preset(const GroupPreset& parent, const std::vector<Word>& words, std::string name,
                            bool free) {
  GroupPreset p;
  p.name = std::move(name);
  p.description = "subgroup of " + parent.name;
  p.theta = parent.theta;
  p.domain = parent.domain;
  p.free = free;
  p.integer = parent.integer;
  for (std::size_t i = 0; i < words.size(); ++i) {
    GroupElement g = GroupElement::identity(parent.generators.front().dim());
    for (int x : words[i]) {
      const auto& gen = parent.generators.at(static_cast<std::size_t>(std::abs(x) - 1));
      g = g * (x > 0 ? gen : gen.inverse());
    }
    p.generators.push_back(GroupElement::from_pair(g.matrix(), g.inverse_matrix(), {static_cast<int>(i) + 1}));
  }
  return p;
}

GroupPreset conjugate_preset(const GroupPreset& p, const Matrix& c) {
  GroupPreset out = p;
  const Matrix ci = c.inverse();
  out.generators.clear();
  for (const auto& g : p.generators) {
    out.generators.push_back(
        GroupElement::from_pair(c * g.matrix() * ci, c * g.inverse_matrix() * ci, g.word()));
  }
  out.domain.clear();
  out.name = p.name + "-conj";
  return out;
}

GroupPreset make_preset(std::string_view name) {
  if (name == "cyclic") return cyclic(std::numbers::e, "cyclic");
  if (name == "cyclic2") return cyclic(2.0, "cyclic2");
  if (name == "schottky") return schottky_preset(4.0);
  if (name == "schottky10") {
    auto p = schottky_preset(10.0);
    p.name = "schottky10";
    return p;
  }
  if (name == "schottky-bent") {
    auto p = schottky_preset(4.0, std::numbers::pi / 4 + 0.2);
    p.name = "schottky-bent";
    return p;
  }
  if (name == "sym2-schottky") return sym2_preset(schottky_preset(4.0));
  if (name == "block") {
    const auto s = schottky_preset(4.0);
    GroupPreset p;
    p.name = "block";
    p.description = "diag(A, I_2) with A in the Schottky preset";
    for (const auto& g : s.generators) {
      p.generators.push_back(GroupElement::from_pair(block(g.matrix(), Matrix::Identity(2, 2)),
                                                     block(g.inverse_matrix(), Matrix::Identity(2, 2)), g.word()));
    }
    p.theta = RootSubset(4, {1, 3});
    p.free = true;
    return p;
  }
  if (name == "product") {
    const auto s = schottky_preset(4.0);
    const auto t = schottky_preset(3.0, std::numbers::pi / 3);
    GroupPreset p;
    p.name = "product";
    p.description = "diag(A, B) for two Schottky representations of the free group";
    for (std::size_t i = 0; i < 2; ++i) {
      const auto& g = s.generators[i];
      const auto& h = t.generators[i];
      p.generators.push_back(GroupElement::from_pair(block(g.matrix(), h.matrix()),
                                                     block(g.inverse_matrix(), h.inverse_matrix()), g.word()));
    }
    p.theta = RootSubset::full(4);
    p.free = true;
    return p;
  }
  if (name == "surface2") return surface2();
  if (name == "elliptic") {
    GroupPreset p;
    p.name = "elliptic";
    p.description = "infinite-order rotation by 1 radian";
    p.generators = {GroupElement(rotation(1.0), {1})};
    p.theta = RootSubset(2, {1});
    p.domain = "klein-disk";
    p.free = true;
    return p;
  }
  if (name == "sanov") {
    GroupPreset p;
    p.name = "sanov";
    p.description = "Sanov subgroup <[[1,2],[0,1]], [[1,0],[2,1]]> (free, integer)";
    Matrix u(2, 2), l(2, 2);
    u << 1, 2, 0, 1;
    l << 1, 0, 2, 1;
    p.generators = {GroupElement(u, {1}), GroupElement(l, {2})};
    p.theta = RootSubset(2, {1});
    p.domain = "klein-disk";
    p.free = true;
    p.integer = true;
    return p;
  }
  throw Error(ErrorCode::ConfigError, "unknown preset '" + std::string(name) + "'");
}

}  // namespace td
