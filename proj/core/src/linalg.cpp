#include "qhtt/linalg.hpp"

#include <cmath>

namespace qhtt::linalg {

namespace {
const double kS = 1.0 / std::sqrt(2.0);
}

Vec basis(bool b) { return b ? Vec{0.0, 1.0} : Vec{1.0, 0.0}; }

Vec ketVector(StateExpr::Kind k) {
  switch (k) {
    case StateExpr::Kind::Ket0: return {1.0, 0.0};
    case StateExpr::Kind::Ket1: return {0.0, 1.0};
    case StateExpr::Kind::KetPlus: return {kS, kS};
    case StateExpr::Kind::KetMinus: return {kS, -kS};
    case StateExpr::Kind::KetPhiPlus: return {kS, 0.0, 0.0, kS};
    default: return {};
  }
}

std::optional<StateExpr::Kind> literalOf(const Vec& v) {
  using K = StateExpr::Kind;
  for (K k : {K::Ket0, K::Ket1, K::KetPlus, K::KetMinus, K::KetPhiPlus}) {
    Vec w = ketVector(k);
    if (w.size() == v.size() && phaseEqual(v, w)) return k;
  }
  return std::nullopt;
}

std::size_t qubitsOf(const Vec& v) {
  std::size_t n = 0;
  while ((std::size_t{1} << n) < v.size()) ++n;
  return n;
}

Vec tensor(const Vec& a, const Vec& b) {
  Vec r(a.size() * b.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) r[i * b.size() + j] = a[i] * b[j];
  return r;
}

double norm2(const Vec& v) {
  double s = 0;
  for (const auto& z : v) s += std::norm(z);
  return s;
}

void normalize(Vec& v) {
  double n = std::sqrt(norm2(v));
  if (n == 0) return;
  for (auto& z : v) z /= n;
}

Complex inner(const Vec& a, const Vec& b) {
  Complex s = 0;
  for (std::size_t i = 0; i < a.size() && i < b.size(); ++i) s += std::conj(a[i]) * b[i];
  return s;
}

bool phaseEqual(const Vec& a, const Vec& b, double tol) {
  if (a.size() != b.size()) return false;
  double na = norm2(a), nb = norm2(b);
  if (na == 0 || nb == 0) return na == nb;
  return std::abs(inner(a, b)) / std::sqrt(na * nb) >= 1.0 - tol;
}

const Matrix2& hadamard() {
  static const Matrix2 m{kS, kS, kS, -kS};
  return m;
}
const Matrix2& pauliX() {
  static const Matrix2 m{0.0, 1.0, 1.0, 0.0};
  return m;
}
const Matrix2& pauliY() {
  static const Matrix2 m{0.0, Complex(0, -1), Complex(0, 1), 0.0};
  return m;
}
const Matrix2& pauliZ() {
  static const Matrix2 m{1.0, 0.0, 0.0, -1.0};
  return m;
}

bool isUnitary(const Matrix2& m, double tol) {
  // columns orthonormal
  Complex c00 = std::conj(m[0]) * m[0] + std::conj(m[2]) * m[2];
  Complex c11 = std::conj(m[1]) * m[1] + std::conj(m[3]) * m[3];
  Complex c01 = std::conj(m[0]) * m[1] + std::conj(m[2]) * m[3];
  return std::abs(c00 - 1.0) <= tol && std::abs(c11 - 1.0) <= tol && std::abs(c01) <= tol;
}

void applySingle(Vec& v, std::size_t n, std::size_t k, const Matrix2& m) {
  std::size_t bit = std::size_t{1} << (n - 1 - k);
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i & bit) continue;
    Complex a = v[i], b = v[i | bit];
    v[i] = m[0] * a + m[1] * b;
    v[i | bit] = m[2] * a + m[3] * b;
  }
}

Vec project(const Vec& v, std::size_t n, std::size_t k, bool b) {
  Vec r(v.size() / 2);
  std::size_t shift = n - 1 - k;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (((i >> shift) & 1) != static_cast<std::size_t>(b)) continue;
    std::size_t high = i >> (shift + 1), low = i & ((std::size_t{1} << shift) - 1);
    r[(high << shift) | low] = v[i];
  }
  return r;
}

Mat reduced(const Vec& v, std::size_t n, const std::vector<std::size_t>& keep) {
  std::size_t m = keep.size(), dim = std::size_t{1} << m;
  Mat rho(dim * dim);
  std::vector<std::size_t> rest;
  for (std::size_t q = 0; q < n; ++q) {
    bool kept = false;
    for (auto k : keep) kept |= k == q;
    if (!kept) rest.push_back(q);
  }
  auto index = [&](std::size_t keptBits, std::size_t restBits) {
    std::size_t i = 0;
    for (std::size_t j = 0; j < m; ++j)
      if ((keptBits >> (m - 1 - j)) & 1) i |= std::size_t{1} << (n - 1 - keep[j]);
    for (std::size_t j = 0; j < rest.size(); ++j)
      if ((restBits >> j) & 1) i |= std::size_t{1} << (n - 1 - rest[j]);
    return i;
  };
  for (std::size_t r = 0; r < (std::size_t{1} << rest.size()); ++r)
    for (std::size_t a = 0; a < dim; ++a)
      for (std::size_t b = 0; b < dim; ++b)
        rho[a * dim + b] += v[index(a, r)] * std::conj(v[index(b, r)]);
  return rho;
}

double purity(const Mat& rho) {
  std::size_t dim = static_cast<std::size_t>(std::lround(std::sqrt(double(rho.size()))));
  double s = 0;
  for (std::size_t a = 0; a < dim; ++a)
    for (std::size_t b = 0; b < dim; ++b) s += std::real(rho[a * dim + b] * rho[b * dim + a]);
  return s;
}

double fidelity(const Mat& rho, const Vec& psi) {
  std::size_t dim = psi.size();
  Complex s = 0;
  for (std::size_t a = 0; a < dim; ++a)
    for (std::size_t b = 0; b < dim; ++b) s += std::conj(psi[a]) * rho[a * dim + b] * psi[b];
  return std::real(s) / norm2(psi);
}

std::optional<Vec> pureState(const Mat& rho, double tol) {
  if (purity(rho) < 1.0 - tol) return std::nullopt;
  std::size_t dim = static_cast<std::size_t>(std::lround(std::sqrt(double(rho.size()))));
  std::size_t best = 0;
  for (std::size_t a = 1; a < dim; ++a)
    if (std::real(rho[a * dim + a]) > std::real(rho[best * dim + best])) best = a;
  Vec v(dim);
  for (std::size_t a = 0; a < dim; ++a) v[a] = rho[a * dim + best];
  normalize(v);
  return v;
}

Vec permute(const Vec& v, const std::vector<std::size_t>& perm) {
  std::size_t n = perm.size();
  Vec r(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    std::size_t j = 0;
    for (std::size_t q = 0; q < n; ++q)
      if ((i >> (n - 1 - q)) & 1) j |= std::size_t{1} << (n - 1 - perm[q]);
    r[i] = v[j];
  }
  return r;
}

Vec toBasis(const Vec& v, const std::vector<bool>& xBasis) {
  Vec r = v;
  for (std::size_t q = 0; q < xBasis.size(); ++q)
    if (xBasis[q]) applySingle(r, xBasis.size(), q, hadamard());
  return r;
}

Vec fromBasis(const Vec& v, const std::vector<bool>& xBasis) { return toBasis(v, xBasis); }

}  // namespace qhtt::linalg
