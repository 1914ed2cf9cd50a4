#pragma once

// Dense state vectors over small qubit groups. Basis index bit (n-1-k) holds
// qubit k of the group, so the first qubit is the most significant one and
// each qubit's false branch comes first.

#include <optional>
#include <vector>

#include "qhtt/ast.hpp"

namespace qhtt::linalg {

using Vec = std::vector<Complex>;
using Mat = std::vector<Complex>;  // square, row-major

inline constexpr double kTol = 1e-9;

Vec basis(bool b);
Vec ketVector(StateExpr::Kind k);
// Literal kind whose vector equals v up to phase, if any.
std::optional<StateExpr::Kind> literalOf(const Vec& v);

std::size_t qubitsOf(const Vec& v);
Vec tensor(const Vec& a, const Vec& b);
double norm2(const Vec& v);
void normalize(Vec& v);
Complex inner(const Vec& a, const Vec& b);
bool phaseEqual(const Vec& a, const Vec& b, double tol = kTol);

const Matrix2& hadamard();
const Matrix2& pauliX();
const Matrix2& pauliY();
const Matrix2& pauliZ();
bool isUnitary(const Matrix2& m, double tol = kTol);

// Applies a one-qubit matrix to qubit k of an n-qubit vector.
void applySingle(Vec& v, std::size_t n, std::size_t k, const Matrix2& m);

// Amplitudes of the remaining n-1 qubits when qubit k has value b
// (unnormalized).
Vec project(const Vec& v, std::size_t n, std::size_t k, bool b);

// Reduced density matrix on the listed qubits (in the given order).
Mat reduced(const Vec& v, std::size_t n, const std::vector<std::size_t>& keep);
double purity(const Mat& rho);
double fidelity(const Mat& rho, const Vec& psi);
// Dominant eigenvector of a nearly pure density matrix.
std::optional<Vec> pureState(const Mat& rho, double tol = kTol);

// Reorders qubits: result qubit i is input qubit perm[i].
Vec permute(const Vec& v, const std::vector<std::size_t>& perm);

// Per-qubit change of basis to Z (false) or X (true) and back.
Vec toBasis(const Vec& v, const std::vector<bool>& xBasis);
Vec fromBasis(const Vec& v, const std::vector<bool>& xBasis);

}  // namespace qhtt::linalg
