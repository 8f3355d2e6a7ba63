// SPDX-License-Identifier: Apache-2.0

#ifndef EQDIT_EQUIATTN_HARMONICS_H_
#define EQDIT_EQUIATTN_HARMONICS_H_

#include <array>
#include <vector>

#include <Eigen/Core>

namespace eqdit {

inline constexpr int kMaxDegree = 1;           // fiber types 0 and 1
inline constexpr int kMaxHarmonic = 2 * kMaxDegree;

// Orthonormal real spherical harmonic Y_Jm(u), J in 0..2, m in -J..J.
// Throws GeometryError when |u| differs from 1 by more than 1e-9.
double spherical_harmonic(int J, int m, const Eigen::Vector3d &u);

// All 2J+1 values, index m + J. No normalization check.
Eigen::VectorXd spherical_harmonics(int J, const Eigen::Vector3d &u);

// Representation of a rotation on degree-J harmonics:
// Y_J(R u) = harmonic_rotation(J, R) * Y_J(u).
Eigen::MatrixXd harmonic_rotation(int J, const Eigen::Matrix3d &R);

// Rotation acting on a type-l fiber. Type-1 fibers use Cartesian (x, y, z)
// order, so this is 1 for l = 0 and R itself for l = 1.
Eigen::MatrixXd fiber_rotation(int l, const Eigen::Matrix3d &R);

inline int fiber_dim(int l) { return 2 * l + 1; }

// Real coupling coefficients Q_Jm^{lk}: for each (l, k) and J in |l-k|..l+k,
// 2J+1 matrices of shape (2l+1) x (2k+1) such that
//   sum_m Y_Jm(u) Q_Jm^{lk}
// is an intertwiner (transforms as D_l(R) . D_k(R)^T). Computed once as the
// null space of the intertwining constraint and normalized so that the
// stacked vec(Q_Jm) rows form an orthogonal matrix.
class CouplingTable {
 public:
  static const CouplingTable &instance();

  const std::vector<Eigen::MatrixXd> &q(int l, int k, int J) const;
  static int j_min(int l, int k) { return l > k ? l - k : k - l; }
  static int j_max(int l, int k) { return l + k; }

  // max |M M^T - I| where M stacks vec(Q_Jm) over all J, m for (l, k).
  double orthogonality_error(int l, int k) const;

 private:
  CouplingTable();
  // [l][k][J]
  std::array<std::array<std::array<std::vector<Eigen::MatrixXd>, kMaxHarmonic + 1>,
                        kMaxDegree + 1>,
             kMaxDegree + 1>
      tables_;
};

}  // namespace eqdit

#endif  // EQDIT_EQUIATTN_HARMONICS_H_
