// SPDX-License-Identifier: Apache-2.0

#include "eqdit/equiattn/harmonics.h"

#include <cmath>
#include <random>
#include <string>

#include <Eigen/Dense>

#include "eqdit/error.h"

namespace eqdit {

namespace {

constexpr double kPi = 3.14159265358979323846;

void check_degree(int J) {
  if (J < 0 || J > kMaxHarmonic)
    throw ConfigError("spherical harmonic degree out of range: " + std::to_string(J));
}

// Fixed, well-spread unit vectors used to identify rotation representations.
const std::vector<Eigen::Vector3d> &probe_directions() {
  static const std::vector<Eigen::Vector3d> dirs = [] {
    std::vector<Eigen::Vector3d> d;
    std::mt19937_64 rng(17);
    std::normal_distribution<double> n(0.0, 1.0);
    for (int i = 0; i < 24; ++i) {
      Eigen::Vector3d v(n(rng), n(rng), n(rng));
      d.push_back(v.normalized());
    }
    return d;
  }();
  return dirs;
}

Eigen::Matrix3d probe_rotation(unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::Matrix3d a;
  for (int i = 0; i < 9; ++i) a.data()[i] = n(rng);
  Eigen::HouseholderQR<Eigen::Matrix3d> qr(a);
  Eigen::Matrix3d q = qr.householderQ();
  if (q.determinant() < 0) q.col(0) *= -1.0;
  return q;
}

}  // namespace

Eigen::VectorXd spherical_harmonics(int J, const Eigen::Vector3d &u) {
  check_degree(J);
  const double x = u.x(), y = u.y(), z = u.z();
  Eigen::VectorXd out(2 * J + 1);
  switch (J) {
    case 0:
      out(0) = 0.5 / std::sqrt(kPi);
      break;
    case 1: {
      const double c = std::sqrt(3.0 / (4.0 * kPi));
      out << c * y, c * z, c * x;
      break;
    }
    default: {
      const double c = 0.5 * std::sqrt(15.0 / kPi);
      const double c0 = 0.25 * std::sqrt(5.0 / kPi);
      out << c * x * y, c * y * z, c0 * (3.0 * z * z - 1.0), c * x * z,
          0.5 * c * (x * x - y * y);
      break;
    }
  }
  return out;
}

double spherical_harmonic(int J, int m, const Eigen::Vector3d &u) {
  check_degree(J);
  if (m < -J || m > J) throw ConfigError("harmonic order out of range");
  if (std::abs(u.norm() - 1.0) > 1e-9)
    throw GeometryError("spherical harmonic argument is not a unit vector");
  return spherical_harmonics(J, u)(m + J);
}

Eigen::MatrixXd harmonic_rotation(int J, const Eigen::Matrix3d &R) {
  const auto &dirs = probe_directions();
  const int d = 2 * J + 1;
  Eigen::MatrixXd A(d, static_cast<Eigen::Index>(dirs.size()));
  Eigen::MatrixXd B(d, static_cast<Eigen::Index>(dirs.size()));
  for (std::size_t s = 0; s < dirs.size(); ++s) {
    A.col(static_cast<Eigen::Index>(s)) = spherical_harmonics(J, dirs[s]);
    B.col(static_cast<Eigen::Index>(s)) = spherical_harmonics(J, R * dirs[s]);
  }
  // D A = B in the least-squares sense (exact for a true representation).
  return A.transpose().colPivHouseholderQr().solve(B.transpose()).transpose();
}

Eigen::MatrixXd fiber_rotation(int l, const Eigen::Matrix3d &R) {
  if (l == 0) return Eigen::MatrixXd::Ones(1, 1);
  if (l == 1) return R;
  throw ConfigError("fiber degree out of range");
}

const CouplingTable &CouplingTable::instance() {
  static const CouplingTable table;
  return table;
}

CouplingTable::CouplingTable() {
  const Eigen::Matrix3d rotations[] = {probe_rotation(1), probe_rotation(2),
                                       probe_rotation(3)};
  for (int l = 0; l <= kMaxDegree; ++l) {
    for (int k = 0; k <= kMaxDegree; ++k) {
      const int dl = fiber_dim(l), dk = fiber_dim(k);
      for (int J = j_min(l, k); J <= j_max(l, k); ++J) {
        const int dj = 2 * J + 1;
        const int block = dl * dk;  // entries of one Q_Jm, row-major
        const int unknowns = dj * block;
        // For each m': sum_m D^J(m, m') Q_m - D_l Q_m' D_k^T = 0.
        Eigen::MatrixXd system(3 * unknowns, unknowns);
        system.setZero();
        int row0 = 0;
        for (const auto &R : rotations) {
          const Eigen::MatrixXd DJ = harmonic_rotation(J, R);
          const Eigen::MatrixXd Dl = fiber_rotation(l, R);
          const Eigen::MatrixXd Dk = fiber_rotation(k, R);
          for (int mp = 0; mp < dj; ++mp) {
            for (int a = 0; a < dl; ++a) {
              for (int b = 0; b < dk; ++b) {
                const int row = row0 + mp * block + a * dk + b;
                for (int m = 0; m < dj; ++m) system(row, m * block + a * dk + b) += DJ(m, mp);
                for (int c = 0; c < dl; ++c)
                  for (int e = 0; e < dk; ++e)
                    system(row, mp * block + c * dk + e) -= Dl(a, c) * Dk(b, e);
              }
            }
          }
          row0 += unknowns;
        }
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(system, Eigen::ComputeFullV);
        const Eigen::VectorXd sv = svd.singularValues();
        const Eigen::Index last = sv.size() - 1;
        if (sv(last) > 1e-9 || (last > 0 && sv(last - 1) < 1e-6))
          throw NumericalError("coupling null space is not one-dimensional");
        Eigen::VectorXd v = svd.matrixV().col(last);
        // Deterministic sign: largest-magnitude entry positive.
        Eigen::Index arg;
        v.cwiseAbs().maxCoeff(&arg);
        if (v(arg) < 0) v = -v;
        v *= std::sqrt(static_cast<double>(dj)) / v.norm();
        auto &out = tables_[l][k][J];
        for (int m = 0; m < dj; ++m) {
          Eigen::MatrixXd q(dl, dk);
          for (int a = 0; a < dl; ++a)
            for (int b = 0; b < dk; ++b) {
              double x = v(m * block + a * dk + b);
              q(a, b) = std::abs(x) < 1e-13 ? 0.0 : x;
            }
          out.push_back(q);
        }
      }
      if (orthogonality_error(l, k) > 1e-10)
        throw NumericalError("coupling table failed the orthogonality check");
    }
  }
}

const std::vector<Eigen::MatrixXd> &CouplingTable::q(int l, int k, int J) const {
  if (l < 0 || l > kMaxDegree || k < 0 || k > kMaxDegree || J < j_min(l, k) || J > j_max(l, k))
    throw ConfigError("no coupling table for the requested degrees");
  return tables_[l][k][J];
}

double CouplingTable::orthogonality_error(int l, int k) const {
  const int dl = fiber_dim(l), dk = fiber_dim(k);
  Eigen::MatrixXd M(dl * dk, dl * dk);
  int row = 0;
  for (int J = j_min(l, k); J <= j_max(l, k); ++J)
    for (const auto &q : tables_[l][k][J]) {
      for (int a = 0; a < dl; ++a)
        for (int b = 0; b < dk; ++b) M(row, a * dk + b) = q(a, b);
      ++row;
    }
  return (M * M.transpose() - Eigen::MatrixXd::Identity(dl * dk, dl * dk)).cwiseAbs().maxCoeff();
}

}  // namespace eqdit
