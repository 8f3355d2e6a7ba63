// SPDX-License-Identifier: Apache-2.0

#ifndef EQDIT_EQUIATTN_KERNEL_H_
#define EQDIT_EQUIATTN_KERNEL_H_

#include <random>
#include <string>

#include <Eigen/Core>

#include "eqdit/nn/params.h"

namespace eqdit {

// Fixed radial basis: Gaussian bumps with centres uniform on [0, r_max] and
// width equal to their spacing, multiplied by a cosine cutoff that vanishes
// at r_cut.
struct RadialBasis {
  int size = 16;
  double r_max = 5.0;
  double r_cut = 6.0;

  Eigen::VectorXd evaluate(double r) const;
  // Basis followed by the bond-order edge scalar.
  int feature_size() const { return size + 1; }
  Eigen::VectorXd features(double r, double bond) const;
};

// Learned map from radial features to the profile values phi_J^{co,ci}.
struct RadialProfile {
  LinearLayer hidden;
  LinearLayer out;
  int n_out = 0;

  static RadialProfile create(ParameterSet &ps, const std::string &name, int n_features,
                              int hidden_size, int n_out, std::mt19937_64 &rng);
};

// Recorded evaluation on a batch of feature rows (E x n_features -> E x n_out).
ad::Var radial_profile(ParamBinding &pb, const RadialProfile &p, const ad::Var &features);
// Plain evaluation for a single radius.
Eigen::VectorXd radial_profile(const ParameterSet &ps, const RadialProfile &p,
                               const RadialBasis &basis, double r, double bond = 0.0);

// TFN kernel mapping c_in type-k channels to c_out type-l channels.
// Profile outputs are laid out as [c_out][J][c_in].
struct TFNKernel {
  int l = 0, k = 0;
  int c_in = 0, c_out = 0;
  RadialProfile profile;

  int j_count() const;
  static TFNKernel create(ParameterSet &ps, const std::string &name, int l, int k, int c_in,
                          int c_out, int n_features, int hidden, std::mt19937_64 &rng);
};

// Dense kernel matrix of shape c_out(2l+1) x c_in(2k+1); both sides are
// channel-major (channel * (2l+1) + component). Throws GeometryError for a
// zero displacement.
Eigen::MatrixXd tfn_kernel(const ParameterSet &ps, const TFNKernel &kernel,
                           const RadialBasis &basis, const Eigen::Vector3d &x,
                           double bond = 0.0);

}  // namespace eqdit

#endif  // EQDIT_EQUIATTN_KERNEL_H_
