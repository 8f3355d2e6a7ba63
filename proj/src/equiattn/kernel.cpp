// SPDX-License-Identifier: Apache-2.0

#include "eqdit/equiattn/kernel.h"

#include <cmath>

#include "eqdit/autodiff/ops.h"
#include "eqdit/equiattn/harmonics.h"
#include "eqdit/error.h"

namespace eqdit {

Eigen::VectorXd RadialBasis::evaluate(double r) const {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(size);
  if (r >= r_cut) return out;
  const double spacing = r_max / static_cast<double>(size - 1);
  const double cutoff = 0.5 * (std::cos(M_PI * r / r_cut) + 1.0);
  for (int i = 0; i < size; ++i) {
    double z = (r - spacing * i) / spacing;
    out(i) = std::exp(-z * z) * cutoff;
  }
  return out;
}

Eigen::VectorXd RadialBasis::features(double r, double bond) const {
  Eigen::VectorXd f(feature_size());
  f.head(size) = evaluate(r);
  f(size) = bond;
  return f;
}

RadialProfile RadialProfile::create(ParameterSet &ps, const std::string &name, int n_features,
                                    int hidden_size, int n_out, std::mt19937_64 &rng) {
  RadialProfile p;
  p.hidden = LinearLayer::create(ps, name + ".hidden", n_features, hidden_size, Init::kXavier, rng);
  p.out = LinearLayer::create(ps, name + ".out", hidden_size, n_out, Init::kXavier, rng);
  p.n_out = n_out;
  return p;
}

ad::Var radial_profile(ParamBinding &pb, const RadialProfile &p, const ad::Var &features) {
  return apply(pb, p.out, ad::silu(apply(pb, p.hidden, features, true)), true);
}

Eigen::VectorXd radial_profile(const ParameterSet &ps, const RadialProfile &p,
                               const RadialBasis &basis, double r, double bond) {
  if (r < 0.0) throw GeometryError("negative radius");
  ad::Tape tape;
  ParamBinding pb(tape, ps);
  ad::Mat f = basis.features(r, bond).transpose();
  ad::Var out = radial_profile(pb, p, tape.constant(f));
  return out.value().row(0).transpose();
}

int TFNKernel::j_count() const {
  return CouplingTable::j_max(l, k) - CouplingTable::j_min(l, k) + 1;
}

TFNKernel TFNKernel::create(ParameterSet &ps, const std::string &name, int l, int k, int c_in,
                            int c_out, int n_features, int hidden, std::mt19937_64 &rng) {
  TFNKernel kernel;
  kernel.l = l;
  kernel.k = k;
  kernel.c_in = c_in;
  kernel.c_out = c_out;
  kernel.profile = RadialProfile::create(ps, name, n_features, hidden,
                                         c_out * kernel.j_count() * c_in, rng);
  return kernel;
}

Eigen::MatrixXd tfn_kernel(const ParameterSet &ps, const TFNKernel &kernel,
                           const RadialBasis &basis, const Eigen::Vector3d &x, double bond) {
  const double r = x.norm();
  if (r == 0.0) throw GeometryError("TFN kernel needs a nonzero displacement");
  const Eigen::Vector3d u = x / r;
  const Eigen::VectorXd phi = radial_profile(ps, kernel.profile, basis, r, bond);
  const int dl = fiber_dim(kernel.l), dk = fiber_dim(kernel.k), nj = kernel.j_count();
  const int j0 = CouplingTable::j_min(kernel.l, kernel.k);
  const auto &table = CouplingTable::instance();

  std::vector<Eigen::MatrixXd> angular;
  for (int J = j0; J < j0 + nj; ++J) {
    Eigen::VectorXd y = spherical_harmonics(J, u);
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(dl, dk);
    const auto &q = table.q(kernel.l, kernel.k, J);
    for (int m = 0; m < 2 * J + 1; ++m) b += y(m) * q[static_cast<std::size_t>(m)];
    angular.push_back(b);
  }
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(kernel.c_out * dl, kernel.c_in * dk);
  for (int co = 0; co < kernel.c_out; ++co)
    for (int j = 0; j < nj; ++j)
      for (int ci = 0; ci < kernel.c_in; ++ci)
        w.block(co * dl, ci * dk, dl, dk) +=
            phi((co * nj + j) * kernel.c_in + ci) * angular[static_cast<std::size_t>(j)];
  return w;
}

}  // namespace eqdit
