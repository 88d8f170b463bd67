#ifndef FLEXURAL_DTN_HPP
#define FLEXURAL_DTN_HPP

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "flexural/assembly.hpp"
#include "flexural/geometry.hpp"

namespace flexural
{

//
// Truncated DtN blocks on Gamma_R. Only the modes n = 0..N are stored; the
// negative modes follow from c_{-n} = conj(c_n) and h_{-n} = h_n.
//
struct TbcMatrix
{
  double kappa = 0.0;
  double R = 0.0;
  int N = 0;
  std::vector<Complex> a;                 // a[n] = h_n(kappa R) / (2 pi)
  std::vector<double> b;                  // b[n] = k_n(kappa R) / (2 pi)
  std::vector<Eigen::VectorXcd> modes;    // modes[n] = c_n over T nodes
  Eigen::MatrixXcd p_block;
  Eigen::MatrixXcd q_block;

  Eigen::VectorXcd mode(int n) const;
};

// c_n[j] = int beta_j(theta) e^{i n theta} d theta, with beta_j the hat that is
// piecewise linear in theta. Throws InputError unless the angles increase
// strictly inside [0, 2 pi).
Eigen::VectorXcd hat_fourier(const std::vector<double> &angles, int n);

TbcMatrix assemble_tbc(const Mesh &mesh, double kappa, double R, int N);

// Sum over |n| <= N of coef_n c_n c_n^H, paired over +-n so the result is
// exactly symmetric. coef holds n = 0..N.
Eigen::MatrixXcd paired_mode_sum(const std::vector<Eigen::VectorXcd> &modes,
                                 const std::vector<Complex> &coef);

class IncidentField
{
public:
  IncidentField(double kappa, double alpha);

  double kappa() const { return kappa_; }
  double alpha() const { return alpha_; }
  Vec2 direction() const { return d_; }

  Complex value(Vec2 x) const;
  // Cartesian gradient (d/dx, d/dy).
  std::array<Complex, 2> gradient(Vec2 x) const;

private:
  double kappa_;
  double alpha_;
  Vec2 d_;
};

// Fourier coefficients G_n of g_1 = d_r u_inc - T_1 u_inc on Gamma_R, n = -Ng..Ng
// (index n + Ng).
std::vector<Complex> incident_g1_coefficients(double kappa, double alpha, double R, int Ng);

// Full-length load vector, nonzero only on the (p, T) rows.
VectorC incident_load(const Mesh &mesh, double kappa, double alpha, double R, int Ng);

}  // namespace flexural

#endif  // FLEXURAL_DTN_HPP
