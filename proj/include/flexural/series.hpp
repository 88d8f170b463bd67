#ifndef FLEXURAL_SERIES_HPP
#define FLEXURAL_SERIES_HPP

#include <array>
#include <complex>
#include <string>
#include <vector>

#include "flexural/geometry.hpp"

namespace flexural
{

using Complex = std::complex<double>;

struct ModeData
{
  Complex f;
  Complex g;
};

// Fourier coefficients of f = -u_inc and g = -d_r u_inc on r = R_hat.
ModeData boundary_data_coeffs(int n, double kappa, double R_hat, double alpha);

struct ModeSolution
{
  Complex vh;
  Complex vm;
  Complex det;       // kappa K_n'/K_n - kappa H_n'/H_n at kappa R_hat
  double residual;   // max row residual of the 2x2 system, relative to |f| + |g|
};

// 2x2 elimination for one mode.
ModeSolution solve_mode(int n, double kappa, double R_hat, Complex f, Complex g);
// The same coefficients from the Cramer formulas, for cross-checking.
ModeSolution solve_mode_cramer(int n, double kappa, double R_hat, Complex f, Complex g);

struct SeriesPoint
{
  Complex vh;
  Complex vm;
  Complex v;
  Complex w;
  std::array<Complex, 2> grad_v;  // Cartesian
  std::array<Complex, 2> grad_w;
};

//
// Analytic scattered field of the clamped circular cavity of radius R_hat.
//
class SeriesSolution
{
public:
  static constexpr int kDefaultModes = 25;

  SeriesSolution(double R_hat, double kappa, double alpha, int n_modes = kDefaultModes);

  double R_hat() const { return R_hat_; }
  double kappa() const { return kappa_; }
  double alpha() const { return alpha_; }
  int n_modes() const { return n_modes_; }

  // Index n + n_modes().
  const std::vector<ModeSolution> &modes() const { return modes_; }
  const ModeSolution &mode(int n) const { return modes_[n + n_modes_]; }

  // Points with r below min_radius_factor * R_hat are rejected with DomainError.
  // The default only absorbs rounding; polygonal meshes need a smaller factor
  // since their boundary chords dip inside the circle.
  SeriesPoint eval_polar(double r, double theta, double min_radius_factor = 1.0 - 1e-12) const;
  SeriesPoint eval(Vec2 x, double min_radius_factor = 1.0 - 1e-12) const;

  // n, Re_vh, Im_vh, Re_vm, Im_vm
  std::string coefficients_csv() const;

private:
  double R_hat_;
  double kappa_;
  double alpha_;
  int n_modes_;
  std::vector<ModeSolution> modes_;
  std::vector<Complex> h_at_cavity_;   // H_n(kappa R_hat), n = 0..n_modes + 1
  std::vector<double> k_at_cavity_;    // K_n(kappa R_hat)
};

}  // namespace flexural

#endif  // FLEXURAL_SERIES_HPP
