#include "flexural/series.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "flexural/errors.hpp"
#include "flexural/specfun.hpp"

namespace flexural
{

namespace
{

Complex i_power(int n)
{
  static const Complex table[4] = {{1.0, 0.0}, {0.0, 1.0}, {-1.0, 0.0}, {0.0, -1.0}};
  return table[((n % 4) + 4) % 4];
}

void check_setup(double kappa, double R_hat)
{
  if (!(kappa > 0.0) || !std::isfinite(kappa) || !(R_hat > 0.0) || !std::isfinite(R_hat))
  {
    throw DomainError("series solution needs kappa > 0 and R_hat > 0");
  }
}

// kappa H_n'/H_n and kappa K_n'/K_n at kappa R_hat.
std::pair<Complex, double> log_derivatives(int n, double kappa, double R_hat)
{
  const double z = kappa * R_hat;
  return {specfun::dtn_symbol_h(n, z) / R_hat, specfun::dtn_symbol_k(n, z) / R_hat};
}

double residual_of(const ModeSolution &s, Complex alpha1, double beta1, Complex f, Complex g)
{
  const double r1 = std::abs(s.vh + s.vm - f);
  const double r2 = std::abs(alpha1 * s.vh + beta1 * s.vm - g);
  const double d1 = std::abs(s.vh) + std::abs(s.vm) + std::abs(f);
  const double d2 = std::abs(alpha1 * s.vh) + std::abs(beta1 * s.vm) + std::abs(g);
  return std::max(d1 > 0.0 ? r1 / d1 : r1, d2 > 0.0 ? r2 / d2 : r2);
}

}  // namespace

ModeData boundary_data_coeffs(int n, double kappa, double R_hat, double alpha)
{
  check_setup(kappa, R_hat);
  const specfun::RealPair j = specfun::bessel_j(n, kappa * R_hat);
  const Complex phase = i_power(n) * std::polar(1.0, -n * alpha);
  return {-phase * j.value, -kappa * phase * j.derivative};
}

ModeSolution solve_mode(int n, double kappa, double R_hat, Complex f, Complex g)
{
  check_setup(kappa, R_hat);
  const auto [alpha1, beta1] = log_derivatives(n, kappa, R_hat);
  // Subtracting beta1 times the first row from the second leaves (alpha1 - beta1) vh.
  const Complex pivot = alpha1 - beta1;
  if (!(std::abs(pivot.imag()) > 0.0))
  {
    throw NumericalError("mode " + std::to_string(n) + " system is singular");
  }
  ModeSolution s;
  s.vh = (g - beta1 * f) / pivot;
  s.vm = f - s.vh;
  s.det = -pivot;
  s.residual = residual_of(s, alpha1, beta1, f, g);
  return s;
}

ModeSolution solve_mode_cramer(int n, double kappa, double R_hat, Complex f, Complex g)
{
  check_setup(kappa, R_hat);
  const double z = kappa * R_hat;
  const specfun::ComplexPair h = specfun::hankel1(std::abs(n), z);
  const specfun::RealPair k = specfun::bessel_k(std::abs(n), z);
  const Complex hr = h.derivative / h.value;
  const double kr = k.derivative / k.value;
  const Complex bn = hr - kr;
  ModeSolution s;
  s.vh = (g / kappa - kr * f) / bn;
  s.vm = (hr * f - g / kappa) / bn;
  s.det = kappa * (kr - hr);
  s.residual = residual_of(s, kappa * hr, kappa * kr, f, g);
  return s;
}

SeriesSolution::SeriesSolution(double R_hat, double kappa, double alpha, int n_modes)
  : R_hat_(R_hat), kappa_(kappa), alpha_(alpha), n_modes_(n_modes)
{
  check_setup(kappa, R_hat);
  if (n_modes < 0 || n_modes > specfun::kMaxOrder)
  {
    throw DomainError("series mode count " + std::to_string(n_modes) + " outside [0, " +
                      std::to_string(specfun::kMaxOrder) + "]");
  }
  for (int n = -n_modes; n <= n_modes; ++n)
  {
    const ModeData d = boundary_data_coeffs(n, kappa, R_hat, alpha);
    modes_.push_back(solve_mode(n, kappa, R_hat, d.f, d.g));
  }
  const double z = kappa * R_hat;
  const std::vector<double> j = specfun::bessel_j_sequence(n_modes + 1, z);
  const std::vector<double> y = specfun::bessel_y_sequence(n_modes + 1, z);
  k_at_cavity_ = specfun::bessel_k_sequence(n_modes + 1, z);
  for (int n = 0; n <= n_modes + 1; ++n)
  {
    h_at_cavity_.emplace_back(j[n], y[n]);
  }
}

SeriesPoint SeriesSolution::eval_polar(double r, double theta, double min_radius_factor) const
{
  if (!(r >= min_radius_factor * R_hat_) || !std::isfinite(r) || !std::isfinite(theta))
  {
    throw DomainError("series evaluated at r = " + std::to_string(r) +
                      " inside the cavity of radius " + std::to_string(R_hat_));
  }
  const int N = n_modes_;
  const double z = kappa_ * r;
  const std::vector<double> j = specfun::bessel_j_sequence(N + 1, z);
  const std::vector<double> y = specfun::bessel_y_sequence(N + 1, z);
  const std::vector<double> k = specfun::bessel_k_sequence(N + 1, z);

  // Radial factors and their r-derivatives for |n| = 0..N.
  std::vector<Complex> fh(N + 1);
  std::vector<Complex> dfh(N + 1);
  std::vector<double> fk(N + 1);
  std::vector<double> dfk(N + 1);
  for (int n = 0; n <= N; ++n)
  {
    const Complex hn(j[n], y[n]);
    const Complex below = n == 0 ? -Complex(j[1], y[1]) : Complex(j[n - 1], y[n - 1]);
    const Complex dh = 0.5 * (below - Complex(j[n + 1], y[n + 1]));
    const double kbelow = n == 0 ? k[1] : k[n - 1];
    const double dk = -0.5 * (kbelow + k[n + 1]);
    fh[n] = hn / h_at_cavity_[n];
    dfh[n] = kappa_ * dh / h_at_cavity_[n];
    fk[n] = k[n] / k_at_cavity_[n];
    dfk[n] = kappa_ * dk / k_at_cavity_[n];
  }

  Complex vh = 0.0;
  Complex vm = 0.0;
  Complex dr_h = 0.0;
  Complex dr_m = 0.0;
  Complex dt_h = 0.0;  // d/dtheta
  Complex dt_m = 0.0;
  for (int n = -N; n <= N; ++n)
  {
    const ModeSolution &c = modes_[n + N];
    const int m = std::abs(n);
    const Complex e = std::polar(1.0, n * theta);
    const Complex ine(0.0, static_cast<double>(n));
    vh += c.vh * fh[m] * e;
    vm += c.vm * fk[m] * e;
    dr_h += c.vh * dfh[m] * e;
    dr_m += c.vm * dfk[m] * e;
    dt_h += ine * c.vh * fh[m] * e;
    dt_m += ine * c.vm * fk[m] * e;
  }

  const double cs = std::cos(theta);
  const double sn = std::sin(theta);
  auto cartesian = [&](Complex dr, Complex dt) -> std::array<Complex, 2> {
    const Complex tangential = dt / r;
    return {cs * dr - sn * tangential, sn * dr + cs * tangential};
  };
  const auto gh = cartesian(dr_h, dt_h);
  const auto gm = cartesian(dr_m, dt_m);

  SeriesPoint p;
  p.vh = vh;
  p.vm = vm;
  p.v = vh + vm;
  p.w = vm - vh;
  p.grad_v = {gh[0] + gm[0], gh[1] + gm[1]};
  p.grad_w = {gm[0] - gh[0], gm[1] - gh[1]};
  return p;
}

SeriesPoint SeriesSolution::eval(Vec2 x, double min_radius_factor) const
{
  return eval_polar(norm(x), std::atan2(x.y, x.x), min_radius_factor);
}

std::string SeriesSolution::coefficients_csv() const
{
  std::ostringstream out;
  out << "n,Re_vh,Im_vh,Re_vm,Im_vm\n";
  char buf[160];
  for (int n = -n_modes_; n <= n_modes_; ++n)
  {
    const ModeSolution &c = mode(n);
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%.17g\n", n, c.vh.real(), c.vh.imag(),
                  c.vm.real(), c.vm.imag());
    out << buf;
  }
  return out.str();
}

}  // namespace flexural
