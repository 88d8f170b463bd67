#include "flexural/dtn.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "flexural/errors.hpp"
#include "flexural/specfun.hpp"

namespace flexural
{

namespace
{

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// (e^w - 1 - w) / w^2 and (e^w (w - 1) + 1) / w^2: the integrals of the falling
// and rising halves of a unit hat against e^{w u} on [0, 1].
std::pair<Complex, Complex> hat_kernels(Complex w)
{
  if (std::abs(w) < 0.5)
  {
    Complex fall = 0.0;
    Complex rise = 0.0;
    Complex power = 1.0;
    double factorial = 2.0;  // (k + 2)!
    for (int k = 0; k < 24; ++k)
    {
      fall += power / factorial;
      rise += static_cast<double>(k + 1) * power / factorial;
      power *= w;
      factorial *= k + 3;
    }
    return {fall, rise};
  }
  const Complex ew = std::exp(w);
  const Complex w2 = w * w;
  return {(ew - 1.0 - w) / w2, (ew * (w - 1.0) + 1.0) / w2};
}

Complex i_power(int n)
{
  switch (((n % 4) + 4) % 4)
  {
  case 0:
    return {1.0, 0.0};
  case 1:
    return {0.0, 1.0};
  case 2:
    return {-1.0, 0.0};
  default:
    return {0.0, -1.0};
  }
}

void check_angles(const std::vector<double> &angles)
{
  if (angles.size() < 3)
  {
    throw InputError("hat_fourier needs at least 3 angles, got " + std::to_string(angles.size()));
  }
  for (std::size_t j = 0; j < angles.size(); ++j)
  {
    const double a = angles[j];
    if (!(a >= 0.0 && a < kTwoPi))
    {
      throw InputError("angle " + std::to_string(a) + " outside [0, 2 pi)");
    }
    if (j > 0 && !(a > angles[j - 1]))
    {
      throw InputError("angles must be strictly increasing (entry " + std::to_string(j) + ")");
    }
  }
}

}  // namespace

Eigen::VectorXcd TbcMatrix::mode(int n) const
{
  const int m = std::abs(n);
  if (m > N)
  {
    throw DomainError("mode " + std::to_string(n) + " beyond truncation order " +
                      std::to_string(N));
  }
  return n >= 0 ? modes[m] : Eigen::VectorXcd(modes[m].conjugate());
}

Eigen::VectorXcd hat_fourier(const std::vector<double> &angles, int n)
{
  check_angles(angles);
  const auto count = static_cast<Eigen::Index>(angles.size());
  Eigen::VectorXcd c = Eigen::VectorXcd::Zero(count);
  for (Eigen::Index s = 0; s < count; ++s)
  {
    const Eigen::Index next = (s + 1) % count;
    const double start = angles[s];
    const double delta = (next == 0 ? angles[0] + kTwoPi : angles[next]) - start;
    const auto [fall, rise] = hat_kernels(Complex(0.0, n * delta));
    const Complex phase = std::polar(delta, n * start);
    c[s] += phase * fall;
    c[next] += phase * rise;
  }
  return c;
}

Eigen::MatrixXcd paired_mode_sum(const std::vector<Eigen::VectorXcd> &modes,
                                 const std::vector<Complex> &coef)
{
  if (modes.empty() || modes.size() != coef.size())
  {
    throw DimensionError("mode and coefficient lists differ in length");
  }
  const Eigen::Index m = modes[0].size();
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(m, m);
  for (std::size_t n = 0; n < modes.size(); ++n)
  {
    const Eigen::VectorXd re = modes[n].real();
    const Eigen::VectorXd im = modes[n].imag();
    const double pair = n == 0 ? 1.0 : 2.0;
    for (Eigen::Index l = 0; l < m; ++l)
    {
      for (Eigen::Index j = 0; j < m; ++j)
      {
        // c_j conj(c_l) + conj(c_j) c_l, or c_j c_l for the real zero mode.
        const double g = n == 0 ? re[j] * re[l] : pair * (re[j] * re[l] + im[j] * im[l]);
        out(j, l) += coef[n] * g;
      }
    }
  }
  return out;
}

TbcMatrix assemble_tbc(const Mesh &mesh, double kappa, double R, int N)
{
  if (!(kappa > 0.0) || !(R > 0.0))
  {
    throw InputError("TBC needs kappa > 0 and R > 0");
  }
  if (N < 0 || N > specfun::kMaxOrder)
  {
    throw InputError("DtN truncation order " + std::to_string(N) + " outside [0, " +
                     std::to_string(specfun::kMaxOrder) + "]");
  }
  TbcMatrix t;
  t.kappa = kappa;
  t.R = R;
  t.N = N;
  const double z = kappa * R;
  std::vector<Complex> a;
  std::vector<Complex> b;
  for (int n = 0; n <= N; ++n)
  {
    t.a.push_back(specfun::dtn_symbol_h(n, z) / kTwoPi);
    t.b.push_back(specfun::dtn_symbol_k(n, z) / kTwoPi);
    t.modes.push_back(hat_fourier(mesh.truncation_angles(), n));
    a.push_back(t.a.back());
    b.push_back(t.b.back());
  }
  t.p_block = paired_mode_sum(t.modes, a);
  t.q_block = paired_mode_sum(t.modes, b);
  return t;
}

IncidentField::IncidentField(double kappa, double alpha)
  : kappa_(kappa), alpha_(alpha), d_{std::cos(alpha), std::sin(alpha)}
{
  if (!(kappa > 0.0) || !std::isfinite(kappa) || !std::isfinite(alpha))
  {
    throw InputError("incident field needs kappa > 0 and a finite angle");
  }
}

Complex IncidentField::value(Vec2 x) const { return std::polar(1.0, kappa_ * dot(x, d_)); }

std::array<Complex, 2> IncidentField::gradient(Vec2 x) const
{
  const Complex u = value(x);
  const Complex ik(0.0, kappa_);
  return {ik * d_.x * u, ik * d_.y * u};
}

std::vector<Complex> incident_g1_coefficients(double kappa, double alpha, double R, int Ng)
{
  if (Ng < 0 || Ng > specfun::kMaxOrder)
  {
    throw InputError("load truncation order " + std::to_string(Ng) + " outside [0, " +
                     std::to_string(specfun::kMaxOrder) + "]");
  }
  const double z = kappa * R;
  std::vector<Complex> g(static_cast<std::size_t>(2 * Ng + 1));
  for (int n = -Ng; n <= Ng; ++n)
  {
    const specfun::RealPair j = specfun::bessel_j(n, z);
    const Complex h = specfun::dtn_symbol_h(n, z);
    g[n + Ng] = i_power(n) * std::polar(1.0, -n * alpha) * (kappa * j.derivative - h * j.value / R);
  }
  return g;
}

VectorC incident_load(const Mesh &mesh, double kappa, double alpha, double R, int Ng)
{
  (void)IncidentField(kappa, alpha);
  const std::vector<Complex> g = incident_g1_coefficients(kappa, alpha, R, Ng);
  const DofMap dofs(mesh);
  const auto &angles = mesh.truncation_angles();
  Eigen::VectorXcd trace = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(angles.size()));
  for (int n = -Ng; n <= Ng; ++n)
  {
    trace += g[n + Ng] * hat_fourier(angles, n);
  }
  VectorC F = VectorC::Zero(dofs.size());
  const auto &t = mesh.truncation_nodes();
  for (std::size_t j = 0; j < t.size(); ++j)
  {
    F[dofs.row(Field::p, t[j])] = -R * trace[static_cast<Eigen::Index>(j)];
  }
  return F;
}

}  // namespace flexural
