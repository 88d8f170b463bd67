#include "flexural/specfun.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "flexural/errors.hpp"

namespace flexural::specfun
{

namespace
{

constexpr double kEulerGamma = 0.57721566490153286060651209;
constexpr double kPi = std::numbers::pi;

// Arguments at or below this use the power series for J_n and K_0, K_1.
constexpr double kJSeriesLimit = 1.0;
constexpr double kKSeriesLimit = 2.0;

void check_order(int n)
{
  if (std::abs(n) > kMaxOrder)
  {
    throw DomainError("Bessel order " + std::to_string(n) + " exceeds supported range |n| <= " +
                      std::to_string(kMaxOrder));
  }
}

void check_sequence_order(int nmax)
{
  if (nmax < 0 || nmax > kMaxOrder + 1)
  {
    throw DomainError("Bessel sequence order " + std::to_string(nmax) + " outside [0, " +
                      std::to_string(kMaxOrder + 1) + "]");
  }
}

void check_positive(double x, const char *name)
{
  if (!(x > 0.0) || !std::isfinite(x))
  {
    throw DomainError(std::string(name) + " requires a positive finite argument, got " +
                      std::to_string(x));
  }
}

double parity(int n) { return (n % 2 == 0) ? 1.0 : -1.0; }

// J_n(x) from its ascending series; used for small x where no cancellation occurs.
double j_series(int n, double x)
{
  double term = 1.0;
  for (int k = 1; k <= n; ++k)
  {
    term *= 0.5 * x / k;
  }
  const double q = 0.25 * x * x;
  double sum = term;
  for (int k = 0; k < 200; ++k)
  {
    term *= -q / ((k + 1.0) * (n + k + 1.0));
    sum += term;
    if (std::abs(term) <= 1e-17 * std::abs(sum))
    {
      break;
    }
  }
  return sum;
}

// Starting order for the backward recurrence, chosen well past both the
// requested order and the turning point n ~ x.
int miller_start(int nmax, double x)
{
  const double base = std::max<double>(nmax, std::ceil(x));
  int m = static_cast<int>(base) + 20 + static_cast<int>(std::sqrt(60.0 * base));
  return m + (m % 2);
}

// J_0..J_m by Miller's backward recurrence, normalized with
// J_0 + 2 sum_k J_2k = 1. Valid for any x > 0.
std::vector<double> miller_j(int m, double x)
{
  constexpr double kBig = 1e250;
  std::vector<double> j(static_cast<std::size_t>(m) + 1, 0.0);
  double next = 0.0;
  double cur = 1.0;
  j[m] = cur;
  for (int k = m; k >= 1; --k)
  {
    double prev = (2.0 * k / x) * cur - next;
    next = cur;
    cur = prev;
    j[k - 1] = prev;
    if (std::abs(prev) > kBig)
    {
      for (int l = k - 1; l <= m; ++l)
      {
        j[l] /= kBig;
      }
      next /= kBig;
      cur /= kBig;
    }
  }
  double norm = j[0];
  for (int k = 2; k <= m; k += 2)
  {
    norm += 2.0 * j[k];
  }
  for (double &v : j)
  {
    v /= norm;
  }
  return j;
}

// Y_0 and Y_1 from the Neumann series in the J_k, evaluated on a Miller array.
std::pair<double, double> y01(double x)
{
  const int m = miller_start(2, x);
  const std::vector<double> j = miller_j(m, x);
  const double lg = std::log(0.5 * x) + kEulerGamma;
  double s0 = 0.0;
  double s1 = 0.0;
  for (int k = 1; 2 * k + 1 <= m; ++k)
  {
    const double sign = (k % 2 == 0) ? 1.0 : -1.0;
    s0 += sign * j[2 * k] / k;
    s1 += sign * (j[2 * k - 1] - j[2 * k + 1]) / k;
  }
  const double y0 = (2.0 / kPi) * lg * j[0] - (4.0 / kPi) * s0;
  const double y1 = -(2.0 / kPi) * j[0] / x + (2.0 / kPi) * lg * j[1] + (2.0 / kPi) * s1;
  return {y0, y1};
}

// K_0 and K_1 from the ascending series (x <= 2).
std::pair<double, double> k01_series(double x)
{
  const double q = 0.25 * x * x;
  const double lg = std::log(0.5 * x);
  double t = 1.0;        // q^k / (k!)^2
  double u = 1.0;        // q^k / (k! (k+1)!)
  double harmonic = 0.0;  // H_k
  double i0 = t;
  double s0 = 0.0;
  double i1 = u;
  double s1 = (-2.0 * kEulerGamma + 1.0) * u;
  for (int k = 1; k < 200; ++k)
  {
    t *= q / (static_cast<double>(k) * k);
    u *= q / (static_cast<double>(k) * (k + 1.0));
    harmonic += 1.0 / k;
    i0 += t;
    s0 += harmonic * t;
    i1 += u;
    s1 += (-2.0 * kEulerGamma + 2.0 * harmonic + 1.0 / (k + 1.0)) * u;
    if (t < 1e-18 * i0 && u < 1e-18 * i1)
    {
      break;
    }
  }
  i1 *= 0.5 * x;
  const double k0 = -(lg + kEulerGamma) * i0 + s0;
  const double k1 = 1.0 / x + lg * i1 - 0.25 * x * s1;
  return {k0, k1};
}

// K_0 and K_1 from Steed's evaluation of the second continued fraction (x > 2).
std::pair<double, double> k01_continued_fraction(double x)
{
  constexpr int kMaxIter = 10000;
  constexpr double kEps = 1e-16;
  double b = 2.0 * (1.0 + x);
  double d = 1.0 / b;
  double h = d;
  double delh = d;
  double q1 = 0.0;
  double q2 = 1.0;
  const double a1 = 0.25;
  double q = a1;
  double c = a1;
  double a = -a1;
  double s = 1.0 + q * delh;
  int i = 2;
  for (; i <= kMaxIter; ++i)
  {
    a -= 2.0 * (i - 1);
    c = -a * c / i;
    const double qnew = (q1 - b * q2) / a;
    q1 = q2;
    q2 = qnew;
    q += c * qnew;
    b += 2.0;
    d = 1.0 / (b + a * d);
    delh = (b * d - 1.0) * delh;
    h += delh;
    const double dels = q * delh;
    s += dels;
    if (std::abs(dels / s) < kEps)
    {
      break;
    }
  }
  if (i > kMaxIter)
  {
    throw NumericalError("K_0/K_1 continued fraction failed to converge at x = " +
                         std::to_string(x));
  }
  h *= a1;
  const double k0 = std::sqrt(kPi / (2.0 * x)) * std::exp(-x) / s;
  const double k1 = k0 * (x + 0.5 - h) / x;
  return {k0, k1};
}

void check_finite(const std::vector<double> &values, const char *name, double x)
{
  for (double v : values)
  {
    if (!std::isfinite(v))
    {
      throw OverflowError(std::string(name) + " not representable at x = " + std::to_string(x));
    }
  }
}

}  // namespace

std::vector<double> bessel_j_sequence(int nmax, double x)
{
  check_sequence_order(nmax);
  if (!(x >= 0.0) || !std::isfinite(x))
  {
    throw DomainError("bessel_j requires x >= 0, got " + std::to_string(x));
  }
  std::vector<double> out(static_cast<std::size_t>(nmax) + 1, 0.0);
  if (x == 0.0)
  {
    out[0] = 1.0;
    return out;
  }
  if (x <= kJSeriesLimit)
  {
    for (int n = 0; n <= nmax; ++n)
    {
      out[n] = j_series(n, x);
    }
    return out;
  }
  const std::vector<double> j = miller_j(miller_start(nmax, x), x);
  std::copy_n(j.begin(), nmax + 1, out.begin());
  return out;
}

std::vector<double> bessel_y_sequence(int nmax, double x)
{
  check_sequence_order(nmax);
  check_positive(x, "bessel_y");
  std::vector<double> out(static_cast<std::size_t>(nmax) + 1, 0.0);
  const auto [y0, y1] = y01(x);
  out[0] = y0;
  if (nmax >= 1)
  {
    out[1] = y1;
  }
  for (int k = 1; k < nmax; ++k)
  {
    out[k + 1] = (2.0 * k / x) * out[k] - out[k - 1];
  }
  check_finite(out, "Y_n", x);
  return out;
}

std::vector<double> bessel_k_sequence(int nmax, double x)
{
  check_sequence_order(nmax);
  check_positive(x, "bessel_k");
  std::vector<double> out(static_cast<std::size_t>(nmax) + 1, 0.0);
  const auto [k0, k1] = (x <= kKSeriesLimit) ? k01_series(x) : k01_continued_fraction(x);
  if (!(k0 > 0.0))
  {
    throw OverflowError("K_0 underflows at x = " + std::to_string(x));
  }
  out[0] = k0;
  if (nmax >= 1)
  {
    out[1] = k1;
  }
  for (int k = 1; k < nmax; ++k)
  {
    out[k + 1] = out[k - 1] + (2.0 * k / x) * out[k];
  }
  check_finite(out, "K_n", x);
  return out;
}

RealPair bessel_j(int n, double x)
{
  check_order(n);
  const int m = std::abs(n);
  const std::vector<double> j = bessel_j_sequence(m + 1, x);
  const double below = (m == 0) ? -j[1] : j[m - 1];
  RealPair r{j[m], 0.5 * (below - j[m + 1])};
  if (n < 0)
  {
    r.value *= parity(m);
    r.derivative *= parity(m);
  }
  return r;
}

RealPair bessel_y(int n, double x)
{
  check_order(n);
  const int m = std::abs(n);
  const std::vector<double> y = bessel_y_sequence(m + 1, x);
  const double below = (m == 0) ? -y[1] : y[m - 1];
  RealPair r{y[m], 0.5 * (below - y[m + 1])};
  if (!std::isfinite(r.derivative))
  {
    throw OverflowError("Y_n derivative not representable at x = " + std::to_string(x));
  }
  if (n < 0)
  {
    r.value *= parity(m);
    r.derivative *= parity(m);
  }
  return r;
}

RealPair bessel_k(int n, double x)
{
  check_order(n);
  const int m = std::abs(n);
  const std::vector<double> k = bessel_k_sequence(m + 1, x);
  const double below = (m == 0) ? k[1] : k[m - 1];
  RealPair r{k[m], -0.5 * (below + k[m + 1])};
  if (!std::isfinite(r.derivative))
  {
    throw OverflowError("K_n derivative not representable at x = " + std::to_string(x));
  }
  return r;
}

ComplexPair hankel1(int n, double x)
{
  check_order(n);
  check_positive(x, "hankel1");
  const RealPair j = bessel_j(n, x);
  const RealPair y = bessel_y(n, x);
  return {{j.value, y.value}, {j.derivative, y.derivative}};
}

std::complex<double> dtn_symbol_h(int n, double z)
{
  check_positive(z, "dtn_symbol_h");
  const ComplexPair h = hankel1(std::abs(n), z);
  return z * h.derivative / h.value;
}

double dtn_symbol_k(int n, double z)
{
  check_positive(z, "dtn_symbol_k");
  const RealPair k = bessel_k(std::abs(n), z);
  return z * k.derivative / k.value;
}

}  // namespace flexural::specfun
