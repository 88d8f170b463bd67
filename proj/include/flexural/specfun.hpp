#ifndef FLEXURAL_SPECFUN_HPP
#define FLEXURAL_SPECFUN_HPP

#include <complex>
#include <vector>

namespace flexural::specfun
{

// Largest |n| accepted by the per-order functions. Sequences may run one order
// past it internally so that derivatives at |n| = kMaxOrder are available.
inline constexpr int kMaxOrder = 64;

template <typename T>
struct ValueWithDerivative
{
  T value;
  T derivative;  // with respect to the argument
};

using RealPair = ValueWithDerivative<double>;
using ComplexPair = ValueWithDerivative<std::complex<double>>;

// Integer-order Bessel functions of real argument. All functions throw
// DomainError outside their domain (x < 0 for J, x <= 0 otherwise, or
// |n| > kMaxOrder) and OverflowError when a value is not representable.
RealPair bessel_j(int n, double x);
RealPair bessel_y(int n, double x);
RealPair bessel_k(int n, double x);
ComplexPair hankel1(int n, double x);

// DtN symbols h_n(z) = z H_n'(z)/H_n(z) and k_n(z) = z K_n'(z)/K_n(z).
// Both are even in n; the implementations evaluate at |n| so h_{-n} == h_n bitwise.
std::complex<double> dtn_symbol_h(int n, double z);
double dtn_symbol_k(int n, double z);

// Orders 0..nmax at a single argument. These are the building blocks of the
// per-order functions and are what bulk evaluators (series oracle, DtN) use.
std::vector<double> bessel_j_sequence(int nmax, double x);
std::vector<double> bessel_y_sequence(int nmax, double x);
std::vector<double> bessel_k_sequence(int nmax, double x);

}  // namespace flexural::specfun

#endif  // FLEXURAL_SPECFUN_HPP
