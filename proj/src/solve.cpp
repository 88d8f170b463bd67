#include "flexural/solve.hpp"

#include <cmath>
#include <limits>

#ifdef FLEXURAL_HAVE_UMFPACK
#include <Eigen/UmfPackSupport>
#else
#include <Eigen/SparseLU>
#endif

#include "flexural/errors.hpp"

namespace flexural
{

namespace
{

constexpr int kMaxRefinement = 3;

double one_norm(const SparseComplex &A)
{
  double best = 0.0;
  for (int col = 0; col < A.outerSize(); ++col)
  {
    double s = 0.0;
    for (SparseComplex::InnerIterator it(A, col); it; ++it)
    {
      s += std::abs(it.value());
    }
    best = std::max(best, s);
  }
  return best;
}

bool is_symmetric(const SparseComplex &A)
{
  const SparseComplex At = A.transpose();
  const SparseComplex diff = A - At;
  for (int col = 0; col < diff.outerSize(); ++col)
  {
    for (SparseComplex::InnerIterator it(diff, col); it; ++it)
    {
      if (it.value() != Complex(0.0, 0.0))
      {
        return false;
      }
    }
  }
  return true;
}

#ifdef FLEXURAL_HAVE_UMFPACK
using Backend = Eigen::UmfPackLU<SparseComplex>;

void factorize(Backend &lu, const SparseComplex &A)
{
  lu.umfpackControl()(UMFPACK_ORDERING) = UMFPACK_ORDERING_METIS;
  lu.compute(A);
  if (lu.info() != Eigen::Success)
  {
    throw SolverError("sparse LU failed (UMFPACK status " +
                      std::to_string(lu.umfpackFactorizeReturncode()) + ")");
  }
}
#else
using Backend = Eigen::SparseLU<SparseComplex, Eigen::COLAMDOrdering<int>>;

void factorize(Backend &lu, const SparseComplex &A)
{
  lu.analyzePattern(A);
  lu.factorize(A);
  if (lu.info() != Eigen::Success)
  {
    throw SolverError("sparse LU failed: " + lu.lastErrorMessage());
  }
}
#endif

VectorC checked(VectorC x)
{
  if (!x.allFinite())
  {
    throw SolverError("sparse LU produced non-finite values; matrix is numerically singular");
  }
  return x;
}

}  // namespace

// The UMFPACK wrapper keeps a reference to the factored matrix, so both live
// here at a stable address.
struct Factorization::Impl
{
  SparseComplex A;
  mutable SparseComplex Ah;
  Backend lu;
  bool symmetric = false;
  // LU of A^H, built on first use when A is not symmetric.
  mutable std::unique_ptr<Backend> adjoint;
};

Factorization::Factorization(const SparseComplex &A) : impl_(std::make_unique<Impl>())
{
  if (A.rows() != A.cols())
  {
    throw DimensionError("system matrix is not square");
  }
  impl_->A = A;
  impl_->A.makeCompressed();
  factorize(impl_->lu, impl_->A);
  impl_->symmetric = is_symmetric(impl_->A);
}

Factorization::~Factorization() = default;

const SparseComplex &Factorization::matrix() const
{
  return impl_->A;
}
Factorization::Factorization(Factorization &&) noexcept = default;
Factorization &Factorization::operator=(Factorization &&) noexcept = default;

VectorC Factorization::solve(const VectorC &b) const
{
  return checked(impl_->lu.solve(b));
}

VectorC Factorization::solve_adjoint(const VectorC &b) const
{
  if (impl_->symmetric)
  {
    // A^H = conj(A) when A = A^T.
    const VectorC cb = b.conjugate();
    return checked(impl_->lu.solve(cb).conjugate());
  }
  if (!impl_->adjoint)
  {
    impl_->adjoint = std::make_unique<Backend>();
    impl_->Ah = impl_->A.adjoint();
    impl_->Ah.makeCompressed();
    factorize(*impl_->adjoint, impl_->Ah);
  }
  return checked(impl_->adjoint->solve(b));
}

double Factorization::rcond_estimate() const
{
  const Eigen::Index n = impl_->A.rows();
  if (n == 0)
  {
    return 1.0;
  }
  // Higham's variant of Hager's 1-norm estimator for ||A^-1||_1.
  VectorC x = VectorC::Constant(n, Complex(1.0 / static_cast<double>(n), 0.0));
  double estimate = 0.0;
  Eigen::Index last = -1;
  for (int iter = 0; iter < 5; ++iter)
  {
    const VectorC y = solve(x);
    const double est = y.cwiseAbs().sum();
    if (iter > 0 && est <= estimate)
    {
      break;
    }
    estimate = est;
    VectorC xi(n);
    for (Eigen::Index k = 0; k < n; ++k)
    {
      const double a = std::abs(y[k]);
      xi[k] = a > 0.0 ? y[k] / a : Complex(1.0, 0.0);
    }
    const VectorC z = solve_adjoint(xi);
    Eigen::Index j = 0;
    z.real().cwiseAbs().maxCoeff(&j);
    if (j == last)
    {
      break;
    }
    last = j;
    x.setZero();
    x[j] = 1.0;
  }
  const double anorm = one_norm(impl_->A);
  return (anorm > 0.0 && estimate > 0.0) ? 1.0 / (anorm * estimate) : 0.0;
}

double Factorization::smallest_singular_value(int iterations) const
{
  const Eigen::Index n = impl_->A.rows();
  VectorC x(n);
  for (Eigen::Index k = 0; k < n; ++k)
  {
    // Fixed, non-degenerate start vector.
    x[k] = Complex(1.0 + 0.5 * std::sin(0.7 * k), 0.25 * std::cos(1.3 * k));
  }
  x.normalize();
  double lambda = 0.0;
  for (int iter = 0; iter < iterations; ++iter)
  {
    const VectorC y = solve(solve_adjoint(x));
    const double next = y.norm();
    x = y / next;
    if (iter > 0 && std::abs(next - lambda) <= 1e-10 * next)
    {
      lambda = next;
      break;
    }
    lambda = next;
  }
  return lambda > 0.0 ? 1.0 / std::sqrt(lambda) : std::numeric_limits<double>::infinity();
}

double relative_residual(const SparseComplex &A, const VectorC &x, const VectorC &b)
{
  const double nb = b.norm();
  const double nr = (A * x - b).norm();
  return nb > 0.0 ? nr / nb : nr;
}

SolveResult solve_system(const SparseComplex &A, const VectorC &F, bool estimate_condition)
{
  if (A.rows() != F.size())
  {
    throw DimensionError("load vector does not match the system matrix");
  }
  const Factorization lu(A);
  SolveResult out;
  out.W = lu.solve(F);
  out.diagnostics.relative_residual = relative_residual(A, out.W, F);
  while (out.diagnostics.relative_residual > kResidualBound * 1e-2 &&
         out.diagnostics.refinement_steps < kMaxRefinement)
  {
    const VectorC r = F - A * out.W;
    const VectorC candidate = out.W + lu.solve(r);
    const double res = relative_residual(A, candidate, F);
    ++out.diagnostics.refinement_steps;
    if (!(res < out.diagnostics.relative_residual))
    {
      break;
    }
    out.W = candidate;
    out.diagnostics.relative_residual = res;
  }
  if (!(out.diagnostics.relative_residual <= kResidualBound))
  {
    throw SolverError("relative residual " + std::to_string(out.diagnostics.relative_residual) +
                      " exceeds " + std::to_string(kResidualBound));
  }
  if (estimate_condition)
  {
    out.diagnostics.rcond_estimate = lu.rcond_estimate();
  }
  return out;
}

SolveResult solve_system(const BlockSystem &sys, bool estimate_condition)
{
  return solve_system(sys.A, sys.F, estimate_condition);
}

SolutionField recover_fields(const VectorC &W, const Mesh &mesh, const IncidentField &inc,
                             const SolveDiagnostics &diagnostics)
{
  const DofMap dofs(mesh);
  if (W.size() != dofs.size())
  {
    throw DimensionError("solution vector has " + std::to_string(W.size()) +
                         " entries, mesh needs " + std::to_string(dofs.size()));
  }
  const auto n = static_cast<Eigen::Index>(mesh.nodes().size());
  SolutionField s;
  s.p.resize(n);
  s.q.resize(n);
  s.u.resize(n);
  s.v.resize(n);
  s.w.resize(n);
  s.ps.resize(n);
  s.qs.resize(n);
  for (Eigen::Index k = 0; k < n; ++k)
  {
    const int node = static_cast<int>(k);
    const Complex p = W[dofs.row(Field::p, node)];
    const Complex q = W[dofs.row(Field::q, node)];
    const Complex ui = inc.value(mesh.nodes()[node]);
    s.p[k] = p;
    s.q[k] = q;
    s.u[k] = q - p;
    s.ps[k] = p + ui;
    s.qs[k] = q;
    s.v[k] = s.u[k] - ui;
    s.w[k] = s.ps[k] + s.qs[k];
  }
  s.diagnostics = diagnostics;
  return s;
}

}  // namespace flexural
