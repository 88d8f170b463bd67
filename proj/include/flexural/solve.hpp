#ifndef FLEXURAL_SOLVE_HPP
#define FLEXURAL_SOLVE_HPP

#include <memory>

#include "flexural/assembly.hpp"
#include "flexural/dtn.hpp"

namespace flexural
{

struct SolveDiagnostics
{
  double relative_residual = 0.0;
  int refinement_steps = 0;
  // Estimate of 1 / (||A||_1 ||A^-1||_1). Stands in for a pivot growth figure,
  // which the sparse LU does not expose.
  double rcond_estimate = 0.0;
};

inline constexpr double kResidualBound = 1e-10;

//
// Sparse LU of A (UMFPACK when available, else Eigen SparseLU).
//
class Factorization
{
public:
  explicit Factorization(const SparseComplex &A);
  ~Factorization();
  Factorization(Factorization &&) noexcept;
  Factorization &operator=(Factorization &&) noexcept;

  VectorC solve(const VectorC &b) const;
  VectorC solve_adjoint(const VectorC &b) const;

  // Hager-Higham estimate of 1 / cond_1(A).
  double rcond_estimate() const;
  // Inverse power iteration on A^H A.
  double smallest_singular_value(int iterations = 30) const;

  const SparseComplex &matrix() const;

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

struct SolveResult
{
  VectorC W;
  SolveDiagnostics diagnostics;
};

// Direct solve with up to a few steps of iterative refinement. Throws
// SolverError when A is singular or the residual bound cannot be met.
SolveResult solve_system(const BlockSystem &sys, bool estimate_condition = false);
SolveResult solve_system(const SparseComplex &A, const VectorC &F, bool estimate_condition = false);

double relative_residual(const SparseComplex &A, const VectorC &x, const VectorC &b);

struct SolutionField
{
  // Nodal values indexed by node id.
  VectorC p;
  VectorC q;
  VectorC u;   // total displacement q - p
  VectorC v;   // scattered displacement
  VectorC w;   // bending moment kappa^-2 Laplacian(v)
  VectorC ps;  // scattered auxiliaries
  VectorC qs;
  SolveDiagnostics diagnostics;
};

SolutionField recover_fields(const VectorC &W, const Mesh &mesh, const IncidentField &inc,
                             const SolveDiagnostics &diagnostics = {});

}  // namespace flexural

#endif  // FLEXURAL_SOLVE_HPP
