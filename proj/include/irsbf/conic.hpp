#pragma once

#include "irsbf/types.hpp"

#include <iosfwd>
#include <vector>

namespace irsbf {

// Second-order cone constraint ||A x + b||_2 <= c.x + d over real variables.
struct SocCone {
  MatX A;
  VecX b;
  VecX c;
  Scalar d = 0;

  Eigen::Index dim() const { return c.size(); }
  Eigen::Index rows() const { return A.rows(); }
};

enum class SolveStatus { Optimal, Infeasible, MaxIterations, NumericalFailure };

struct KktResiduals {
  Scalar primal = 0;  // ||G x + s - h|| / max(1, ||h||)
  Scalar dual = 0;    // ||G'z + f|| / max(1, ||f||)
  Scalar gap = 0;     // s'z / max(1, |primal obj|, |dual obj|)
};

// min ||x - target||_2 subject to the cones; a zero target is the
// minimum-norm problem. Internally solved as min t with the epigraph cone
// ||x - target|| <= t prepended to the constraint cones.
struct SocpProblem {
  VecX target;
  std::vector<SocCone> cones;

  Eigen::Index dim() const { return target.size(); }
  void validate() const;
};

struct SocpSolution {
  VecX x;
  SolveStatus status = SolveStatus::NumericalFailure;
  Scalar objective = 0;
  KktResiduals kkt;
  int iterations = 0;
};

SocpSolution solve(const SocpProblem& problem, Scalar tol = 1e-8, int max_iter = 200);

// Low-level conic form min f.x s.t. cones, for callers that need a linear
// objective (slack-penalized re-solves). solve() is a thin wrapper over it.
struct ConicProgram {
  VecX f;
  std::vector<SocCone> cones;
};

SocpSolution solve_conic(const ConicProgram& program, Scalar tol = 1e-8, int max_iter = 200);

inline Scalar cone_slack(const SocCone& cone, const VecX& x) {
  return cone.c.dot(x) + cone.d - (cone.A * x + cone.b).norm();
}

// Complex vectors are stacked as [Re; Im]; the map is an isometry.
VecX complex_to_real(const CVec& z);
CVec real_to_complex(const VecX& x);

// Real 2m x 2n matrix acting on the stacking of z so that the result is the
// stacking of S z (resp. S conj(z)).
MatX realify_matrix(const CMat& S);
MatX realify_matrix_conj(const CMat& S);

// Hermitian PSD square root: returns Hermitian R with R^H R = S.
// Eigenvalues in [-eps, 0) are clamped to zero; an eigenvalue below -eps
// raises std::domain_error. S must be Hermitian within 1e-10 (max-abs,
// relative to its scale).
CMat psd_sqrt(const CMat& S, Scalar eps = 1e-9);

// Plain-text standard form for solver-debugging fixtures. Layout:
//   socp 1
//   dim <n>
//   target <n reals>
//   cones <count>
// then per cone: "cone <rows> <n>", `rows` lines of A, one line b, one line
// c, one line d. All reals at 17 significant digits.
void write_problem(std::ostream& os, const SocpProblem& problem);
SocpProblem read_problem(std::istream& is);

}  // namespace irsbf
