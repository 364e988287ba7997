#pragma once

#include <cstddef>
#include <vector>

#include "nforge/tensor.hpp"

namespace nforge {

enum class Trans { kNo, kYes };

/// The GEMM accumulation step acc <- acc + a*b. Fused (one rounding) when the
/// target has hardware FMA, two roundings otherwise.
#ifdef __FMA__
inline constexpr bool kGemmFusedMultiplyAdd = true;
inline double gemm_madd(double a, double b, double acc) { return __builtin_fma(a, b, acc); }
#else
inline constexpr bool kGemmFusedMultiplyAdd = false;
inline double gemm_madd(double a, double b, double acc) { return acc + a * b; }
#endif

/// C = beta*C + op(A)*op(B), with op(A) of shape MxK and op(B) KxN.
///
/// Every C element is accumulated with gemm_madd in ascending k order,
/// starting from beta*C, regardless of blocking or thread count, so results are
/// reproducible bit for bit. beta must be 0 or 1.
void gemm(Trans trans_a, Trans trans_b, std::size_t m, std::size_t n, std::size_t k,
          const double* a, std::size_t lda, const double* b, std::size_t ldb, double beta,
          double* c, std::size_t ldc);

/// Rank-2 matrix product. Throws ShapeError naming both shapes on mismatch.
Tensor matmul(const Tensor& a, const Tensor& b);

Tensor transpose(const Tensor& a);

struct EighResult {
  std::vector<double> eigenvalues;  // descending
  Tensor eigenvectors;              // n x n, column i pairs with eigenvalues[i]
};

inline constexpr int kJacobiMaxSweeps = 100;

/// Symmetric eigendecomposition by cyclic Jacobi rotations. Iterates until
/// every off-diagonal magnitude is below `tol`.
///
/// Throws ArgumentError when `a` is not square or not symmetric within 1e-9,
/// ConvergenceError after kJacobiMaxSweeps sweeps.
EighResult eigh_symmetric(const Tensor& a, double tol = 1e-12);

}  // namespace nforge
