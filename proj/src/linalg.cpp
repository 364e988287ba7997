#include "nforge/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "nforge/errors.hpp"
#include "nforge/parallel.hpp"

namespace nforge {

namespace {

constexpr std::size_t kMr = 6;
constexpr std::size_t kNr = 16;
constexpr std::size_t kKc = 256;
constexpr std::size_t kMc = 96;
constexpr std::size_t kNc = 2048;

// Packs an mc x kc block of op(A) into row panels of kMr, zero padded.
void pack_a(Trans t, const double* a, std::size_t lda, std::size_t i0, std::size_t p0,
            std::size_t mc, std::size_t kc, double* out) {
  for (std::size_t ir = 0; ir < mc; ir += kMr) {
    const std::size_t mr = std::min(kMr, mc - ir);
    for (std::size_t p = 0; p < kc; ++p) {
      for (std::size_t i = 0; i < kMr; ++i) {
        double v = 0.0;
        if (i < mr) {
          const std::size_t row = i0 + ir + i;
          const std::size_t col = p0 + p;
          v = t == Trans::kNo ? a[row * lda + col] : a[col * lda + row];
        }
        *out++ = v;
      }
    }
  }
}

// Packs a kc x nc block of op(B) into column panels of kNr, zero padded.
void pack_b(Trans t, const double* b, std::size_t ldb, std::size_t p0, std::size_t j0,
            std::size_t kc, std::size_t nc, double* out) {
  for (std::size_t jr = 0; jr < nc; jr += kNr) {
    const std::size_t nr = std::min(kNr, nc - jr);
    for (std::size_t p = 0; p < kc; ++p) {
      const std::size_t row = p0 + p;
      if (t == Trans::kNo) {
        const double* src = b + row * ldb + j0 + jr;
        for (std::size_t j = 0; j < kNr; ++j) *out++ = j < nr ? src[j] : 0.0;
      } else {
        for (std::size_t j = 0; j < kNr; ++j)
          *out++ = j < nr ? b[(j0 + jr + j) * ldb + row] : 0.0;
      }
    }
  }
}

// acc starts from C (or zero) and takes products in ascending k.
void micro_kernel(std::size_t kc, const double* __restrict a, const double* __restrict b,
                  double* c, std::size_t ldc, bool load_c, std::size_t mr, std::size_t nr) {
  double acc[kMr][kNr];
  if (load_c) {
    for (std::size_t i = 0; i < kMr; ++i)
      for (std::size_t j = 0; j < kNr; ++j)
        acc[i][j] = (i < mr && j < nr) ? c[i * ldc + j] : 0.0;
  } else {
    for (std::size_t i = 0; i < kMr; ++i)
      for (std::size_t j = 0; j < kNr; ++j) acc[i][j] = 0.0;
  }
  for (std::size_t p = 0; p < kc; ++p) {
    const double* ap = a + p * kMr;
    const double* bp = b + p * kNr;
#pragma GCC unroll 6
    for (std::size_t i = 0; i < kMr; ++i) {
      const double av = ap[i];
#pragma GCC unroll 16
      for (std::size_t j = 0; j < kNr; ++j) acc[i][j] = gemm_madd(av, bp[j], acc[i][j]);
    }
  }
  for (std::size_t i = 0; i < mr; ++i)
    for (std::size_t j = 0; j < nr; ++j) c[i * ldc + j] = acc[i][j];
}

}  // namespace

void gemm(Trans trans_a, Trans trans_b, std::size_t m, std::size_t n, std::size_t k,
          const double* a, std::size_t lda, const double* b, std::size_t ldb, double beta,
          double* c, std::size_t ldc) {
  if (m == 0 || n == 0) return;
  if (k == 0) {
    if (beta == 0.0)
      for (std::size_t i = 0; i < m; ++i) std::fill(c + i * ldc, c + i * ldc + n, 0.0);
    return;
  }
  thread_local std::vector<double> bpack;
  bpack.resize(kKc * (std::min(kNc, n) + kNr));

  for (std::size_t jc = 0; jc < n; jc += kNc) {
    const std::size_t nc = std::min(kNc, n - jc);
    for (std::size_t pc = 0; pc < k; pc += kKc) {
      const std::size_t kc = std::min(kKc, k - pc);
      const bool load_c = pc > 0 || beta != 0.0;
      pack_b(trans_b, b, ldb, pc, jc, kc, nc, bpack.data());
      const double* bp = bpack.data();
      const std::size_t row_blocks = (m + kMc - 1) / kMc;
      parallel_for(
          row_blocks,
          [&](std::size_t lo, std::size_t hi) {
            thread_local std::vector<double> apack;
            apack.resize(kKc * (kMc + kMr));
            for (std::size_t blk = lo; blk < hi; ++blk) {
              const std::size_t ic = blk * kMc;
              const std::size_t mc = std::min(kMc, m - ic);
              pack_a(trans_a, a, lda, ic, pc, mc, kc, apack.data());
              for (std::size_t jr = 0; jr < nc; jr += kNr) {
                const std::size_t nr = std::min(kNr, nc - jr);
                for (std::size_t ir = 0; ir < mc; ir += kMr) {
                  const std::size_t mr = std::min(kMr, mc - ir);
                  micro_kernel(kc, apack.data() + ir * kc, bp + jr * kc,
                               c + (ic + ir) * ldc + jc + jr, ldc, load_c, mr, nr);
                }
              }
            }
          },
          1);
    }
  }
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.dim(1) != b.dim(0))
    throw ShapeError("matmul: incompatible shapes " + shape_str(a.shape()) + " and " +
                     shape_str(b.shape()));
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  Tensor c({m, n});
  gemm(Trans::kNo, Trans::kNo, m, n, k, a.data().data(), k, b.data().data(), n, 0.0,
       c.data().data(), n);
  return c;
}

Tensor transpose(const Tensor& a) {
  if (a.rank() != 2) throw ShapeError("transpose: rank-2 tensor required, got " + shape_str(a.shape()));
  const std::size_t r = a.dim(0), c = a.dim(1);
  Tensor t({c, r});
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) t(j, i) = a(i, j);
  return t;
}

EighResult eigh_symmetric(const Tensor& input, double tol) {
  if (input.rank() != 2 || input.dim(0) != input.dim(1))
    throw ArgumentError("eigh_symmetric: square matrix required, got " + shape_str(input.shape()));
  const std::size_t n = input.dim(0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (std::abs(input(i, j) - input(j, i)) > 1e-9)
        throw ArgumentError("eigh_symmetric: matrix is not symmetric at (" + std::to_string(i) +
                            "," + std::to_string(j) + ")");

  // Round-robin ordering: each step applies n/2 disjoint rotations, which
  // commute, so rows and then columns can be rotated in contiguous passes.
  std::vector<double> a(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) a[i * n + j] = 0.5 * (input(i, j) + input(j, i));
  std::vector<double> vt(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) vt[i * n + i] = 1.0;

  auto off_max = [&] {
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) m = std::max(m, std::abs(a[i * n + j]));
    return m;
  };

  struct Rotation {
    std::size_t p, q;
    double c, s, app, aqq;
  };
  const std::size_t slots = n + (n % 2);  // odd n gets a dummy slot
  std::vector<std::size_t> ring(slots);
  std::iota(ring.begin(), ring.end(), 0);
  std::vector<Rotation> rots;
  rots.reserve(slots / 2);

  auto rotate_rows = [n](std::vector<double>& m, const Rotation& r) {
    double* rp = &m[r.p * n];
    double* rq = &m[r.q * n];
    for (std::size_t k = 0; k < n; ++k) {
      const double xp = rp[k];
      const double xq = rq[k];
      rp[k] = r.c * xp - r.s * xq;
      rq[k] = r.s * xp + r.c * xq;
    }
  };

  int sweeps = 0;
  while (off_max() >= tol) {
    if (++sweeps > kJacobiMaxSweeps)
      throw ConvergenceError("eigh_symmetric: no convergence after " +
                             std::to_string(kJacobiMaxSweeps) + " sweeps");
    for (std::size_t step = 0; step + 1 < slots; ++step) {
      rots.clear();
      for (std::size_t i = 0; i < slots / 2; ++i) {
        std::size_t p = ring[i];
        std::size_t q = ring[slots - 1 - i];
        if (p >= n || q >= n) continue;
        if (p > q) std::swap(p, q);
        const double apq = a[p * n + q];
        if (apq == 0.0) continue;
        const double app = a[p * n + p];
        const double aqq = a[q * n + q];
        // Below the diagonals' resolution: a rotation would be a no-op.
        if (std::abs(app) + 100.0 * std::abs(apq) == std::abs(app) &&
            std::abs(aqq) + 100.0 * std::abs(apq) == std::abs(aqq)) {
          a[p * n + q] = a[q * n + p] = 0.0;
          continue;
        }
        const double theta = (aqq - app) / (2.0 * apq);
        const double t =
            (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        rots.push_back({p, q, c, t * c, app - t * apq, aqq + t * apq});
      }
      if (!rots.empty()) {
        for (const auto& r : rots) rotate_rows(a, r);
        for (std::size_t k = 0; k < n; ++k) {
          double* row = &a[k * n];
          for (const auto& r : rots) {
            const double xp = row[r.p];
            const double xq = row[r.q];
            row[r.p] = r.c * xp - r.s * xq;
            row[r.q] = r.s * xp + r.c * xq;
          }
        }
        for (const auto& r : rots) {
          a[r.p * n + r.p] = r.app;
          a[r.q * n + r.q] = r.aqq;
          a[r.p * n + r.q] = a[r.q * n + r.p] = 0.0;
          rotate_rows(vt, r);
        }
      }
      std::rotate(ring.begin() + 1, ring.end() - 1, ring.end());
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return a[x * n + x] > a[y * n + y]; });
  EighResult out{std::vector<double>(n), Tensor({n, n})};
  for (std::size_t col = 0; col < n; ++col) {
    const std::size_t src = order[col];
    out.eigenvalues[col] = a[src * n + src];
    for (std::size_t row = 0; row < n; ++row) out.eigenvectors(row, col) = vt[src * n + row];
  }
  return out;
}

}  // namespace nforge
