// Copyright 2026 The z3sim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include "z3sim/eigensolver.hpp"

#include <complex>
#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "z3sim/errors.hpp"

namespace z3sim {
namespace {

std::vector<double> residual_norms(const SparseMat* hs, const DenseMat* hd, const Eigen::VectorXd& values,
                                   const DenseMat& vectors) {
  std::vector<double> res(vectors.cols());
  if (vectors.cols() == 0) return res;
  DenseMat hv = hs ? DenseMat(*hs * vectors) : DenseMat(*hd * vectors);
  for (Eigen::Index i = 0; i < vectors.cols(); ++i) res[i] = (hv.col(i) - values(i) * vectors.col(i)).norm();
  return res;
}

EigenPairs zheevr(const DenseMat& h, int k, bool want_vectors, bool all) {
  const lapack_int n = static_cast<lapack_int>(h.rows());
  if (h.rows() != h.cols()) throw std::invalid_argument("eigensolver: matrix must be square");
  if (k < 0 || k > n) throw std::invalid_argument("eigensolver: k must be in [0, dim]");
  EigenPairs out;
  out.method = "dense";
  if (n == 0 || k == 0) return out;
  DenseMat a = h;
  Eigen::VectorXd w(n);
  DenseMat z(n, want_vectors ? k : 1);
  std::vector<lapack_int> isuppz(2 * static_cast<std::size_t>(std::max(1, k)));
  lapack_int found = 0;
  lapack_int info = LAPACKE_zheevr(LAPACK_COL_MAJOR, want_vectors ? 'V' : 'N', all ? 'A' : 'I', 'L', n, a.data(), n,
                                   0.0, 0.0, 1, k, 0.0, &found, w.data(), z.data(), n, isuppz.data());
  if (info != 0) throw std::runtime_error("zheevr failed with info " + std::to_string(info));
  out.values = w.head(k);
  if (want_vectors) {
    out.vectors = z.leftCols(k);
    out.residuals = residual_norms(nullptr, &h, out.values, out.vectors);
  }
  return out;
}

// Orthonormalizes the columns of w, which are already orthogonal to basis,
// among themselves. Returns R with w_in = q * R. Deficient columns are
// replaced by random vectors orthogonal to basis and get a zero row in R.
DenseMat orthonormalize(DenseMat& w, const Eigen::Ref<const DenseMat>& basis, std::mt19937_64& rng) {
  const Eigen::Index b = w.cols();
  DenseMat r = DenseMat::Zero(b, b);
  std::normal_distribution<double> normal;
  for (Eigen::Index i = 0; i < b; ++i) {
    double before = w.col(i).norm();
    for (int pass = 0; pass < 2; ++pass) {
      for (Eigen::Index l = 0; l < i; ++l) {
        cplx c = w.col(l).dot(w.col(i));
        r(l, i) += c;
        w.col(i) -= c * w.col(l);
      }
    }
    double nrm = w.col(i).norm();
    if (nrm < 0.5 * before && basis.cols() > 0 && nrm > 1e-12 * before) {
      w.col(i) -= basis * (basis.adjoint() * w.col(i));
      for (Eigen::Index l = 0; l < i; ++l) w.col(i) -= w.col(l).dot(w.col(i)) * w.col(l);
      nrm = w.col(i).norm();
    }
    if (nrm > 1e-12 * std::max(1.0, before) && nrm > 1e-300) {
      r(i, i) = nrm;
      w.col(i) /= nrm;
      continue;
    }
    r.col(i).setZero();
    for (int attempt = 0; attempt < 5; ++attempt) {
      for (Eigen::Index t = 0; t < w.rows(); ++t) w(t, i) = cplx(normal(rng), normal(rng));
      for (int pass = 0; pass < 2; ++pass) {
        if (basis.cols() > 0) w.col(i) -= basis * (basis.adjoint() * w.col(i));
        for (Eigen::Index l = 0; l < i; ++l) w.col(i) -= w.col(l).dot(w.col(i)) * w.col(l);
      }
      nrm = w.col(i).norm();
      if (nrm > 1e-8) break;
    }
    if (nrm <= 1e-8) throw std::runtime_error("lanczos: could not extend the Krylov basis");
    w.col(i) /= nrm;
  }
  return r;
}

}  // namespace

EigenPairs dense_eigh(const DenseMat& h, int k, bool want_vectors) { return zheevr(h, k, want_vectors, false); }

EigenPairs dense_eigh(const DenseMat& h) { return zheevr(h, static_cast<int>(h.rows()), true, true); }

EigenPairs lanczos_eigh(const SparseMat& h, int k, const LanczosOptions& opts) {
  const Eigen::Index n = h.rows();
  if (h.rows() != h.cols()) throw std::invalid_argument("eigensolver: matrix must be square");
  if (k < 1 || k > n) throw std::invalid_argument("eigensolver: k must be in [1, dim]");
  const int b = opts.block_size > 0 ? opts.block_size : 4;
  int m = opts.max_basis > 0 ? opts.max_basis : std::max(8 * b, 6 * k + 4 * b);
  m = (m + b - 1) / b * b;
  if (m + b >= n || k + 2 * b > m) {
    EigenPairs dense = dense_eigh(DenseMat(h), k, true);
    dense.method = "dense";
    return dense;
  }

  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> normal;
  DenseMat v(n, m);
  DenseMat t = DenseMat::Zero(m, m);

  DenseMat w(n, b);
  const Eigen::Index given = opts.start.rows() == n ? std::min<Eigen::Index>(opts.start.cols(), b) : 0;
  if (opts.start.size() > 0 && opts.start.rows() != n) {
    throw std::invalid_argument("eigensolver: start block has the wrong dimension");
  }
  w.leftCols(given) = opts.start.leftCols(given);
  for (Eigen::Index j = given; j < b; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) w(i, j) = cplx(normal(rng), normal(rng));
  }
  orthonormalize(w, v.leftCols(0), rng);
  v.leftCols(b) = w;

  int j0 = 0;
  double worst = INFINITY;
  for (int restart = 0; restart <= opts.max_restarts; ++restart) {
    DenseMat r;
    int used = 0;
    while (true) {
      w.noalias() = h * v.middleCols(j0, b);
      used = j0 + b;
      Eigen::VectorXd before = w.colwise().norm();
      DenseMat c = v.leftCols(used).adjoint() * w;
      w.noalias() -= v.leftCols(used) * c;
      // Second pass only when a column lost most of its norm.
      Eigen::VectorXd after = w.colwise().norm();
      if ((after.array() < 0.7 * before.array()).any()) {
        DenseMat c2 = v.leftCols(used).adjoint() * w;
        w.noalias() -= v.leftCols(used) * c2;
        c += c2;
      }
      // Symmetrize the diagonal block.
      DenseMat diag = c.block(j0, 0, b, b);
      c.block(j0, 0, b, b) = 0.5 * (diag + diag.adjoint());
      t.block(0, j0, used, b) = c;
      t.block(j0, 0, b, used) = c.adjoint();
      r = orthonormalize(w, v.leftCols(used), rng);
      if (used + b > m) break;
      v.middleCols(used, b) = w;
      t.block(used, j0, b, b) = r;
      t.block(j0, used, b, b) = r.adjoint();
      j0 = used;
    }

    Eigen::SelfAdjointEigenSolver<DenseMat> es(t.topLeftCorner(used, used));
    const Eigen::VectorXd& theta = es.eigenvalues();
    const DenseMat& y = es.eigenvectors();
    DenseMat coupling = r * y.bottomRows(b);  // b x m
    worst = 0.0;
    const int held = opts.converge_count > 0 ? std::min(opts.converge_count, k) : k;
    for (int i = 0; i < held; ++i) worst = std::max(worst, coupling.col(i).norm());
    if (worst <= opts.tol) {
      EigenPairs out;
      out.method = "lanczos";
      out.iterations = restart;
      out.values = theta.head(k);
      out.vectors = v.leftCols(used) * y.leftCols(k);
      for (int i = 0; i < k; ++i) out.vectors.col(i).normalize();
      out.residuals = residual_norms(&h, nullptr, out.values, out.vectors);
      return out;
    }

    const int p = std::min(std::max(k + b, m / 2), m - 2 * b);
    DenseMat kept = v.leftCols(used) * y.leftCols(p);
    v.leftCols(p) = kept;
    v.middleCols(p, b) = w;
    t.setZero();
    for (int i = 0; i < p; ++i) t(i, i) = theta(i);
    t.block(p, 0, b, p) = coupling.leftCols(p);
    t.block(0, p, p, b) = coupling.leftCols(p).adjoint();
    j0 = p;
  }
  throw ConvergenceError("lanczos did not converge; worst residual " + std::to_string(worst), worst);
}

EigenPairs lowest_eigenpairs(const SparseMat& h, int k, bool want_vectors, const LanczosOptions& opts) {
  const std::int64_t n = h.rows();
  if (n <= kDenseCrossoverDim || (n <= kDenseDimLimit && 20 * static_cast<std::int64_t>(k) >= n)) {
    return dense_eigh(DenseMat(h), k, want_vectors);
  }
  EigenPairs out = lanczos_eigh(h, k, opts);
  if (!want_vectors) out.vectors.resize(0, 0);
  return out;
}

}  // namespace z3sim
