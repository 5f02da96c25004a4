#include "cartan/random.hpp"

namespace cartan {

RMat gaussian_real(int rows, int cols, Rng& rng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  RMat m(rows, cols);
  for (int c = 0; c < cols; ++c)
    for (int r = 0; r < rows; ++r) m(r, c) = nd(rng);
  return m;
}

CMat gaussian_complex(int rows, int cols, Rng& rng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  CMat m(rows, cols);
  for (int c = 0; c < cols; ++c)
    for (int r = 0; r < rows; ++r) {
      const double re = nd(rng);
      const double im = nd(rng);
      m(r, c) = cplx(re, im) / std::sqrt(2.0);
    }
  return m;
}

CMat haar_unitary(int n, Rng& rng) {
  const CMat z = gaussian_complex(n, n, rng);
  Eigen::HouseholderQR<CMat> qr(z);
  CMat q = qr.householderQ() * CMat::Identity(n, n);
  const CMat r = qr.matrixQR();
  for (int j = 0; j < n; ++j) {
    const double a = std::abs(r(j, j));
    if (a > 0) q.col(j) *= r(j, j) / a;
  }
  return q;
}

RMat haar_special_orthogonal(int n, Rng& rng) {
  const RMat z = gaussian_real(n, n, rng);
  Eigen::HouseholderQR<RMat> qr(z);
  RMat q = qr.householderQ() * RMat::Identity(n, n);
  const RMat r = qr.matrixQR();
  for (int j = 0; j < n; ++j) {
    if (r(j, j) < 0) q.col(j) *= -1.0;
  }
  if (n > 0 && q.determinant() < 0) q.col(0) *= -1.0;
  return q;
}

CMat random_symplectic_unitary(int n, Rng& rng) {
  const CMat g = gaussian_complex(2 * n, 2 * n, rng);
  const CMat x = g - g.adjoint();
  const CMat j = symplectic_form(n).cast<cplx>();
  const CMat xs = 0.5 * (x + j * x.conjugate() * j.transpose());
  return expm_skew(xs, 2.0);
}

RMat random_skew(int n, Rng& rng) {
  const RMat g = gaussian_real(n, n, rng);
  return g - g.transpose();
}

}  // namespace cartan
