#include <algorithm>
#include <cmath>
#include <limits>

#include "cmrm/error.hpp"
#include "cmrm/rmt.hpp"

namespace cmrm {

namespace {

// Reduce a Hermitian matrix (lower triangle referenced) to real symmetric tridiagonal
// form. Complex subdiagonal entries are replaced by their moduli, which is a diagonal
// unitary similarity.
void tridiagonalize(Eigen::MatrixXcd& a, std::vector<double>& d, std::vector<double>& e) {
  const Eigen::Index n = a.rows();
  d.assign(static_cast<std::size_t>(n), 0.0);
  e.assign(static_cast<std::size_t>(n), 0.0);
  for (Eigen::Index j = 0; j + 2 < n; ++j) {
    const Eigen::Index len = n - j - 1;
    Eigen::VectorXcd v = a.col(j).tail(len);
    const double xnorm = v.norm();
    e[static_cast<std::size_t>(j)] = xnorm;
    if (xnorm == 0.0 || v.tail(len - 1).squaredNorm() == 0.0) continue;
    const std::complex<double> x0 = v(0);
    const double ax0 = std::abs(x0);
    const std::complex<double> alpha = -(ax0 > 0 ? x0 / ax0 : std::complex<double>(1.0)) * xnorm;
    v(0) -= alpha;
    const double tau = 2.0 / v.squaredNorm();
    auto a22 = a.bottomRightCorner(len, len);
    Eigen::VectorXcd p = tau * (a22.selfadjointView<Eigen::Lower>() * v);
    const std::complex<double> k = 0.5 * tau * v.dot(p);
    Eigen::VectorXcd w = p - k * v;
    a22.selfadjointView<Eigen::Lower>().rankUpdate(v, w, -1.0);
  }
  for (Eigen::Index j = 0; j < n; ++j) d[static_cast<std::size_t>(j)] = a(j, j).real();
  if (n >= 2) e[static_cast<std::size_t>(n - 2)] = std::abs(a(n - 1, n - 2));
}

// Implicit-shift QL on a symmetric tridiagonal matrix; e[i] couples d[i] and d[i+1].
void tridiagonal_ql(std::vector<double>& d, std::vector<double>& e) {
  const int n = static_cast<int>(d.size());
  const double eps = std::numeric_limits<double>::epsilon();
  const double tiny = std::numeric_limits<double>::min();
  long budget = 30L * std::max(n, 1);
  for (int l = 0; l < n; ++l) {
    int m;
    do {
      for (m = l; m < n - 1; ++m) {
        double dd = std::abs(d[static_cast<std::size_t>(m)]) + std::abs(d[static_cast<std::size_t>(m + 1)]);
        const double em = std::abs(e[static_cast<std::size_t>(m)]);
        if (em <= eps * dd || em <= tiny) break;
      }
      if (m != l) {
        if (--budget < 0) throw DomainError("tridiagonal QL failed to converge");
        auto D = [&](int i) -> double& { return d[static_cast<std::size_t>(i)]; };
        auto E = [&](int i) -> double& { return e[static_cast<std::size_t>(i)]; };
        double g = (D(l + 1) - D(l)) / (2.0 * E(l));
        double r = std::hypot(g, 1.0);
        g = D(m) - D(l) + E(l) / (g + std::copysign(r, g));
        double s = 1.0, c = 1.0, p = 0.0;
        int i;
        bool underflow = false;
        for (i = m - 1; i >= l; --i) {
          double f = s * E(i);
          double b = c * E(i);
          r = std::hypot(f, g);
          E(i + 1) = r;
          if (r == 0.0) {
            D(i + 1) -= p;
            E(m) = 0.0;
            underflow = true;
            break;
          }
          s = f / r;
          c = g / r;
          g = D(i + 1) - p;
          r = (D(i) - g) * s + 2.0 * c * b;
          p = s * r;
          D(i + 1) = g + p;
          g = c * r - b;
        }
        if (underflow) continue;
        D(l) -= p;
        E(l) = g;
        E(m) = 0.0;
      }
    } while (m != l);
  }
}

}  // namespace

std::vector<double> hermitian_eigenvalues_raw(const Eigen::MatrixXcd& m) {
  if (m.rows() != m.cols()) throw DimensionError("eigenvalues need a square matrix");
  const Eigen::Index n = m.rows();
  if (n == 0) return {};
  double asym = 0.0;
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = j; i < n; ++i) asym = std::max(asym, std::abs(m(i, j) - std::conj(m(j, i))));
  if (!(asym <= 1e-8)) throw DomainError("matrix is not Hermitian (max deviation " + std::to_string(asym) + ")");

  Eigen::MatrixXcd a = (m + m.adjoint()) * 0.5;
  const double scale = a.cwiseAbs().maxCoeff();
  if (scale == 0.0) return std::vector<double>(static_cast<std::size_t>(n), 0.0);
  a /= scale;
  std::vector<double> d, e;
  tridiagonalize(a, d, e);
  tridiagonal_ql(d, e);
  for (auto& x : d) x *= scale;
  std::sort(d.begin(), d.end());
  return d;
}

}  // namespace cmrm
