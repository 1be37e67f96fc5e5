#pragma once
// Independent reference computations used only by tests. Nothing here calls
// into the library's solvers or samplers.

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

/// Textbook cyclic Jacobi for a real symmetric matrix (Numerical Recipes
/// style, dense, no block splitting). Returns ascending eigenvalues.
inline std::vector<double> real_symmetric_jacobi(Eigen::MatrixXd a) {
  const auto n = a.rows();
  for (int sweep = 0; sweep < 200; ++sweep) {
    double off = 0;
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j)
        if (i != j) off += a(i, j) * a(i, j);
    if (off < 1e-30) break;
    for (Eigen::Index p = 0; p < n; ++p)
      for (Eigen::Index q = p + 1; q < n; ++q) {
        if (a(p, q) == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2 * a(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1));
        const double c = 1 / std::sqrt(t * t + 1), s = t * c;
        Eigen::MatrixXd r = Eigen::MatrixXd::Identity(n, n);
        r(p, p) = c;
        r(q, q) = c;
        r(p, q) = s;
        r(q, p) = -s;
        a = r.transpose() * a * r;
      }
  }
  std::vector<double> out(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) out[i] = a(i, i);
  std::sort(out.begin(), out.end());
  return out;
}

/// Eigenvalues of a Hermitian matrix, descending, via the real embedding
/// [[Re, -Im], [Im, Re]] whose spectrum is the Hermitian spectrum doubled.
inline std::vector<double> hermitian_eigenvalues(const Eigen::MatrixXcd& h) {
  const auto n = h.rows();
  Eigen::MatrixXd big(2 * n, 2 * n);
  big << h.real(), -h.imag(), h.imag(), h.real();
  auto doubled = real_symmetric_jacobi(big);
  std::vector<double> out;
  for (std::size_t i = 0; i < doubled.size(); i += 2) out.push_back(doubled[i]);
  std::reverse(out.begin(), out.end());
  return out;
}

/// Dense Kronecker product by index arithmetic.
inline Eigen::MatrixXcd kron(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  Eigen::MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < out.rows(); ++i)
    for (Eigen::Index j = 0; j < out.cols(); ++j)
      out(i, j) = a(i / b.rows(), j / b.cols()) * b(i % b.rows(), j % b.cols());
  return out;
}

/// Projector onto the computational-basis outcome `bits` of `qubits` in an
/// n-qubit register, built entry by entry.
inline Eigen::MatrixXcd z_outcome_projector(const std::vector<int>& qubits, std::uint64_t bits, int n) {
  const auto dim = Eigen::Index{1} << n;
  Eigen::MatrixXcd p = Eigen::MatrixXcd::Zero(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    bool match = true;
    for (std::size_t k = 0; k < qubits.size(); ++k) {
      const auto want = (bits >> (qubits.size() - 1 - k)) & 1U;
      const auto have = (static_cast<std::uint64_t>(i) >> (n - 1 - qubits[k])) & 1U;
      match = match && want == have;
    }
    if (match) p(i, i) = 1.0;
  }
  return p;
}

/// Embeds a matrix acting on `qubits` (listed order = significance) by summing
/// over matching index pairs.
inline Eigen::MatrixXcd embed(const Eigen::MatrixXcd& local, const std::vector<int>& qubits, int n) {
  const auto dim = Eigen::Index{1} << n;
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(dim, dim);
  auto sub = [&](Eigen::Index i) {
    Eigen::Index s = 0;
    for (int q : qubits) s = (s << 1) | ((i >> (n - 1 - q)) & 1);
    return s;
  };
  auto rest = [&](Eigen::Index i) {
    Eigen::Index r = i;
    for (int q : qubits) r &= ~(Eigen::Index{1} << (n - 1 - q));
    return r;
  };
  for (Eigen::Index i = 0; i < dim; ++i)
    for (Eigen::Index j = 0; j < dim; ++j)
      if (rest(i) == rest(j)) out(i, j) = local(sub(i), sub(j));
  return out;
}

inline double kl_divergence(double x, double y) {
  double d = 0;
  if (x > 0) d += x * std::log(x / y);
  if (x < 1) d += (1 - x) * std::log((1 - x) / (1 - y));
  return d;
}

/// Random Hermitian matrix A + A^H with entries from a fixed LCG.
inline Eigen::MatrixXcd random_hermitian(Eigen::Index n, unsigned seed) {
  std::uint64_t s = seed * 6364136223846793005ULL + 1442695040888963407ULL;
  auto next = [&]() {
    s = s * 6364136223846793005ULL + 1442695040888963407ULL;
    return static_cast<double>(s >> 11) * 0x1.0p-53 * 2 - 1;
  };
  Eigen::MatrixXcd a(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) a(i, j) = {next(), next()};
  return a + a.adjoint();
}

/// Random density matrix G G^H / Tr, full rank with probability one.
inline Eigen::MatrixXcd random_density(Eigen::Index n, unsigned seed) {
  std::uint64_t s = seed * 2862933555777941757ULL + 3037000493ULL;
  auto next = [&]() {
    s = s * 6364136223846793005ULL + 1442695040888963407ULL;
    return static_cast<double>(s >> 11) * 0x1.0p-53 * 2 - 1;
  };
  Eigen::MatrixXcd g(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) g(i, j) = {next(), next()};
  Eigen::MatrixXcd rho = g * g.adjoint();
  return rho / rho.trace().real();
}

/// Binomial standard deviation of a frequency.
inline double binomial_sd(double p, double n) { return std::sqrt(p * (1 - p) / n); }

}  // namespace oracle
