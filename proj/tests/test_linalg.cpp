#include <doctest.h>

#include <Eigen/Eigenvalues>

#include "oracles.hpp"
#include "qsv/linalg.hpp"

using namespace qsv;

TEST_CASE("kron of identities is the identity") {
  const ComplexMatrix i2 = ComplexMatrix::Identity(2, 2);
  CHECK(kron(i2, i2).isApprox(ComplexMatrix::Identity(4, 4)));
}

TEST_CASE("Z x Z gives -1 on |01>") {
  const ComplexMatrix zz = kron(pauli::z(), pauli::z());
  ComplexVector ket01 = ComplexVector::Zero(4);
  ket01(1) = 1;
  CHECK((zz * ket01 - (-1.0) * ket01).norm() < 1e-15);
}

TEST_CASE("<00|X x X|11> = 1") {
  const ComplexMatrix xx = kron(pauli::x(), pauli::x());
  CHECK(xx(0, 3) == Complex(1.0));
  CHECK((xx - oracle::kron(pauli::x(), pauli::x())).norm() == 0.0);
}

TEST_CASE("kron mixed-product identity and associativity on random inputs") {
  for (unsigned seed = 1; seed <= 5; ++seed) {
    const ComplexMatrix a = oracle::random_hermitian(2, seed) + ComplexMatrix::Random(2, 2);
    const ComplexMatrix b = ComplexMatrix::Random(3, 3);
    const ComplexMatrix c = ComplexMatrix::Random(2, 2);
    const ComplexMatrix d = ComplexMatrix::Random(3, 3);
    CHECK((kron(a, b) * kron(c, d) - kron(ComplexMatrix(a * c), ComplexMatrix(b * d))).norm() < 1e-10);
    CHECK((kron(kron(a, b), c) - kron(a, kron(b, c))).norm() < 1e-10);
    CHECK((kron(a, b) - oracle::kron(a, b)).norm() < 1e-14);
  }
}

TEST_CASE("Pauli strings and eigenprojectors") {
  CHECK(pauli_string("XIZ").isApprox(oracle::kron(oracle::kron(pauli::x(), pauli::identity()), pauli::z())));
  for (char p : {'X', 'Y', 'Z'})
    for (int s : {1, -1}) CHECK(is_projector(pauli::eigenprojector(p, s)));
  CHECK_THROWS_AS(pauli::from_char('Q'), ValidationError);
}

TEST_CASE("local operators expand like the entrywise oracle") {
  const ComplexMatrix xy = pauli_string("XY");
  for (std::vector<int> qubits : {std::vector<int>{0, 2}, {2, 0}, {1, 3}}) {
    const LocalOperator op{qubits, xy};
    CHECK((expand_dense(op, 4) - oracle::embed(xy, qubits, 4)).norm() < 1e-14);
    const ComplexMatrix rho = oracle::random_density(16, 7);
    const Complex direct = (oracle::embed(xy, qubits, 4) * rho).trace();
    CHECK(std::abs(local_expectation(rho, op, 4) - direct) < 1e-13);
  }
  CHECK_THROWS_AS(expand_sparse({{0, 0}, xy}, 2), ValidationError);
}

TEST_CASE("eigensystem of Z") {
  const auto eig = hermitian_eigensystem(pauli::z());
  CHECK(eig.values(0) == doctest::Approx(1.0));
  CHECK(eig.values(1) == doctest::Approx(-1.0));
}

TEST_CASE("non-Hermitian input is rejected") {
  ComplexMatrix m = pauli::z();
  m(0, 1) = 0.5;
  CHECK_THROWS_AS(hermitian_eigensystem(m), ValidationError);
}

TEST_CASE("Jacobi spectrum agrees with two independent solvers") {
  for (unsigned seed = 1; seed <= 4; ++seed) {
    const ComplexMatrix h = oracle::random_hermitian(6, seed);
    const auto eig = hermitian_eigensystem(h);
    const auto textbook = oracle::hermitian_eigenvalues(h);
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> eigen_solver(h);
    for (int k = 0; k < 6; ++k) {
      CHECK(std::abs(eig.values(k) - textbook[k]) < 1e-9);
      CHECK(std::abs(eig.values(k) - eigen_solver.eigenvalues()(5 - k)) < 1e-9);
    }
  }
}

TEST_CASE("reconstruction and orthonormality up to dimension 256") {
  for (Eigen::Index n : {2, 5, 16, 64, 256}) {
    const ComplexMatrix h = oracle::random_hermitian(n, static_cast<unsigned>(n));
    const auto eig = hermitian_eigensystem(h);
    const ComplexMatrix rebuilt = eig.vectors * eig.values.asDiagonal() * eig.vectors.adjoint();
    CHECK((h - rebuilt).norm() / h.norm() < 1e-9);
    CHECK((eig.vectors.adjoint() * eig.vectors - ComplexMatrix::Identity(n, n)).norm() < 1e-9);
    for (Eigen::Index k = 1; k < n; ++k) CHECK(eig.values(k - 1) >= eig.values(k));
  }
}

TEST_CASE("block-diagonal input splits into independent blocks") {
  ComplexMatrix h = ComplexMatrix::Zero(6, 6);
  h.block(0, 0, 2, 2) = pauli::x();
  h.block(2, 2, 4, 4) = oracle::random_hermitian(4, 3);
  const auto eig = hermitian_eigensystem(h);
  const ComplexMatrix rebuilt = eig.vectors * eig.values.asDiagonal() * eig.vectors.adjoint();
  CHECK((h - rebuilt).norm() < 1e-10);
  // Eigenvectors of the X block never leak into the other block.
  for (Eigen::Index k = 0; k < 6; ++k) {
    const double top = eig.vectors.col(k).head(2).norm();
    CHECK((top < 1e-12 || top > 1 - 1e-12));
  }
}

TEST_CASE("degenerate clusters come back as an orthonormal basis") {
  const ComplexMatrix h = ComplexMatrix::Identity(4, 4) + pauli_string("ZZ");
  const auto eig = hermitian_eigensystem(h);
  CHECK(eig.values(0) == doctest::Approx(2.0));
  CHECK(eig.values(1) == doctest::Approx(2.0));
  CHECK((eig.vectors.adjoint() * eig.vectors - ComplexMatrix::Identity(4, 4)).norm() < 1e-12);
}

TEST_CASE("projector predicate") {
  CHECK(is_projector(ComplexMatrix::Identity(4, 4)));
  CHECK_FALSE(is_projector(pauli_string("ZZ")));
  const ComplexMatrix p = (ComplexMatrix::Identity(4, 4) + pauli_string("XX")) / 2.0;
  CHECK(is_projector(p));
}
