#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "gent/qlinalg.hpp"
#include "gent/rng.hpp"

#include <cmath>
#include <cstdlib>

using namespace gent;
namespace ql = gent::qlinalg;

namespace {

ComplexMatrix random_matrix(CounterRng& rng, Eigen::Index n) {
    ComplexMatrix m(n, n);
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = 0; i < n; ++i) m(i, j) = rng.cgaussian();
    return m;
}

ComplexMatrix random_hermitian(CounterRng& rng, Eigen::Index n) {
    ComplexMatrix m = random_matrix(rng, n);
    return ComplexMatrix((m + m.adjoint()) / 2.0);
}

DensityMatrix random_density(CounterRng& rng, Eigen::Index n, const TensorShape& shape) {
    ComplexMatrix g = random_matrix(rng, n);
    ComplexMatrix w = g * g.adjoint();
    w /= w.trace().real();
    return DensityMatrix(w, shape);
}

}  // namespace

TEST_CASE("kron dimensions and known values") {
    ComplexMatrix a(2, 2), b(2, 2);
    a << 1, 2, 3, 4;
    b << 0, 1, 1, 0;
    ComplexMatrix k = ql::kron(a, b);
    REQUIRE(k.rows() == 4);
    CHECK(k(0, 1) == Complex(1, 0));   // a(0,0) * b(0,1)
    CHECK(k(0, 3) == Complex(2, 0));   // a(0,1) * b(0,1)
    CHECK(k(3, 2) == Complex(4, 0));   // a(1,1) * b(1,0)
    CHECK(std::abs(k.trace() - a.trace() * b.trace()) < 1e-14);

    RealMatrix ar = a.real(), br = b.real();
    CHECK((ql::kron(ar, br) - k.real()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("partial trace preserves trace and factorizes products") {
    CounterRng rng(1, 0);
    TensorShape shape({2, 3});
    ComplexMatrix a = random_hermitian(rng, 2), b = random_hermitian(rng, 3);
    ComplexMatrix full = ql::kron(a, b);

    ComplexMatrix ra = ql::partial_trace(full, shape, {0});
    ComplexMatrix rb = ql::partial_trace(full, shape, {1});
    CHECK((ra - a * b.trace()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((rb - b * a.trace()).cwiseAbs().maxCoeff() < 1e-12);

    ComplexMatrix m = random_hermitian(rng, 6);
    CHECK(std::abs(ql::partial_trace(m, shape, {0}).trace() - m.trace()) < 1e-12);
    // Keeping every factor is the identity.
    CHECK((ql::partial_trace(m, shape, {0, 1}) - m).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("partial transpose is an involution and acts on one factor") {
    CounterRng rng(2, 0);
    TensorShape shape({2, 2});
    ComplexMatrix m = random_hermitian(rng, 4);
    ComplexMatrix pt = ql::partial_transpose(m, shape, 1);
    CHECK((ql::partial_transpose(pt, shape, 1) - m).cwiseAbs().maxCoeff() < 1e-14);

    ComplexMatrix a = random_hermitian(rng, 2), b = random_hermitian(rng, 2);
    ComplexMatrix prod = ql::kron(a, b);
    CHECK((ql::partial_transpose(prod, shape, 1) - ql::kron(a, ComplexMatrix(b.transpose())))
              .cwiseAbs()
              .maxCoeff() < 1e-14);
}

TEST_CASE("Hermitian eigendecomposition: residual, order, orthonormality") {
    CounterRng rng(3, 0);
    ComplexMatrix m = random_hermitian(rng, 24);
    auto eig = ql::eig_hermitian(m);
    const double scale = ql::op_norm_hermitian(m);
    CHECK((m * eig.vectors - eig.vectors * eig.values.asDiagonal().toDenseMatrix()
                                  .cast<Complex>())
              .cwiseAbs()
              .maxCoeff() < 1e-9 * scale);
    for (Eigen::Index i = 0; i + 1 < eig.values.size(); ++i)
        CHECK(eig.values(i) <= eig.values(i + 1));
    CHECK((eig.vectors.adjoint() * eig.vectors - ComplexMatrix::Identity(24, 24))
              .cwiseAbs()
              .maxCoeff() < 1e-10);

    ComplexMatrix bad = random_matrix(rng, 4);
    CHECK_THROWS_AS(ql::eig_hermitian(bad), std::invalid_argument);
}

TEST_CASE("real-symmetric path agrees with the complex path") {
    CounterRng rng(4, 0);
    RealMatrix s = RealMatrix::Random(16, 16);
    s = RealMatrix((s + s.transpose()) / 2.0);
    auto re = ql::eig_symmetric(s);
    auto ce = ql::eig_hermitian(s.cast<Complex>());
    CHECK((re.values - ce.values).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("Schmidt decomposition of a Bell state and a random state") {
    ComplexVector bell(4);
    bell << 1 / std::sqrt(2.0), 0, 0, 1 / std::sqrt(2.0);
    PureState psi(bell, TensorShape({2, 2}));
    auto sd = ql::schmidt_decompose(psi, {0});
    REQUIRE(sd.coefficients.size() == 2);
    CHECK(sd.coefficients(0) == doctest::Approx(1 / std::sqrt(2.0)).epsilon(1e-12));
    CHECK(sd.coefficients(1) == doctest::Approx(1 / std::sqrt(2.0)).epsilon(1e-12));

    CounterRng rng(5, 0);
    ComplexVector v(12);
    for (Eigen::Index i = 0; i < 12; ++i) v(i) = rng.cgaussian();
    v.normalize();
    PureState phi(v, TensorShape({3, 4}));
    auto sd2 = ql::schmidt_decompose(phi, {0});
    CHECK(sd2.coefficients.squaredNorm() == doctest::Approx(1.0).epsilon(1e-12));
    for (Eigen::Index i = 0; i + 1 < sd2.coefficients.size(); ++i)
        CHECK(sd2.coefficients(i) >= sd2.coefficients(i + 1));
    // Reconstruction.
    ComplexVector rec = ComplexVector::Zero(12);
    for (Eigen::Index a = 0; a < sd2.coefficients.size(); ++a)
        for (Eigen::Index i = 0; i < 3; ++i)
            for (Eigen::Index j = 0; j < 4; ++j)
                rec(i * 4 + j) += sd2.coefficients(a) * sd2.left(i, a) * sd2.right(j, a);
    CHECK((rec - v).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("norms: known values and Hermitian consistency") {
    ComplexMatrix m(2, 2);
    m << 3, 0, 0, -4;
    auto n = ql::norms(m);
    CHECK(n.trace_norm == doctest::Approx(7.0).epsilon(1e-12));
    CHECK(n.hs_norm == doctest::Approx(5.0).epsilon(1e-12));
    CHECK(n.op_norm == doctest::Approx(4.0).epsilon(1e-12));

    CounterRng rng(6, 0);
    ComplexMatrix h = random_hermitian(rng, 8);
    CHECK(ql::trace_norm(h) == doctest::Approx(ql::norms(h).trace_norm).epsilon(1e-10));
    CHECK(ql::op_norm(h) == doctest::Approx(ql::op_norm_hermitian(h)).epsilon(1e-10));
}

TEST_CASE("von Neumann entropy: pure zero, maximally mixed ln d") {
    TensorShape shape({4});
    ComplexMatrix pure = ComplexMatrix::Zero(4, 4);
    pure(0, 0) = 1.0;
    CHECK(ql::vn_entropy(DensityMatrix(pure, shape)) == doctest::Approx(0.0).epsilon(1e-12));
    ComplexMatrix mixed = ComplexMatrix::Identity(4, 4) / 4.0;
    CHECK(ql::vn_entropy(DensityMatrix(mixed, shape)) ==
          doctest::Approx(std::log(4.0)).epsilon(1e-12));
}

TEST_CASE("fidelity, Bures distance, trace distance") {
    TensorShape shape({2});
    ComplexMatrix p0 = ComplexMatrix::Zero(2, 2), p1 = ComplexMatrix::Zero(2, 2);
    p0(0, 0) = 1.0;
    p1(1, 1) = 1.0;
    DensityMatrix r0(p0, shape), r1(p1, shape);
    auto same = ql::fidelity_bures(r0, r0);
    CHECK(same.fidelity == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(same.bures == doctest::Approx(0.0).epsilon(1e-5));
    CHECK(same.trace_distance == doctest::Approx(0.0).epsilon(1e-12));
    auto orth = ql::fidelity_bures(r0, r1);
    CHECK(orth.fidelity == doctest::Approx(0.0).epsilon(1e-10));
    CHECK(orth.trace_distance == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(orth.bures == doctest::Approx(2.0).epsilon(1e-10));

    // Commuting pair: F = sum sqrt(p_i q_i).
    ComplexMatrix a = ComplexMatrix::Zero(2, 2), b = ComplexMatrix::Zero(2, 2);
    a(0, 0) = 0.75;
    a(1, 1) = 0.25;
    b(0, 0) = 0.5;
    b(1, 1) = 0.5;
    auto fb = ql::fidelity_bures(DensityMatrix(a, shape), DensityMatrix(b, shape));
    CHECK(fb.fidelity ==
          doctest::Approx(std::sqrt(0.75 * 0.5) + std::sqrt(0.25 * 0.5)).epsilon(1e-10));
}

TEST_CASE("eta function") {
    CHECK(ql::eta(0.0) == 0.0);
    CHECK(ql::eta(1.0) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(ql::eta(1.0 / std::exp(1.0)) == doctest::Approx(1.0 / std::exp(1.0)).epsilon(1e-12));
}

TEST_CASE("DensityMatrix and PureState validation") {
    TensorShape shape({2});
    ComplexMatrix ok = ComplexMatrix::Identity(2, 2) / 2.0;
    CHECK_NOTHROW(DensityMatrix(ok, shape));

    ComplexMatrix nonherm = ok;
    nonherm(0, 1) = Complex(0, 1e-3);
    CHECK_THROWS_AS(DensityMatrix(nonherm, shape), std::invalid_argument);

    ComplexMatrix badtrace = ComplexMatrix::Identity(2, 2);
    CHECK_THROWS_AS(DensityMatrix(badtrace, shape), std::invalid_argument);

    ComplexMatrix neg = ComplexMatrix::Zero(2, 2);
    neg(0, 0) = 1.5;
    neg(1, 1) = -0.5;
    CHECK_THROWS_AS(DensityMatrix(neg, shape), std::invalid_argument);

    ComplexVector v(2);
    v << 1.0, 1.0;
    CHECK_THROWS_AS(PureState(v, shape), std::invalid_argument);
}

TEST_CASE("dimension cap honors the environment override") {
    setenv("GAPPED_ENT_MAX_DIM", "8", 1);
    TensorShape shape({16});
    ComplexMatrix big = ComplexMatrix::Identity(16, 16) / 16.0;
    CHECK_THROWS_AS(DensityMatrix(big, shape), DimensionCap);
    unsetenv("GAPPED_ENT_MAX_DIM");
    CHECK_NOTHROW(DensityMatrix(big, shape));
}

TEST_CASE("counter RNG is deterministic and stream-separated") {
    CounterRng a(42, 0), b(42, 0), c(42, 1);
    CHECK(a.next_u64() == b.next_u64());
    CHECK(a.next_u64() != c.next_u64());
    CounterRng u(7, 0);
    for (int i = 0; i < 1000; ++i) {
        const double x = u.uniform01();
        CHECK(x > 0.0);
        CHECK(x <= 1.0);
    }
}
