#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "gent/fcs.hpp"
#include "gent/qlinalg.hpp"
#include "gent/rng.hpp"

#include <cmath>

using namespace gent;
namespace ql = gent::qlinalg;

namespace {

// Nested functional form of the block expectation:
// Tr(rho_{[1,n]} A_1 (x) ... (x) A_n) = Tr_B(rho E(A_1 (x) E(... E(A_n (x) 1))))
Complex nested_expectation(const fcs::FcsSpec& spec, const std::vector<ComplexMatrix>& ops) {
    ComplexMatrix memory = ComplexMatrix::Identity(spec.b, spec.b);
    for (auto it = ops.rbegin(); it != ops.rend(); ++it)
        memory = fcs::apply_e(spec, ql::kron(*it, memory));
    const ComplexMatrix rho = fcs::transfer(spec).fixed_point.mat;
    return (rho * memory).trace();
}

ComplexMatrix random_hermitian(CounterRng& rng, int n) {
    ComplexMatrix m(n, n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) m(i, j) = rng.cgaussian();
    return ComplexMatrix((m + m.adjoint()) / 2.0);
}

}  // namespace

TEST_CASE("validate: AKLT passes, scaled V fails, identity map fails") {
    fcs::FcsSpec aklt = fcs::builtin_specs("aklt");
    auto rep = fcs::validate(aklt);
    CHECK(rep.isometry_residual < 1e-10);
    CHECK(rep.peripheral_gap > 0.1);

    fcs::FcsSpec scaled = aklt;
    scaled.V *= 2.0;
    CHECK_THROWS_AS(fcs::validate(scaled), IsometryViolation);

    CHECK_THROWS_AS(fcs::validate(fcs::builtin_specs("identity-pad(2,2)")), PeripheralSpectrum);
    CHECK_THROWS_AS(fcs::builtin_specs("no-such-spec"), UnknownName);
}

TEST_CASE("transfer: AKLT constants, unitality, fixed point") {
    fcs::FcsSpec aklt = fcs::builtin_specs("aklt");
    auto td = fcs::transfer(aklt);
    CHECK(td.lambda == doctest::Approx(1.0 / 3.0).epsilon(1e-10));
    CHECK((td.fixed_point.mat - ComplexMatrix::Identity(2, 2) / 2.0).cwiseAbs().maxCoeff() <
          1e-10);
    // Unitality Ehat(1) = 1.
    CHECK((fcs::apply_ehat(aklt, ComplexMatrix::Identity(2, 2)) -
           ComplexMatrix::Identity(2, 2))
              .cwiseAbs()
              .maxCoeff() < 1e-10);
    // Fixed point: Tr rho Ehat(B) = Tr rho B on a basis.
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            ComplexMatrix unit = ComplexMatrix::Zero(2, 2);
            unit(i, j) = 1.0;
            const Complex lhs = (td.fixed_point.mat * fcs::apply_ehat(aklt, unit)).trace();
            const Complex rhs = (td.fixed_point.mat * unit).trace();
            CHECK(std::abs(lhs - rhs) < 1e-9);
        }
}

TEST_CASE("transfer: one-dimensional memory and random specs") {
    auto prod = fcs::builtin_specs("product(3)");
    auto td = fcs::transfer(prod);
    CHECK(td.lambda == 0.0);
    CHECK(td.fixed_point.mat(0, 0).real() == doctest::Approx(1.0).epsilon(1e-12));

    auto rnd = fcs::builtin_specs("random(2,2,7)");
    CHECK_NOTHROW(fcs::validate(rnd));
    CHECK_NOTHROW(fcs::transfer(rnd));
}

TEST_CASE("decay envelope: ||Ehat^n - Ehat^inf|| <= c lambda^n for n <= 30") {
    for (const char* name : {"aklt", "random(2,2,3)", "random(3,2,11)"}) {
        fcs::FcsSpec spec = fcs::builtin_specs(name);
        auto td = fcs::transfer(spec);
        if (td.lambda == 0.0) continue;
        const int b = spec.b;
        ComplexMatrix identity = ComplexMatrix::Identity(b, b);
        const ComplexMatrix rho = td.fixed_point.mat;
        ComplexMatrix en = ComplexMatrix::Identity(b * b, b * b);
        double pow_lambda = 1.0;
        for (int n = 1; n <= 30; ++n) {
            en = td.ehat * en;
            pow_lambda *= td.lambda;
            double norm_n = 0.0;
            for (int i = 0; i < b; ++i)
                for (int j = 0; j < b; ++j) {
                    ComplexMatrix unit = ComplexMatrix::Zero(b, b);
                    unit(i, j) = 1.0;
                    ComplexVector vec = Eigen::Map<const ComplexVector>(unit.data(), b * b);
                    ComplexVector img = en * vec;
                    ComplexMatrix img_mat = Eigen::Map<const ComplexMatrix>(img.data(), b, b);
                    const Complex mean = (rho * unit).trace();
                    norm_n = std::max(norm_n,
                                      ql::trace_norm(ComplexMatrix(img_mat - mean * identity)));
                }
            CHECK(norm_n <= td.c * pow_lambda + 1e-12);
        }
    }
}

TEST_CASE("rho_ab: AKLT is 6x6 of rank 2 and reproduces E on a basis") {
    fcs::FcsSpec aklt = fcs::builtin_specs("aklt");
    DensityMatrix rab = fcs::rho_ab(aklt);
    REQUIRE(rab.mat.rows() == 6);
    CHECK(std::abs(rab.mat.trace() - Complex(1, 0)) < 1e-12);
    RealVector eigs = ql::eigvals_hermitian(rab.mat);
    int rank = 0;
    for (Eigen::Index i = 0; i < eigs.size(); ++i)
        if (eigs(i) > 1e-9) ++rank;
    CHECK(rank == 2);

    // Tr(rho_AB A (x) B) = Tr_B(rho E(A (x) B)) on a full product basis.
    const ComplexMatrix rho = fcs::transfer(aklt).fixed_point.mat;
    for (int ai = 0; ai < 3; ++ai)
        for (int bi = 0; bi < 2; ++bi) {
            ComplexMatrix a = ComplexMatrix::Zero(3, 3), b = ComplexMatrix::Zero(2, 2);
            a(ai, (ai + 1) % 3) = 1.0;
            b(bi, bi) = 1.0;
            const ComplexMatrix ab = ql::kron(a, b);
            const Complex lhs = (rab.mat * ab).trace();
            const Complex rhs = (rho * fcs::apply_e(aklt, ab)).trace();
            CHECK(std::abs(lhs - rhs) < 1e-9);
        }

    // Tr_B rho_AB equals the single-site density.
    ComplexMatrix site = ql::partial_trace(rab.mat, TensorShape({3, 2}), {0});
    CHECK((site - fcs::rho_chain(aklt, 1).mat).cwiseAbs().maxCoeff() < 1e-10);
    // AKLT single-site density is I/3.
    CHECK((site - ComplexMatrix::Identity(3, 3) / 3.0).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("rho_chain: marginal consistency, translation invariance, rank bound") {
    fcs::FcsSpec aklt = fcs::builtin_specs("aklt");
    for (int n = 2; n <= 4; ++n) {
        DensityMatrix big = fcs::rho_chain(aklt, n);
        DensityMatrix small = fcs::rho_chain(aklt, n - 1);
        std::vector<Eigen::Index> dims(n, 3);
        std::vector<int> keep;
        for (int i = 0; i + 1 < n; ++i) keep.push_back(i);
        ComplexMatrix marg = ql::partial_trace(big.mat, TensorShape(dims), keep);
        CHECK((marg - small.mat).cwiseAbs().maxCoeff() < 1e-9);

        // Single-site reductions at every position agree.
        ComplexMatrix first;
        for (int pos = 0; pos < n; ++pos) {
            ComplexMatrix site = ql::partial_trace(big.mat, TensorShape(dims), {pos});
            if (pos == 0)
                first = site;
            else
                CHECK((site - first).cwiseAbs().maxCoeff() < 1e-9);
        }

        RealVector eigs = ql::eigvals_hermitian(big.mat);
        int rank = 0;
        for (Eigen::Index i = 0; i < eigs.size(); ++i)
            if (eigs(i) > 1e-9) ++rank;
        CHECK(rank <= aklt.b * aklt.b);
    }
}

TEST_CASE("rho_chain matches the nested functional form for n <= 4") {
    for (const char* name : {"aklt", "random(2,2,5)"}) {
        fcs::FcsSpec spec = fcs::builtin_specs(name);
        CounterRng rng(99, 0);
        for (int n = 1; n <= 4; ++n) {
            if (std::pow(spec.d, n) * spec.b > 4096) break;
            DensityMatrix block = fcs::rho_chain(spec, n);
            std::vector<ComplexMatrix> ops;
            ComplexMatrix full = ComplexMatrix::Identity(1, 1);
            for (int s = 0; s < n; ++s) {
                ops.push_back(random_hermitian(rng, spec.d));
                full = ql::kron(full, ops.back());
            }
            const Complex direct = (block.mat * full).trace();
            const Complex nested = nested_expectation(spec, ops);
            CHECK(std::abs(direct - nested) < 1e-9);
        }
    }
}

TEST_CASE("rho_spin_block: recursion base cases and decay example") {
    fcs::FcsSpec aklt = fcs::builtin_specs("aklt");
    // p = 2 reproduces the full chain.
    DensityMatrix chain3 = fcs::rho_chain(aklt, 3);
    DensityMatrix sb = fcs::rho_spin_block(aklt, 2, 3);
    CHECK((sb.mat - chain3.mat).cwiseAbs().maxCoeff() < 1e-12);
    // p = n: two-site reduced density of trace 1.
    DensityMatrix two = fcs::rho_spin_block(aklt, 4, 4);
    REQUIRE(two.mat.rows() == 9);
    CHECK(std::abs(two.mat.trace() - Complex(1, 0)) < 1e-12);

    // AKLT n=6, p=4: trace distance to the product within c lambda^(p-2).
    auto td = fcs::transfer(aklt);
    DensityMatrix joint = fcs::rho_spin_block(aklt, 4, 6);
    DensityMatrix site = fcs::rho_chain(aklt, 1);
    DensityMatrix block = fcs::rho_chain(aklt, 3);
    ComplexMatrix prod = ql::kron(site.mat, block.mat);
    const double t = ql::trace_norm(ComplexMatrix(joint.mat - prod));
    CHECK(t <= td.c * td.lambda * td.lambda + 1e-12);
}
