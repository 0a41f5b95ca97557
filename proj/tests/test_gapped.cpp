#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "gent/gapped.hpp"
#include "gent/qlinalg.hpp"
#include "gent/rng.hpp"

#include <algorithm>
#include <cmath>

using namespace gent;
namespace ql = gent::qlinalg;
namespace gp = gent::gapped;

namespace {

ComplexMatrix random_hermitian(CounterRng& rng, Eigen::Index n) {
    ComplexMatrix m(n, n);
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = 0; i < n; ++i) m(i, j) = rng.cgaussian();
    return ComplexMatrix((m + m.adjoint()) / 2.0);
}

ComplexMatrix haar_unitary(CounterRng& rng, Eigen::Index d) {
    ComplexMatrix g(d, d);
    for (Eigen::Index j = 0; j < d; ++j)
        for (Eigen::Index i = 0; i < d; ++i) g(i, j) = rng.cgaussian();
    Eigen::HouseholderQR<ComplexMatrix> qr(g);
    ComplexMatrix q = qr.householderQ() * ComplexMatrix::Identity(d, d);
    ComplexMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Eigen::Index j = 0; j < d; ++j)
        if (std::abs(r(j, j)) > 0) q.col(j) *= r(j, j) / std::abs(r(j, j));
    return q;
}

long long sphere_brute(int n, int d) {
    if (d == 1) return n == 0 ? 1 : 2;
    long long total = 0;
    for (int k = -n; k <= n; ++k) total += sphere_brute(n - std::abs(k), d - 1);
    return total;
}

}  // namespace

TEST_CASE("model zoo: term structure, coupling scale, Hermiticity") {
    auto tfim = gp::build_model("tfim", 8, {{"h", 2.0}});
    CHECK(tfim.n_sites == 8);
    CHECK(tfim.terms.size() == 15);  // 7 bonds + 8 fields
    CHECK(tfim.coupling_j == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(tfim.is_real);
    ComplexMatrix h = gp::hamiltonian(tfim);
    CHECK((h - h.adjoint()).cwiseAbs().maxCoeff() < 1e-12);

    auto aklt = gp::build_model("aklt", 3);
    CHECK(aklt.local_dims[0] == 3);
    CHECK(aklt.terms.size() == 2);  // bond terms only

    auto heis = gp::build_model("heisenberg", 4);
    CHECK(heis.terms.size() == 3);

    CHECK_THROWS_AS(gp::build_model("no-such-model", 4), UnknownName);
}

TEST_CASE("diagonalize: paramagnet spectrum is exact, degenerate models rejected") {
    const int n = 4;
    const double hf = 1.5;
    auto model = gp::build_model("paramagnet", n, {{"h", hf}});
    auto spec = gp::diagonalize(model);
    CHECK(spec.ground_energy == doctest::Approx(-n * hf).epsilon(1e-12));
    CHECK(spec.gamma == doctest::Approx(2 * hf).epsilon(1e-10));
    CHECK(spec.eigenvalues(0) == doctest::Approx(0.0).epsilon(1e-12));
    for (Eigen::Index i = 0; i + 1 < spec.eigenvalues.size(); ++i)
        CHECK(spec.eigenvalues(i) <= spec.eigenvalues(i + 1) + 1e-12);

    // h = 0 classical Ising has a twofold-degenerate ground state.
    auto degen = gp::build_model("classical-ising", 4, {{"h", 0.0}});
    CHECK_THROWS_AS(gp::diagonalize(degen), DegenerateGroundState);
}

TEST_CASE("ground state and projector are consistent") {
    auto model = gp::build_model("tfim", 6, {{"h", 2.0}});
    auto spec = gp::diagonalize(model);
    ComplexMatrix h = gp::hamiltonian(model);
    ComplexVector psi = spec.ground_state.vec;
    CHECK((h * psi - spec.ground_energy * psi).norm() < 1e-9 * std::abs(spec.ground_energy));
    ComplexMatrix p0 = spec.ground_projector();
    CHECK((p0 * p0 - p0).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(std::abs((psi.adjoint() * p0 * psi)(0) - Complex(1, 0)) < 1e-10);
}

TEST_CASE("entropy profile: product ground state is flat zero, TFIM is symmetric") {
    auto para = gp::build_model("paramagnet", 6, {{"h", 1.0}});
    auto spec = gp::diagonalize(para);
    for (const auto& cut : gp::entropy_profile(spec, para)) CHECK(cut.entropy < 1e-10);

    auto tfim = gp::build_model("tfim", 8, {{"h", 2.0}});
    auto tspec = gp::diagonalize(tfim);
    auto prof = gp::entropy_profile(tspec, tfim);
    REQUIRE(prof.size() == 7);
    for (std::size_t i = 0; i < prof.size(); ++i) {
        CHECK(prof[i].entropy > 0.0);
        CHECK(prof[i].entropy ==
              doctest::Approx(prof[prof.size() - 1 - i].entropy).epsilon(1e-8));
    }
}

TEST_CASE("region split partitions the chain") {
    auto model = gp::build_model("tfim", 8, {{"h", 1.0}});
    auto split = gp::region_split(model, 0, 3, 1);
    CHECK(split.boundary == std::vector<int>{3});
    CHECK(split.interior == std::vector<int>{0, 1});
    CHECK(split.buffer == std::vector<int>{2, 3, 4});
    CHECK(split.exterior == std::vector<int>{5, 6, 7});

    for (int lo = 0; lo <= 2; ++lo)
        for (int hi = lo + 1; hi <= 6; ++hi)
            for (int ell = 1; ell <= 2; ++ell) {
                auto s = gp::region_split(model, lo, hi, ell);
                std::vector<int> all;
                all.insert(all.end(), s.interior.begin(), s.interior.end());
                all.insert(all.end(), s.buffer.begin(), s.buffer.end());
                all.insert(all.end(), s.exterior.begin(), s.exterior.end());
                std::sort(all.begin(), all.end());
                std::vector<int> expect(8);
                for (int i = 0; i < 8; ++i) expect[i] = i;
                CHECK(all == expect);
            }

    CHECK(gp::enlarged_region(model, 0, 3, 2) == std::vector<int>{1, 2, 3, 4, 5});
}

TEST_CASE("gaussian filter: fixes commuting operators, shrinks norms, is linear") {
    auto model = gp::build_model("tfim", 6, {{"h", 2.0}});
    auto spec = gp::diagonalize(model);
    ComplexMatrix h = gp::hamiltonian(model);
    const double alpha = 3.0;
    CHECK((gp::gaussian_filter(spec, h, alpha) - h).cwiseAbs().maxCoeff() < 1e-8);

    CounterRng rng(8, 0);
    ComplexMatrix o1 = random_hermitian(rng, 64), o2 = random_hermitian(rng, 64);
    ComplexMatrix f1 = gp::gaussian_filter(spec, o1, alpha);
    CHECK(ql::op_norm_hermitian(f1) <= ql::op_norm_hermitian(o1) + 1e-10);
    ComplexMatrix sum = gp::gaussian_filter(spec, ComplexMatrix(2.0 * o1 + o2), alpha);
    CHECK((sum - 2.0 * f1 - gp::gaussian_filter(spec, o2, alpha)).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("filtered ground-state projector bound holds two ways") {
    auto model = gp::build_model("tfim", 6, {{"h", 2.0}});
    auto spec = gp::diagonalize(model);
    for (double alpha : {0.5, 1.0, 2.0, 5.0}) {
        // P~_alpha in the eigenbasis is diag(exp(-E^2 / 4 alpha)).
        ComplexMatrix diag = ComplexMatrix::Zero(spec.dim(), spec.dim());
        for (Eigen::Index m = 0; m < spec.dim(); ++m)
            diag(m, m) = std::exp(-spec.eigenvalues(m) * spec.eigenvalues(m) / (4 * alpha));
        ComplexMatrix p_tilde = spec.from_eigenbasis(diag);
        const double norm_direct =
            ql::op_norm_hermitian(ComplexMatrix(p_tilde - spec.ground_projector()));
        double norm_spectral = 0.0;
        for (Eigen::Index m = 1; m < spec.dim(); ++m)
            norm_spectral = std::max(
                norm_spectral,
                std::exp(-spec.eigenvalues(m) * spec.eigenvalues(m) / (4 * alpha)));
        CHECK(std::abs(norm_direct - norm_spectral) < 1e-10);
        CHECK(norm_direct <= std::exp(-spec.gamma * spec.gamma / (4 * alpha)) + 1e-12);
    }
}

TEST_CASE("hamiltonian split: exact partition and commutator bounds") {
    auto model = gp::build_model("tfim", 8, {{"h", 2.0}});
    auto split = gp::region_split(model, 0, 3, 1);
    auto hs = gp::hamiltonian_split(model, split);
    ComplexMatrix h = gp::hamiltonian(model);
    CHECK((hs.h_interior + hs.h_buffer + hs.h_exterior - h).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(hs.comm_interior <= hs.bound_interior + 1e-9);
    CHECK(hs.comm_buffer <= hs.bound_buffer + 1e-9);
    CHECK(hs.comm_exterior <= hs.bound_exterior + 1e-9);
}

TEST_CASE("filtered energy bound holds across an alpha grid") {
    auto model = gp::build_model("tfim", 6, {{"h", 2.0}});
    auto spec = gp::diagonalize(model);
    auto split = gp::region_split(model, 0, 2, 1);
    auto hs = gp::hamiltonian_split(model, split);
    for (double alpha : {0.5, 1.0, 2.0, 4.0})
        for (const ComplexMatrix* hx : {&hs.h_interior, &hs.h_buffer, &hs.h_exterior}) {
            auto fb = gp::filtered_energy_bound(spec, *hx, alpha);
            CHECK(fb.lhs <= fb.rhs + 1e-10);
        }
}

TEST_CASE("local surrogates: commuting model reproduces the split exactly") {
    auto model = gp::build_model("classical-ising", 6, {{"h", 0.7}});
    auto spec = gp::diagonalize(model);
    auto split = gp::region_split(model, 0, 2, 1);
    auto ls = gp::local_surrogates(model, spec, split, 1.0);
    CHECK(ls.residual < 1e-9);

    // Support check: M_I acts as identity outside A.
    auto tfim = gp::build_model("tfim", 6, {{"h", 2.0}});
    auto tspec = gp::diagonalize(tfim);
    auto tsplit = gp::region_split(tfim, 0, 2, 1);
    auto tls = gp::local_surrogates(tfim, tspec, tsplit, 2.0);
    CounterRng rng(9, 0);
    ComplexMatrix outside = ql::kron(ComplexMatrix::Identity(8, 8), random_hermitian(rng, 8));
    CHECK((tls.m_interior * outside - outside * tls.m_interior).cwiseAbs().maxCoeff() < 1e-9);
    CHECK(tls.residual < ql::op_norm_hermitian(gp::hamiltonian(tfim)));
}

TEST_CASE("Haar localization equals partial trace tensor normalized identity") {
    // The boundary operator is localized by averaging over unitaries on the
    // complement; verify the closed form against a 200-sample Monte Carlo
    // average within 3 sigma.
    CounterRng rng(10, 0);
    const TensorShape shape({4, 4});
    ComplexMatrix m = random_hermitian(rng, 16);
    ComplexMatrix closed =
        ql::kron(ComplexMatrix(ql::partial_trace(m, shape, {0}) / 4.0),
                 ComplexMatrix::Identity(4, 4));

    const int samples = 200;
    ComplexMatrix mean = ComplexMatrix::Zero(16, 16);
    double sumsq = 0.0;
    for (int s = 0; s < samples; ++s) {
        ComplexMatrix u = ql::kron(ComplexMatrix::Identity(4, 4), haar_unitary(rng, 4));
        ComplexMatrix rotated = u * m * u.adjoint();
        mean += rotated;
        sumsq += (rotated - closed).squaredNorm();
    }
    mean /= samples;
    const double sigma_hs = std::sqrt(sumsq / samples / samples);
    CHECK(ql::hs_norm(ComplexMatrix(mean - closed)) <= 3.0 * sigma_hs);
}

TEST_CASE("ground-state projector approximation on small chains") {
    auto model = gp::build_model("tfim", 6, {{"h", 2.0}});
    auto spec = gp::diagonalize(model);
    auto split = gp::region_split(model, 0, 2, 1);
    gp::GsApproxOptions opt;
    opt.cutoff = spec.gamma;
    auto res = gp::gs_projector_approx(model, spec, split, opt);

    CHECK(res.error < 1.0);
    CHECK(res.pb_norm <= 1.0 + 1e-10);
    CHECK(res.rank_pa > 0);
    CHECK(res.rank_pe > 0);
    CHECK((res.p_a * res.p_a - res.p_a).cwiseAbs().maxCoeff() < 1e-9);
    CHECK((res.p_e * res.p_e - res.p_e).cwiseAbs().maxCoeff() < 1e-9);

    // P_A is supported on A: it commutes with anything outside A.
    CounterRng rng(11, 0);
    ComplexMatrix outside = ql::kron(ComplexMatrix::Identity(8, 8), random_hermitian(rng, 8));
    CHECK((res.p_a * outside - outside * res.p_a).cwiseAbs().maxCoeff() < 1e-9);
    // P_E is supported on the complement of A.
    ComplexMatrix inside = ql::kron(random_hermitian(rng, 8), ComplexMatrix::Identity(8, 8));
    CHECK((res.p_e * inside - inside * res.p_e).cwiseAbs().maxCoeff() < 1e-9);

    // Diagnostics at the same cutoff agree with the full pipeline.
    auto diag = gp::cutoff_projector_diagnostics(model, spec, split, spec.gamma);
    CHECK(diag.rank_pa == res.rank_pa);
    CHECK(diag.rank_pe == res.rank_pe);
    CHECK(diag.pa_expectation == doctest::Approx(res.pa_expectation).epsilon(1e-8));
}

TEST_CASE("product-ground-state model: approximation error is tiny") {
    // With everything commuting the three factors reproduce the ground-state
    // projector in the small-alpha limit (the boundary factor exp(-M_B^2 /
    // 4 alpha) only becomes a projector as alpha -> 0; at the default alpha
    // it deliberately is not one).
    auto model = gp::build_model("paramagnet", 6, {{"h", 1.0}});
    auto spec = gp::diagonalize(model);
    auto split = gp::region_split(model, 0, 2, 1);
    gp::GsApproxOptions opt;
    opt.cutoff = spec.gamma;
    opt.alpha = 0.02;
    auto res = gp::gs_projector_approx(model, spec, split, opt);
    CHECK(res.error <= 1e-6);
}

TEST_CASE("quadrature cap raises QuadratureUnconverged") {
    auto model = gp::build_model("tfim", 6, {{"h", 2.0}});
    auto spec = gp::diagonalize(model);
    auto split = gp::region_split(model, 0, 2, 1);
    gp::GsApproxOptions opt;
    opt.cutoff = spec.gamma;
    opt.quad_nodes = 4;
    opt.quad_node_cap = 8;
    opt.quad_tol = 1e-300;
    CHECK_THROWS_AS(gp::gs_projector_approx(model, spec, split, opt), QuadratureUnconverged);
}

TEST_CASE("Lieb-Robinson probe: commuting model and input validation") {
    auto model = gp::build_model("classical-ising", 6, {{"h", 0.7}});
    auto spec = gp::diagonalize(model);
    ComplexMatrix sz(2, 2);
    sz << 1, 0, 0, -1;
    auto res = gp::lr_probe(model, spec, 0, 4, sz, sz, {0.1, 0.5, 1.0});
    for (const auto& row : res.rows) CHECK(row.norm < 1e-9);
    CHECK(std::isnan(res.t_star));

    CHECK_THROWS_AS(gp::lr_probe(model, spec, 2, 2, sz, sz, {0.1}), std::invalid_argument);
    ComplexMatrix big = 2.0 * sz;
    CHECK_THROWS_AS(gp::lr_probe(model, spec, 0, 3, big, sz, {0.1}), std::invalid_argument);
}

TEST_CASE("sphere count: recursion bases, enumeration, growth bound") {
    CHECK(gp::sphere_count(1, 3) == 6);
    for (int n = 1; n <= 8; ++n) CHECK(gp::sphere_count(n, 1) == 2);
    CHECK(gp::sphere_count(2, 2) == 8);  // saturates 2^2 * 2^1
    for (int n = 1; n <= 6; ++n)
        for (int d = 1; d <= 4; ++d) {
            CHECK(gp::sphere_count(n, d) == static_cast<unsigned long long>(sphere_brute(n, d)));
            CHECK(static_cast<double>(gp::sphere_count(n, d)) <=
                  std::pow(2.0, d) * std::pow(double(n), d - 1) + 1e-9);
        }
    CHECK_THROWS_AS(gp::sphere_count(0, 2), std::invalid_argument);
}

TEST_CASE("entropy bound: uniform case, violations, bad inputs") {
    const std::vector<long long> schedule = {8, 16, 32};
    RealVector uniform = RealVector::Zero(8);
    uniform.setConstant(1.0 / 8.0);
    auto res = gp::entropy_bound_eval(uniform, schedule, 0.5, 2.0);
    CHECK(res.entropy == doctest::Approx(std::log(8.0)).epsilon(1e-12));
    CHECK(res.entropy <= res.bound);

    // Mass in the tail beyond what c^n allows.
    RealVector heavy = RealVector::Zero(32);
    heavy.setConstant(1.0 / 32.0);
    CHECK_THROWS_AS(gp::entropy_bound_eval(heavy, schedule, 0.1, 2.0), ConstraintViolated);

    CHECK_THROWS_AS(gp::entropy_bound_eval(uniform, schedule, 1.5, 2.0), std::invalid_argument);
    CHECK_THROWS_AS(gp::entropy_bound_eval(uniform, {8, 64}, 0.5, 2.0), std::invalid_argument);
    RealVector ascending(8);
    for (int i = 0; i < 8; ++i) ascending(i) = (i + 1) / 36.0;
    CHECK_THROWS_AS(gp::entropy_bound_eval(ascending, schedule, 0.5, 2.0),
                    std::invalid_argument);
}
