#include "gent/fcs.hpp"

#include "gent/rng.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include <cmath>
#include <cstdio>

namespace gent::fcs {

namespace {

constexpr double kIsometryTol = 1e-10;
constexpr double kPeripheralTol = 1e-8;

Eigen::Index ipow(Eigen::Index base, int exp) {
    Eigen::Index p = 1;
    for (int i = 0; i < exp; ++i) p *= base;
    return p;
}

ComplexMatrix build_ehat(const FcsSpec& spec) {
    const int b = spec.b;
    ComplexMatrix ehat = ComplexMatrix::Zero(b * b, b * b);
    for (int s = 0; s < spec.d; ++s) {
        ComplexMatrix Vs = spec.block(s);
        // vec(Vs B Vs^dag) = (conj(Vs) (x) Vs) vec(B) in column-major vec.
        ehat += qlinalg::kron(Vs.conjugate(), Vs);
    }
    return ehat;
}

// Fixed point of the adjoint transfer map, normalized to a density matrix.
ComplexMatrix fixed_point_matrix(const ComplexMatrix& ehat, int b) {
    Eigen::ComplexEigenSolver<ComplexMatrix> es(ehat.adjoint());
    Eigen::Index best = 0;
    double best_err = 1e300;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
        const double err = std::abs(es.eigenvalues()(i) - Complex(1.0, 0.0));
        if (err < best_err) {
            best_err = err;
            best = i;
        }
    }
    ComplexVector v = es.eigenvectors().col(best);
    ComplexMatrix rho = Eigen::Map<const ComplexMatrix>(v.data(), b, b);
    rho = 0.5 * (rho + rho.adjoint()).eval();
    const double tr = rho.trace().real();
    if (std::abs(tr) < 1e-14)
        throw PeripheralSpectrum("transfer fixed point has vanishing trace");
    rho /= tr;
    return rho;
}

}  // namespace

ComplexMatrix apply_ehat(const FcsSpec& spec, const ComplexMatrix& B) {
    ComplexMatrix out = ComplexMatrix::Zero(spec.b, spec.b);
    for (int s = 0; s < spec.d; ++s) {
        ComplexMatrix Vs = spec.block(s);
        out += Vs * B * Vs.adjoint();
    }
    return out;
}

ComplexMatrix apply_e(const FcsSpec& spec, const ComplexMatrix& ab) {
    if (ab.rows() != spec.d * spec.b || ab.cols() != spec.d * spec.b)
        throw std::invalid_argument("apply_e: operand must act on C^d (x) C^b");
    return spec.V * ab * spec.V.adjoint();
}

ValidationReport validate(const FcsSpec& spec) {
    if (spec.d < 1 || spec.b < 1 || spec.V.rows() != spec.b || spec.V.cols() != spec.d * spec.b)
        throw std::invalid_argument("FcsSpec: V must be b x (d*b)");

    ValidationReport report{};
    ComplexMatrix gram = spec.V * spec.V.adjoint();
    report.isometry_residual =
        (gram - ComplexMatrix::Identity(spec.b, spec.b)).cwiseAbs().maxCoeff();
    if (report.isometry_residual > kIsometryTol)
        throw IsometryViolation("V V^dag deviates from identity by " +
                                std::to_string(report.isometry_residual));

    ComplexMatrix ehat = build_ehat(spec);
    Eigen::ComplexEigenSolver<ComplexMatrix> es(ehat, /*computeEigenvectors=*/false);
    int peripheral_count = 0;
    double unit_err = 1e300;
    double second_modulus = 0.0;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
        const Complex mu = es.eigenvalues()(i);
        const double mod = std::abs(mu);
        if (mod >= 1.0 - kPeripheralTol) {
            ++peripheral_count;
            unit_err = std::min(unit_err, std::abs(mu - Complex(1.0, 0.0)));
        } else {
            second_modulus = std::max(second_modulus, mod);
        }
    }
    report.unit_eigenvalue_error = unit_err;
    report.peripheral_gap = 1.0 - second_modulus;
    if (peripheral_count != 1 || unit_err > kPeripheralTol)
        throw PeripheralSpectrum(
            "transfer operator peripheral spectrum is not the simple eigenvalue 1 (count " +
            std::to_string(peripheral_count) + ")");
    return report;
}

TransferData transfer(const FcsSpec& spec) {
    validate(spec);
    const int b = spec.b;
    ComplexMatrix ehat = build_ehat(spec);

    ComplexMatrix rho_mat = fixed_point_matrix(ehat, b);
    DensityMatrix rho(rho_mat, TensorShape{static_cast<Eigen::Index>(b)});

    // Fixed-point residual on a full matrix-unit basis.
    double residual = 0.0;
    for (int i = 0; i < b; ++i)
        for (int j = 0; j < b; ++j) {
            ComplexMatrix unit = ComplexMatrix::Zero(b, b);
            unit(i, j) = 1.0;
            const Complex lhs = (rho_mat * apply_ehat(spec, unit)).trace();
            const Complex rhs = (rho_mat * unit).trace();
            residual = std::max(residual, std::abs(lhs - rhs));
        }
    if (residual > 1e-9)
        throw std::runtime_error("transfer: fixed-point residual " + std::to_string(residual));

    // Second largest eigenvalue modulus.
    double lambda = 0.0;
    {
        Eigen::ComplexEigenSolver<ComplexMatrix> es(ehat, false);
        Eigen::Index unit_idx = 0;
        double unit_err = 1e300;
        for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
            const double err = std::abs(es.eigenvalues()(i) - Complex(1.0, 0.0));
            if (err < unit_err) {
                unit_err = err;
                unit_idx = i;
            }
        }
        for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
            if (i != unit_idx) lambda = std::max(lambda, std::abs(es.eigenvalues()(i)));
    }

    // Decay prefactor: c = max_{n <= 30} ||Ehat^n - Ehat^inf|| / lambda^n with
    // the induced (1 -> 1) norm probed on the b^2 matrix units (each of unit
    // trace norm). Ehat^inf(B) = Tr(rho B) 1_b.
    double c = 0.0;
    if (lambda > 0.0) {
        ComplexMatrix identity = ComplexMatrix::Identity(b, b);
        ComplexVector vec_id = Eigen::Map<const ComplexVector>(identity.data(), b * b);
        ComplexMatrix rho_t = rho_mat.transpose();
        ComplexVector vec_rho_t = Eigen::Map<const ComplexVector>(rho_t.data(), b * b);
        ComplexMatrix einf = vec_id * vec_rho_t.transpose();

        ComplexMatrix en = ComplexMatrix::Identity(b * b, b * b);
        double pow_lambda = 1.0;
        for (int n = 1; n <= 30; ++n) {
            en = ehat * en;
            pow_lambda *= lambda;
            ComplexMatrix diff = en - einf;
            double norm_n = 0.0;
            for (int col = 0; col < b * b; ++col) {
                ComplexVector column = diff.col(col);
                ComplexMatrix img = Eigen::Map<const ComplexMatrix>(column.data(), b, b);
                norm_n = std::max(norm_n, qlinalg::trace_norm(img));
            }
            // Stabilized probe: the block bound pairs the map with a system it
            // is correlated with, so also feed in the maximally entangled
            // input (id ⊗ map)(Ω), which the matrix units provably undershoot.
            ComplexMatrix stabilized = ComplexMatrix::Zero(b * b, b * b);
            for (int i = 0; i < b; ++i)
                for (int j = 0; j < b; ++j) {
                    ComplexVector column = diff.col(i + j * b);
                    Eigen::Map<const ComplexMatrix> img(column.data(), b, b);
                    stabilized.block(i * b, j * b, b, b) = img / static_cast<double>(b);
                }
            norm_n = std::max(norm_n, qlinalg::trace_norm(stabilized));
            c = std::max(c, norm_n / pow_lambda);
        }
    }

    return {std::move(ehat), std::move(rho), lambda, c};
}

DensityMatrix rho_ab(const FcsSpec& spec) {
    TransferData td = transfer(spec);
    ComplexMatrix m = spec.V.adjoint() * td.fixed_point.mat * spec.V;
    m = 0.5 * (m + m.adjoint()).eval();
    m /= m.trace().real();
    return DensityMatrix(std::move(m),
                         TensorShape{static_cast<Eigen::Index>(spec.d),
                                     static_cast<Eigen::Index>(spec.b)});
}

DensityMatrix rho_chain(const FcsSpec& spec, int n) {
    if (n < 1) throw std::invalid_argument("rho_chain: n must be >= 1");
    const Eigen::Index d = spec.d, b = spec.b;
    check_dim_cap(ipow(d, n) * b, "rho_chain");

    ComplexMatrix X = rho_ab(spec).mat; // X_1 on C^d (x) C^b

    // X_k = (1_{d^{k-1}} (x) V)^dag X_{k-1} (1_{d^{k-1}} (x) V), exploiting the
    // block structure of 1 (x) V instead of forming it.
    for (int k = 2; k <= n; ++k) {
        const Eigen::Index m = ipow(d, k - 1);
        ComplexMatrix Y(m * b, m * d * b);
        for (Eigen::Index j = 0; j < m; ++j)
            Y.middleCols(j * d * b, d * b).noalias() = X.middleCols(j * b, b) * spec.V;
        ComplexMatrix Z(m * d * b, m * d * b);
        for (Eigen::Index i = 0; i < m; ++i)
            Z.middleRows(i * d * b, d * b).noalias() = spec.V.adjoint() * Y.middleRows(i * b, b);
        X = std::move(Z);
    }

    // Trace out the memory factor (the last, least significant index).
    const Eigen::Index dn = ipow(d, n);
    ComplexMatrix out(dn, dn);
    for (Eigen::Index r = 0; r < dn; ++r)
        for (Eigen::Index cidx = 0; cidx < dn; ++cidx) {
            Complex acc(0.0, 0.0);
            for (Eigen::Index t = 0; t < b; ++t) acc += X(r * b + t, cidx * b + t);
            out(r, cidx) = acc;
        }
    out = 0.5 * (out + out.adjoint()).eval();
    out /= out.trace().real();
    return DensityMatrix(std::move(out),
                         TensorShape(std::vector<Eigen::Index>(n, d)));
}

DensityMatrix rho_spin_block(const FcsSpec& spec, int p, int n) {
    if (p < 2 || p > n) throw std::invalid_argument("rho_spin_block: need 2 <= p <= n");
    DensityMatrix full = rho_chain(spec, n);
    if (p == 2) return full;
    std::vector<int> keep{0};
    for (int site = p; site <= n; ++site) keep.push_back(site - 1);
    ComplexMatrix red = qlinalg::partial_trace(full.mat, full.shape, keep);
    red = 0.5 * (red + red.adjoint()).eval();
    red /= red.trace().real();
    return DensityMatrix(std::move(red),
                         TensorShape(std::vector<Eigen::Index>(keep.size(),
                                                               static_cast<Eigen::Index>(spec.d))));
}

namespace {

FcsSpec make_aklt() {
    const double s23 = std::sqrt(2.0 / 3.0);
    const double s13 = std::sqrt(1.0 / 3.0);
    ComplexMatrix V = ComplexMatrix::Zero(2, 6);
    // Valence-bond tensors: A^{+1} = sqrt(2/3) sigma^+, A^0 = -sqrt(1/3) sigma^z,
    // A^{-1} = -sqrt(2/3) sigma^-; the spin levels are ordered (+1, 0, -1).
    V(0, 1) = s23;              // A^{+1}
    V(0, 2) = -s13;             // A^0
    V(1, 3) = s13;
    V(1, 4) = -s23;             // A^{-1}
    return {3, 2, V};
}

FcsSpec make_random(int d, int b, std::uint64_t seed) {
    CounterRng rng(seed, /*stream=*/0x66637372616e64ULL);
    ComplexMatrix M(b, d * b);
    for (Eigen::Index j = 0; j < M.cols(); ++j)
        for (Eigen::Index i = 0; i < M.rows(); ++i) M(i, j) = rng.cgaussian();
    // Row-orthonormalize via QR of the adjoint.
    Eigen::HouseholderQR<ComplexMatrix> qr(M.adjoint());
    ComplexMatrix Q =
        qr.householderQ() * ComplexMatrix::Identity(static_cast<Eigen::Index>(d) * b, b);
    return {d, b, Q.adjoint()};
}

FcsSpec make_identity_pad(int d, int b) {
    ComplexMatrix V = ComplexMatrix::Zero(b, static_cast<Eigen::Index>(d) * b);
    V.block(0, 0, b, b) = ComplexMatrix::Identity(b, b);
    return {d, b, V};
}

FcsSpec make_product(int d) {
    ComplexMatrix V = ComplexMatrix::Zero(1, d);
    V(0, 0) = 1.0;
    return {d, 1, V};
}

}  // namespace

FcsSpec builtin_specs(const std::string& name) {
    if (name == "aklt") return make_aklt();
    {
        int d = 0, b = 0;
        long long seed = 0;
        if (std::sscanf(name.c_str(), "random(%d,%d,seed=%lld)", &d, &b, &seed) == 3 ||
            std::sscanf(name.c_str(), "random(%d,%d,%lld)", &d, &b, &seed) == 3) {
            if (d < 1 || b < 1) throw UnknownName("builtin_specs: bad random dims in " + name);
            return make_random(d, b, static_cast<std::uint64_t>(seed));
        }
    }
    {
        int d = 0, b = 0;
        if (std::sscanf(name.c_str(), "identity-pad(%d,%d)", &d, &b) == 2) {
            if (d < 2 || b < 1) throw UnknownName("builtin_specs: bad identity-pad dims");
            return make_identity_pad(d, b);
        }
    }
    {
        int d = 0;
        if (std::sscanf(name.c_str(), "product(%d)", &d) == 1) {
            if (d < 1) throw UnknownName("builtin_specs: bad product dim");
            return make_product(d);
        }
    }
    throw UnknownName("builtin_specs: unknown spec name '" + name + "'");
}

}  // namespace gent::fcs
