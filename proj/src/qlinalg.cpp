#include "gent/qlinalg.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <numeric>

#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

namespace gent::qlinalg {

namespace {

// Mixed-radix helpers for tensor-factor index bookkeeping. Factor 0 is the
// leftmost (most significant) index, matching the Kronecker convention.
std::vector<Eigen::Index> factor_strides(const TensorShape& shape) {
    const auto& dims = shape.factor_dims;
    std::vector<Eigen::Index> strides(dims.size());
    Eigen::Index s = 1;
    for (std::size_t f = dims.size(); f-- > 0;) {
        strides[f] = s;
        s *= dims[f];
    }
    return strides;
}

bool is_hermitian(const ComplexMatrix& m, double tol) {
    if (m.rows() != m.cols()) return false;
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol * scale;
}

bool is_real(const ComplexMatrix& m) {
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    return m.imag().cwiseAbs().maxCoeff() <= 1e-13 * scale;
}

RealVector lapack_eigvals_complex(ComplexMatrix a) {
    const lapack_int n = static_cast<lapack_int>(a.rows());
    RealVector w(n);
    lapack_int info = LAPACKE_zheevd(LAPACK_COL_MAJOR, 'N', 'L', n, a.data(), n, w.data());
    if (info != 0) throw std::runtime_error("zheevd (values) failed, info=" + std::to_string(info));
    return w;
}

RealVector lapack_eigvals_real(RealMatrix a) {
    const lapack_int n = static_cast<lapack_int>(a.rows());
    RealVector w(n);
    lapack_int info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'N', 'L', n, a.data(), n, w.data());
    if (info != 0) throw std::runtime_error("dsyevd (values) failed, info=" + std::to_string(info));
    return w;
}

}  // namespace

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
    ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

RealMatrix kron(const RealMatrix& a, const RealMatrix& b) {
    RealMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

ComplexMatrix partial_trace(const ComplexMatrix& m, const TensorShape& shape,
                            const std::vector<int>& keep) {
    if (m.rows() != m.cols() || m.rows() != shape.total_dim())
        throw std::invalid_argument("partial_trace: matrix does not match shape");
    std::vector<int> keep_sorted = keep;
    std::sort(keep_sorted.begin(), keep_sorted.end());
    for (int f : keep_sorted)
        if (f < 0 || static_cast<std::size_t>(f) >= shape.num_factors())
            throw std::out_of_range("partial_trace: keep index out of range");
    if (std::adjacent_find(keep_sorted.begin(), keep_sorted.end()) != keep_sorted.end())
        throw std::invalid_argument("partial_trace: duplicate keep index");

    const auto strides = factor_strides(shape);
    std::vector<int> traced;
    for (std::size_t f = 0; f < shape.num_factors(); ++f)
        if (!std::binary_search(keep_sorted.begin(), keep_sorted.end(), static_cast<int>(f)))
            traced.push_back(static_cast<int>(f));

    // Enumerate composite offsets for the kept and traced factor groups.
    auto offsets_for = [&](const std::vector<int>& factors) {
        Eigen::Index count = 1;
        for (int f : factors) count *= shape.factor_dims[f];
        std::vector<Eigen::Index> off(count, 0);
        Eigen::Index repeat = count;
        for (int f : factors) {
            const Eigen::Index d = shape.factor_dims[f];
            repeat /= d;
            Eigen::Index idx = 0;
            while (idx < count)
                for (Eigen::Index c = 0; c < d; ++c)
                    for (Eigen::Index r = 0; r < repeat; ++r) off[idx++] += c * strides[f];
        }
        return off;
    };

    const auto keep_off = offsets_for(keep_sorted);
    const auto tr_off = offsets_for(traced);
    const Eigen::Index dk = static_cast<Eigen::Index>(keep_off.size());

    ComplexMatrix out = ComplexMatrix::Zero(dk, dk);
    for (Eigen::Index r = 0; r < dk; ++r)
        for (Eigen::Index c = 0; c < dk; ++c) {
            Complex acc(0.0, 0.0);
            for (Eigen::Index t : tr_off) acc += m(keep_off[r] + t, keep_off[c] + t);
            out(r, c) = acc;
        }
    return out;
}

ComplexMatrix partial_transpose(const ComplexMatrix& m, const TensorShape& shape, int factor) {
    if (m.rows() != m.cols() || m.rows() != shape.total_dim())
        throw std::invalid_argument("partial_transpose: matrix does not match shape");
    if (factor < 0 || static_cast<std::size_t>(factor) >= shape.num_factors())
        throw std::out_of_range("partial_transpose: factor out of range");

    const auto strides = factor_strides(shape);
    const Eigen::Index stride = strides[factor];
    const Eigen::Index d = shape.factor_dims[factor];
    const Eigen::Index n = m.rows();

    std::vector<Eigen::Index> comp(n), rest(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        comp[i] = (i / stride) % d;
        rest[i] = i - comp[i] * stride;
    }

    ComplexMatrix out(n, n);
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = 0; i < n; ++i)
            out(i, j) = m(rest[i] + comp[j] * stride, rest[j] + comp[i] * stride);
    return out;
}

EigSymResult eig_symmetric(const RealMatrix& m) {
    RealMatrix a = 0.5 * (m + m.transpose());
    const lapack_int n = static_cast<lapack_int>(a.rows());
    RealVector w(n);
    lapack_int info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'L', n, a.data(), n, w.data());
    if (info != 0) throw std::runtime_error("dsyevd failed, info=" + std::to_string(info));
    return {std::move(w), std::move(a)};
}

EigHResult eig_hermitian(const ComplexMatrix& m) {
    if (!is_hermitian(m, 1e-10))
        throw std::invalid_argument("eig_hermitian: input is not Hermitian");
    if (is_real(m)) {
        auto r = eig_symmetric(m.real());
        return {std::move(r.values), r.vectors.cast<Complex>()};
    }
    ComplexMatrix a = 0.5 * (m + m.adjoint());
    const lapack_int n = static_cast<lapack_int>(a.rows());
    RealVector w(n);
    lapack_int info = LAPACKE_zheevd(LAPACK_COL_MAJOR, 'V', 'L', n, a.data(), n, w.data());
    if (info != 0) throw std::runtime_error("zheevd failed, info=" + std::to_string(info));
    return {std::move(w), std::move(a)};
}

RealVector eigvals_hermitian(const ComplexMatrix& m) {
    if (!is_hermitian(m, 1e-10))
        throw std::invalid_argument("eigvals_hermitian: input is not Hermitian");
    if (is_real(m)) return lapack_eigvals_real(0.5 * (m.real() + m.real().transpose()));
    return lapack_eigvals_complex(0.5 * (m + m.adjoint()));
}

SchmidtResult schmidt_decompose(const PureState& psi, const std::vector<int>& left_factors) {
    std::vector<int> left = left_factors;
    std::sort(left.begin(), left.end());
    if (left.empty() || left.size() >= psi.shape.num_factors())
        throw std::invalid_argument("schmidt_decompose: bipartition side is empty");
    for (int f : left)
        if (f < 0 || static_cast<std::size_t>(f) >= psi.shape.num_factors())
            throw std::out_of_range("schmidt_decompose: factor index out of range");
    if (std::adjacent_find(left.begin(), left.end()) != left.end())
        throw std::invalid_argument("schmidt_decompose: duplicate factor index");

    const auto& dims = psi.shape.factor_dims;
    const auto strides = factor_strides(psi.shape);
    std::vector<int> right;
    for (std::size_t f = 0; f < dims.size(); ++f)
        if (!std::binary_search(left.begin(), left.end(), static_cast<int>(f)))
            right.push_back(static_cast<int>(f));

    Eigen::Index dl = 1, dr = 1;
    for (int f : left) dl *= dims[f];
    for (int f : right) dr *= dims[f];

    // Reshape |psi> into a dl x dr matrix, composing left/right group indices
    // in ascending factor order.
    ComplexMatrix M(dl, dr);
    std::vector<Eigen::Index> comp(dims.size());
    for (Eigen::Index i = 0; i < psi.dim(); ++i) {
        for (std::size_t f = 0; f < dims.size(); ++f) comp[f] = (i / strides[f]) % dims[f];
        Eigen::Index l = 0, r = 0;
        for (int f : left) l = l * dims[f] + comp[f];
        for (int f : right) r = r * dims[f] + comp[f];
        M(l, r) = psi.vec(i);
    }

    Eigen::BDCSVD<ComplexMatrix> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
    SchmidtResult out;
    out.coefficients = svd.singularValues();
    out.left = svd.matrixU();
    out.right = svd.matrixV().conjugate();
    return out;
}

NormTriple norms(const ComplexMatrix& m) {
    Eigen::BDCSVD<ComplexMatrix> svd(m);
    const RealVector& s = svd.singularValues();
    NormTriple out{};
    out.trace_norm = s.sum();
    out.hs_norm = s.norm();
    out.op_norm = s.size() ? s(0) : 0.0;
    return out;
}

double trace_norm(const ComplexMatrix& m) {
    // Hermitian inputs (the common case: differences of density matrices) go
    // through the symmetric eigensolver, which is faster and more accurate.
    if (m.rows() == m.cols() && is_hermitian(m, 1e-12))
        return eigvals_hermitian(m).cwiseAbs().sum();
    return norms(m).trace_norm;
}

double hs_norm(const ComplexMatrix& m) { return m.norm(); }

double op_norm(const ComplexMatrix& m) {
    if (m.rows() == m.cols() && is_hermitian(m, 1e-12))
        return eigvals_hermitian(m).cwiseAbs().maxCoeff();
    Eigen::BDCSVD<ComplexMatrix> svd(m);
    return svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
}

double op_norm_hermitian(const ComplexMatrix& m) {
    return eigvals_hermitian(m).cwiseAbs().maxCoeff();
}

namespace {
double entropy_from_spectrum(const RealVector& ev) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        double p = ev(i);
        if (p < 0.0) p = 0.0; // clamp tiny negatives before the log
        if (p > 0.0) s -= p * std::log(p);
    }
    return s;
}
}  // namespace

double vn_entropy(const DensityMatrix& rho) { return vn_entropy(rho.mat); }

double vn_entropy(const ComplexMatrix& rho) {
    return entropy_from_spectrum(eigvals_hermitian(rho));
}

FidelityBures fidelity_bures(const DensityMatrix& rho, const DensityMatrix& sigma) {
    if (rho.dim() != sigma.dim())
        throw std::invalid_argument("fidelity_bures: dimension mismatch");
    auto eig = eig_hermitian(rho.mat);
    RealVector sq = eig.values;
    for (Eigen::Index i = 0; i < sq.size(); ++i) sq(i) = std::sqrt(std::max(0.0, sq(i)));
    ComplexMatrix sqrt_rho = eig.vectors * sq.asDiagonal() * eig.vectors.adjoint();
    ComplexMatrix inner = sqrt_rho * sigma.mat * sqrt_rho;
    RealVector ev = eigvals_hermitian(0.5 * (inner + inner.adjoint()));
    double f = 0.0;
    for (Eigen::Index i = 0; i < ev.size(); ++i) f += std::sqrt(std::max(0.0, ev(i)));
    f = std::min(f, 1.0);
    FidelityBures out{};
    out.fidelity = f;
    out.bures = 2.0 * std::sqrt(std::max(0.0, 1.0 - f));
    out.trace_distance = 0.5 * trace_norm(rho.mat - sigma.mat);
    return out;
}

double eta(double x) {
    if (x <= 0.0) return 0.0;
    return -x * std::log(x);
}

}  // namespace gent::qlinalg

namespace gent::detail {
RealVector hermitian_eigenvalues(const ComplexMatrix& m) {
    return qlinalg::eigvals_hermitian(m);
}
}  // namespace gent::detail
