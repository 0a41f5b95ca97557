#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <vector>

// Core value types shared by every module: matrices over declared tensor
// factorizations, validated density matrices / pure states, and the error
// taxonomy used throughout the library.

namespace gent {

using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;
using Complex = std::complex<double>;

// ============================================================================
// Errors
// ============================================================================

struct DimensionCap : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct IsometryViolation : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct PeripheralSpectrum : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DegenerateGroundState : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct QuadratureUnconverged : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct EmptyProjector : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ConstraintViolated : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct OutOfRegime : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ConfigInvalid : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct UnknownName : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ============================================================================
// Dimension cap
// ============================================================================

// Every experiment runs at chain length <= 14, so dense storage is capped at
// 2^14 unless the user overrides via GAPPED_ENT_MAX_DIM.
inline Eigen::Index max_hilbert_dim() {
    if (const char* env = std::getenv("GAPPED_ENT_MAX_DIM")) {
        char* end = nullptr;
        long long v = std::strtoll(env, &end, 10);
        if (end != env && v >= 2) return static_cast<Eigen::Index>(v);
    }
    return 16384;
}

inline void check_dim_cap(Eigen::Index dim, const std::string& what) {
    if (dim > max_hilbert_dim())
        throw DimensionCap(what + ": dimension " + std::to_string(dim) +
                           " exceeds cap " + std::to_string(max_hilbert_dim()));
}

// ============================================================================
// TensorShape
// ============================================================================

struct TensorShape {
    std::vector<Eigen::Index> factor_dims;

    TensorShape() = default;
    TensorShape(std::initializer_list<Eigen::Index> dims) : factor_dims(dims) { check(); }
    explicit TensorShape(std::vector<Eigen::Index> dims) : factor_dims(std::move(dims)) { check(); }

    void check() const {
        if (factor_dims.empty())
            throw std::invalid_argument("TensorShape: empty factor list");
        for (auto d : factor_dims)
            if (d < 1) throw std::invalid_argument("TensorShape: factor dim < 1");
    }

    Eigen::Index total_dim() const {
        Eigen::Index p = 1;
        for (auto d : factor_dims) p *= d;
        return p;
    }

    std::size_t num_factors() const { return factor_dims.size(); }

    // Dimension of the subspace spanned by the given factor indices.
    Eigen::Index dim_of(const std::vector<int>& factors) const {
        Eigen::Index p = 1;
        for (int f : factors) {
            if (f < 0 || static_cast<std::size_t>(f) >= factor_dims.size())
                throw std::out_of_range("TensorShape: factor index out of range");
            p *= factor_dims[f];
        }
        return p;
    }
};

// ============================================================================
// DensityMatrix / PureState
// ============================================================================

namespace detail {
// Eigenvalues of a Hermitian matrix, ascending (declared here; defined in
// qlinalg.cpp so the validating constructors below can use the LAPACK path).
RealVector hermitian_eigenvalues(const ComplexMatrix& m);
}  // namespace detail

struct DensityMatrix {
    ComplexMatrix mat;
    TensorShape shape;

    static constexpr double kHermTol = 1e-10;
    static constexpr double kEigTol = 1e-10;
    static constexpr double kTraceTol = 1e-10;

    DensityMatrix(ComplexMatrix m, TensorShape s) : mat(std::move(m)), shape(std::move(s)) {
        if (mat.rows() != mat.cols())
            throw std::invalid_argument("DensityMatrix: not square");
        if (mat.rows() != shape.total_dim())
            throw std::invalid_argument("DensityMatrix: shape does not match matrix dimension");
        check_dim_cap(mat.rows(), "DensityMatrix");
        const double herm = (mat - mat.adjoint()).cwiseAbs().maxCoeff();
        if (herm > kHermTol)
            throw std::invalid_argument("DensityMatrix: not Hermitian (deviation " +
                                        std::to_string(herm) + ")");
        const double tr_err = std::abs(mat.trace() - Complex(1.0, 0.0));
        if (tr_err > kTraceTol)
            throw std::invalid_argument("DensityMatrix: trace deviates from 1 by " +
                                        std::to_string(tr_err));
        RealVector ev = detail::hermitian_eigenvalues(mat);
        if (ev(0) < -kEigTol)
            throw std::invalid_argument("DensityMatrix: negative eigenvalue " +
                                        std::to_string(ev(0)));
    }

    Eigen::Index dim() const { return mat.rows(); }
};

struct PureState {
    ComplexVector vec;
    TensorShape shape;

    static constexpr double kNormTol = 1e-12;

    PureState(ComplexVector v, TensorShape s) : vec(std::move(v)), shape(std::move(s)) {
        if (vec.size() != shape.total_dim())
            throw std::invalid_argument("PureState: shape does not match vector dimension");
        check_dim_cap(vec.size(), "PureState");
        const double n = vec.norm();
        if (std::abs(n - 1.0) > kNormTol)
            throw std::invalid_argument("PureState: norm deviates from 1 by " +
                                        std::to_string(std::abs(n - 1.0)));
    }

    Eigen::Index dim() const { return vec.size(); }

    DensityMatrix density() const { return DensityMatrix(vec * vec.adjoint(), shape); }
};

}  // namespace gent
