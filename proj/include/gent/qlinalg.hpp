#pragma once

#include "gent/types.hpp"

#include <vector>

// Dense complex linear-algebra substrate: tensor-product bookkeeping,
// Hermitian eigendecomposition, norms, partial trace/transpose, Schmidt
// decomposition, entropy and distance functionals.

namespace gent::qlinalg {

// Kronecker product (leftmost factor is the most significant index).
ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b);
RealMatrix kron(const RealMatrix& a, const RealMatrix& b);

// Reduced operator on the kept factors (ascending index order); trace
// preserved exactly up to floating-point summation.
ComplexMatrix partial_trace(const ComplexMatrix& m, const TensorShape& shape,
                            const std::vector<int>& keep);

// Transpose applied to a single tensor factor.
ComplexMatrix partial_transpose(const ComplexMatrix& m, const TensorShape& shape, int factor);

struct EigHResult {
    RealVector values;     // ascending
    ComplexMatrix vectors; // columns, orthonormal
};

// Hermitian eigendecomposition (LAPACK zheevd, with a dsyevd fast path for
// real-symmetric input). Throws std::invalid_argument on non-Hermitian input.
EigHResult eig_hermitian(const ComplexMatrix& m);

// Eigenvalues only, ascending.
RealVector eigvals_hermitian(const ComplexMatrix& m);

// Real-symmetric eigendecomposition (dsyevd).
struct EigSymResult {
    RealVector values;
    RealMatrix vectors;
};
EigSymResult eig_symmetric(const RealMatrix& m);

struct SchmidtResult {
    RealVector coefficients; // sqrt(sigma_alpha), descending, sum of squares 1
    ComplexMatrix left;      // columns: orthonormal vectors on the left side
    ComplexMatrix right;     // columns: orthonormal vectors on the right side
};

// Schmidt decomposition across a bipartition of tensor factors. left_factors
// lists the factor indices on the left side (any subset; order follows the
// ascending factor order).
SchmidtResult schmidt_decompose(const PureState& psi, const std::vector<int>& left_factors);

struct NormTriple {
    double trace_norm;
    double hs_norm;
    double op_norm;
};

// Trace, Hilbert-Schmidt, and operator norms via singular values.
NormTriple norms(const ComplexMatrix& m);

double trace_norm(const ComplexMatrix& m);
double hs_norm(const ComplexMatrix& m);
double op_norm(const ComplexMatrix& m);

// Operator norm of a Hermitian matrix by dense eigenvalues.
double op_norm_hermitian(const ComplexMatrix& m);

// Von Neumann entropy in nats; eigenvalues in [-1e-10, 0) are clamped to 0.
double vn_entropy(const DensityMatrix& rho);
double vn_entropy(const ComplexMatrix& rho); // trusts Hermiticity, clamps spectrum

struct FidelityBures {
    double fidelity;      // F = Tr sqrt(sqrt(rho) sigma sqrt(rho))
    double bures;         // D = 2 sqrt(1 - F)
    double trace_distance; // T = ||rho - sigma||_1 / 2
};

FidelityBures fidelity_bures(const DensityMatrix& rho, const DensityMatrix& sigma);

// eta(x) = -x ln x with eta(0) = 0 (Fannes continuity term).
double eta(double x);

}  // namespace gent::qlinalg
