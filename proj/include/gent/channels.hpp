#pragma once

#include "gent/qlinalg.hpp"
#include "gent/types.hpp"

#include <cstdint>

// Depolarized Werner-Holevo channels W_{lambda,d}(rho) =
// lambda rho + (1 - lambda)(1_d - rho^T)/(d - 1): closed-form output norms,
// the multiplicativity gap, a global search over bipartite inputs, and the
// entrywise-positivity check.

namespace gent::channels {

struct DwhChannel {
    double lambda;
    int d;

    DwhChannel(double lambda_, int d_) : lambda(lambda_), d(d_) {
        if (lambda < 0.0 || lambda > 1.0)
            throw std::invalid_argument("DwhChannel: lambda must be in [0, 1]");
        if (d < 2) throw std::invalid_argument("DwhChannel: d must be >= 2");
    }

    double Q() const { return (1.0 - lambda) / (d - 1); }
    double R() const { return lambda - Q(); }
    double S() const { return 2.0 * lambda * Q(); }
    double P_sq() const {
        const double q = Q(), r = R(), s = S();
        return (q * q + (d - 2) * r * r) * s + (d - 2) * q * q * r * r;
    }
};

// Channel action on a d x d density matrix.
ComplexMatrix apply(const DwhChannel& ch, const ComplexMatrix& rho);

// Channel action lifted to tensor factor `factor` of a multi-factor operator.
ComplexMatrix apply_on_factor(const DwhChannel& ch, const ComplexMatrix& x,
                              const TensorShape& shape, int factor);

// Squared maximal output 2-norm: ((d - 2) lambda^2 + 1)/(d - 1).
double max_output_2norm_sq(const DwhChannel& ch);

// The pure state (|0> + i|1>)/sqrt(2) attaining the maximum.
ComplexVector max_norm_attaining_state(const DwhChannel& ch);

// Closed-form squared output 2-norm of (W (x) W)(|psi><psi|) for a bipartite
// pure state on d (x) d.
double tensor_output_2norm_sq(const DwhChannel& ch, const ComplexVector& psi);

// Direct evaluation: build the output of W (x) W and take Tr(out^2).
double tensor_output_2norm_sq_direct(const DwhChannel& ch, const ComplexVector& psi);

struct MultGapRecord {
    ComplexVector input;
    double gap;             // single_norm_sq^2 - tensor_norm_sq
    double tensor_norm_sq;
    double single_norm_sq;
};

MultGapRecord mult_gap(const DwhChannel& ch, const ComplexVector& psi);

struct MultSearchResult {
    double best_tensor_norm_sq;
    ComplexVector argmax;
};

// Gradient-free hill climbing over pure bipartite inputs: random complex
// Gaussian perturbation + renormalization, accept on increase, best of
// `restarts` restarts.
MultSearchResult mult_search(const DwhChannel& ch, int restarts, int steps,
                             std::uint64_t seed = 2024);

// Tensor output norm on the conjugate-Schmidt-basis input
// |psi_max> = sum_i sqrt(sigma_i) |i>|i> built in the standard basis.
double conjugate_pair_norm(const DwhChannel& ch, const RealVector& sigma);

struct EpResult {
    bool satisfied;     // all entries >= -1e-12
    double min_entry;
    int witness[4];     // (i, j, k, l) of the minimal entry
};

// Entrywise positivity of Tr W(|e_l><e_i|) W(|e_j><e_k|) over all index
// quadruples of an orthonormal basis (columns of `basis`).
EpResult ep_check(const DwhChannel& ch, const ComplexMatrix& basis);

}  // namespace gent::channels
