#pragma once

#include "gent/qlinalg.hpp"
#include "gent/types.hpp"

#include <string>

// Pure translation-invariant finitely correlated states generated by an
// isometry-condition map V : C^d (x) C^b -> C^b with V V^dag = 1_b. Provides
// the map E, the transfer operator, its fixed point and decay constants, the
// memory state rho_AB, and finite-block densities.

namespace gent::fcs {

struct FcsSpec {
    int d; // spin dimension
    int b; // memory dimension
    ComplexMatrix V; // b x (d*b); block s (columns s*b..s*b+b-1) is V_s

    ComplexMatrix block(int s) const { return V.block(0, static_cast<Eigen::Index>(s) * b, b, b); }
};

struct ValidationReport {
    double isometry_residual;      // max |V V^dag - 1|
    double peripheral_gap;         // 1 - (second largest eigenvalue modulus)
    double unit_eigenvalue_error;  // |mu - 1| for the leading eigenvalue
};

// Checks the isometry condition and that the transfer operator has trivial
// peripheral spectrum (the only eigenvalue of modulus >= 1 - 1e-8 is the
// simple eigenvalue 1). Throws IsometryViolation / PeripheralSpectrum.
ValidationReport validate(const FcsSpec& spec);

struct TransferData {
    ComplexMatrix ehat;       // b^2 x b^2 matrix of B |-> V (1_d (x) B) V^dag on vec(B)
    DensityMatrix fixed_point; // rho with Tr rho Ehat(B) = Tr rho B
    double lambda;            // largest non-unit eigenvalue modulus (0 when b = 1)
    double c;                 // empirical decay prefactor: max_n ||Ehat^n - Ehat^inf|| / lambda^n
};

// Builds the transfer operator, its fixed point, and the decay constants
// (lambda, c). The prefactor c is estimated over n <= 30 by maximizing
// ||(Ehat^n - Ehat^inf)(B)||_1 over the b^2 matrix units (unit trace norm).
TransferData transfer(const FcsSpec& spec);

// Applies the transfer operator to a memory matrix: Ehat(B) = V (1_d (x) B) V^dag.
ComplexMatrix apply_ehat(const FcsSpec& spec, const ComplexMatrix& B);

// E(A (x) B) = V (A (x) B) V^dag for A on the spin factor, B on the memory.
ComplexMatrix apply_e(const FcsSpec& spec, const ComplexMatrix& ab);

// Memory state rho_AB = V^dag rho V on C^d (x) C^b (rank <= b).
DensityMatrix rho_ab(const FcsSpec& spec);

// Finite-block density rho_{[1,n]} on (C^d)^(x n), built by the contraction
// Tr_B(V_n^dag rho_AB V_n).
DensityMatrix rho_chain(const FcsSpec& spec, int n);

// Partial trace of rho_{[1,n]} over sites 2..p-1 (1-based sites), i.e. the
// joint state rho_{1,[p,n]} of the first spin and the block [p, n].
DensityMatrix rho_spin_block(const FcsSpec& spec, int p, int n);

// Named specs: "aklt", "random(d,b,seed)", "identity-pad(d,b)" (transfer
// operator equal to the identity map; fails validation), "product(d)" (b=1).
FcsSpec builtin_specs(const std::string& name);

}  // namespace gent::fcs
