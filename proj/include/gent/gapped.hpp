#pragma once

#include "gent/qlinalg.hpp"
#include "gent/types.hpp"

#include <map>
#include <string>
#include <vector>

// Exactly diagonalized finite spin chains with nearest-neighbor interactions,
// Gaussian-filtered observables and their local surrogates, approximate
// ground-state projectors built from three localized factors, Lieb-Robinson
// probes, area-law entropy profiles, and the combinatorial / entropy lemmas
// used by the area-law argument.

namespace gent::gapped {

// ============================================================================
// Models
// ============================================================================

struct Term {
    std::vector<int> sites;  // sorted, diameter <= 1 (single site or a bond)
    ComplexMatrix op;        // Hermitian, dimension = product of site dims
};

struct SpinChainModel {
    int n_sites = 0;
    std::vector<Eigen::Index> local_dims;
    std::vector<Term> terms;
    double coupling_j = 0.0;  // max operator norm over terms
    bool is_real = true;      // every term has (numerically) real entries

    TensorShape shape() const { return TensorShape(local_dims); }
    Eigen::Index total_dim() const { return shape().total_dim(); }
};

// Model zoo (open boundary conditions, sites indexed 0..n-1):
//   "tfim"            - transverse-field Ising, H = -sum sz sz - h sum sx
//                        (param "h", default 1)
//   "heisenberg"      - spin-1/2 Heisenberg, H = sum S.S
//   "aklt"            - spin-1 AKLT, H = sum [ S.S/2 + (S.S)^2/6 + 1/3 ]
//   "paramagnet"      - H = -h sum sx (single-site terms, product ground state)
//   "classical-ising" - H = -sum sz sz - h sum sz (all terms diagonal)
SpinChainModel build_model(const std::string& name, int n,
                           const std::map<std::string, double>& params = {});

// Dense Hamiltonian of the model.
ComplexMatrix hamiltonian(const SpinChainModel& model);

// Embed an operator acting on the listed sites (ascending order) into the
// full chain, acting as identity elsewhere.
ComplexMatrix embed_on_sites(const ComplexMatrix& op, const std::vector<int>& sites,
                             const TensorShape& shape);

// ============================================================================
// Spectral data
// ============================================================================

struct SpectralData {
    RealVector eigenvalues;  // ascending, shifted so the ground energy is 0
    double ground_energy;    // unshifted E_0
    double gamma;            // E_1 - E_0 > 0
    bool is_real;
    RealMatrix vectors_real;       // eigenvector columns (real models)
    ComplexMatrix vectors_complex; // eigenvector columns (complex models)
    PureState ground_state;
    TensorShape shape;

    Eigen::Index dim() const { return eigenvalues.size(); }
    ComplexMatrix basis() const;  // eigenvector matrix as a complex copy
    ComplexMatrix ground_projector() const;
    ComplexMatrix to_eigenbasis(const ComplexMatrix& o) const;    // U^dag O U
    ComplexMatrix from_eigenbasis(const ComplexMatrix& o) const;  // U O U^dag
};

// Dense diagonalization; ground energy shifted to zero afterwards.
// Throws DegenerateGroundState when E_1 - E_0 < 1e-8.
SpectralData diagonalize(const SpinChainModel& model);

// Ground-state entanglement entropy S(rho_{[0,m-1]}) at every cut m = 1..n-1.
struct EntropyCut {
    int m;
    double entropy;  // nats
};
std::vector<EntropyCut> entropy_profile(const SpectralData& spec, const SpinChainModel& model);

// ============================================================================
// Regions
// ============================================================================

// A is the contiguous site interval [a_lo, a_hi]. The boundary dA is the set
// of sites of A with a neighbor outside A; the interior I drops everything
// within distance ell of dA, the buffer B collects all sites within distance
// ell of dA (inside or outside A), and the exterior E is the rest of the
// complement. I, B, E partition the chain.
struct RegionSplit {
    int a_lo = 0, a_hi = 0, ell = 1;
    std::vector<int> boundary;    // dA
    std::vector<int> interior;    // I(ell)
    std::vector<int> buffer;      // B(ell) = buffer_in + buffer_out
    std::vector<int> exterior;    // E(ell)
    std::vector<int> buffer_in;   // B intersect A
    std::vector<int> buffer_out;  // B minus A
};

RegionSplit region_split(const SpinChainModel& model, int a_lo, int a_hi, int ell);

// Sites within graph distance `radius` of the boundary of [a_lo, a_hi]:
// the enlargement B(A; radius) = {x : d(x, dA) <= radius}.
std::vector<int> enlarged_region(const SpinChainModel& model, int a_lo, int a_hi, int radius);

// ============================================================================
// Filtering and surrogates
// ============================================================================

// Gaussian energy filter: in the Hamiltonian eigenbasis every matrix element
// (m, n) is damped by exp(-(E_m - E_n)^2 / (4 alpha)). Exact (no quadrature);
// linear and norm-nonincreasing; fixes operators commuting with H.
ComplexMatrix gaussian_filter(const SpectralData& spec, const ComplexMatrix& o, double alpha);

struct HamiltonianSplit {
    ComplexMatrix h_interior, h_buffer, h_exterior;  // sum = H exactly
    double comm_interior, comm_buffer, comm_exterior;      // ||[H, H_X]||
    double bound_interior, bound_buffer, bound_exterior;   // 8 J^2 x boundary counts
};

// Partition of the Hamiltonian terms: a term joins H_I when it touches the
// interior, else H_B when contained in the buffer, else H_E (it then touches
// the exterior). Commutator norms are reported next to their combinatorial
// bounds 8 J^2 |dI|, 8 J^2 (|dI| + |dE|), 8 J^2 |dE|.
HamiltonianSplit hamiltonian_split(const SpinChainModel& model, const RegionSplit& split);

struct FilteredEnergyBound {
    double lhs;              // || (H~_X)_alpha psi_0 ||
    double rhs;              // ||[H, H_X]|| exp(-gamma^2 / 4 alpha) / gamma
    double commutator_norm;  // ||[H, H_X]||
};

// Both sides of the filtered-energy inequality for the ground-shifted
// operator H~_X = H_X - <psi_0|H_X|psi_0>.
FilteredEnergyBound filtered_energy_bound(const SpectralData& spec, const ComplexMatrix& h_x,
                                          double alpha);

struct LocalSurrogates {
    ComplexMatrix m_interior;  // filter of H~_I under the dynamics of A only
    ComplexMatrix m_buffer;    // filter of H~_B under B(A; 2 ell)
    ComplexMatrix m_exterior;  // filter of H~_E under the complement of A
    double residual;           // || H~ - (M_I + M_B + M_E) ||
};

// Local surrogates: each split part is filtered under the dynamics generated
// by the terms inside its own enlarged region, so M_I is supported on A, M_B
// on B(A; 2 ell) and M_E on the complement of A.
LocalSurrogates local_surrogates(const SpinChainModel& model, const SpectralData& spec,
                                 const RegionSplit& split, double alpha);

// ============================================================================
// Approximate ground-state projector
// ============================================================================

struct ModelConstants {
    double v;               // Lieb-Robinson velocity 4(2d - 1)J, lattice d = 1
    double xi_prime;        // 4 (1 + (v / gamma)^2)
    double alpha;           // gamma^2 xi' / (4 ell)
    double big_d;           // max(1/2, 2(d - 1)) = 1/2 on chains
    double c1;              // prefactor of the spectral cutoff
    double default_cutoff;  // c1 |dA| ell^D exp(-ell / 2 xi')
};

ModelConstants derived_constants(const SpinChainModel& model, double gamma, int ell,
                                 int boundary_size);

struct GsApproxOptions {
    double alpha = -1.0;    // <= 0: use gamma^2 xi' / (4 ell)
    double cutoff = -1.0;   // <= 0: use the default cutoff above
    int quad_nodes = 80;    // Gauss-Hermite node count for the mixed evolution
    int quad_node_cap = 5120;
    double quad_tol = 1e-6; // convergence threshold under node doubling
};

struct GsApproxResult {
    ComplexMatrix p_a;      // spectral projection of M_I below the cutoff
    ComplexMatrix p_e;      // spectral projection of M_E below the cutoff
    ComplexMatrix p_b;      // boundary operator, localized onto B(A; 3 ell)
    double error;           // || P_B P_A P_E - P_0 ||
    double alpha, xi_prime, cutoff, c1, v;
    double pa_expectation;  // <psi_0| P_A |psi_0>
    double pb_norm;         // || P_B || (<= 1 up to roundoff)
    Eigen::Index rank_pa, rank_pe;
    int quad_nodes_used;
};

// Builds the three-factor approximation P_B P_A P_E of the ground-state
// projector. P_B(alpha) mixes two non-commuting evolutions and is evaluated
// by Gauss-Hermite quadrature with node doubling until the operator changes
// by less than quad_tol (QuadratureUnconverged at the cap); it is then
// localized onto B(A; 3 ell) by partial trace over the complement tensored
// with the normalized identity. Throws EmptyProjector when a cutoff
// projection vanishes.
GsApproxResult gs_projector_approx(const SpinChainModel& model, const SpectralData& spec,
                                   const RegionSplit& split, const GsApproxOptions& options = {});

struct CutoffDiagnostics {
    double cutoff, alpha, xi_prime;
    double pa_expectation;  // <psi_0| P_A |psi_0>
    double pe_expectation;  // <psi_0| P_E |psi_0>
    Eigen::Index rank_pa, rank_pe;
};

// Ground-state weights of the cutoff projections P_A, P_E alone. Works on the
// small interval blocks only, so it is cheap enough to evaluate at several
// cutoffs without rebuilding the boundary operator.
CutoffDiagnostics cutoff_projector_diagnostics(const SpinChainModel& model,
                                               const SpectralData& spec, const RegionSplit& split,
                                               double cutoff = -1.0, double alpha = -1.0);

// ============================================================================
// Lieb-Robinson probe
// ============================================================================

struct LrRow {
    double t;
    double norm;     // ||[A(t), B]||
    double bound;    // 2 ||A|| ||B|| |dX| exp(-mu d(x,y)) exp(v |t|)
    bool in_window;  // |t| <= exp(-(1 + mu)) d(x,y) / v
};

struct LrProbeResult {
    std::vector<LrRow> rows;
    double t_star;  // first grid time with norm > 0.1 (NaN if never)
    double v;       // 4(2d - 1) J with d = 1
    double mu;      // 1/4
};

// Exact Heisenberg evolution of a single-site operator at x against a
// single-site operator at y; commutator norms via the spectral norm.
LrProbeResult lr_probe(const SpinChainModel& model, const SpectralData& spec, int x, int y,
                       const ComplexMatrix& a_op, const ComplexMatrix& b_op,
                       const std::vector<double>& t_grid);

// ============================================================================
// Combinatorial and entropy lemmas
// ============================================================================

// Lattice-sphere point count s(n, d) = |{x in Z^d : |x|_1 = n}| via the
// recursion s(n,d) = s(n-1,d) + s(n,d-1) + s(n-1,d-1), s(1,d) = 2d, s(n,1) = 2.
unsigned long long sphere_count(int n, int d);

struct EntropyBound {
    double entropy;  // S(sigma), nats
    double bound;    // ln s_1 + c ln R / (1 - c) + H_2(1 - c) / (1 - c)
};

// Entropy bound for a descending distribution whose tails decay along the
// schedule s_n: requires sum_{alpha > s_n} sigma(alpha) <= c^n for every n
// (ConstraintViolated otherwise), s_{n+1}/s_n <= R, s_1 > 1, 0 < c < 1.
EntropyBound entropy_bound_eval(const RealVector& sigma, const std::vector<long long>& schedule,
                                double c, double r);

}  // namespace gent::gapped
