#pragma once

#include "gent/fcs.hpp"
#include "gent/qlinalg.hpp"
#include "gent/types.hpp"

#include <cstdint>
#include <vector>

// Entanglement functionals: concurrence and the two-qubit closed form,
// entanglement of formation by ensemble optimization over the isometric
// freedom of decompositions, the PPT test, and the two finitely-correlated-
// state experiments (EoF convergence, distant-spin decay).

namespace gent::ent {

// Wootters concurrence of a two-qubit density matrix.
double concurrence(const DensityMatrix& rho);

// Closed-form two-qubit EoF in nats: h((1 + sqrt(1 - C^2)) / 2).
double eof_two_qubit(const DensityMatrix& rho);

struct Ensemble {
    std::vector<double> weights;        // p_i >= 0, sum 1
    std::vector<ComplexVector> states;  // normalized pure states
};

struct EofOptions {
    int restarts = 32;
    int max_steps = 5000;
    double tol = 1e-9;   // minimal decrease over `patience` steps
    int patience = 50;
    std::uint64_t seed = 12345;
};

struct EofResult {
    double value;        // nats
    Ensemble ensemble;   // best decomposition found
    int restarts_used;
    bool converged;      // best restart met the stopping criterion
    double gap_estimate; // spread of final values across restarts
};

// Minimizes the average entropy of the first cut side over ensembles of
// cardinality L = rank(rho)^2, parametrized by isometries acting on the
// scaled eigen-ensemble; projected gradient descent with polar retraction.
// One restart is seeded at the eigen-ensemble embedding, so the result never
// exceeds S(Tr_2 rho) + 1e-8.
EofResult eof_optimize(const DensityMatrix& rho, const std::vector<int>& left_factors,
                       const EofOptions& options = {});

struct PptResult {
    bool is_ppt;
    double min_eigenvalue;
};

// Partial transpose over the complement of left_factors; PPT iff the minimum
// eigenvalue is >= -1e-10.
PptResult ppt_check(const DensityMatrix& rho, const std::vector<int>& left_factors);

struct ConvergenceRow {
    int n;
    double eof_chain; // EoF(rho_{[1,n]}) across the cut 1 | [2, n]
    double eof_ab;    // EoF(rho_AB)
    double gap;       // eof_ab - eof_chain
};

struct ConvergenceTable {
    std::vector<ConvergenceRow> rows;
    double slope_fit; // fitted log-slope of gap_n over the largest window with gap > 1e-6
    double lambda;    // transfer-operator decay rate, for reference
};

ConvergenceTable convergence_experiment(const fcs::FcsSpec& spec, int n_max,
                                        const EofOptions& options = {});

struct DistantDecayRow {
    int p;
    double t_p;    // ||rho_{1,[p,n]} - rho_1 (x) rho_{[p,n]}||_1
    double bound;  // c * lambda^(p-2)
    bool within_bound;
};

struct DistantDecayTable {
    std::vector<DistantDecayRow> rows;
    double c;
    double lambda;
};

DistantDecayTable distant_decay_experiment(const fcs::FcsSpec& spec, int n, int p_min, int p_max);

struct FannesGap {
    double lhs;   // |S(rho) - S(sigma)|
    double rhs;   // (ln d + 2) T_1 + eta(T_1)
    bool holds;
};

// Throws OutOfRegime when ||rho - sigma||_1 > 1/e.
FannesGap fannes_gap(const DensityMatrix& rho, const DensityMatrix& sigma);

}  // namespace gent::ent
