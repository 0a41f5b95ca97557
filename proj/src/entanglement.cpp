#include "gent/entanglement.hpp"

#include "gent/rng.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>

namespace gent::ent {

namespace {

double binary_entropy(double x) {
    return qlinalg::eta(x) + qlinalg::eta(1.0 - x);
}

// Index maps splitting the full space into (left, right) composite indices
// for a given subset of tensor factors.
struct CutLayout {
    Eigen::Index dl = 1, dr = 1;
    std::vector<Eigen::Index> left_index;  // full index -> left composite index
    std::vector<Eigen::Index> right_index; // full index -> right composite index

    CutLayout(const TensorShape& shape, std::vector<int> left) {
        std::sort(left.begin(), left.end());
        const auto& dims = shape.factor_dims;
        if (left.empty() || left.size() >= dims.size())
            throw std::invalid_argument("cut: bipartition side is empty");
        for (int f : left)
            if (f < 0 || static_cast<std::size_t>(f) >= dims.size())
                throw std::out_of_range("cut: factor index out of range");
        std::vector<int> right;
        for (std::size_t f = 0; f < dims.size(); ++f)
            if (!std::binary_search(left.begin(), left.end(), static_cast<int>(f)))
                right.push_back(static_cast<int>(f));
        for (int f : left) dl *= dims[f];
        for (int f : right) dr *= dims[f];

        std::vector<Eigen::Index> strides(dims.size());
        Eigen::Index s = 1;
        for (std::size_t f = dims.size(); f-- > 0;) {
            strides[f] = s;
            s *= dims[f];
        }
        const Eigen::Index total = shape.total_dim();
        left_index.resize(total);
        right_index.resize(total);
        for (Eigen::Index i = 0; i < total; ++i) {
            Eigen::Index l = 0, r = 0;
            for (int f : left) l = l * dims[f] + (i / strides[f]) % dims[f];
            for (int f : right) r = r * dims[f] + (i / strides[f]) % dims[f];
            left_index[i] = l;
            right_index[i] = r;
        }
    }

    // Reshape a state vector into the dl x dr coefficient matrix.
    ComplexMatrix fold(const ComplexVector& psi) const {
        ComplexMatrix m(dl, dr);
        for (Eigen::Index i = 0; i < psi.size(); ++i)
            m(left_index[i], right_index[i]) = psi(i);
        return m;
    }

    // Inverse of fold.
    ComplexVector unfold(const ComplexMatrix& m) const {
        ComplexVector psi(static_cast<Eigen::Index>(left_index.size()));
        for (Eigen::Index i = 0; i < psi.size(); ++i)
            psi(i) = m(left_index[i], right_index[i]);
        return psi;
    }
};

// Thin polar factor: closest isometry to A in Frobenius norm.
ComplexMatrix polar_isometry(const ComplexMatrix& a) {
    Eigen::BDCSVD<ComplexMatrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    return svd.matrixU() * svd.matrixV().adjoint();
}

}  // namespace

double concurrence(const DensityMatrix& rho) {
    if (rho.dim() != 4 || rho.shape.num_factors() != 2 || rho.shape.factor_dims[0] != 2)
        throw std::invalid_argument("concurrence: expects a 2 (x) 2 density matrix");
    ComplexMatrix sy(2, 2);
    sy << Complex(0, 0), Complex(0, -1), Complex(0, 1), Complex(0, 0);
    ComplexMatrix yy = qlinalg::kron(sy, sy);
    ComplexMatrix r = rho.mat * yy * rho.mat.conjugate() * yy;
    Eigen::ComplexEigenSolver<ComplexMatrix> es(r, false);
    std::vector<double> roots;
    for (Eigen::Index i = 0; i < 4; ++i)
        roots.push_back(std::sqrt(std::max(0.0, es.eigenvalues()(i).real())));
    std::sort(roots.begin(), roots.end(), std::greater<>());
    return std::max(0.0, roots[0] - roots[1] - roots[2] - roots[3]);
}

double eof_two_qubit(const DensityMatrix& rho) {
    const double c = concurrence(rho);
    const double x = 0.5 * (1.0 + std::sqrt(std::max(0.0, 1.0 - c * c)));
    return binary_entropy(x);
}

EofResult eof_optimize(const DensityMatrix& rho, const std::vector<int>& left_factors,
                       const EofOptions& options) {
    const CutLayout cut(rho.shape, left_factors);

    auto eig = qlinalg::eig_hermitian(rho.mat);
    std::vector<Eigen::Index> kept;
    for (Eigen::Index i = 0; i < eig.values.size(); ++i)
        if (eig.values(i) > 1e-12) kept.push_back(i);
    const int r = static_cast<int>(kept.size());
    if (r == 0) throw std::invalid_argument("eof_optimize: zero-rank density matrix");

    // Scaled eigen-ensemble w_j = sqrt(e_j) |e_j>.
    ComplexMatrix W(rho.dim(), r);
    for (int j = 0; j < r; ++j)
        W.col(j) = std::sqrt(eig.values(kept[j])) * eig.vectors.col(kept[j]);

    auto make_result = [&](double value, const ComplexMatrix& U, bool converged,
                           double spread) {
        EofResult res{};
        res.value = value;
        res.restarts_used = options.restarts;
        res.converged = converged;
        res.gap_estimate = spread;
        ComplexMatrix Psi = W * U.transpose();
        for (Eigen::Index l = 0; l < Psi.cols(); ++l) {
            const double p = Psi.col(l).squaredNorm();
            if (p < 1e-12) continue;
            res.ensemble.weights.push_back(p);
            res.ensemble.states.push_back(Psi.col(l) / std::sqrt(p));
        }
        return res;
    };

    if (r == 1) {
        // Pure state: EoF is the reduced entropy, no optimization needed.
        ComplexMatrix M = cut.fold(W.col(0));
        ComplexMatrix tau = M * M.adjoint();
        EofResult res = make_result(qlinalg::vn_entropy(tau), ComplexMatrix::Identity(1, 1),
                                    true, 0.0);
        res.restarts_used = 1;
        return res;
    }

    const int L = r * r;

    // Objective and Euclidean gradient at the isometry U (L x r).
    auto evaluate = [&](const ComplexMatrix& U, ComplexMatrix* grad) {
        ComplexMatrix Psi = W * U.transpose(); // column l = psi~_l
        double energy = 0.0;
        ComplexMatrix Phi;
        if (grad) Phi = ComplexMatrix::Zero(rho.dim(), L);
        for (int l = 0; l < L; ++l) {
            ComplexMatrix M = cut.fold(Psi.col(l));
            ComplexMatrix tau = M * M.adjoint();
            const double p = tau.trace().real();
            if (p < 1e-15) continue;
            auto te = qlinalg::eig_hermitian(tau);
            RealVector lnvals(te.values.size());
            for (Eigen::Index i = 0; i < te.values.size(); ++i) {
                const double q = std::max(te.values(i) / p, 1e-300);
                energy -= p * q * std::log(q);
                lnvals(i) = -std::log(std::max(q, 1e-18));
            }
            if (grad) {
                ComplexMatrix G =
                    te.vectors * lnvals.asDiagonal() * te.vectors.adjoint(); // -ln(tau/p)
                Phi.col(l) = cut.unfold(G * M);
            }
        }
        if (grad) *grad = (W.adjoint() * Phi).transpose(); // Gamma_{lj} = <w_j| (G_l (x) 1) |psi~_l>
        return energy;
    };

    CounterRng rng(options.seed, /*stream=*/0x656f66ULL);
    double best_value = 1e300;
    ComplexMatrix best_U;
    bool best_converged = false;
    double worst_value = -1e300;

    for (int restart = 0; restart < options.restarts; ++restart) {
        ComplexMatrix U;
        if (restart == 0) {
            // Eigen-ensemble embedding: guarantees value <= S(Tr_2 rho).
            U = ComplexMatrix::Zero(L, r);
            U.topRows(r) = ComplexMatrix::Identity(r, r);
        } else {
            ComplexMatrix Gsn(L, r);
            for (int j = 0; j < r; ++j)
                for (int i = 0; i < L; ++i) Gsn(i, j) = rng.cgaussian();
            Eigen::HouseholderQR<ComplexMatrix> qr(Gsn);
            U = qr.householderQ() * ComplexMatrix::Identity(L, r);
        }

        ComplexMatrix grad;
        double value = evaluate(U, &grad);
        double step = 0.5;
        bool converged = false;
        std::vector<double> history{value};

        for (int it = 0; it < options.max_steps; ++it) {
            ComplexMatrix U_try = polar_isometry(U - step * grad);
            ComplexMatrix grad_try;
            const double v_try = evaluate(U_try, &grad_try);
            if (v_try < value) {
                U = std::move(U_try);
                grad = std::move(grad_try);
                value = v_try;
                step = std::min(step * 1.25, 2.0);
            } else {
                step *= 0.5;
                if (step < 1e-12) {
                    converged = true;
                    break;
                }
            }
            history.push_back(value);
            if (static_cast<int>(history.size()) > options.patience) {
                const double old =
                    history[history.size() - 1 - static_cast<std::size_t>(options.patience)];
                if (old - value < options.tol) {
                    converged = true;
                    break;
                }
            }
        }

        worst_value = std::max(worst_value, value);
        if (value < best_value) {
            best_value = value;
            best_U = U;
            best_converged = converged;
        }
    }

    return make_result(best_value, best_U, best_converged, worst_value - best_value);
}

PptResult ppt_check(const DensityMatrix& rho, const std::vector<int>& left_factors) {
    std::vector<int> left = left_factors;
    std::sort(left.begin(), left.end());
    ComplexMatrix m = rho.mat;
    for (std::size_t f = 0; f < rho.shape.num_factors(); ++f)
        if (!std::binary_search(left.begin(), left.end(), static_cast<int>(f)))
            m = qlinalg::partial_transpose(m, rho.shape, static_cast<int>(f));
    const double min_ev = qlinalg::eigvals_hermitian(m).minCoeff();
    return {min_ev >= -1e-10, min_ev};
}

ConvergenceTable convergence_experiment(const fcs::FcsSpec& spec, int n_max,
                                        const EofOptions& options) {
    if (n_max < 2) throw std::invalid_argument("convergence_experiment: n_max must be >= 2");
    ConvergenceTable table{};
    auto td = fcs::transfer(spec);
    table.lambda = td.lambda;

    DensityMatrix rab = fcs::rho_ab(spec);
    EofOptions opt = options;
    const double eof_ab = eof_optimize(rab, {0}, opt).value;

    for (int n = 2; n <= n_max; ++n) {
        DensityMatrix chain = fcs::rho_chain(spec, n);
        // Cut between site 1 and the rest of the block.
        opt.seed = options.seed + static_cast<std::uint64_t>(n) * 1000003ULL;
        const double eof_chain = eof_optimize(chain, {0}, opt).value;
        table.rows.push_back({n, eof_chain, eof_ab, eof_ab - eof_chain});
    }

    // Fitted log-slope of gap_n over the largest contiguous window with
    // gap > 1e-6.
    std::size_t best_begin = 0, best_len = 0;
    std::size_t begin = 0;
    while (begin < table.rows.size()) {
        if (table.rows[begin].gap <= 1e-6) {
            ++begin;
            continue;
        }
        std::size_t end = begin;
        while (end < table.rows.size() && table.rows[end].gap > 1e-6) ++end;
        if (end - begin > best_len) {
            best_len = end - begin;
            best_begin = begin;
        }
        begin = end;
    }
    if (best_len >= 2) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (std::size_t i = best_begin; i < best_begin + best_len; ++i) {
            const double x = table.rows[i].n;
            const double y = std::log(table.rows[i].gap);
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
        }
        const double m = static_cast<double>(best_len);
        table.slope_fit = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    } else {
        table.slope_fit = std::numeric_limits<double>::quiet_NaN();
    }
    return table;
}

DistantDecayTable distant_decay_experiment(const fcs::FcsSpec& spec, int n, int p_min,
                                           int p_max) {
    if (p_min < 2 || p_max > n || p_min > p_max)
        throw std::invalid_argument("distant_decay_experiment: need 2 <= p_min <= p_max <= n");
    DistantDecayTable table{};
    auto td = fcs::transfer(spec);
    table.c = td.c;
    table.lambda = td.lambda;

    DensityMatrix chain = fcs::rho_chain(spec, n);
    ComplexMatrix rho1 = qlinalg::partial_trace(chain.mat, chain.shape, {0});

    for (int p = p_min; p <= p_max; ++p) {
        std::vector<int> keep{0};
        for (int site = p; site <= n; ++site) keep.push_back(site - 1);
        ComplexMatrix joint = (p == 2)
                                  ? chain.mat
                                  : qlinalg::partial_trace(chain.mat, chain.shape, keep);
        TensorShape joint_shape(std::vector<Eigen::Index>(keep.size(), spec.d));
        std::vector<int> block;
        for (std::size_t f = 1; f < keep.size(); ++f) block.push_back(static_cast<int>(f));
        ComplexMatrix rho_block = qlinalg::partial_trace(joint, joint_shape, block);
        const double t_p = qlinalg::trace_norm(joint - qlinalg::kron(rho1, rho_block));
        const double bound = td.c * std::pow(td.lambda, p - 2);
        table.rows.push_back({p, t_p, bound, t_p <= bound});
    }
    return table;
}

FannesGap fannes_gap(const DensityMatrix& rho, const DensityMatrix& sigma) {
    if (rho.dim() != sigma.dim())
        throw std::invalid_argument("fannes_gap: dimension mismatch");
    const double t1 = qlinalg::trace_norm(rho.mat - sigma.mat);
    if (t1 > 1.0 / M_E)
        throw OutOfRegime("fannes_gap: ||rho - sigma||_1 = " + std::to_string(t1) +
                          " exceeds 1/e");
    const double lhs = std::abs(qlinalg::vn_entropy(rho) - qlinalg::vn_entropy(sigma));
    const double rhs =
        (std::log(static_cast<double>(rho.dim())) + 2.0) * t1 + qlinalg::eta(t1);
    return {lhs, rhs, lhs <= rhs};
}

}  // namespace gent::ent
