#include "gent/channels.hpp"

#include "gent/rng.hpp"

#include <cmath>

namespace gent::channels {

namespace {

// Fold a bipartite vector on d (x) d into its d x d coefficient matrix.
ComplexMatrix fold(const ComplexVector& psi, int d) {
    if (psi.size() != static_cast<Eigen::Index>(d) * d)
        throw std::invalid_argument("channel input: expected a vector on C^d (x) C^d");
    ComplexMatrix m(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) m(i, j) = psi(static_cast<Eigen::Index>(i) * d + j);
    return m;
}

}  // namespace

ComplexMatrix apply(const DwhChannel& ch, const ComplexMatrix& rho) {
    if (rho.rows() != ch.d || rho.cols() != ch.d)
        throw std::invalid_argument("apply: operator dimension does not match channel");
    return ch.lambda * rho +
           (1.0 - ch.lambda) / (ch.d - 1) *
               (rho.trace() * ComplexMatrix::Identity(ch.d, ch.d) - rho.transpose());
}

ComplexMatrix apply_on_factor(const DwhChannel& ch, const ComplexMatrix& x,
                              const TensorShape& shape, int factor) {
    if (factor < 0 || static_cast<std::size_t>(factor) >= shape.num_factors())
        throw std::out_of_range("apply_on_factor: factor out of range");
    if (shape.factor_dims[factor] != ch.d)
        throw std::invalid_argument("apply_on_factor: factor dimension mismatch");

    // Identity (x) partial trace, re-embedded at the channel factor.
    std::vector<int> keep;
    for (std::size_t f = 0; f < shape.num_factors(); ++f)
        if (static_cast<int>(f) != factor) keep.push_back(static_cast<int>(f));
    ComplexMatrix pt = qlinalg::partial_trace(x, shape, keep);

    const auto& dims = shape.factor_dims;
    std::vector<Eigen::Index> strides(dims.size());
    Eigen::Index s = 1;
    for (std::size_t f = dims.size(); f-- > 0;) {
        strides[f] = s;
        s *= dims[f];
    }
    const Eigen::Index n = shape.total_dim();
    const Eigen::Index d = dims[factor];
    const Eigen::Index stride = strides[factor];
    std::vector<Eigen::Index> comp(n), rest(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        comp[i] = (i / stride) % d;
        Eigen::Index r = 0;
        for (int f : keep) r = r * dims[f] + (i / strides[f]) % dims[f];
        rest[i] = r;
    }

    ComplexMatrix embedded(n, n);
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = 0; i < n; ++i)
            embedded(i, j) = (comp[i] == comp[j]) ? pt(rest[i], rest[j]) : Complex(0, 0);

    ComplexMatrix x_pt = qlinalg::partial_transpose(x, shape, factor);
    return ch.lambda * x + (1.0 - ch.lambda) / (ch.d - 1) * (embedded - x_pt);
}

double max_output_2norm_sq(const DwhChannel& ch) {
    return ((ch.d - 2) * ch.lambda * ch.lambda + 1.0) / (ch.d - 1);
}

ComplexVector max_norm_attaining_state(const DwhChannel& ch) {
    ComplexVector psi = ComplexVector::Zero(ch.d);
    psi(0) = Complex(1.0 / std::sqrt(2.0), 0.0);
    psi(1) = Complex(0.0, 1.0 / std::sqrt(2.0));
    return psi;
}

double tensor_output_2norm_sq(const DwhChannel& ch, const ComplexVector& psi) {
    const int d = ch.d;
    ComplexMatrix m = fold(psi, d);
    ComplexMatrix rho1 = m * m.adjoint();
    ComplexMatrix rho2 = m.transpose() * m.conjugate();

    // <psi|conj(psi)> = conj(sum_k psi_k^2)
    Complex sum_sq(0, 0);
    for (Eigen::Index k = 0; k < psi.size(); ++k) sum_sq += psi(k) * psi(k);
    const double overlap_sq = std::norm(sum_sq);

    const double w2 = max_output_2norm_sq(ch);
    const double q = ch.Q(), r = ch.R(), s = ch.S();
    const double rho1_2sq = rho1.squaredNorm();
    const double cross =
        ((rho1 * rho1.transpose()).trace() + (rho2 * rho2.transpose()).trace()).real();

    return w2 * w2 + s * s * overlap_sq -
           2.0 * (s + r * r) * (s + (d - 2) * q * q) * (1.0 - rho1_2sq) - s * w2 * cross;
}

double tensor_output_2norm_sq_direct(const DwhChannel& ch, const ComplexVector& psi) {
    const int d = ch.d;
    TensorShape shape{static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d)};
    ComplexMatrix rho = psi * psi.adjoint();
    ComplexMatrix out = apply_on_factor(ch, apply_on_factor(ch, rho, shape, 0), shape, 1);
    return out.squaredNorm();
}

MultGapRecord mult_gap(const DwhChannel& ch, const ComplexVector& psi) {
    MultGapRecord rec{};
    rec.input = psi;
    rec.single_norm_sq = max_output_2norm_sq(ch);
    rec.tensor_norm_sq = tensor_output_2norm_sq(ch, psi);
    rec.gap = rec.single_norm_sq * rec.single_norm_sq - rec.tensor_norm_sq;
    return rec;
}

MultSearchResult mult_search(const DwhChannel& ch, int restarts, int steps, std::uint64_t seed) {
    const Eigen::Index n = static_cast<Eigen::Index>(ch.d) * ch.d;
    CounterRng rng(seed, /*stream=*/0x6d756c74ULL);
    MultSearchResult best{-1e300, ComplexVector()};

    for (int restart = 0; restart < restarts; ++restart) {
        ComplexVector psi(n);
        for (Eigen::Index i = 0; i < n; ++i) psi(i) = rng.cgaussian();
        psi.normalize();
        double value = tensor_output_2norm_sq(ch, psi);
        double sigma = 0.3;

        for (int it = 0; it < steps; ++it) {
            ComplexVector cand = psi;
            for (Eigen::Index i = 0; i < n; ++i) cand(i) += sigma * rng.cgaussian();
            cand.normalize();
            const double v = tensor_output_2norm_sq(ch, cand);
            if (v > value) {
                value = v;
                psi = std::move(cand);
                sigma = std::min(sigma * 1.1, 1.0);
            } else {
                sigma = std::max(sigma * 0.98, 1e-4);
            }
        }
        if (value > best.best_tensor_norm_sq) {
            best.best_tensor_norm_sq = value;
            best.argmax = psi;
        }
    }
    return best;
}

double conjugate_pair_norm(const DwhChannel& ch, const RealVector& sigma) {
    if (sigma.size() > ch.d)
        throw std::invalid_argument("conjugate_pair_norm: too many Schmidt coefficients");
    double sum = 0.0;
    for (Eigen::Index i = 0; i < sigma.size(); ++i) {
        if (sigma(i) < -1e-12)
            throw std::invalid_argument("conjugate_pair_norm: negative coefficient");
        sum += std::max(0.0, sigma(i));
    }
    if (std::abs(sum - 1.0) > 1e-10)
        throw std::invalid_argument("conjugate_pair_norm: coefficients must sum to 1");

    ComplexVector psi = ComplexVector::Zero(static_cast<Eigen::Index>(ch.d) * ch.d);
    for (Eigen::Index i = 0; i < sigma.size(); ++i)
        psi(i * ch.d + i) = std::sqrt(std::max(0.0, sigma(i)));
    psi.normalize();
    return tensor_output_2norm_sq(ch, psi);
}

EpResult ep_check(const DwhChannel& ch, const ComplexMatrix& basis) {
    const int d = ch.d;
    if (basis.rows() != d || basis.cols() != d)
        throw std::invalid_argument("ep_check: basis must be d x d");
    const double ortho =
        (basis.adjoint() * basis - ComplexMatrix::Identity(d, d)).cwiseAbs().maxCoeff();
    if (ortho > 1e-10)
        throw std::invalid_argument("ep_check: basis not orthonormal (deviation " +
                                    std::to_string(ortho) + ")");

    const double q = ch.Q(), s = ch.S();
    const double diag_w = ch.lambda * ch.lambda + q * q;
    const double exch_w = s + (d - 2) * q * q;

    // Overlaps <e_i | conj(e_k)> in the standard basis.
    ComplexMatrix overlap = basis.adjoint() * basis.conjugate();

    EpResult res{};
    res.satisfied = true;
    res.min_entry = 1e300;
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            for (int k = 0; k < d; ++k)
                for (int l = 0; l < d; ++l) {
                    Complex v = -s * overlap(i, k) * std::conj(overlap(j, l));
                    if (i == j && k == l) v += diag_w;
                    if (i == l && j == k) v += exch_w;
                    const double entry = v.real();
                    if (entry < res.min_entry) {
                        res.min_entry = entry;
                        res.witness[0] = i;
                        res.witness[1] = j;
                        res.witness[2] = k;
                        res.witness[3] = l;
                    }
                }
    res.satisfied = res.min_entry >= -1e-12;
    return res;
}

}  // namespace gent::channels
