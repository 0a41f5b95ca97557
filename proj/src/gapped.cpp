#include "gent/gapped.hpp"

#include "gent/rng.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

namespace gent::gapped {

namespace {

template <class Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <class Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

// ----------------------------------------------------------------------------
// Index bookkeeping
// ----------------------------------------------------------------------------

std::vector<Eigen::Index> strides_of(const TensorShape& shape) {
    const auto& dims = shape.factor_dims;
    std::vector<Eigen::Index> strides(dims.size());
    Eigen::Index s = 1;
    for (std::size_t f = dims.size(); f-- > 0;) {
        strides[f] = s;
        s *= dims[f];
    }
    return strides;
}

std::vector<int> complement_sites(const TensorShape& shape, const std::vector<int>& sites) {
    std::vector<int> out;
    for (int f = 0; f < static_cast<int>(shape.num_factors()); ++f)
        if (!std::binary_search(sites.begin(), sites.end(), f)) out.push_back(f);
    return out;
}

// Composite offsets of a sorted factor group: the k-th entry is the full-space
// offset of the k-th group basis index (first listed factor most significant).
std::vector<Eigen::Index> group_offsets(const TensorShape& shape, const std::vector<int>& sites) {
    const auto strides = strides_of(shape);
    Eigen::Index count = 1;
    for (int f : sites) count *= shape.factor_dims[f];
    std::vector<Eigen::Index> off(count, 0);
    Eigen::Index repeat = count;
    for (int f : sites) {
        const Eigen::Index d = shape.factor_dims[f];
        repeat /= d;
        Eigen::Index idx = 0;
        while (idx < count)
            for (Eigen::Index c = 0; c < d; ++c)
                for (Eigen::Index r = 0; r < repeat; ++r) off[idx++] += c * strides[f];
    }
    return off;
}

template <class Scalar>
Mat<Scalar> cast_complex(const ComplexMatrix& m) {
    if constexpr (std::is_same_v<Scalar, double>)
        return m.real();
    else
        return m;
}

// target += factor * (op embedded on `sites`, identity elsewhere)
template <class Scalar>
void embed_add(Mat<Scalar>& target, const Mat<Scalar>& op, const std::vector<int>& sites,
               const TensorShape& shape, double factor = 1.0) {
    const auto sub = group_offsets(shape, sites);
    const auto rest = group_offsets(shape, complement_sites(shape, sites));
    const Eigen::Index ds = static_cast<Eigen::Index>(sub.size());
    for (Eigen::Index b = 0; b < ds; ++b)
        for (Eigen::Index a = 0; a < ds; ++a) {
            const Scalar v = Scalar(factor) * op(a, b);
            if (v == Scalar(0)) continue;
            for (Eigen::Index t : rest) target(sub[a] + t, sub[b] + t) += v;
        }
}

template <class Scalar>
Mat<Scalar> embed_dense(const Mat<Scalar>& op, const std::vector<int>& sites,
                        const TensorShape& shape) {
    Mat<Scalar> out = Mat<Scalar>::Zero(shape.total_dim(), shape.total_dim());
    embed_add(out, op, sites, shape);
    return out;
}

// Reduced density matrix of |psi> on the sorted site group.
template <class Scalar>
Mat<Scalar> reduced_density(const Vec<Scalar>& psi, const TensorShape& shape,
                            const std::vector<int>& sites) {
    const auto sub = group_offsets(shape, sites);
    const auto rest = group_offsets(shape, complement_sites(shape, sites));
    Mat<Scalar> m(static_cast<Eigen::Index>(sub.size()), static_cast<Eigen::Index>(rest.size()));
    for (std::size_t t = 0; t < rest.size(); ++t)
        for (std::size_t a = 0; a < sub.size(); ++a)
            m(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(t)) = psi(sub[a] + rest[t]);
    return m * m.adjoint();
}

// Partial trace over the complement of `keep` (sorted), scalar-generic.
template <class Scalar>
Mat<Scalar> partial_trace_scalar(const Mat<Scalar>& m, const TensorShape& shape,
                                 const std::vector<int>& keep) {
    const auto sub = group_offsets(shape, keep);
    const auto rest = group_offsets(shape, complement_sites(shape, keep));
    const Eigen::Index dk = static_cast<Eigen::Index>(sub.size());
    Mat<Scalar> out = Mat<Scalar>::Zero(dk, dk);
    for (Eigen::Index c = 0; c < dk; ++c)
        for (Eigen::Index r = 0; r < dk; ++r) {
            Scalar acc(0);
            for (Eigen::Index t : rest) acc += m(sub[r] + t, sub[c] + t);
            out(r, c) = acc;
        }
    return out;
}

// ----------------------------------------------------------------------------
// Model helpers
// ----------------------------------------------------------------------------

TensorShape window_shape(const SpinChainModel& model, const std::vector<int>& window) {
    std::vector<Eigen::Index> dims;
    for (int s : window) dims.push_back(model.local_dims[s]);
    return TensorShape(dims);
}

// Term ids whose support lies inside the sorted site set.
std::vector<int> terms_within(const SpinChainModel& model, const std::vector<int>& sites) {
    std::vector<int> ids;
    for (std::size_t t = 0; t < model.terms.size(); ++t) {
        bool inside = true;
        for (int s : model.terms[t].sites)
            if (!std::binary_search(sites.begin(), sites.end(), s)) inside = false;
        if (inside) ids.push_back(static_cast<int>(t));
    }
    return ids;
}

// Dense operator on the window spanned by `window` (sorted sites), summing the
// listed terms; every term must be supported inside the window.
template <class Scalar>
Mat<Scalar> build_local_op(const SpinChainModel& model, const std::vector<int>& term_ids,
                           const std::vector<int>& window) {
    const TensorShape wshape = window_shape(model, window);
    Mat<Scalar> out = Mat<Scalar>::Zero(wshape.total_dim(), wshape.total_dim());
    for (int id : term_ids) {
        const Term& term = model.terms[id];
        std::vector<int> pos;
        for (int s : term.sites) {
            auto it = std::lower_bound(window.begin(), window.end(), s);
            if (it == window.end() || *it != s)
                throw std::logic_error("build_local_op: term escapes its window");
            pos.push_back(static_cast<int>(it - window.begin()));
        }
        Mat<Scalar> block = cast_complex<Scalar>(term.op);
        embed_add(out, block, pos, wshape);
    }
    return out;
}

void eig_dispatch(const RealMatrix& m, RealVector& vals, RealMatrix& vecs) {
    auto r = qlinalg::eig_symmetric(m);
    vals = std::move(r.values);
    vecs = std::move(r.vectors);
}

void eig_dispatch(const ComplexMatrix& m, RealVector& vals, ComplexMatrix& vecs) {
    auto r = qlinalg::eig_hermitian(m);
    vals = std::move(r.values);
    vecs = std::move(r.vectors);
}

// Gaussian filter in a given eigenbasis: elementwise kernel on the rotated op.
template <class Scalar>
Mat<Scalar> filter_with_basis(const Mat<Scalar>& vecs, const RealVector& vals,
                              const Mat<Scalar>& op, double alpha) {
    Mat<Scalar> t = vecs.adjoint() * op * vecs;
    for (Eigen::Index n = 0; n < t.cols(); ++n)
        for (Eigen::Index m = 0; m < t.rows(); ++m) {
            const double d = vals(m) - vals(n);
            t(m, n) *= std::exp(-d * d / (4.0 * alpha));
        }
    return vecs * t * vecs.adjoint();
}

// Largest singular value of the implicit operator given by matvec / adjoint
// matvec, via power iteration on M^dag M.
template <class Scalar, class MV, class MVA>
double largest_singular_value(Eigen::Index dim, MV&& mv, MVA&& mva,
                              std::uint64_t seed = 0x6e6f726dULL, int max_iters = 1000,
                              double tol = 1e-12) {
    CounterRng rng(seed, 0x706f7765ULL);
    Vec<Scalar> v(dim);
    for (Eigen::Index i = 0; i < dim; ++i) {
        if constexpr (std::is_same_v<Scalar, double>)
            v(i) = rng.gaussian();
        else
            v(i) = rng.cgaussian();
    }
    v.normalize();
    double prev = -1.0;
    for (int it = 0; it < max_iters; ++it) {
        Vec<Scalar> w = mv(v);
        const double s = w.norm();
        if (s == 0.0) return 0.0;
        Vec<Scalar> u = mva(w);
        const double nu = u.norm();
        if (nu == 0.0) return s;
        v = u / nu;
        if (std::abs(s - prev) <= tol * std::max(1.0, s)) return s;
        prev = s;
    }
    return prev;
}

template <class Scalar>
double dense_op_norm(const Mat<Scalar>& m, std::uint64_t seed = 0x6e6f726dULL) {
    return largest_singular_value<Scalar>(
        m.rows(), [&](const Vec<Scalar>& v) -> Vec<Scalar> { return m * v; },
        [&](const Vec<Scalar>& v) -> Vec<Scalar> { return m.adjoint() * v; }, seed);
}

// ----------------------------------------------------------------------------
// Sets on the chain
// ----------------------------------------------------------------------------

int set_distance(int x, const std::vector<int>& s) {
    int best = std::numeric_limits<int>::max();
    for (int y : s) best = std::min(best, std::abs(x - y));
    return best;
}

// Sites of `s` (sorted) having a chain neighbor outside `s`.
std::vector<int> set_boundary(const std::vector<int>& s, int n) {
    std::vector<int> out;
    for (int x : s) {
        bool edge = false;
        for (int y : {x - 1, x + 1})
            if (y >= 0 && y < n && !std::binary_search(s.begin(), s.end(), y)) edge = true;
        if (edge) out.push_back(x);
    }
    return out;
}

std::vector<int> ball_around(const std::vector<int>& centers, int radius, int n) {
    std::vector<int> out;
    for (int x = 0; x < n; ++x)
        if (!centers.empty() && set_distance(x, centers) <= radius) out.push_back(x);
    return out;
}

std::vector<std::vector<int>> contiguous_runs(const std::vector<int>& sites) {
    std::vector<std::vector<int>> runs;
    for (int s : sites) {
        if (runs.empty() || runs.back().back() + 1 != s) runs.emplace_back();
        runs.back().push_back(s);
    }
    return runs;
}

// ----------------------------------------------------------------------------
// Term partition I / B / E
// ----------------------------------------------------------------------------

struct TermPartition {
    std::vector<int> interior, buffer, exterior;
};

TermPartition partition_terms(const SpinChainModel& model, const RegionSplit& split) {
    auto touches = [](const Term& t, const std::vector<int>& set) {
        for (int s : t.sites)
            if (std::binary_search(set.begin(), set.end(), s)) return true;
        return false;
    };
    auto inside = [](const Term& t, const std::vector<int>& set) {
        for (int s : t.sites)
            if (!std::binary_search(set.begin(), set.end(), s)) return false;
        return true;
    };
    TermPartition out;
    for (std::size_t i = 0; i < model.terms.size(); ++i) {
        const Term& t = model.terms[i];
        if (touches(t, split.interior))
            out.interior.push_back(static_cast<int>(i));
        else if (inside(t, split.buffer))
            out.buffer.push_back(static_cast<int>(i));
        else if (touches(t, split.exterior))
            out.exterior.push_back(static_cast<int>(i));
        else
            throw std::logic_error("partition_terms: term fits no class");
    }
    return out;
}

// Ground-state expectation of a sum of terms, via per-term reduced densities.
double terms_expectation(const SpectralData& spec, const SpinChainModel& model,
                         const std::vector<int>& ids) {
    double e = 0.0;
    for (int id : ids) {
        const Term& term = model.terms[id];
        ComplexMatrix rho = reduced_density<Complex>(spec.ground_state.vec, spec.shape, term.sites);
        e += (rho * term.op).trace().real();
    }
    return e;
}

// ----------------------------------------------------------------------------
// Gauss-Hermite machinery
// ----------------------------------------------------------------------------

// Nodes and normalized weights (w_k / sqrt(pi)) via the Golub-Welsch
// tridiagonal eigenproblem.
void gauss_hermite(int k, RealVector& nodes, RealVector& wnorm) {
    RealVector d = RealVector::Zero(k);
    RealVector e(std::max(k - 1, 1));
    for (int i = 0; i + 1 < k; ++i) e(i) = std::sqrt((i + 1) / 2.0);
    RealMatrix z(k, k);
    lapack_int info =
        LAPACKE_dstev(LAPACK_COL_MAJOR, 'V', k, d.data(), e.data(), z.data(), k);
    if (info != 0) throw std::runtime_error("dstev failed, info=" + std::to_string(info));
    nodes = d;
    wnorm.resize(k);
    for (int i = 0; i < k; ++i) wnorm(i) = z(0, i) * z(0, i);
}

// Quadrature kernel K(m, n) ~= exp(-(a_m - b_n)^2 / 4 alpha) as the
// Gauss-Hermite sum sum_k (w_k / sqrt(pi)) cos((a_m - b_n) x_k / sqrt(alpha)),
// assembled from rank-one updates: K = C_a W C_b^T + S_a W S_b^T.
RealMatrix gh_kernel(const RealVector& a, const RealVector& b, double alpha, int k) {
    RealVector x, w;
    gauss_hermite(k, x, w);
    const double inv = 1.0 / std::sqrt(alpha);
    RealMatrix ca(a.size(), k), sa(a.size(), k), cb(b.size(), k), sb(b.size(), k);
    for (int j = 0; j < k; ++j) {
        const double f = x(j) * inv;
        ca.col(j) = (a.array() * f).cos();
        sa.col(j) = (a.array() * f).sin();
        cb.col(j) = (b.array() * f).cos() * w(j);
        sb.col(j) = (b.array() * f).sin() * w(j);
    }
    return ca * cb.transpose() + sa * sb.transpose();
}

// ----------------------------------------------------------------------------
// Pauli / spin building blocks
// ----------------------------------------------------------------------------

ComplexMatrix pauli_x() {
    ComplexMatrix m(2, 2);
    m << 0, 1, 1, 0;
    return m;
}
ComplexMatrix pauli_z() {
    ComplexMatrix m(2, 2);
    m << 1, 0, 0, -1;
    return m;
}
ComplexMatrix pauli_y() {
    ComplexMatrix m(2, 2);
    m << Complex(0, 0), Complex(0, -1), Complex(0, 1), Complex(0, 0);
    return m;
}

// sum_a S_a (x) S_a for the spin matrices passed in.
ComplexMatrix dot_coupling(const std::vector<ComplexMatrix>& spin) {
    const Eigen::Index d = spin[0].rows();
    ComplexMatrix out = ComplexMatrix::Zero(d * d, d * d);
    for (const auto& s : spin) out += qlinalg::kron(s, s);
    return out;
}

std::vector<ComplexMatrix> spin_one_matrices() {
    const double r = 1.0 / std::sqrt(2.0);
    ComplexMatrix sx = ComplexMatrix::Zero(3, 3), sy = ComplexMatrix::Zero(3, 3),
                  sz = ComplexMatrix::Zero(3, 3);
    sx(0, 1) = sx(1, 0) = sx(1, 2) = sx(2, 1) = r;
    sy(0, 1) = Complex(0, -r);
    sy(1, 0) = Complex(0, r);
    sy(1, 2) = Complex(0, -r);
    sy(2, 1) = Complex(0, r);
    sz(0, 0) = 1;
    sz(2, 2) = -1;
    return {sx, sy, sz};
}

double param_or(const std::map<std::string, double>& params, const std::string& key,
                double fallback) {
    auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
}

void finalize_model(SpinChainModel& model) {
    model.coupling_j = 0.0;
    model.is_real = true;
    for (auto& term : model.terms) {
        const double herm = (term.op - term.op.adjoint()).cwiseAbs().maxCoeff();
        if (herm > 1e-10) throw std::invalid_argument("model term is not Hermitian");
        model.coupling_j =
            std::max(model.coupling_j, qlinalg::eigvals_hermitian(term.op).cwiseAbs().maxCoeff());
        if (term.op.imag().cwiseAbs().maxCoeff() > 1e-13) model.is_real = false;
    }
    check_dim_cap(model.total_dim(), "SpinChainModel");
}

RealMatrix hamiltonian_real(const SpinChainModel& model) {
    const TensorShape shape = model.shape();
    RealMatrix h = RealMatrix::Zero(shape.total_dim(), shape.total_dim());
    for (const auto& term : model.terms) {
        RealMatrix block = term.op.real();
        embed_add(h, block, term.sites, shape);
    }
    return h;
}

}  // namespace

// ============================================================================
// Models
// ============================================================================

SpinChainModel build_model(const std::string& name, int n,
                           const std::map<std::string, double>& params) {
    if (n < 2) throw std::invalid_argument("build_model: need at least 2 sites");
    SpinChainModel model;
    model.n_sites = n;

    if (name == "tfim") {
        const double h = param_or(params, "h", 1.0);
        model.local_dims.assign(n, 2);
        const ComplexMatrix bond = -qlinalg::kron(pauli_z(), pauli_z());
        for (int i = 0; i + 1 < n; ++i) model.terms.push_back({{i, i + 1}, bond});
        const ComplexMatrix field = -h * pauli_x();
        for (int i = 0; i < n; ++i) model.terms.push_back({{i}, field});
    } else if (name == "heisenberg") {
        model.local_dims.assign(n, 2);
        const ComplexMatrix bond = 0.25 * dot_coupling({pauli_x(), pauli_y(), pauli_z()});
        for (int i = 0; i + 1 < n; ++i) model.terms.push_back({{i, i + 1}, bond});
    } else if (name == "aklt") {
        model.local_dims.assign(n, 3);
        const ComplexMatrix ss = dot_coupling(spin_one_matrices());
        const ComplexMatrix bond = 0.5 * ss + (ss * ss) / 6.0 +
                                   ComplexMatrix::Identity(9, 9) / 3.0;
        for (int i = 0; i + 1 < n; ++i) model.terms.push_back({{i, i + 1}, bond});
    } else if (name == "paramagnet") {
        const double h = param_or(params, "h", 1.0);
        model.local_dims.assign(n, 2);
        const ComplexMatrix field = -h * pauli_x();
        for (int i = 0; i < n; ++i) model.terms.push_back({{i}, field});
    } else if (name == "classical-ising") {
        const double h = param_or(params, "h", 0.5);
        model.local_dims.assign(n, 2);
        const ComplexMatrix bond = -qlinalg::kron(pauli_z(), pauli_z());
        for (int i = 0; i + 1 < n; ++i) model.terms.push_back({{i, i + 1}, bond});
        const ComplexMatrix field = -h * pauli_z();
        for (int i = 0; i < n; ++i) model.terms.push_back({{i}, field});
    } else {
        throw UnknownName("build_model: unknown model '" + name + "'");
    }

    finalize_model(model);
    return model;
}

ComplexMatrix hamiltonian(const SpinChainModel& model) {
    const TensorShape shape = model.shape();
    check_dim_cap(shape.total_dim(), "hamiltonian");
    ComplexMatrix h = ComplexMatrix::Zero(shape.total_dim(), shape.total_dim());
    for (const auto& term : model.terms) embed_add(h, term.op, term.sites, shape);
    return h;
}

ComplexMatrix embed_on_sites(const ComplexMatrix& op, const std::vector<int>& sites,
                             const TensorShape& shape) {
    if (!std::is_sorted(sites.begin(), sites.end()))
        throw std::invalid_argument("embed_on_sites: sites must be ascending");
    if (op.rows() != op.cols() || op.rows() != shape.dim_of(sites))
        throw std::invalid_argument("embed_on_sites: operator does not match site dims");
    return embed_dense(op, sites, shape);
}

// ============================================================================
// Spectral data
// ============================================================================

ComplexMatrix SpectralData::basis() const {
    return is_real ? ComplexMatrix(vectors_real.cast<Complex>()) : vectors_complex;
}

ComplexMatrix SpectralData::ground_projector() const {
    return ground_state.vec * ground_state.vec.adjoint();
}

ComplexMatrix SpectralData::to_eigenbasis(const ComplexMatrix& o) const {
    if (is_real) {
        const RealMatrix& u = vectors_real;
        RealMatrix re = u.transpose() * o.real() * u;
        RealMatrix im = u.transpose() * o.imag() * u;
        return re.cast<Complex>() + Complex(0, 1) * im.cast<Complex>();
    }
    return vectors_complex.adjoint() * o * vectors_complex;
}

ComplexMatrix SpectralData::from_eigenbasis(const ComplexMatrix& o) const {
    if (is_real) {
        const RealMatrix& u = vectors_real;
        RealMatrix re = u * o.real() * u.transpose();
        RealMatrix im = u * o.imag() * u.transpose();
        return re.cast<Complex>() + Complex(0, 1) * im.cast<Complex>();
    }
    return vectors_complex * o * vectors_complex.adjoint();
}

SpectralData diagonalize(const SpinChainModel& model) {
    check_dim_cap(model.total_dim(), "diagonalize");
    SpectralData out{RealVector(),
                     0.0,
                     0.0,
                     model.is_real,
                     RealMatrix(),
                     ComplexMatrix(),
                     PureState(ComplexVector::Unit(1, 0), TensorShape{1}),
                     model.shape()};
    if (model.is_real) {
        eig_dispatch(hamiltonian_real(model), out.eigenvalues, out.vectors_real);
    } else {
        eig_dispatch(hamiltonian(model), out.eigenvalues, out.vectors_complex);
    }
    out.ground_energy = out.eigenvalues(0);
    out.eigenvalues.array() -= out.ground_energy;
    out.gamma = out.eigenvalues(1);
    if (out.gamma < 1e-8)
        throw DegenerateGroundState("diagonalize: gap " + std::to_string(out.gamma) +
                                    " below degeneracy tolerance");
    ComplexVector gs = model.is_real ? ComplexVector(out.vectors_real.col(0).cast<Complex>())
                                     : ComplexVector(out.vectors_complex.col(0));
    gs /= gs.norm();
    out.ground_state = PureState(std::move(gs), model.shape());
    return out;
}

std::vector<EntropyCut> entropy_profile(const SpectralData& spec, const SpinChainModel& model) {
    std::vector<EntropyCut> out;
    const ComplexVector& psi = spec.ground_state.vec;
    Eigen::Index dl = 1;
    for (int m = 1; m < model.n_sites; ++m) {
        dl *= model.local_dims[m - 1];
        const Eigen::Index dr = psi.size() / dl;
        Eigen::Map<const Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
            fold(psi.data(), dl, dr);
        Eigen::BDCSVD<ComplexMatrix> svd(fold);
        const RealVector& s = svd.singularValues();
        double entropy = 0.0;
        for (Eigen::Index i = 0; i < s.size(); ++i) {
            const double p = s(i) * s(i);
            if (p > 0.0) entropy -= p * std::log(p);
        }
        out.push_back({m, entropy});
    }
    return out;
}

// ============================================================================
// Regions
// ============================================================================

RegionSplit region_split(const SpinChainModel& model, int a_lo, int a_hi, int ell) {
    const int n = model.n_sites;
    if (a_lo < 0 || a_hi >= n || a_lo > a_hi)
        throw std::invalid_argument("region_split: invalid interval");
    if (ell < 1) throw std::invalid_argument("region_split: ell must be >= 1");

    RegionSplit out;
    out.a_lo = a_lo;
    out.a_hi = a_hi;
    out.ell = ell;
    std::vector<int> a;
    for (int x = a_lo; x <= a_hi; ++x) a.push_back(x);
    out.boundary = set_boundary(a, n);

    for (int x = 0; x < n; ++x) {
        const bool in_a = (x >= a_lo && x <= a_hi);
        const bool near = !out.boundary.empty() && set_distance(x, out.boundary) <= ell;
        if (near) {
            out.buffer.push_back(x);
            (in_a ? out.buffer_in : out.buffer_out).push_back(x);
        } else if (in_a) {
            out.interior.push_back(x);
        } else {
            out.exterior.push_back(x);
        }
    }
    return out;
}

std::vector<int> enlarged_region(const SpinChainModel& model, int a_lo, int a_hi, int radius) {
    const int n = model.n_sites;
    if (a_lo < 0 || a_hi >= n || a_lo > a_hi)
        throw std::invalid_argument("enlarged_region: invalid interval");
    std::vector<int> a;
    for (int x = a_lo; x <= a_hi; ++x) a.push_back(x);
    return ball_around(set_boundary(a, n), radius, n);
}

// ============================================================================
// Filtering and surrogates
// ============================================================================

ComplexMatrix gaussian_filter(const SpectralData& spec, const ComplexMatrix& o, double alpha) {
    if (alpha <= 0.0) throw std::invalid_argument("gaussian_filter: alpha must be positive");
    if (o.rows() != spec.dim() || o.cols() != spec.dim())
        throw std::invalid_argument("gaussian_filter: dimension mismatch");
    ComplexMatrix t = spec.to_eigenbasis(o);
    for (Eigen::Index n = 0; n < t.cols(); ++n)
        for (Eigen::Index m = 0; m < t.rows(); ++m) {
            const double d = spec.eigenvalues(m) - spec.eigenvalues(n);
            t(m, n) *= std::exp(-d * d / (4.0 * alpha));
        }
    return spec.from_eigenbasis(t);
}

HamiltonianSplit hamiltonian_split(const SpinChainModel& model, const RegionSplit& split) {
    const TensorShape shape = model.shape();
    const TermPartition parts = partition_terms(model, split);
    const Eigen::Index dim = shape.total_dim();

    auto assemble = [&](const std::vector<int>& ids) {
        ComplexMatrix h = ComplexMatrix::Zero(dim, dim);
        for (int id : ids) embed_add(h, model.terms[id].op, model.terms[id].sites, shape);
        return h;
    };

    HamiltonianSplit out;
    out.h_interior = assemble(parts.interior);
    out.h_buffer = assemble(parts.buffer);
    out.h_exterior = assemble(parts.exterior);

    ComplexMatrix h = hamiltonian(model);
    auto comm_norm = [&](const ComplexMatrix& x) {
        ComplexMatrix c = h * x - x * h;
        return dense_op_norm(c);
    };
    out.comm_interior = comm_norm(out.h_interior);
    out.comm_buffer = comm_norm(out.h_buffer);
    out.comm_exterior = comm_norm(out.h_exterior);

    const double jj = 8.0 * model.coupling_j * model.coupling_j;  // lattice dimension 1
    const double di = static_cast<double>(set_boundary(split.interior, model.n_sites).size());
    const double de = static_cast<double>(set_boundary(split.exterior, model.n_sites).size());
    out.bound_interior = jj * di;
    out.bound_exterior = jj * de;
    out.bound_buffer = jj * (di + de);
    return out;
}

FilteredEnergyBound filtered_energy_bound(const SpectralData& spec, const ComplexMatrix& h_x,
                                          double alpha) {
    if (alpha <= 0.0) throw std::invalid_argument("filtered_energy_bound: alpha must be positive");
    ComplexMatrix t = spec.to_eigenbasis(h_x);
    const Complex shift = t(0, 0);
    t.diagonal().array() -= shift;

    double lhs_sq = 0.0;
    for (Eigen::Index m = 0; m < t.rows(); ++m) {
        const double e = spec.eigenvalues(m);
        lhs_sq += std::norm(t(m, 0)) * std::exp(-e * e / (2.0 * alpha));
    }

    // ||[H, H_X]|| from the eigenbasis representation: (E_m - E_n) * t(m, n).
    ComplexMatrix c = t;
    for (Eigen::Index n = 0; n < c.cols(); ++n)
        for (Eigen::Index m = 0; m < c.rows(); ++m)
            c(m, n) *= spec.eigenvalues(m) - spec.eigenvalues(n);
    const double comm = dense_op_norm(c);

    FilteredEnergyBound out;
    out.lhs = std::sqrt(lhs_sq);
    out.commutator_norm = comm;
    out.rhs = comm * std::exp(-spec.gamma * spec.gamma / (4.0 * alpha)) / spec.gamma;
    return out;
}

namespace {

// Filter the listed terms under the dynamics generated by all model terms
// inside `region` (a union of contiguous runs); returns the full-space
// embedding accumulated into `target`. Every filtered term must fit inside a
// single run. When a run spans the whole chain, the precomputed spectral data
// is reused as the generator eigenbasis.
template <class Scalar>
void add_filtered_part(Mat<Scalar>& target, const SpinChainModel& model, const SpectralData& spec,
                       const std::vector<int>& region, const std::vector<int>& op_term_ids,
                       double alpha) {
    const TensorShape shape = model.shape();
    for (const auto& run : contiguous_runs(region)) {
        std::vector<int> ids;
        for (int id : op_term_ids) {
            const Term& t = model.terms[id];
            const bool first_in = std::binary_search(run.begin(), run.end(), t.sites.front());
            bool all_in = true;
            for (int s : t.sites)
                if (!std::binary_search(run.begin(), run.end(), s)) all_in = false;
            if (first_in && !all_in)
                throw std::logic_error("add_filtered_part: term straddles runs");
            if (all_in) ids.push_back(id);
        }
        if (ids.empty()) continue;
        Mat<Scalar> op = build_local_op<Scalar>(model, ids, run);

        Mat<Scalar> filtered;
        if (static_cast<int>(run.size()) == model.n_sites) {
            // Generator is the full Hamiltonian: reuse the global eigenbasis.
            Mat<Scalar> vecs;
            if constexpr (std::is_same_v<Scalar, double>)
                vecs = spec.vectors_real;
            else
                vecs = spec.is_real ? Mat<Scalar>(spec.vectors_real.cast<Complex>())
                                    : spec.vectors_complex;
            filtered = filter_with_basis(vecs, spec.eigenvalues, op, alpha);
        } else {
            Mat<Scalar> gen = build_local_op<Scalar>(model, terms_within(model, run), run);
            RealVector vals;
            Mat<Scalar> vecs;
            eig_dispatch(gen, vals, vecs);
            filtered = filter_with_basis(vecs, vals, op, alpha);
        }
        embed_add(target, filtered, run, shape);
    }
}

}  // namespace

LocalSurrogates local_surrogates(const SpinChainModel& model, const SpectralData& spec,
                                 const RegionSplit& split, double alpha) {
    if (alpha <= 0.0) throw std::invalid_argument("local_surrogates: alpha must be positive");
    const TensorShape shape = model.shape();
    const Eigen::Index dim = shape.total_dim();
    const TermPartition parts = partition_terms(model, split);

    std::vector<int> a_sites, comp_sites;
    for (int x = 0; x < model.n_sites; ++x)
        (x >= split.a_lo && x <= split.a_hi ? a_sites : comp_sites).push_back(x);
    const std::vector<int> b2 = ball_around(split.boundary, 2 * split.ell, model.n_sites);

    const double e_i = terms_expectation(spec, model, parts.interior);
    const double e_b = terms_expectation(spec, model, parts.buffer);
    const double e_e = terms_expectation(spec, model, parts.exterior);

    LocalSurrogates out;
    out.m_interior = ComplexMatrix::Zero(dim, dim);
    out.m_buffer = ComplexMatrix::Zero(dim, dim);
    out.m_exterior = ComplexMatrix::Zero(dim, dim);
    add_filtered_part(out.m_interior, model, spec, a_sites, parts.interior, alpha);
    add_filtered_part(out.m_buffer, model, spec, b2, parts.buffer, alpha);
    add_filtered_part(out.m_exterior, model, spec, comp_sites, parts.exterior, alpha);
    out.m_interior.diagonal().array() -= e_i;
    out.m_buffer.diagonal().array() -= e_b;
    out.m_exterior.diagonal().array() -= e_e;

    ComplexMatrix resid = hamiltonian(model) - (out.m_interior + out.m_buffer + out.m_exterior);
    resid.diagonal().array() -= spec.ground_energy;
    out.residual = dense_op_norm(resid);
    return out;
}

// ============================================================================
// Approximate ground-state projector
// ============================================================================

ModelConstants derived_constants(const SpinChainModel& model, double gamma, int ell,
                                 int boundary_size) {
    if (gamma <= 0.0) throw std::invalid_argument("derived_constants: gamma must be positive");
    if (ell < 1) throw std::invalid_argument("derived_constants: ell must be >= 1");
    ModelConstants k;
    const double j = model.coupling_j;
    k.v = 4.0 * j;  // 4 (2d - 1) J at lattice dimension d = 1
    k.xi_prime = 4.0 * (1.0 + (k.v / gamma) * (k.v / gamma));
    k.alpha = gamma * gamma * k.xi_prime / (4.0 * ell);
    k.big_d = 0.5;  // max(1/2, 2(d - 1))
    const double vsq = std::sqrt(gamma * gamma + k.v * k.v);
    k.c1 = (8.0 / (std::sqrt(M_PI) * vsq) + 2.0 * k.v / gamma + 432.0) * (2.0 * j) * (2.0 * j) /
           k.v;
    k.default_cutoff = k.c1 * boundary_size * std::pow(static_cast<double>(ell), k.big_d) *
                       std::exp(-ell / (2.0 * k.xi_prime));
    return k;
}

namespace {

template <class Scalar>
GsApproxResult gs_impl(const SpinChainModel& model, const SpectralData& spec,
                       const RegionSplit& split, const GsApproxOptions& opt) {
    using M = Mat<Scalar>;
    using V = Vec<Scalar>;
    const TensorShape shape = model.shape();
    const Eigen::Index dim = shape.total_dim();
    const int n = model.n_sites;

    if (split.boundary.empty())
        throw std::invalid_argument("gs_projector_approx: region has empty boundary");
    if (split.a_lo == 0 && split.a_hi == n - 1)
        throw std::invalid_argument("gs_projector_approx: region must have a complement");

    const ModelConstants consts = derived_constants(model, spec.gamma, split.ell,
                                                    static_cast<int>(split.boundary.size()));
    const double alpha = opt.alpha > 0.0 ? opt.alpha : consts.alpha;
    const double cutoff = opt.cutoff > 0.0 ? opt.cutoff : consts.default_cutoff;

    const TermPartition parts = partition_terms(model, split);
    const double e_i = terms_expectation(spec, model, parts.interior);
    const double e_b = terms_expectation(spec, model, parts.buffer);
    const double e_e = terms_expectation(spec, model, parts.exterior);

    std::vector<int> a_sites, l_sites, r_sites;
    for (int x = 0; x < n; ++x) {
        if (x < split.a_lo)
            l_sites.push_back(x);
        else if (x <= split.a_hi)
            a_sites.push_back(x);
        else
            r_sites.push_back(x);
    }
    const Eigen::Index dim_a = shape.dim_of(a_sites);
    const Eigen::Index dim_l = l_sites.empty() ? 1 : shape.dim_of(l_sites);
    const Eigen::Index dim_r = r_sites.empty() ? 1 : shape.dim_of(r_sites);

    V psi;
    if constexpr (std::is_same_v<Scalar, double>)
        psi = spec.vectors_real.col(0);
    else
        psi = spec.ground_state.vec;

    // --- M_I: H_I filtered under the dynamics of A; keep its eigensystem.
    M m_i;
    {
        M gen = build_local_op<Scalar>(model, terms_within(model, a_sites), a_sites);
        RealVector vals;
        M vecs;
        eig_dispatch(gen, vals, vecs);
        M op = build_local_op<Scalar>(model, parts.interior, a_sites);
        m_i = filter_with_basis(vecs, vals, op, alpha);
    }
    RealVector eps_i;
    M v_i;
    eig_dispatch(m_i, eps_i, v_i);

    // --- M_E: one filtered block per complement side; keep eigensystems.
    auto side_block = [&](const std::vector<int>& sites, RealVector& eps, M& vecs) {
        if (sites.empty()) {
            eps = RealVector::Zero(1);
            vecs = M::Identity(1, 1);
            return;
        }
        M gen = build_local_op<Scalar>(model, terms_within(model, sites), sites);
        RealVector gvals;
        M gvecs;
        eig_dispatch(gen, gvals, gvecs);
        std::vector<int> ids;
        for (int id : parts.exterior) {
            bool in = true;
            for (int s : model.terms[id].sites)
                if (!std::binary_search(sites.begin(), sites.end(), s)) in = false;
            if (in) ids.push_back(id);
        }
        M op = build_local_op<Scalar>(model, ids, sites);
        M filtered = filter_with_basis(gvecs, gvals, op, alpha);
        eig_dispatch(filtered, eps, vecs);
    };
    RealVector eps_l, eps_r;
    M v_l, v_r;
    side_block(l_sites, eps_l, v_l);
    side_block(r_sites, eps_r, v_r);
    {
        std::size_t covered = 0;
        for (int id : parts.exterior) {
            const int s0 = model.terms[id].sites.front();
            if (s0 < split.a_lo || s0 > split.a_hi) ++covered;
        }
        if (covered != parts.exterior.size())
            throw std::logic_error("gs_projector_approx: exterior term inside the region");
    }

    // --- M_I + M_B + M_E assembled densely, then diagonalized.
    RealVector lam_w;
    M w;
    {
        M m_sum = M::Zero(dim, dim);
        embed_add(m_sum, m_i, a_sites, shape);
        auto embed_side = [&](const std::vector<int>& sites, const RealVector& eps, const M& vecs) {
            if (sites.empty()) return;
            M block = vecs * eps.asDiagonal() * vecs.adjoint();
            embed_add(m_sum, block, sites, shape);
        };
        embed_side(l_sites, eps_l, v_l);
        embed_side(r_sites, eps_r, v_r);
        const std::vector<int> b2 = ball_around(split.boundary, 2 * split.ell, n);
        add_filtered_part(m_sum, model, spec, b2, parts.buffer, alpha);
        m_sum.diagonal().array() -= e_i + e_b + e_e;
        eig_dispatch(m_sum, lam_w, w);
    }

    // --- Eigensystem of M_I + M_E from the three factor blocks.
    M u;
    {
        M tmp = qlinalg::kron(M(v_l), M(v_i));
        u = qlinalg::kron(tmp, M(v_r));
    }
    RealVector lam_ie(dim);
    for (Eigen::Index i = 0; i < dim; ++i) {
        const Eigen::Index l = i / (dim_a * dim_r);
        const Eigen::Index a = (i / dim_r) % dim_a;
        const Eigen::Index r = i % dim_r;
        lam_ie(i) = eps_l(l) + eps_i(a) + eps_r(r) - (e_i + e_e);
    }

    // --- Spectral projections below the cutoff.
    Eigen::Index sel_a = 0;
    while (sel_a < dim_a && eps_i(sel_a) - e_i < cutoff) ++sel_a;
    if (sel_a == 0) throw EmptyProjector("gs_projector_approx: P_A is zero at this cutoff");
    M pa_loc = v_i.leftCols(sel_a) * v_i.leftCols(sel_a).adjoint();

    Eigen::Index sel_lr = 0;
    RealVector ind = RealVector::Zero(dim);
    for (Eigen::Index l = 0; l < dim_l; ++l)
        for (Eigen::Index r = 0; r < dim_r; ++r) {
            if (eps_l(l) + eps_r(r) - e_e < cutoff) {
                ++sel_lr;
                for (Eigen::Index a = 0; a < dim_a; ++a)
                    ind((l * dim_a + a) * dim_r + r) = 1.0;
            }
        }
    if (sel_lr == 0) throw EmptyProjector("gs_projector_approx: P_E is zero at this cutoff");
    M pe;
    {
        M scaled = u;
        for (Eigen::Index j = 0; j < dim; ++j)
            if (ind(j) == 0.0) scaled.col(j).setZero();
        pe = scaled * u.adjoint();
    }

    // --- Boundary operator via Gauss-Hermite quadrature with node doubling.
    M p = w.adjoint() * u;
    RealMatrix kernel = gh_kernel(lam_w, lam_ie, alpha, opt.quad_nodes);
    int nodes_used = opt.quad_nodes;
    while (true) {
        const int next = nodes_used * 2;
        if (next > opt.quad_node_cap)
            throw QuadratureUnconverged(
                "gs_projector_approx: boundary operator not converged at " +
                std::to_string(nodes_used) + " nodes");
        RealMatrix refined = gh_kernel(lam_w, lam_ie, alpha, next);
        double delta_sq = 0.0;
        for (Eigen::Index j = 0; j < dim; ++j)
            delta_sq += (p.col(j).cwiseAbs2().array() *
                         (refined.col(j) - kernel.col(j)).array().square())
                            .sum();
        kernel.swap(refined);
        nodes_used = next;
        if (std::sqrt(delta_sq) <= opt.quad_tol) break;
    }
    M pb_alpha;
    {
        M mixed = p;
        for (Eigen::Index j = 0; j < dim; ++j)
            mixed.col(j) = mixed.col(j).cwiseProduct(kernel.col(j).template cast<Scalar>());
        pb_alpha = w * mixed * u.adjoint();
    }
    p.resize(0, 0);
    kernel.resize(0, 0);
    w.resize(0, 0);
    u.resize(0, 0);

    // --- Localization onto B(A; 3 ell): Haar average over the complement,
    // implemented as partial trace tensored with the normalized identity.
    const std::vector<int> b3 = ball_around(split.boundary, 3 * split.ell, n);
    M pb;
    if (static_cast<int>(b3.size()) == n) {
        pb = std::move(pb_alpha);
    } else {
        const std::vector<int> comp = complement_sites(shape, b3);
        const double dc = static_cast<double>(shape.dim_of(comp));
        M pt = partial_trace_scalar(pb_alpha, shape, b3) / Scalar(dc);
        pb_alpha.resize(0, 0);
        pb = embed_dense(pt, b3, shape);
    }

    // --- Norms and the final error.
    M pa = embed_dense(pa_loc, a_sites, shape);
    const double pb_norm = dense_op_norm(pb, 0x70626e6fULL);
    auto fwd = [&](const V& x) -> V {
        V t = pe * x;
        t = pa * t;
        t = pb * t;
        t -= psi * (psi.dot(x));
        return t;
    };
    auto adj = [&](const V& x) -> V {
        V t = pb.adjoint() * x;
        t = pa * t;
        t = pe * t;
        t -= psi * (psi.dot(x));
        return t;
    };
    const double error = largest_singular_value<Scalar>(dim, fwd, adj, 0x6572726fULL);

    GsApproxResult out;
    out.error = error;
    out.alpha = alpha;
    out.xi_prime = consts.xi_prime;
    out.cutoff = cutoff;
    out.c1 = consts.c1;
    out.v = consts.v;
    out.pb_norm = pb_norm;
    out.rank_pa = sel_a * (dim / dim_a);
    out.rank_pe = sel_lr * dim_a;
    out.quad_nodes_used = nodes_used;
    {
        M rho_a = reduced_density<Scalar>(psi, shape, a_sites);
        out.pa_expectation = std::real(Complex((rho_a * pa_loc).trace()));
    }
    if constexpr (std::is_same_v<Scalar, double>) {
        out.p_a = pa.template cast<Complex>();
        out.p_e = pe.template cast<Complex>();
        out.p_b = pb.template cast<Complex>();
    } else {
        out.p_a = std::move(pa);
        out.p_e = std::move(pe);
        out.p_b = std::move(pb);
    }
    return out;
}

}  // namespace

GsApproxResult gs_projector_approx(const SpinChainModel& model, const SpectralData& spec,
                                   const RegionSplit& split, const GsApproxOptions& options) {
    if (spec.dim() != model.total_dim())
        throw std::invalid_argument("gs_projector_approx: spectral data does not match model");
    if (model.is_real && spec.is_real) return gs_impl<double>(model, spec, split, options);
    return gs_impl<Complex>(model, spec, split, options);
}

CutoffDiagnostics cutoff_projector_diagnostics(const SpinChainModel& model,
                                               const SpectralData& spec, const RegionSplit& split,
                                               double cutoff, double alpha) {
    if (split.boundary.empty())
        throw std::invalid_argument("cutoff_projector_diagnostics: region has empty boundary");
    const TensorShape shape = model.shape();
    const int n = model.n_sites;
    const ModelConstants consts = derived_constants(model, spec.gamma, split.ell,
                                                    static_cast<int>(split.boundary.size()));
    CutoffDiagnostics out;
    out.alpha = alpha > 0.0 ? alpha : consts.alpha;
    out.cutoff = cutoff > 0.0 ? cutoff : consts.default_cutoff;
    out.xi_prime = consts.xi_prime;

    const TermPartition parts = partition_terms(model, split);
    const double e_i = terms_expectation(spec, model, parts.interior);
    const double e_e = terms_expectation(spec, model, parts.exterior);

    std::vector<int> a_sites, l_sites, r_sites;
    for (int x = 0; x < n; ++x) {
        if (x < split.a_lo)
            l_sites.push_back(x);
        else if (x <= split.a_hi)
            a_sites.push_back(x);
        else
            r_sites.push_back(x);
    }

    auto filtered_block = [&](const std::vector<int>& sites, const std::vector<int>& op_ids,
                              RealVector& eps, ComplexMatrix& vecs) {
        if (sites.empty()) {
            eps = RealVector::Zero(1);
            vecs = ComplexMatrix::Identity(1, 1);
            return;
        }
        ComplexMatrix gen = build_local_op<Complex>(model, terms_within(model, sites), sites);
        RealVector gvals;
        ComplexMatrix gvecs;
        eig_dispatch(gen, gvals, gvecs);
        std::vector<int> ids;
        for (int id : op_ids) {
            bool in = true;
            for (int s : model.terms[id].sites)
                if (!std::binary_search(sites.begin(), sites.end(), s)) in = false;
            if (in) ids.push_back(id);
        }
        ComplexMatrix op = build_local_op<Complex>(model, ids, sites);
        ComplexMatrix filtered = filter_with_basis(gvecs, gvals, op, out.alpha);
        eig_dispatch(filtered, eps, vecs);
    };

    RealVector eps_i, eps_l, eps_r;
    ComplexMatrix v_i, v_l, v_r;
    filtered_block(a_sites, parts.interior, eps_i, v_i);
    filtered_block(l_sites, parts.exterior, eps_l, v_l);
    filtered_block(r_sites, parts.exterior, eps_r, v_r);

    const Eigen::Index dim_a = eps_i.size(), dim_l = eps_l.size(), dim_r = eps_r.size();
    Eigen::Index sel_a = 0;
    while (sel_a < dim_a && eps_i(sel_a) - e_i < out.cutoff) ++sel_a;
    if (sel_a == 0)
        throw EmptyProjector("cutoff_projector_diagnostics: P_A is zero at this cutoff");
    {
        ComplexMatrix pa_loc = v_i.leftCols(sel_a) * v_i.leftCols(sel_a).adjoint();
        ComplexMatrix rho_a = reduced_density<Complex>(spec.ground_state.vec, shape, a_sites);
        out.pa_expectation = (rho_a * pa_loc).trace().real();
        out.rank_pa = sel_a * (shape.total_dim() / dim_a);
    }

    // P_E lives on the complement L (x) R (in ascending site order).
    ComplexMatrix u_lr = qlinalg::kron(v_l, v_r);
    Eigen::Index sel_lr = 0;
    for (Eigen::Index l = 0; l < dim_l; ++l)
        for (Eigen::Index r = 0; r < dim_r; ++r) {
            if (eps_l(l) + eps_r(r) - e_e < out.cutoff)
                ++sel_lr;
            else
                u_lr.col(l * dim_r + r).setZero();
        }
    if (sel_lr == 0)
        throw EmptyProjector("cutoff_projector_diagnostics: P_E is zero at this cutoff");
    {
        std::vector<int> comp = complement_sites(shape, a_sites);
        ComplexMatrix pe_loc = u_lr * u_lr.adjoint();
        ComplexMatrix rho_c = reduced_density<Complex>(spec.ground_state.vec, shape, comp);
        out.pe_expectation = (rho_c * pe_loc).trace().real();
        out.rank_pe = sel_lr * dim_a;
    }
    return out;
}

// ============================================================================
// Lieb-Robinson probe
// ============================================================================

LrProbeResult lr_probe(const SpinChainModel& model, const SpectralData& spec, int x, int y,
                       const ComplexMatrix& a_op, const ComplexMatrix& b_op,
                       const std::vector<double>& t_grid) {
    const int n = model.n_sites;
    if (x < 0 || x >= n || y < 0 || y >= n || x == y)
        throw std::invalid_argument("lr_probe: need two distinct sites on the chain");
    if (a_op.rows() != model.local_dims[x] || b_op.rows() != model.local_dims[y])
        throw std::invalid_argument("lr_probe: operator does not match its site dimension");
    const double na = qlinalg::op_norm(a_op);
    const double nb = qlinalg::op_norm(b_op);
    if (na > 1.0 + 1e-9 || nb > 1.0 + 1e-9)
        throw std::invalid_argument("lr_probe: probe operators must have norm <= 1");

    const TensorShape shape = model.shape();
    ComplexMatrix a_tilde = spec.to_eigenbasis(embed_on_sites(a_op, {x}, shape));
    ComplexMatrix b_tilde = spec.to_eigenbasis(embed_on_sites(b_op, {y}, shape));

    LrProbeResult out;
    out.v = 4.0 * model.coupling_j;
    out.mu = 0.25;
    out.t_star = std::numeric_limits<double>::quiet_NaN();
    const double dist = std::abs(x - y);
    const Eigen::Index dim = shape.total_dim();

    std::vector<double> grid = t_grid;
    std::sort(grid.begin(), grid.end());
    for (double t : grid) {
        ComplexVector phase(dim);
        for (Eigen::Index m = 0; m < dim; ++m)
            phase(m) = std::exp(Complex(0.0, spec.eigenvalues(m) * t));
        // A(t) v = D A D^dag v with D = diag(phase); never form A(t) densely.
        auto at_mul = [&](const ComplexVector& v) -> ComplexVector {
            return phase.asDiagonal() * (a_tilde * (phase.conjugate().asDiagonal() * v));
        };
        auto at_mul_adj = [&](const ComplexVector& v) -> ComplexVector {
            return phase.asDiagonal() * (a_tilde.adjoint() * (phase.conjugate().asDiagonal() * v));
        };
        auto comm = [&](const ComplexVector& v) -> ComplexVector {
            return at_mul(b_tilde * v) - b_tilde * at_mul(v);
        };
        auto comm_adj = [&](const ComplexVector& v) -> ComplexVector {
            return at_mul_adj(b_tilde.adjoint() * v) - b_tilde.adjoint() * at_mul_adj(v);
        };
        const double norm =
            largest_singular_value<Complex>(dim, comm, comm_adj, 0x6c72ULL, 400, 1e-9);

        LrRow row;
        row.t = t;
        row.norm = norm;
        row.bound = 2.0 * na * nb * std::exp(-out.mu * dist) * std::exp(out.v * std::abs(t));
        row.in_window = std::abs(t) <= std::exp(-(1.0 + out.mu)) * dist / out.v;
        out.rows.push_back(row);
        if (std::isnan(out.t_star) && norm > 0.1) out.t_star = t;
    }
    return out;
}

// ============================================================================
// Combinatorial and entropy lemmas
// ============================================================================

unsigned long long sphere_count(int n, int d) {
    if (n < 1 || d < 1) throw std::invalid_argument("sphere_count: need n >= 1 and d >= 1");
    static std::map<std::pair<int, int>, unsigned long long> memo;
    auto key = std::make_pair(n, d);
    auto it = memo.find(key);
    if (it != memo.end()) return it->second;
    unsigned long long result;
    if (n == 1)
        result = 2ULL * d;
    else if (d == 1)
        result = 2ULL;
    else
        result = sphere_count(n - 1, d) + sphere_count(n, d - 1) + sphere_count(n - 1, d - 1);
    memo[key] = result;
    return result;
}

EntropyBound entropy_bound_eval(const RealVector& sigma, const std::vector<long long>& schedule,
                                double c, double r) {
    if (!(c > 0.0 && c < 1.0))
        throw std::invalid_argument("entropy_bound_eval: c must lie in (0, 1)");
    if (schedule.empty() || schedule.front() <= 1)
        throw std::invalid_argument("entropy_bound_eval: schedule must start with s_1 > 1");
    for (std::size_t i = 0; i + 1 < schedule.size(); ++i) {
        if (schedule[i + 1] <= schedule[i])
            throw std::invalid_argument("entropy_bound_eval: schedule must increase");
        if (static_cast<double>(schedule[i + 1]) >
            r * static_cast<double>(schedule[i]) * (1.0 + 1e-12))
            throw std::invalid_argument("entropy_bound_eval: schedule ratio exceeds R");
    }
    if (schedule.back() < sigma.size())
        throw std::invalid_argument("entropy_bound_eval: schedule does not cover the support");

    double total = 0.0;
    for (Eigen::Index i = 0; i < sigma.size(); ++i) {
        if (sigma(i) < -1e-14)
            throw std::invalid_argument("entropy_bound_eval: negative probability");
        if (i > 0 && sigma(i) > sigma(i - 1) + 1e-12)
            throw std::invalid_argument("entropy_bound_eval: distribution must descend");
        total += sigma(i);
    }
    if (std::abs(total - 1.0) > 1e-10)
        throw std::invalid_argument("entropy_bound_eval: probabilities must sum to 1");

    for (std::size_t k = 0; k < schedule.size(); ++k) {
        double tail = 0.0;
        for (Eigen::Index i = static_cast<Eigen::Index>(schedule[k]); i < sigma.size(); ++i)
            tail += sigma(i);
        const double limit = std::pow(c, static_cast<double>(k + 1));
        if (tail > limit + 1e-12)
            throw ConstraintViolated("entropy_bound_eval: tail beyond s_" + std::to_string(k + 1) +
                                     " is " + std::to_string(tail) + " > c^n = " +
                                     std::to_string(limit));
    }

    EntropyBound out;
    out.entropy = 0.0;
    for (Eigen::Index i = 0; i < sigma.size(); ++i)
        if (sigma(i) > 0.0) out.entropy -= sigma(i) * std::log(sigma(i));
    const double h2 = -c * std::log(c) - (1.0 - c) * std::log(1.0 - c);
    out.bound = std::log(static_cast<double>(schedule.front())) + c / (1.0 - c) * std::log(r) +
                h2 / (1.0 - c);
    return out;
}

}  // namespace gent::gapped
