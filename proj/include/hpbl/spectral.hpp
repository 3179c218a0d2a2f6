#pragma once

#include <algorithm>
#include <numeric>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <unsupported/Eigen/MatrixFunctions>

#include "hpbl/types.hpp"

namespace hpbl {

template <typename Scalar>
struct RealOf {
    using type = Scalar;
};
template <typename T>
struct RealOf<std::complex<T>> {
    using type = T;
};

template <typename Derived>
using ComplexOf = std::complex<typename RealOf<typename Derived::Scalar>::type>;

template <typename Derived>
Mat<ComplexOf<Derived>> to_complex(const Eigen::MatrixBase<Derived>& m) {
    return m.template cast<ComplexOf<Derived>>();
}

template <typename Scalar>
struct EigResult {
    Vec<Scalar> values;
    Mat<Scalar> vectors;
};

template <typename Scalar>
struct SpectralSplitT {
    Vec<Scalar> eigenvalues;
    Mat<Scalar> stableBasis;
    Mat<Scalar> unstableBasis;
    Mat<Scalar> piMinus;
    Mat<Scalar> piPlus;
    typename RealOf<Scalar>::type gapWidth = 0;
};
using SpectralSplit = SpectralSplitT<Complex>;

template <typename Scalar>
struct SchurFormT {
    Mat<Scalar> T;  // upper triangular
    Mat<Scalar> Q;  // unitary, M = Q T Q*
};

inline constexpr Real kAxisTol = 1e-9;
inline constexpr Real kRankTol = 1e-10;

namespace detail {

template <typename Scalar>
bool lex_less(const Scalar& a, const Scalar& b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
}

template <typename Derived>
void require_square(const Eigen::MatrixBase<Derived>& m) {
    if (m.rows() != m.cols()) throw Error(ErrorKind::NonSquare, "matrix must be square");
}

template <typename Derived>
void require_finite(const Eigen::MatrixBase<Derived>& m) {
    if (!m.allFinite()) throw Error(ErrorKind::NumericalFailure, "matrix has non-finite entries");
}

}  // namespace detail

// Complex Schur form M = Q T Q*.
template <typename Derived>
SchurFormT<ComplexOf<Derived>> schur(const Eigen::MatrixBase<Derived>& M) {
    using C = ComplexOf<Derived>;
    detail::require_square(M);
    detail::require_finite(M);
    SchurFormT<C> out;
    if (M.rows() == 0) {
        out.T = Mat<C>(0, 0);
        out.Q = Mat<C>(0, 0);
        return out;
    }
    Eigen::ComplexSchur<Mat<C>> cs(to_complex(M));
    if (cs.info() != Eigen::Success) throw Error(ErrorKind::NumericalFailure, "Schur iteration did not converge");
    out.T = cs.matrixT().template triangularView<Eigen::Upper>();
    out.Q = cs.matrixU();
    return out;
}

// Swap the adjacent diagonal entries k, k+1 of the Schur form by a unitary rotation.
template <typename C>
void schur_swap(SchurFormT<C>& sf, Eigen::Index k) {
    const C t11 = sf.T(k, k), t22 = sf.T(k + 1, k + 1), t12 = sf.T(k, k + 1);
    if (t11 == t22) return;
    Eigen::JacobiRotation<C> G;
    G.makeGivens(t12, t22 - t11);
    sf.T.applyOnTheLeft(k, k + 1, G.adjoint());
    sf.T.applyOnTheRight(k, k + 1, G);
    sf.Q.applyOnTheRight(k, k + 1, G);
    sf.T(k + 1, k) = C(0);
    sf.T(k, k) = t22;
    sf.T(k + 1, k + 1) = t11;
}

// Move the diagonal entries flagged by `select` to the leading block, preserving relative order.
// Returns the size of the leading block.
template <typename C, typename Pred>
Eigen::Index schur_reorder(SchurFormT<C>& sf, Pred select) {
    const Eigen::Index n = sf.T.rows();
    Eigen::Index top = 0;
    for (Eigen::Index j = 0; j < n; ++j) {
        if (!select(sf.T(j, j))) continue;
        for (Eigen::Index k = j - 1; k >= top; --k) schur_swap(sf, k);
        ++top;
    }
    return top;
}

// Solves T11 X - X T22 = R for upper triangular T11, T22 with disjoint spectra.
template <typename C>
Mat<C> triangular_sylvester(const Mat<C>& T11, const Mat<C>& T22, const Mat<C>& R) {
    const Eigen::Index m = T11.rows(), n = T22.rows();
    Mat<C> X(m, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        Vec<C> rhs = R.col(j);
        for (Eigen::Index k = 0; k < j; ++k) rhs += X.col(k) * T22(k, j);
        Mat<C> A = T11;
        A.diagonal().array() -= T22(j, j);
        X.col(j) = A.template triangularView<Eigen::Upper>().solve(rhs);
    }
    return X;
}

// Eigen-decomposition sorted by (Re, Im) ascending.
template <typename Derived>
EigResult<ComplexOf<Derived>> eig(const Eigen::MatrixBase<Derived>& M) {
    using C = ComplexOf<Derived>;
    detail::require_square(M);
    detail::require_finite(M);
    EigResult<C> out;
    const Eigen::Index n = M.rows();
    if (n == 0) return out;
    Eigen::ComplexEigenSolver<Mat<C>> es(to_complex(M), true);
    if (es.info() != Eigen::Success) throw Error(ErrorKind::NumericalFailure, "eigenvalue iteration did not converge");
    std::vector<Eigen::Index> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    const auto& ev = es.eigenvalues();
    std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return detail::lex_less(ev(a), ev(b)); });
    out.values.resize(n);
    out.vectors.resize(n, n);
    for (Eigen::Index k = 0; k < n; ++k) {
        out.values(k) = ev(idx[k]);
        out.vectors.col(k) = es.eigenvectors().col(idx[k]);
    }
    return out;
}

template <typename Derived>
Vec<ComplexOf<Derived>> eigenvalues(const Eigen::MatrixBase<Derived>& M) {
    return eig(M).values;
}

// Orthonormal basis for the column span of V (assumed full column rank).
template <typename C>
Mat<C> orthonormalize(const Mat<C>& V) {
    if (V.cols() == 0) return Mat<C>(V.rows(), 0);
    Eigen::HouseholderQR<Mat<C>> qr(V);
    return qr.householderQ() * Mat<C>::Identity(V.rows(), V.cols());
}

// Stable / unstable invariant subspaces and spectral projectors.
template <typename Derived>
SpectralSplitT<ComplexOf<Derived>> spectral_split(const Eigen::MatrixBase<Derived>& M,
                                                   typename RealOf<typename Derived::Scalar>::type tol = kAxisTol) {
    using C = ComplexOf<Derived>;
    using R = typename RealOf<C>::type;
    detail::require_square(M);
    detail::require_finite(M);
    const Eigen::Index n = M.rows();
    SpectralSplitT<C> out;
    const Mat<C> Mc = to_complex(M);
    const R scale = Mc.norm();
    SchurFormT<C> sf = schur(Mc);
    R gap = std::numeric_limits<R>::infinity();
    for (Eigen::Index k = 0; k < n; ++k) gap = std::min(gap, std::abs(sf.T(k, k).real()));
    if (n == 0) gap = 0;
    if (n > 0 && gap < tol * scale)
        throw Error(ErrorKind::GlancingOrCharacteristic, "eigenvalue within tolerance of the imaginary axis");
    out.gapWidth = gap;
    const Eigen::Index s = schur_reorder(sf, [](const C& z) { return z.real() < 0; });
    const Eigen::Index u = n - s;
    out.eigenvalues = eigenvalues(Mc);
    const Mat<C> T11 = sf.T.topLeftCorner(s, s), T22 = sf.T.bottomRightCorner(u, u);
    const Mat<C> X = triangular_sylvester<C>(T11, T22, Mat<C>(-sf.T.topRightCorner(s, u)));
    Mat<C> Pt = Mat<C>::Zero(n, n);
    Pt.topLeftCorner(s, s).setIdentity();
    Pt.topRightCorner(s, u) = -X;
    out.piMinus = sf.Q * Pt * sf.Q.adjoint();
    out.piPlus = Mat<C>::Identity(n, n) - out.piMinus;
    out.stableBasis = sf.Q.leftCols(s);
    Mat<C> W(n, u);
    if (u > 0) {
        Mat<C> XI(n, u);
        XI.topRows(s) = X;
        XI.bottomRows(u).setIdentity();
        W = orthonormalize<C>(sf.Q * XI);
    }
    out.unstableBasis = W;
    return out;
}

// Determinant of [B1 | B2] for bases of complementary dimension.
template <typename D1, typename D2>
ComplexOf<D1> subspace_det(const Eigen::MatrixBase<D1>& B1, const Eigen::MatrixBase<D2>& B2) {
    using C = ComplexOf<D1>;
    if (B1.rows() != B2.rows()) throw Error(ErrorKind::DimensionMismatch, "ambient dimensions differ");
    if (B1.cols() + B2.cols() != B1.rows()) throw Error(ErrorKind::DimensionMismatch, "dimensions are not complementary");
    if (B1.rows() == 0) return C(1);
    Mat<C> S(B1.rows(), B1.rows());
    S << to_complex(B1), to_complex(B2);
    return S.partialPivLu().determinant();
}

template <typename Derived>
Eigen::Index numerical_rank(const Eigen::MatrixBase<Derived>& G,
                            typename RealOf<typename Derived::Scalar>::type tol = kRankTol) {
    if (G.rows() == 0 || G.cols() == 0) return 0;
    Eigen::JacobiSVD<Mat<ComplexOf<Derived>>> svd(to_complex(G));
    const auto& sv = svd.singularValues();
    const auto smax = sv(0);
    if (!(smax > 0)) return 0;
    Eigen::Index r = 0;
    for (Eigen::Index k = 0; k < sv.size(); ++k)
        if (sv(k) > tol * smax) ++r;
    return r;
}

// Orthonormal basis of the right nullspace.
template <typename Derived>
Mat<ComplexOf<Derived>> nullspace(const Eigen::MatrixBase<Derived>& G,
                                  typename RealOf<typename Derived::Scalar>::type tol = kRankTol) {
    using C = ComplexOf<Derived>;
    const Eigen::Index n = G.cols();
    if (G.rows() == 0) return Mat<C>::Identity(n, n);
    Mat<C> Gc = to_complex(G);
    if (Gc.rows() < n) {
        Mat<C> padded = Mat<C>::Zero(n, n);
        padded.topRows(Gc.rows()) = Gc;
        Gc = padded;
    }
    Eigen::JacobiSVD<Mat<C>> svd(Gc, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    const auto smax = sv(0);
    Eigen::Index r = 0;
    if (smax > 0)
        for (Eigen::Index k = 0; k < sv.size(); ++k)
            if (sv(k) > tol * smax) ++r;
    return svd.matrixV().rightCols(n - r);
}

// Orthonormal rows spanning the left nullspace of G.
template <typename Derived>
Mat<ComplexOf<Derived>> left_nullspace_rows(const Eigen::MatrixBase<Derived>& G,
                                            typename RealOf<typename Derived::Scalar>::type tol = kRankTol) {
    return nullspace(to_complex(G).adjoint().eval(), tol).adjoint();
}

template <typename C>
struct PseudoInverse {
    Mat<C> matrix;
    typename RealOf<C>::type normGamma = 0;
    typename RealOf<C>::type normPinv = 0;
};

// Right inverse G* (G G*)^{-1} for full row rank G.
template <typename Derived>
PseudoInverse<ComplexOf<Derived>> pseudo_inverse(const Eigen::MatrixBase<Derived>& G) {
    using C = ComplexOf<Derived>;
    PseudoInverse<C> out;
    const Mat<C> Gc = to_complex(G);
    if (Gc.rows() == 0) {
        out.matrix = Mat<C>(Gc.cols(), 0);
        return out;
    }
    if (Gc.rows() > Gc.cols()) throw Error(ErrorKind::RankDeficient, "more rows than columns");
    Eigen::JacobiSVD<Mat<C>> svd(Gc);
    const auto& sv = svd.singularValues();
    const auto smin = sv(sv.size() - 1), smax = sv(0);
    if (!(smin > 1e-14 * smax) || !(smax > 0)) throw Error(ErrorKind::RankDeficient, "matrix is not of full row rank");
    out.matrix = Gc.adjoint() * (Gc * Gc.adjoint()).partialPivLu().inverse();
    out.normGamma = smax;
    out.normPinv = 1 / smin;
    return out;
}

// e^{zA} v for v in the stable subspace of A, evaluated on that subspace only.
template <typename DA, typename DV>
Vec<ComplexOf<DA>> decaying_exponential_apply(const Eigen::MatrixBase<DA>& A, const SpectralSplitT<ComplexOf<DA>>& split,
                                              typename RealOf<ComplexOf<DA>>::type z, const Eigen::MatrixBase<DV>& v,
                                              typename RealOf<ComplexOf<DA>>::type tol = 1e-8) {
    using C = ComplexOf<DA>;
    const Vec<C> vc = v.template cast<C>();
    if (z < 0) throw Error(ErrorKind::InvalidArgument, "z must be nonnegative");
    if ((split.piPlus * vc).norm() > tol * std::max<typename RealOf<C>::type>(1, vc.norm()))
        throw Error(ErrorKind::NotInStableSubspace, "vector has a component in the unstable subspace");
    const Mat<C>& B = split.stableBasis;
    if (B.cols() == 0) return Vec<C>::Zero(vc.size());
    const Mat<C> As = B.adjoint() * to_complex(A) * B;
    const Mat<C> E = (As * C(z)).exp();
    return B * (E * (B.adjoint() * vc));
}

// Polynomial extrapolation to x = 0 from samples (x_k, y_k).
template <typename T, typename R>
T extrapolate_to_zero(const std::vector<R>& x, const std::vector<T>& y) {
    T acc = y[0] * R(0);
    for (size_t i = 0; i < x.size(); ++i) {
        R w = 1;
        for (size_t j = 0; j < x.size(); ++j)
            if (j != i) w *= x[j] / (x[j] - x[i]);
        acc = acc + y[i] * w;
    }
    return acc;
}

// Eigenvalue clusters (relative radius) with algebraic and geometric multiplicities.
template <typename C>
struct EigenCluster {
    C center;
    int algebraic = 0;
    int geometric = 0;
};

template <typename Derived>
std::vector<EigenCluster<ComplexOf<Derived>>> eigen_clusters(const Eigen::MatrixBase<Derived>& M,
                                                              typename RealOf<ComplexOf<Derived>>::type radius = 1e-6,
                                                              typename RealOf<ComplexOf<Derived>>::type rankTol = kRankTol) {
    using C = ComplexOf<Derived>;
    using R = typename RealOf<C>::type;
    const Mat<C> Mc = to_complex(M);
    const Vec<C> ev = eigenvalues(Mc);
    const R scale = std::max<R>(Mc.norm(), R(1));
    std::vector<EigenCluster<C>> out;
    std::vector<bool> used(ev.size(), false);
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        if (used[i]) continue;
        EigenCluster<C> cl;
        C sum(0);
        for (Eigen::Index j = i; j < ev.size(); ++j) {
            if (!used[j] && std::abs(ev(j) - ev(i)) <= radius * scale) {
                used[j] = true;
                sum += ev(j);
                ++cl.algebraic;
            }
        }
        cl.center = sum / R(cl.algebraic);
        Mat<C> shifted = Mc;
        shifted.diagonal().array() -= cl.center;
        // rank threshold relative to the matrix scale, not to the shifted matrix
        Eigen::JacobiSVD<Mat<C>> svd(shifted);
        const auto& sv = svd.singularValues();
        int nullity = 0;
        for (Eigen::Index k = 0; k < sv.size(); ++k)
            if (sv(k) <= std::max<R>(rankTol, radius) * scale) ++nullity;
        cl.geometric = std::min(nullity, cl.algebraic);
        out.push_back(cl);
    }
    return out;
}

}  // namespace hpbl
