#include "hpbl/symbols.hpp"

namespace hpbl {

namespace {

void require_eta(const HyperbolicParabolicModel& m, const Frequency& z) {
    if (z.eta.size() != m.d - 1) throw Error(ErrorKind::DimensionMismatch, "eta must have d-1 components");
}

CMatrix ad_inverse(const HyperbolicParabolicModel& m) {
    const RMatrix Ad = m.Ad();
    Eigen::JacobiSVD<RMatrix> svd(Ad);
    const auto& sv = svd.singularValues();
    if (!(sv(sv.size() - 1) > 1e-12 * sv(0))) throw Error(ErrorKind::SingularAd, "A_d is singular at baseState");
    return Ad.inverse().cast<Complex>();
}

}  // namespace

CMatrix tangential_symbol(const HyperbolicParabolicModel& m, const Frequency& z) {
    require_eta(m, z);
    CMatrix L = z.s() * CMatrix::Identity(m.N, m.N);
    for (int j = 1; j < m.d; ++j) L += I_unit * z.eta(j - 1) * m.A_base(j).cast<Complex>();
    return L;
}

CMatrix hyperbolic_boundary_symbol(const HyperbolicParabolicModel& m, const Frequency& z) {
    return -ad_inverse(m) * tangential_symbol(m, z);
}

CMatrix parabolic_symbol_G(const HyperbolicParabolicModel& m, const Frequency& z) {
    const int N = m.N;
    ad_inverse(m);
    CMatrix G = CMatrix::Zero(2 * N, 2 * N);
    G.topRightCorner(N, N).setIdentity();
    CMatrix M = tangential_symbol(m, z);
    M.diagonal().array() += z.eta.squaredNorm();
    G.bottomLeftCorner(N, N) = M;
    G.bottomRightCorner(N, N) = m.Ad().cast<Complex>();
    return G;
}

double default_small_radius(const HyperbolicParabolicModel& m) {
    Eigen::JacobiSVD<RMatrix> svd(m.Ad());
    return 0.1 * svd.singularValues().minCoeff();
}

BlockDiagonalization block_diagonalize(const HyperbolicParabolicModel& m, const Frequency& z) {
    const int N = m.N;
    const CMatrix G = parabolic_symbol_G(m, z);
    SchurFormT<Complex> sf = schur(G);
    std::vector<double> mods(2 * N);
    for (int k = 0; k < 2 * N; ++k) mods[k] = std::abs(sf.T(k, k));
    std::vector<double> sorted = mods;
    std::sort(sorted.begin(), sorted.end());
    const double small_max = sorted[N - 1], large_min = sorted[N];
    if (!(small_max < 0.5 * large_min))
        throw Error(ErrorKind::ClustersNotSeparated, "small and large eigenvalue groups of G are not separated");
    const double cut = 0.5 * (small_max + large_min);
    const Eigen::Index s = schur_reorder(sf, [&](const Complex& l) { return std::abs(l) < cut; });
    if (s != N) throw Error(ErrorKind::ClustersNotSeparated, "eigenvalue groups of G have unequal size");
    const CMatrix T11 = sf.T.topLeftCorner(N, N), T22 = sf.T.bottomRightCorner(N, N);
    const CMatrix X = triangular_sylvester<Complex>(T11, T22, CMatrix(-sf.T.topRightCorner(N, N)));
    const CMatrix V = sf.Q.leftCols(N);
    CMatrix XI(2 * N, N);
    XI.topRows(N) = X;
    XI.bottomRows(N).setIdentity();
    const CMatrix W = sf.Q * XI;  // invariant subspace of the large group
    Eigen::PartialPivLU<CMatrix> vtop(V.topRows(N)), wbot(W.bottomRows(N));
    BlockDiagonalization out;
    out.H = V.bottomRows(N) * vtop.inverse();
    const CMatrix Y = W.topRows(N) * wbot.inverse();
    out.S = CMatrix::Identity(2 * N, 2 * N);
    out.S.topRightCorner(N, N) = Y;
    out.S.bottomLeftCorner(N, N) = out.H;
    out.P = Y.inverse();
    CMatrix D = CMatrix::Zero(2 * N, 2 * N);
    D.topLeftCorner(N, N) = out.H;
    D.bottomRightCorner(N, N) = out.P;
    out.residual = (out.S.partialPivLu().solve(G * out.S) - D).norm();
    return out;
}

ConjugatorResult lemma_am_conjugator(const HyperbolicParabolicModel& m, const Frequency& beta, double p3norm,
                                     const CMatrix& p3dir) {
    const int N = m.N;
    const CMatrix A = m.Ad().cast<Complex>();
    const CMatrix Ainv = ad_inverse(m);
    CMatrix dir = p3dir.size() ? p3dir : CMatrix(CMatrix::Ones(N, N) / double(N));
    if (dir.rows() != N || dir.cols() != N) throw Error(ErrorKind::DimensionMismatch, "p3 direction must be N x N");
    if (dir.norm() > 0) dir /= dir.norm();
    CMatrix M = tangential_symbol(m, beta) + p3norm * dir;
    M.diagonal().array() += beta.eta.squaredNorm();

    CMatrix G = CMatrix::Zero(2 * N, 2 * N);
    G.topRightCorner(N, N).setIdentity();
    G.bottomLeftCorner(N, N) = M;
    G.bottomRightCorner(N, N) = A;
    const double scale = G.norm();

    ConjugatorResult out;
    CMatrix H = -Ainv * M, tau2 = CMatrix::Zero(N, N);
    const CMatrix I = CMatrix::Identity(N, N);
    const int max_iter = 500;
    int it = 0;
    for (; it < max_iter; ++it) {
        const CMatrix Hn = Ainv * (H * H - M);
        const CMatrix t2n = M * Ainv * (I + tau2).partialPivLu().inverse() * Ainv;
        const double change = (Hn - H).norm() + (t2n - tau2).norm();
        H = Hn;
        tau2 = t2n;
        if (!H.allFinite() || !tau2.allFinite() || H.norm() > 1e6 * (1 + scale))
            throw Error(ErrorKind::ContractionDiverged, "fixed-point iteration for the conjugator diverged");
        if (change <= 1e-15 * scale) break;
    }
    if (it == max_iter) throw Error(ErrorKind::ContractionDiverged, "fixed-point iteration did not converge");
    out.iterations = it + 1;
    out.H = H;
    out.tau1 = Ainv * H * H;
    out.tau2 = tau2;
    out.P = A * (I + tau2);
    out.T.resize(2 * N, 2 * N);
    out.T << I, Ainv, H, I + tau2;
    CMatrix D = CMatrix::Zero(2 * N, 2 * N);
    D.topLeftCorner(N, N) = out.H;
    D.bottomRightCorner(N, N) = out.P;
    out.residual = (out.T.partialPivLu().solve(G * out.T) - D).norm();
    if (!(out.residual <= 1e-10 * scale))
        throw Error(ErrorKind::ContractionDiverged, "conjugator residual above tolerance");
    return out;
}

Complex evans_definitional(const HyperbolicParabolicModel& m, const Frequency& z) {
    const int N = m.N;
    const CMatrix G = parabolic_symbol_G(m, z);
    const auto split = spectral_split(G);
    if (split.stableBasis.cols() != N)
        throw Error(ErrorKind::NumericalFailure, "stable subspace of G does not have dimension N");
    CMatrix K = CMatrix::Zero(2 * N, N);
    K.topRows(N).setIdentity();
    return subspace_det(split.stableBasis, K);
}

EvansValue evans(const HyperbolicParabolicModel& m, const Frequency& z) {
    EvansValue out;
    out.detH = block_diagonalize(m, z).H.determinant();
    out.definitional = evans_definitional(m, z);
    out.ratio = out.detH / out.definitional;
    return out;
}

double degeneracy_R(const HyperbolicParabolicModel& m, const Frequency& z) {
    if (z.rho() == 0.0) throw Error(ErrorKind::ZeroFrequency, "R is undefined at zeta = 0");
    const CMatrix H = block_diagonalize(m, z).H;
    Eigen::JacobiSVD<CMatrix> svd(H);
    const auto& sv = svd.singularValues();
    const double smin = sv(sv.size() - 1);
    return smin <= 1e-15 * std::max(sv(0), 1e-300) ? 0.0 : smin;
}

}  // namespace hpbl
