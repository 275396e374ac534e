#include "choq/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <lapacke.h>

#include "choq/fft.hpp"

namespace choq {

// ---- assembly ----

void BoxHamiltonian::apply(const double* x, double* y) const {
  const int P = grid->points();
  const double ih2 = 1.0 / (grid->spacing() * grid->spacing());
  const std::size_t PP = static_cast<std::size_t>(P) * P;
  std::size_t idx = 0;
  for (int i = 0; i < P; ++i)
    for (int j = 0; j < P; ++j)
      for (int k = 0; k < P; ++k, ++idx) {
        double s = 6.0 * x[idx];
        if (i > 0) s -= x[idx - PP];
        if (i + 1 < P) s -= x[idx + PP];
        if (j > 0) s -= x[idx - P];
        if (j + 1 < P) s -= x[idx + P];
        if (k > 0) s -= x[idx - 1];
        if (k + 1 < P) s -= x[idx + 1];
        y[idx] = s * ih2 + weff[idx] * x[idx];
      }
}

Eigen::VectorXd BoxHamiltonian::apply(const Eigen::VectorXd& x) const {
  Eigen::VectorXd y(x.size());
  apply(x.data(), y.data());
  return y;
}

double RadialHamiltonian::centrifugal(int n, int ell, double r) {
  double c = 0.25 * (n - 1) * (n - 3) + static_cast<double>(ell) * (ell + n - 2);
  return c / (r * r);
}

BoxHamiltonian assemble_box_hamiltonian(const ScalarField& W, const ScalarField& V,
                                        double a) {
  check_same_grid(W, V, "assemble_box_hamiltonian");
  if (W.grid->mode() != GridMode::Cartesian)
    fail("GridMismatch", "box hamiltonian needs a cartesian grid");
  BoxHamiltonian H;
  H.grid = W.grid;
  H.weff.resize(W.size());
  for (std::size_t i = 0; i < W.size(); ++i) H.weff[i] = W.v[i] - a * V.v[i];
  return H;
}

RadialHamiltonian assemble_radial_hamiltonian(const ScalarField& W,
                                              const ScalarField& V, double a,
                                              int ell) {
  check_same_grid(W, V, "assemble_radial_hamiltonian");
  if (W.grid->mode() != GridMode::Radial)
    fail("GridMismatch", "radial hamiltonian needs a radial grid");
  const Grid& g = *W.grid;
  const int n = g.dim(), N = g.points();
  const double ih2 = 1.0 / (g.spacing() * g.spacing());
  RadialHamiltonian H;
  H.grid = W.grid;
  H.ell = ell;
  H.diag.resize(N - 1);
  H.off.assign(N - 2, -ih2);
  for (int i = 0; i < N - 1; ++i) {
    double r = g.rnode(i);
    H.diag[i] = 2.0 * ih2 + W.v[i] - a * V.v[i] + RadialHamiltonian::centrifugal(n, ell, r);
  }
  return H;
}

// ---- LOBPCG ----

namespace {

// SVQB orthonormalization with rank drop; companion blocks transform with the
// returned matrix.
Eigen::MatrixXd svqb(Eigen::MatrixXd& B) {
  Eigen::MatrixXd G = B.transpose() * B;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G);
  const auto& d = es.eigenvalues();
  double dmax = d.maxCoeff();
  int keep = 0;
  for (int i = 0; i < d.size(); ++i)
    if (d[i] > 1e-13 * dmax) ++keep;
  Eigen::MatrixXd T(d.size(), keep);
  int c = 0;
  for (int i = 0; i < d.size(); ++i)
    if (d[i] > 1e-13 * dmax) T.col(c++) = es.eigenvectors().col(i) / std::sqrt(d[i]);
  B = B * T;
  return T;
}

struct DstPrecond {
  Dst3 dst;
  std::vector<double> sym1d;
  double scale;
  int P;
  explicit DstPrecond(const Grid& g, double sigma)
      : dst(g.points()), P(g.points()) {
    const double ih2 = 1.0 / (g.spacing() * g.spacing());
    sym1d.resize(P);
    for (int m = 0; m < P; ++m)
      sym1d[m] = (2.0 - 2.0 * std::cos(kPi * (m + 1) / (P + 1))) * ih2;
    scale = 1.0 / std::pow(2.0 * (P + 1), 3);
    sigma_ = sigma;
  }
  void apply(const double* r, double* z, std::vector<double>& tmp) const {
    tmp.assign(r, r + static_cast<std::size_t>(P) * P * P);
    dst.execute(tmp.data(), z);
    std::size_t idx = 0;
    for (int i = 0; i < P; ++i)
      for (int j = 0; j < P; ++j)
        for (int k = 0; k < P; ++k, ++idx)
          z[idx] /= (sym1d[i] + sym1d[j] + sym1d[k] + sigma_);
    std::copy(z, z + tmp.size(), tmp.begin());
    dst.execute(tmp.data(), z);
    for (std::size_t i = 0; i < tmp.size(); ++i) z[i] *= scale;
  }
  double sigma_;
};

}  // namespace

BlockEigResult lobpcg_lowest(const BoxHamiltonian& H, int k, const EigOptions& opt,
                             const Eigen::MatrixXd* warm) {
  const Grid& g = *H.grid;
  const std::size_t n = g.size();
  const int m = std::min(static_cast<int>(n / 2), k + std::max(1, opt.extra));
  const int kconv = std::min(k + 1, m);
  const double l2scale = std::sqrt(g.cell_volume());

  double wmin = *std::min_element(H.weff.begin(), H.weff.end());
  DstPrecond prec(g, 1.0 + std::max(0.0, -wmin));

  std::mt19937_64 rng(opt.seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  Eigen::MatrixXd X(n, m);
  {
    int wc = 0;
    if (warm && warm->rows() == static_cast<long>(n))
      wc = std::min<int>(warm->cols(), m);
    if (wc > 0) X.leftCols(wc) = warm->leftCols(wc);
    for (int c = wc; c < m; ++c)
      for (std::size_t i = 0; i < n; ++i) X(i, c) = nd(rng);
  }
  svqb(X);

  auto applyBlock = [&](const Eigen::MatrixXd& B) {
    Eigen::MatrixXd AB(n, B.cols());
    for (int c = 0; c < B.cols(); ++c) H.apply(B.col(c).data(), AB.col(c).data());
    return AB;
  };

  Eigen::MatrixXd AX = applyBlock(X);
  Eigen::MatrixXd P;  // implicit conjugate-direction block, raw (re-orthonormalized
                      // against the rotated X each sweep, then re-applied)
  BlockEigResult out;
  out.lambda.assign(m, 0.0);
  out.residual.assign(m, 0.0);
  std::vector<double> tmp(n), zbuf(n);

  int it = 0;
  int k_settled = 0;
  double best_track = 1e300;
  int since_best = 0, restarts = 0;
  for (; it < opt.max_iter; ++it) {
    Eigen::MatrixXd Xt = X.transpose() * AX;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (Xt + Xt.transpose()));
    X = X * es.eigenvectors();
    AX = AX * es.eigenvectors();
    for (int c = 0; c < m; ++c) out.lambda[c] = es.eigenvalues()[c];

    Eigen::MatrixXd R = AX;
    for (int c = 0; c < m; ++c) R.col(c) -= out.lambda[c] * X.col(c);
    // the first k states carry the solve; the guard state (k+1, used only for
    // the degeneracy flag) gets a looser target so a degenerate tail cannot
    // stall an otherwise converged block
    bool done = true;
    bool done_k = true;
    for (int c = 0; c < m; ++c) {
      out.residual[c] = R.col(c).norm() * l2scale;
      double target = (c < k) ? opt.tol : 100.0 * opt.tol;
      if (c < kconv && out.residual[c] > target * (1.0 + std::abs(out.lambda[c])))
        done = false;
      if (c < k && out.residual[c] > opt.tol * (1.0 + std::abs(out.lambda[c])))
        done_k = false;
    }
    if (done_k) ++k_settled;
    else k_settled = 0;
    if (done || k_settled >= 50) {
      out.converged = true;
      break;
    }

    // stall escape: warm starts can lock a near-degenerate pair into a slowly
    // rotating configuration; rebuilding the unconverged columns from the
    // deterministic stream breaks the lock
    double cur = 0;
    for (int c = 0; c < kconv; ++c)
      cur = std::max(cur, out.residual[c] / (1.0 + std::abs(out.lambda[c])));
    if (cur < 0.97 * best_track) {
      best_track = cur;
      since_best = 0;
    } else {
      ++since_best;
    }
    if (since_best >= 60 && restarts < 3) {
      for (int c = 0; c < m; ++c) {
        if (out.residual[c] <= opt.tol * (1.0 + std::abs(out.lambda[c]))) continue;
        for (std::size_t i = 0; i < n; ++i) X(i, c) = nd(rng);
      }
      // sequential orthonormalization keeps the converged columns intact
      for (int c = 0; c < m; ++c) {
        for (int b = 0; b < c; ++b) X.col(c) -= X.col(b).dot(X.col(c)) * X.col(b);
        X.col(c) /= X.col(c).norm();
      }
      AX = applyBlock(X);
      P.resize(n, 0);
      best_track = 1e300;
      since_best = 0;
      ++restarts;
      continue;
    }

    Eigen::MatrixXd Wb(n, m);
    for (int c = 0; c < m; ++c) {
      prec.apply(R.col(c).data(), zbuf.data(), tmp);
      Wb.col(c) = Eigen::Map<Eigen::VectorXd>(zbuf.data(), n);
    }

    Wb -= X * (X.transpose() * Wb);
    svqb(Wb);
    Eigen::MatrixXd AWb = applyBlock(Wb);

    Eigen::MatrixXd Pn, APn;
    if (P.cols() > 0) {
      P -= X * (X.transpose() * P);
      P -= Wb * (Wb.transpose() * P);
      svqb(P);
      if (P.cols() > 0) {
        Pn = P;
        APn = applyBlock(Pn);
      }
    }

    const int sw = static_cast<int>(Wb.cols()), sp = static_cast<int>(Pn.cols());
    Eigen::MatrixXd S(n, m + sw + sp), AS(n, m + sw + sp);
    S.leftCols(m) = X;
    AS.leftCols(m) = AX;
    S.middleCols(m, sw) = Wb;
    AS.middleCols(m, sw) = AWb;
    if (sp > 0) {
      S.rightCols(sp) = Pn;
      AS.rightCols(sp) = APn;
    }

    Eigen::MatrixXd T = S.transpose() * AS;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es2(0.5 * (T + T.transpose()));
    Eigen::MatrixXd C = es2.eigenvectors().leftCols(m);
    Eigen::MatrixXd Xn = S * C;
    Eigen::MatrixXd AXn = AS * C;
    P = S.rightCols(sw + sp) * C.bottomRows(sw + sp);
    X = std::move(Xn);
    AX = std::move(AXn);
  }
  out.iterations = it;
  if (!out.converged) {
    bool ok = true;
    for (int c = 0; c < k; ++c)
      if (out.residual[c] > opt.tol * (1.0 + std::abs(out.lambda[c]))) ok = false;
    out.converged = ok;
  }
  if (!out.converged && opt.require_convergence) {
    std::string msg = "eigensolver hit the iteration cap; residuals:";
    for (int c = 0; c < kconv; ++c) msg += " " + std::to_string(out.residual[c]);
    fail("NoConvergence", msg);
  }
  out.X = std::move(X);
  return out;
}

ShiftedInversePrecond::ShiftedInversePrecond(GridPtr grid, const ScalarField* W,
                                             double sigma)
    : grid_(std::move(grid)), sigma_(sigma) {
  if (grid_->mode() == GridMode::Cartesian) {
    const int P = grid_->points();
    dst_ = std::make_shared<Dst3>(P);
    const double ih2 = 1.0 / (grid_->spacing() * grid_->spacing());
    sym_.resize(P);
    for (int m = 0; m < P; ++m)
      sym_[m] = (2.0 - 2.0 * std::cos(kPi * (m + 1) / (P + 1))) * ih2;
    scale_ = 1.0 / std::pow(2.0 * (P + 1), 3);
    return;
  }
  const int n = grid_->points() - 1;
  const double ih2 = 1.0 / (grid_->spacing() * grid_->spacing());
  std::vector<double> diag(n);
  for (int i = 0; i < n; ++i) {
    double r = grid_->rnode(i);
    diag[i] = 2.0 * ih2 + sigma_ +
              RadialHamiltonian::centrifugal(grid_->dim(), 0, r) +
              (W ? W->v[i] : 0.0);
  }
  thomas_c_.resize(n);
  thomas_dinv_.resize(n);
  double d0 = diag[0];
  thomas_dinv_[0] = 1.0 / d0;
  thomas_c_[0] = -ih2 / d0;
  for (int i = 1; i < n; ++i) {
    double denom = diag[i] + ih2 * thomas_c_[i - 1];
    thomas_dinv_[i] = 1.0 / denom;
    thomas_c_[i] = -ih2 / denom;
  }
}

Eigen::VectorXd ShiftedInversePrecond::apply(const Eigen::VectorXd& r) const {
  if (grid_->mode() == GridMode::Cartesian) {
    const int P = grid_->points();
    std::vector<double> a(r.data(), r.data() + r.size()), b(r.size());
    dst_->execute(a.data(), b.data());
    std::size_t idx = 0;
    for (int i = 0; i < P; ++i)
      for (int j = 0; j < P; ++j)
        for (int k = 0; k < P; ++k, ++idx)
          b[idx] /= (sym_[i] + sym_[j] + sym_[k] + sigma_);
    dst_->execute(b.data(), a.data());
    Eigen::VectorXd out(r.size());
    for (long i = 0; i < r.size(); ++i) out[i] = a[i] * scale_;
    return out;
  }
  const int n = static_cast<int>(r.size());
  const double ih2 = 1.0 / (grid_->spacing() * grid_->spacing());
  Eigen::VectorXd y(n);
  y[0] = r[0] * thomas_dinv_[0];
  for (int i = 1; i < n; ++i) y[i] = (r[i] + ih2 * y[i - 1]) * thomas_dinv_[i];
  for (int i = n - 2; i >= 0; --i) y[i] -= thomas_c_[i] * y[i + 1];
  return y;
}

// ---- tridiagonal solves ----

namespace {

TridiagEig stevr_index_range(const RadialHamiltonian& H, int il, int iu) {
  int n = static_cast<int>(H.diag.size());
  std::vector<double> d = H.diag, e = H.off;
  int mfound = 0;
  int zcols = iu - il + 1;
  std::vector<double> w(n);
  Eigen::MatrixXd Z(n, zcols);
  std::vector<lapack_int> isuppz(2 * std::max(1, zcols));
  lapack_int info = LAPACKE_dstevr(LAPACK_COL_MAJOR, 'V', 'I', n, d.data(), e.data(),
                                   0, 0, il, iu, 0.0, &mfound, w.data(), Z.data(), n,
                                   isuppz.data());
  if (info != 0) fail("NoConvergence", "dstevr failed with info " + std::to_string(info));
  TridiagEig out;
  out.lambda.assign(w.begin(), w.begin() + mfound);
  out.U = Z.leftCols(mfound);
  return out;
}

int stevr_count_negative(const RadialHamiltonian& H) {
  int n = static_cast<int>(H.diag.size());
  std::vector<double> d = H.diag, e = H.off;
  int mfound = 0;
  std::vector<double> w(n);
  std::vector<double> zdummy(1);
  std::vector<lapack_int> isuppz(2);
  lapack_int info = LAPACKE_dstevr(LAPACK_COL_MAJOR, 'N', 'V', n, d.data(), e.data(),
                                   -1e300, 0.0, 0, 0, 0.0, &mfound, w.data(),
                                   zdummy.data(), n, isuppz.data());
  if (info != 0) fail("NoConvergence", "dstevr failed with info " + std::to_string(info));
  return mfound;
}

}  // namespace

TridiagEig tridiag_lowest(const RadialHamiltonian& H, int k) {
  int n = static_cast<int>(H.diag.size());
  if (k > n) fail("BadK", "k exceeds the radial problem dimension");
  return stevr_index_range(H, 1, k);
}

TridiagEig tridiag_negative(const RadialHamiltonian& H, int cap) {
  int nneg = stevr_count_negative(H);
  if (nneg == 0) return {};
  int take = std::min(nneg, cap);
  TridiagEig out = stevr_index_range(H, 1, take);
  while (!out.lambda.empty() && out.lambda.back() >= 0) {
    out.lambda.pop_back();
    out.U = out.U.leftCols(out.lambda.size()).eval();
  }
  return out;
}

// ---- orbital frames ----

double OrbitalFrame::orthonormality_defect() const {
  double worst = 0;
  for (std::size_t i = 0; i < phi.size(); ++i)
    for (std::size_t j = i; j < phi.size(); ++j) {
      double d = dot(phi[i], phi[j]) - (i == j ? 1.0 : 0.0);
      worst = std::max(worst, std::abs(d));
    }
  return worst;
}

namespace {

void fix_phase(Eigen::Ref<Eigen::VectorXd> v) {
  int arg = 0;
  double best = 0;
  for (int i = 0; i < v.size(); ++i) {
    double a = std::abs(v[i]);
    if (a > best) {
      best = a;
      arg = i;
    }
  }
  if (v[arg] < 0) v = -v;
}

// Deterministic basis inside each degenerate cluster: orthonormalize the
// projections of unit node vectors taken in lexicographic node order, then fix
// phases. Rotations within a cluster leave the eigenspace invariant.
void canonicalize_block(Eigen::MatrixXd& X, const std::vector<double>& lambda,
                        double gap_tol) {
  const int m = static_cast<int>(lambda.size());
  int a = 0;
  while (a < m) {
    int b = a + 1;
    while (b < m &&
           lambda[b] - lambda[b - 1] <= gap_tol * (1.0 + std::abs(lambda[b]))) ++b;
    int d = b - a;
    if (d > 1) {
      Eigen::MatrixXd U = X.middleCols(a, d);
      Eigen::MatrixXd B(U.rows(), d);
      int got = 0;
      // row norms of U give the projection sizes of the node vectors
      for (long i = 0; i < U.rows() && got < d; ++i) {
        Eigen::VectorXd v = U * U.row(i).transpose();
        for (int c = 0; c < got; ++c) v -= B.col(c).dot(v) * B.col(c);
        double nv = v.norm();
        if (nv > 1e-6) B.col(got++) = v / nv;
      }
      if (got == d) X.middleCols(a, d) = B;
    }
    for (int c = a; c < b; ++c) fix_phase(X.col(c));
    a = b;
  }
}

int count_sign_changes(const Eigen::VectorXd& u) {
  int c = 0;
  double prev = 0;
  for (int i = 0; i < u.size(); ++i) {
    double x = u[i];
    if (std::abs(x) < 1e-12) continue;
    if (prev != 0 && x * prev < 0) ++c;
    prev = x;
  }
  return c;
}

}  // namespace

OrbitalFrame lowest_eigs(const ProblemSpec& spec, const ScalarField& W,
                         const ScalarField& V, int k, const EigOptions& opt,
                         const OrbitalFrame* warm, Eigen::MatrixXd* block_out,
                         const Eigen::MatrixXd* warm_block) {
  if (k < 1 || k > opt.k_cap) fail("BadK", "k outside [1, cap]");
  check_same_grid(W, V, "lowest_eigs");
  const GridPtr grid = W.grid;
  OrbitalFrame fr;

  if (grid->mode() == GridMode::Cartesian) {
    BoxHamiltonian H = assemble_box_hamiltonian(W, V, spec.a);
    Eigen::MatrixXd warmX;
    if (warm_block && warm_block->rows() == static_cast<long>(grid->size())) {
      warmX = *warm_block;
    } else if (warm && !warm->phi.empty() && warm->phi[0].grid->same_as(*grid)) {
      warmX.resize(grid->size(), warm->phi.size());
      const double s = std::pow(grid->spacing(), 1.5);
      for (std::size_t c = 0; c < warm->phi.size(); ++c)
        for (std::size_t i = 0; i < grid->size(); ++i)
          warmX(i, c) = warm->phi[c].v[i] * s;
    }
    BlockEigResult r = lobpcg_lowest(H, k, opt, warmX.size() ? &warmX : nullptr);
    if (block_out) *block_out = r.X;
    canonicalize_block(r.X, r.lambda, 1e-6);
    const double s = std::pow(grid->spacing(), -1.5);
    for (int c = 0; c < k; ++c) {
      ScalarField p(grid, FieldRole::Generic);
      for (std::size_t i = 0; i < grid->size(); ++i) p.v[i] = r.X(i, c) * s;
      fr.phi.push_back(std::move(p));
      fr.lambda.push_back(r.lambda[c]);
      fr.ell.push_back(-1);
      fr.nodes.push_back(c);
    }
    // recompute residuals after the canonical rotation
    for (int c = 0; c < k; ++c) {
      Eigen::VectorXd x = r.X.col(c);
      Eigen::VectorXd ax = H.apply(x);
      fr.residual.push_back((ax - r.lambda[c] * x).norm() *
                            std::sqrt(grid->cell_volume()));
    }
    if (static_cast<int>(r.lambda.size()) > k)
      fr.degenerate_at_k =
          (r.lambda[k] - r.lambda[k - 1]) <= 1e-6 * (1.0 + std::abs(r.lambda[k]));
    fr.iterations = r.iterations;
    return fr;
  }

  // radial: l = 0 sector carries the multi-state solve
  RadialHamiltonian H = assemble_radial_hamiltonian(W, V, spec.a, 0);
  int kk = std::min<int>(k + 1, static_cast<int>(H.diag.size()));
  TridiagEig te = tridiag_lowest(H, kk);
  const Grid& g = *grid;
  for (int c = 0; c < k; ++c) {
    Eigen::VectorXd u = te.U.col(c);
    fix_phase(u);
    ScalarField p(grid, FieldRole::Generic);
    for (int i = 0; i + 1 < g.points(); ++i) p.v[i] = u[i] / std::sqrt(g.weight(i));
    p.v[g.points() - 1] = 0.0;
    fr.phi.push_back(std::move(p));
    fr.lambda.push_back(te.lambda[c]);
    fr.ell.push_back(0);
    fr.nodes.push_back(count_sign_changes(u));
    // tridiagonal residual in the u variable
    Eigen::VectorXd r(u.size());
    for (int i = 0; i < u.size(); ++i) {
      double s = H.diag[i] * u[i];
      if (i > 0) s += H.off[i - 1] * u[i - 1];
      if (i + 1 < u.size()) s += H.off[i] * u[i + 1];
      r[i] = s - te.lambda[c] * u[i];
    }
    fr.residual.push_back(r.norm());
  }
  if (kk > k)
    fr.degenerate_at_k =
        (te.lambda[k] - te.lambda[k - 1]) <= 1e-8 * (1.0 + std::abs(te.lambda[k]));
  fr.iterations = 1;
  return fr;
}

// ---- merged radial spectrum ----

int angular_degeneracy(int n, int ell) {
  if (ell == 0) return 1;
  // dim = (2l+n-2)/(n-2) * C(l+n-3, l); n=3 gives 2l+1, n=4 gives (l+1)^2
  double binom = 1.0;
  for (int j = 1; j <= n - 3; ++j) binom *= static_cast<double>(ell + j) / j;
  return static_cast<int>(std::lround((2.0 * ell + n - 2.0) / (n - 2.0) * binom));
}

std::vector<MergedLevel> radial_merged_spectrum(const ScalarField& W,
                                                const ScalarField& V, double a,
                                                int kmax) {
  const Grid& g = *W.grid;
  std::vector<MergedLevel> levels;
  double prev_min = -1e300;
  for (int ell = 0; ell <= g.lmax(); ++ell) {
    RadialHamiltonian H = assemble_radial_hamiltonian(W, V, a, ell);
    int kk = std::min<int>(kmax, static_cast<int>(H.diag.size()));
    TridiagEig te = tridiag_lowest(H, kk);
    for (int c = 0; c < static_cast<int>(te.lambda.size()); ++c)
      levels.push_back({te.lambda[c], ell, c, angular_degeneracy(g.dim(), ell)});
    prev_min = te.lambda[0];
    // channel minima increase with ell; once a channel opens above the k-th
    // best level it cannot contribute
    std::vector<double> sorted;
    for (auto& L : levels)
      for (int d = 0; d < L.degeneracy; ++d) sorted.push_back(L.lambda);
    std::sort(sorted.begin(), sorted.end());
    if (static_cast<int>(sorted.size()) >= kmax && prev_min > sorted[kmax - 1]) break;
  }
  std::stable_sort(levels.begin(), levels.end(),
                   [](const MergedLevel& a, const MergedLevel& b) {
                     return a.lambda < b.lambda;
                   });
  return levels;
}

std::vector<double> negative_levels_radial(const ScalarField& V, double a,
                                           int max_count) {
  const Grid& g = *V.grid;
  ScalarField Wzero(V.grid, FieldRole::Confinement);
  std::vector<double> out;
  for (int ell = 0; ell < 256; ++ell) {
    RadialHamiltonian H = assemble_radial_hamiltonian(Wzero, V, a, ell);
    TridiagEig te = tridiag_negative(H, max_count);
    if (te.lambda.empty() || te.lambda[0] >= 0) break;
    int deg = angular_degeneracy(g.dim(), ell);
    for (double l : te.lambda)
      if (l < 0)
        for (int d = 0; d < deg; ++d) out.push_back(l);
    if (static_cast<int>(out.size()) > 4 * max_count) break;
  }
  std::sort(out.begin(), out.end());
  if (static_cast<int>(out.size()) > max_count) out.resize(max_count);
  return out;
}

// ---- G and its supergradient ----

GEvaluation eval_g(const ProblemSpec& spec, const ScalarField& W, const ScalarField& V,
                   const EigOptions& opt, const OrbitalFrame* warm,
                   const Eigen::MatrixXd* warm_block) {
  GEvaluation ev;
  ev.frame = lowest_eigs(spec, W, V, spec.k, opt, warm, &ev.block, warm_block);
  ev.g = 0;
  for (int j = 0; j < spec.k; ++j) ev.g += spec.beta[j] * ev.frame.lambda[j];
  return ev;
}

double g_value(const ProblemSpec& spec, const ScalarField& W, const ScalarField& V,
               const EigOptions& opt) {
  return eval_g(spec, W, V, opt).g;
}

ScalarField density_of(const OrbitalFrame& frame, const std::vector<double>& beta) {
  ScalarField rho(frame.phi[0].grid, FieldRole::Density);
  for (std::size_t j = 0; j < frame.phi.size(); ++j)
    for (std::size_t i = 0; i < rho.size(); ++i)
      rho.v[i] += beta[j] * frame.phi[j].v[i] * frame.phi[j].v[i];
  return rho;
}

ScalarField g_supergradient(const ProblemSpec& spec, const ScalarField& W,
                            const ScalarField& V, const EigOptions& opt) {
  GEvaluation ev = eval_g(spec, W, V, opt);
  return density_of(ev.frame, spec.beta);
}

// ---- structure checks ----

Rearrangement rearrangement_check(const std::vector<double>& beta,
                                  const std::vector<double>& lambda) {
  if (beta.size() != lambda.size())
    fail("LengthMismatch", "beta and lambda must have equal lengths");
  const int k = static_cast<int>(beta.size());
  std::vector<int> perm(k), best(k);
  std::iota(perm.begin(), perm.end(), 0);
  best = perm;
  auto value = [&](const std::vector<int>& p) {
    double s = 0;
    for (int j = 0; j < k; ++j) s += beta[p[j]] * lambda[j];
    return s;
  };
  double bestv = value(perm);
  while (std::next_permutation(perm.begin(), perm.end())) {
    double v = value(perm);
    if (v < bestv - 0.0) {
      if (v < bestv) {
        bestv = v;
        best = perm;
      }
    }
  }
  return {best, bestv};
}

double lt_classical_constant(double gamma, int n) {
  return std::tgamma(gamma + 1.0) /
         (std::pow(2.0, n) * std::pow(kPi, 0.5 * n) * std::tgamma(gamma + 0.5 * n + 1.0));
}

LTRecord lieb_thirring_ratio(const ScalarField& V, double gamma, double a, int cap) {
  if (gamma < 0) fail("DomainError", "gamma must be >= 0");
  LTRecord rec;
  rec.gamma = gamma;
  const Grid& g = *V.grid;

  if (g.mode() == GridMode::Radial) {
    rec.mu = negative_levels_radial(V, a, cap);
    rec.truncated = static_cast<int>(rec.mu.size()) == cap;
  } else {
    ScalarField Wzero(V.grid, FieldRole::Confinement);
    BoxHamiltonian H = assemble_box_hamiltonian(Wzero, V, a);
    EigOptions opt;
    opt.require_convergence = false;
    opt.tol = 1e-7;
    int m = 8;
    for (;;) {
      BlockEigResult r = lobpcg_lowest(H, std::min(m, cap), opt);
      int kneg = 0;
      while (kneg < static_cast<int>(r.lambda.size()) && r.lambda[kneg] < 0) ++kneg;
      if (kneg < std::min(m, cap) || m >= cap) {
        rec.mu.assign(r.lambda.begin(), r.lambda.begin() + kneg);
        rec.truncated = (kneg == cap);
        break;
      }
      m *= 2;
    }
  }
  for (double mu : rec.mu) rec.riesz_sum += std::pow(-mu, gamma);
  double p = 0.5 * g.dim() + gamma;
  ScalarField tmp(V.grid);
  for (std::size_t i = 0; i < V.size(); ++i)
    tmp.v[i] = std::pow(std::max(0.0, a * V.v[i]), p);
  rec.v_integral = integral(tmp);
  rec.ratio = rec.v_integral > 0 ? rec.riesz_sum / rec.v_integral : 0.0;
  return rec;
}

double concavity_probe(const ProblemSpec& spec, const ScalarField& W,
                       const ScalarField& V1, const ScalarField& V2, int m_samples,
                       const EigOptions& opt) {
  check_same_grid(V1, V2, "concavity_probe");
  double g1 = g_value(spec, W, V1, opt);
  double g2 = g_value(spec, W, V2, opt);
  double worst = 1e300;
  for (int i = 1; i <= m_samples; ++i) {
    double t = static_cast<double>(i) / (m_samples + 1);
    ScalarField Vm(V1.grid, FieldRole::Potential);
    for (std::size_t j = 0; j < Vm.size(); ++j)
      Vm.v[j] = t * V1.v[j] + (1.0 - t) * V2.v[j];
    double gm = g_value(spec, W, Vm, opt);
    worst = std::min(worst, gm - t * g1 - (1.0 - t) * g2);
  }
  return worst;
}

}  // namespace choq
