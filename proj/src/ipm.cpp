// ipm.cpp: primal-dual interior-point solver for the sparse cone QP
//
//   min (1/2)x'Px + q'x   s.t.  Ax = b,  Gx + s = h,  s in R+^l x SOC blocks
//
// Mehrotra predictor-corrector with Nesterov-Todd scaling. The KKT system
//   [ P   A'  G'  ] [dx]   [bx]
//   [ A   0   0   ] [dy] = [by]
//   [ G   0  -W^2 ] [dz]   [bz]
// is factored once per iteration by sparse LDL' with static regularization
// and refined against the unregularized matrix. P must be stored as a full
// symmetric sparse matrix.

#include <Eigen/SparseCholesky>
#include <cmath>
#include <cstdio>
#include <limits>
#include <vector>

#include "loiter/conic.hpp"
#include "loiter/errors.hpp"

namespace loiter {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kReg = 1e-9;   // static KKT regularization
constexpr double kStep = 0.99;  // fraction of the step to the cone boundary

/// Offsets of the cone blocks inside an m-vector.
struct Cones {
    int ml = 0;                // leading nonnegative rows
    std::vector<int> start;    // SOC block starts
    std::vector<int> dim;      // SOC block dims
    int m = 0;
    double degree = 0.0;

    explicit Cones(const ConicProblem& p) {
        ml = p.nonneg_dim;
        int at = ml;
        for (int d : p.soc_dims) {
            start.push_back(at);
            dim.push_back(d);
            at += d;
        }
        m = at;
        degree = static_cast<double>(ml + static_cast<int>(dim.size()));
    }
};

/// Nesterov-Todd scaling per block: W symmetric with W z = W^{-1} s.
struct Scaling {
    Eigen::VectorXd wl;                 // nonneg block: sqrt(s/z)
    std::vector<double> eta;            // SOC: overall scale
    std::vector<Eigen::VectorXd> wbar;  // SOC: unit-hyperbolic point
    Eigen::VectorXd lambda;             // W z, all blocks
};

double soc_residual(const Eigen::VectorXd& u) {
    return u[0] - u.tail(u.size() - 1).norm();
}

double jdot(const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
    return u[0] * v[0] - u.tail(u.size() - 1).dot(v.tail(v.size() - 1));
}

/// Smallest cone margin across blocks (positive inside the interior).
double cone_margin(const Eigen::VectorXd& u, const Cones& K) {
    double margin = kInf;
    for (int i = 0; i < K.ml; ++i) margin = std::min(margin, u[i]);
    for (size_t bi = 0; bi < K.start.size(); ++bi)
        margin = std::min(margin, soc_residual(u.segment(K.start[bi], K.dim[bi])));
    return margin;
}

/// Shift u to the cone interior along the identity element when needed.
void center_into_cone(Eigen::VectorXd& u, const Cones& K) {
    const double margin = cone_margin(u, K);
    if (margin > 0.0) return;
    const double step = 1.0 - margin;
    for (int i = 0; i < K.ml; ++i) u[i] += step;
    for (size_t bi = 0; bi < K.start.size(); ++bi) u[K.start[bi]] += step;
}

/// Largest alpha with u + alpha du still in the cone (can be +inf).
double max_cone_step(const Eigen::VectorXd& u, const Eigen::VectorXd& du,
                     const Cones& K) {
    double alpha = kInf;
    for (int i = 0; i < K.ml; ++i)
        if (du[i] < 0.0) alpha = std::min(alpha, -u[i] / du[i]);
    for (size_t bi = 0; bi < K.start.size(); ++bi) {
        const auto ub = u.segment(K.start[bi], K.dim[bi]);
        const auto db = du.segment(K.start[bi], K.dim[bi]);
        const int d = K.dim[bi];
        const double a = db[0] * db[0] - db.tail(d - 1).squaredNorm();
        const double b = 2.0 * (ub[0] * db[0] - ub.tail(d - 1).dot(db.tail(d - 1)));
        const double c = ub[0] * ub[0] - ub.tail(d - 1).squaredNorm();
        double best = kInf;
        if (std::abs(a) < 1e-15 * std::max(1.0, std::abs(b))) {
            if (b < 0.0) best = -c / b;
        } else {
            const double disc = b * b - 4.0 * a * c;
            if (disc >= 0.0) {
                const double sq = std::sqrt(disc);
                const double qq = -0.5 * (b + (b >= 0.0 ? sq : -sq));
                for (double r : {qq / a, c / qq})
                    if (r > 0.0) best = std::min(best, r);
            }
        }
        if (db[0] < 0.0) best = std::min(best, -ub[0] / db[0]);
        alpha = std::min(alpha, best);
    }
    return alpha;
}

Scaling compute_scaling(const Eigen::VectorXd& s, const Eigen::VectorXd& z,
                        const Cones& K, bool& ok) {
    Scaling W;
    ok = true;
    W.wl.resize(K.ml);
    W.lambda.resize(K.m);
    for (int i = 0; i < K.ml; ++i) {
        if (s[i] <= 0.0 || z[i] <= 0.0) ok = false;
        W.wl[i] = std::sqrt(s[i] / z[i]);
        W.lambda[i] = std::sqrt(s[i] * z[i]);
    }
    for (size_t bi = 0; bi < K.start.size(); ++bi) {
        const int at = K.start[bi], d = K.dim[bi];
        const Eigen::VectorXd sb = s.segment(at, d), zb = z.segment(at, d);
        const double sj = jdot(sb, sb), zj = jdot(zb, zb);
        if (sj <= 0.0 || zj <= 0.0 || sb[0] <= 0.0 || zb[0] <= 0.0) {
            ok = false;
            W.eta.push_back(1.0);
            W.wbar.push_back(Eigen::VectorXd::Unit(d, 0));
            W.lambda.segment(at, d).setZero();
            continue;
        }
        const Eigen::VectorXd sbar = sb / std::sqrt(sj);
        const Eigen::VectorXd zbar = zb / std::sqrt(zj);
        const double gamma = std::sqrt(0.5 * (1.0 + sbar.dot(zbar)));
        Eigen::VectorXd wb(d);
        wb[0] = sbar[0] + zbar[0];
        wb.tail(d - 1) = sbar.tail(d - 1) - zbar.tail(d - 1);
        wb /= 2.0 * gamma;
        const double eta = std::pow(sj / zj, 0.25);
        W.eta.push_back(eta);
        W.wbar.push_back(wb);
        // lambda = eta * Wbar z
        const double c0 = wb[0] * zb[0] + wb.tail(d - 1).dot(zb.tail(d - 1));
        Eigen::VectorXd lb(d);
        lb[0] = c0;
        lb.tail(d - 1) = zb.tail(d - 1) +
                         (zb[0] + wb.tail(d - 1).dot(zb.tail(d - 1)) / (1.0 + wb[0])) *
                             wb.tail(d - 1);
        W.lambda.segment(at, d) = eta * lb;
    }
    return W;
}

/// y = W v (symmetric square-root form per block).
Eigen::VectorXd apply_w(const Scaling& W, const Cones& K,
                        const Eigen::VectorXd& v) {
    Eigen::VectorXd out(K.m);
    out.head(K.ml) = W.wl.cwiseProduct(v.head(K.ml));
    for (size_t bi = 0; bi < K.start.size(); ++bi) {
        const int at = K.start[bi], d = K.dim[bi];
        const Eigen::VectorXd& wb = W.wbar[bi];
        const auto vb = v.segment(at, d);
        const double dot1 = wb.tail(d - 1).dot(vb.tail(d - 1));
        out[at] = wb[0] * vb[0] + dot1;
        out.segment(at + 1, d - 1) =
            vb.tail(d - 1) + (vb[0] + dot1 / (1.0 + wb[0])) * wb.tail(d - 1);
        out.segment(at, d) *= W.eta[bi];
    }
    return out;
}

/// y = W^{-1} v.
Eigen::VectorXd apply_w_inv(const Scaling& W, const Cones& K,
                            const Eigen::VectorXd& v) {
    Eigen::VectorXd out(K.m);
    out.head(K.ml) = v.head(K.ml).cwiseQuotient(W.wl);
    for (size_t bi = 0; bi < K.start.size(); ++bi) {
        const int at = K.start[bi], d = K.dim[bi];
        const Eigen::VectorXd& wb = W.wbar[bi];
        const auto vb = v.segment(at, d);
        const double dot1 = wb.tail(d - 1).dot(vb.tail(d - 1));
        out[at] = wb[0] * vb[0] - dot1;
        out.segment(at + 1, d - 1) =
            vb.tail(d - 1) + (-vb[0] + dot1 / (1.0 + wb[0])) * wb.tail(d - 1);
        out.segment(at, d) /= W.eta[bi];
    }
    return out;
}

/// y = W^2 v.
Eigen::VectorXd apply_w2(const Scaling& W, const Cones& K,
                         const Eigen::VectorXd& v) {
    Eigen::VectorXd out(K.m);
    out.head(K.ml) = W.wl.cwiseAbs2().cwiseProduct(v.head(K.ml));
    for (size_t bi = 0; bi < K.start.size(); ++bi) {
        const int at = K.start[bi], d = K.dim[bi];
        const Eigen::VectorXd& wb = W.wbar[bi];
        const auto vb = v.segment(at, d);
        const double wv = wb.dot(vb);
        // eta^2 (2 wbar wbar' - J) v
        out[at] = W.eta[bi] * W.eta[bi] * (2.0 * wb[0] * wv - vb[0]);
        out.segment(at + 1, d - 1) =
            W.eta[bi] * W.eta[bi] *
            (2.0 * wv * wb.tail(d - 1) + vb.tail(d - 1));
    }
    return out;
}

/// Jordan product u o v per block.
Eigen::VectorXd jordan_prod(const Eigen::VectorXd& u, const Eigen::VectorXd& v,
                            const Cones& K) {
    Eigen::VectorXd out(K.m);
    out.head(K.ml) = u.head(K.ml).cwiseProduct(v.head(K.ml));
    for (size_t bi = 0; bi < K.start.size(); ++bi) {
        const int at = K.start[bi], d = K.dim[bi];
        const auto ub = u.segment(at, d);
        const auto vb = v.segment(at, d);
        out[at] = ub.dot(vb);
        out.segment(at + 1, d - 1) =
            ub[0] * vb.tail(d - 1) + vb[0] * ub.tail(d - 1);
    }
    return out;
}

/// Solve lambda o u = v per block (arrow-matrix inverse).
Eigen::VectorXd jordan_solve(const Eigen::VectorXd& lam,
                             const Eigen::VectorXd& v, const Cones& K,
                             bool& ok) {
    Eigen::VectorXd out(K.m);
    for (int i = 0; i < K.ml; ++i) {
        if (lam[i] == 0.0) ok = false;
        out[i] = v[i] / lam[i];
    }
    for (size_t bi = 0; bi < K.start.size(); ++bi) {
        const int at = K.start[bi], d = K.dim[bi];
        const auto lb = lam.segment(at, d);
        const auto vb = v.segment(at, d);
        const double det = lb[0] * lb[0] - lb.tail(d - 1).squaredNorm();
        if (det == 0.0 || lb[0] == 0.0) {
            ok = false;
            out.segment(at, d).setZero();
            continue;
        }
        const double u0 = (lb[0] * vb[0] - lb.tail(d - 1).dot(vb.tail(d - 1))) / det;
        out[at] = u0;
        out.segment(at + 1, d - 1) =
            (vb.tail(d - 1) - u0 * lb.tail(d - 1)) / lb[0];
    }
    return out;
}

/// Cone identity element.
Eigen::VectorXd cone_identity(const Cones& K) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(K.m);
    e.head(K.ml).setOnes();
    for (size_t bi = 0; bi < K.start.size(); ++bi) e[K.start[bi]] = 1.0;
    return e;
}

/// KKT assembly + factorization + refined solve.
class KktSolver {
  public:
    KktSolver(const ConicProblem& p, const Cones& K)
        : prob_(p), K_(K), N_(p.n + static_cast<int>(p.b.size()) + K.m) {}

    bool factorize(const Scaling* W) {
        trip_.clear();
        const int n = prob_.n, p = static_cast<int>(prob_.b.size());
        for (int k = 0; k < prob_.P.outerSize(); ++k)
            for (SpMat::InnerIterator it(prob_.P, k); it; ++it)
                trip_.emplace_back(it.row(), it.col(), it.value());
        for (int k = 0; k < prob_.A.outerSize(); ++k)
            for (SpMat::InnerIterator it(prob_.A, k); it; ++it) {
                trip_.emplace_back(n + it.row(), it.col(), it.value());
                trip_.emplace_back(it.col(), n + it.row(), it.value());
            }
        for (int k = 0; k < prob_.G.outerSize(); ++k)
            for (SpMat::InnerIterator it(prob_.G, k); it; ++it) {
                trip_.emplace_back(n + p + it.row(), it.col(), it.value());
                trip_.emplace_back(it.col(), n + p + it.row(), it.value());
            }
        // -W^2 block: diagonal for the nonneg rows, dense per SOC block
        if (W != nullptr) {
            for (int i = 0; i < K_.ml; ++i)
                trip_.emplace_back(n + p + i, n + p + i, -W->wl[i] * W->wl[i]);
            for (size_t bi = 0; bi < K_.start.size(); ++bi) {
                const int at = n + p + K_.start[bi], d = K_.dim[bi];
                const Eigen::VectorXd& wb = W->wbar[bi];
                const double e2 = W->eta[bi] * W->eta[bi];
                for (int r = 0; r < d; ++r)
                    for (int c = 0; c < d; ++c) {
                        double v = 2.0 * wb[r] * wb[c];
                        if (r == c) v -= (r == 0 ? 1.0 : -1.0);
                        trip_.emplace_back(at + r, at + c, -e2 * v);
                    }
            }
        } else {
            for (int i = 0; i < K_.ml; ++i)
                trip_.emplace_back(n + p + i, n + p + i, -1.0);
            // Emit full blocks (zeros off-diagonal) so the sparsity pattern
            // matches the scaled matrix and the symbolic analysis is reusable.
            for (size_t bi = 0; bi < K_.start.size(); ++bi) {
                const int at = n + p + K_.start[bi], d = K_.dim[bi];
                for (int r = 0; r < d; ++r)
                    for (int c = 0; c < d; ++c)
                        trip_.emplace_back(at + r, at + c, r == c ? -1.0 : 0.0);
            }
        }
        exact_.resize(N_, N_);
        exact_.setFromTriplets(trip_.begin(), trip_.end());
        // Retry with heavier regularization before declaring the step lost;
        // iterative refinement against the exact matrix wins the accuracy
        // back as long as the factorization itself survives.
        reg_ = kReg;
        while (!factor_with_reg()) {
            if (reg_ >= 1e-4) return false;
            reg_ *= 10.0;
        }
        return true;
    }

    /// Solve against the unregularized KKT by iterative refinement. When
    /// refinement stalls, refactorize with a stronger regularization (the
    /// refinement target stays the exact matrix, so accuracy is preserved).
    Eigen::VectorXd solve(const Eigen::VectorXd& rhs) {
        const double rhsn = std::max(1.0, rhs.norm());
        const double goal = 1e-12 * rhsn;
        Eigen::VectorXd u = ldlt_.solve(rhs);
        Eigen::VectorXd best = u;
        double bestn = kInf, rn = kInf;
        for (int sweep = 0; sweep < 50; ++sweep) {
            const Eigen::VectorXd res = rhs - exact_ * u;
            const double next = res.norm();
            if (next < bestn) {
                bestn = next;
                best = u;
            }
            if (next <= goal) break;
            if (next > 0.5 * rn) {  // no further progress at this reg
                // Escalate only while the residual is genuinely poor; a
                // stall at the refinement's roundoff floor is final.
                if (next <= 1e-9 * rhsn || reg_ >= 1e-6) break;
                reg_ *= 10.0;
                if (!factor_with_reg()) break;
                rn = kInf;
                u = ldlt_.solve(rhs);
                continue;
            }
            rn = next;
            u += ldlt_.solve(res);
        }
        if (trace)
            std::fprintf(stderr, "        kkt res=%.3e (rhs %.3e, reg %.1e)\n",
                         bestn, rhs.norm(), reg_);
        return best;
    }

    bool trace = false;

  private:
    bool factor_with_reg() {
        const int n = prob_.n;
        std::vector<Eigen::Triplet<double>> treg = trip_;
        for (int i = 0; i < n; ++i) treg.emplace_back(i, i, reg_);
        for (int i = n; i < N_; ++i) treg.emplace_back(i, i, -reg_);
        SpMat reg(N_, N_);
        reg.setFromTriplets(treg.begin(), treg.end());
        if (!analyzed_) {
            ldlt_.analyzePattern(reg);
            analyzed_ = true;
        }
        ldlt_.factorize(reg);
        return ldlt_.info() == Eigen::Success;
    }

    const ConicProblem& prob_;
    const Cones& K_;
    int N_;
    SpMat exact_;
    std::vector<Eigen::Triplet<double>> trip_;
    double reg_ = kReg;
    Eigen::SimplicialLDLT<SpMat> ldlt_;
    bool analyzed_ = false;
};

}  // namespace

namespace {

/// Mehrotra loop on an (already equilibrated) problem.
ConeSolution solve_ipm_core(const ConicProblem& prob, const BackendOptions& o) {
    const Cones K(prob);
    const int n = prob.n, p = static_cast<int>(prob.b.size()), m = K.m;
    ConeSolution sol;
    sol.x = Eigen::VectorXd::Zero(n);

    KktSolver kkt(prob, K);
    kkt.trace = o.trace;

    // Equality-constrained QP: a single refined KKT solve suffices.
    if (m == 0) {
        if (!kkt.factorize(nullptr)) return sol;
        Eigen::VectorXd rhs(n + p);
        rhs.head(n) = -prob.q;
        rhs.tail(p) = prob.b;
        const Eigen::VectorXd u = kkt.solve(rhs);
        if (!u.allFinite()) return sol;
        sol.x = u.head(n);
        sol.objective = prob.objective(sol.x);
        sol.dual_res = (prob.P * sol.x + prob.q +
                        prob.A.transpose() * u.tail(p)).norm();
        sol.primal_res = (prob.A * sol.x - prob.b).norm();
        sol.status = (sol.primal_res < o.tol * 1e3 && sol.dual_res < o.tol * 1e3)
                         ? ConeStatus::optimal
                         : ConeStatus::inaccurate;
        sol.iterations = 1;
        return sol;
    }

    // Initial point from one W = I KKT solve, shifted into the cones.
    if (!kkt.factorize(nullptr)) return sol;
    Eigen::VectorXd rhs(n + p + m);
    rhs.head(n) = -prob.q;
    rhs.segment(n, p) = prob.b;
    rhs.tail(m) = prob.h;
    Eigen::VectorXd u0 = kkt.solve(rhs);
    if (!u0.allFinite()) return sol;
    Eigen::VectorXd x = u0.head(n);
    Eigen::VectorXd y = u0.segment(n, p);
    Eigen::VectorXd z = u0.tail(m);
    Eigen::VectorXd s = -z;
    center_into_cone(s, K);
    center_into_cone(z, K);

    const Eigen::VectorXd e = cone_identity(K);
    const double bnorm = std::max(1.0, prob.b.norm());
    const double hnorm = std::max(1.0, prob.h.norm());
    const double qnorm = std::max(1.0, prob.q.norm());

    // Best iterate seen so far; degenerate problems can drift once the KKT
    // solves hit their accuracy floor, so the exit should not depend on
    // whatever the last step happened to do.
    double best_score = std::numeric_limits<double>::infinity();
    double best_pres = best_score, best_dres = best_score;
    double best_gap = best_score, best_relgap = best_score;
    Eigen::VectorXd best_x = x;
    int best_it = 0;

    for (int it = 1; it <= o.max_iterations; ++it) {
        const Eigen::VectorXd rx =
            prob.P * x + prob.q + prob.A.transpose() * y + prob.G.transpose() * z;
        const Eigen::VectorXd ry = prob.A * x - prob.b;
        const Eigen::VectorXd rz = prob.G * x + s - prob.h;
        const double gap = s.dot(z);
        const double pobj = prob.objective(x);
        const double pres = std::max(ry.norm() / bnorm, rz.norm() / hnorm);
        const double dres = rx.norm() / qnorm;
        const double relgap = gap / std::max(1.0, std::abs(pobj));

        sol.iterations = it - 1;
        const double score = std::max({pres, dres, relgap});
        if (score < best_score) {
            if (score < 0.99 * best_score) best_it = it;  // real progress
            best_score = score;
            best_pres = pres;
            best_dres = dres;
            best_gap = gap;
            best_relgap = relgap;
            best_x = x;
        }
        if (it - best_it >= 15) break;  // grinding at the numerical floor
        if (o.trace)
            std::fprintf(stderr,
                         "    ipm it=%2d pres=%.2e dres=%.2e gap=%.2e obj=%.6e\n",
                         it, pres, dres, gap, pobj);
        if (pres < o.tol && dres < o.tol && relgap < o.tol) {
            sol.x = x;
            sol.objective = pobj;
            sol.status = ConeStatus::optimal;
            return sol;
        }

        bool ok = true;
        const Scaling W = compute_scaling(s, z, K, ok);
        if (!ok || !kkt.factorize(&W)) break;
        const double mu = gap / K.degree;

        // Predictor: d = -lambda, so the cone rhs collapses to s - rz.
        rhs.head(n) = -rx;
        rhs.segment(n, p) = -ry;
        rhs.tail(m) = -rz + s;
        Eigen::VectorXd aff = kkt.solve(rhs);
        if (!aff.allFinite()) break;
        Eigen::VectorXd dz_aff = aff.tail(m);
        // Recover ds from the cone row G dx + ds = -rz directly; forming it
        // through W^2 dz would amplify dz roundoff by the inactive scalings.
        Eigen::VectorXd ds_aff = -rz - prob.G * aff.head(n);

        double alpha_aff = std::min({1.0, max_cone_step(s, ds_aff, K),
                                     max_cone_step(z, dz_aff, K)});
        const double mu_aff =
            (s + alpha_aff * ds_aff).dot(z + alpha_aff * dz_aff) / K.degree;
        double sigma = std::pow(std::max(0.0, mu_aff / mu), 3.0);
        sigma = std::min(1.0, sigma);

        // Corrector: d = lambda \ (sigma mu e - lambda o lambda - corr).
        const Eigen::VectorXd corr = jordan_prod(
            apply_w_inv(W, K, ds_aff), apply_w(W, K, dz_aff), K);
        Eigen::VectorXd target =
            sigma * mu * e - jordan_prod(W.lambda, W.lambda, K) - corr;
        Eigen::VectorXd d = jordan_solve(W.lambda, target, K, ok);
        if (!ok) break;
        rhs.head(n) = -rx;
        rhs.segment(n, p) = -ry;
        rhs.tail(m) = -rz - apply_w(W, K, d);
        Eigen::VectorXd dir = kkt.solve(rhs);
        if (!dir.allFinite()) break;
        const Eigen::VectorXd dx = dir.head(n);
        const Eigen::VectorXd dy = dir.segment(n, p);
        const Eigen::VectorXd dz = dir.tail(m);
        const Eigen::VectorXd ds = -rz - prob.G * dx;

        double alpha = kStep * std::min(max_cone_step(s, ds, K),
                                        max_cone_step(z, dz, K));
        alpha = std::min(1.0, alpha);
        if (o.trace)
            std::fprintf(stderr, "        alpha=%.3e sigma=%.3e mu=%.3e\n",
                         alpha, sigma, mu);
        if (alpha < 1e-13) break;  // no usable step left

        x += alpha * dx;
        y += alpha * dy;
        z += alpha * dz;
        s += alpha * ds;
    }

    // Classify the non-converged exit from the best iterate seen. A relaxed
    // residual band still yields a usable candidate step for the caller;
    // "inaccurate" flags exactly that, and anything worse is a failure.
    sol.x = best_x;
    sol.objective = prob.objective(best_x);
    sol.primal_res = best_pres;
    sol.dual_res = best_dres;
    sol.gap = best_gap;
    // Residuals certify the returned point; the duality gap may plateau a
    // few orders above tolerance when the scaling matrices become extreme
    // near the optimum, which limits objective accuracy but not feasibility.
    const double loose = std::max(1e-5, o.tol * 1e3);
    if (best_pres < loose && best_dres < loose && best_relgap < 1e-3)
        sol.status = ConeStatus::inaccurate;
    else if (best_gap / K.degree < o.tol && best_pres > 1e-4)
        sol.status = ConeStatus::infeasible;
    else
        sol.status = ConeStatus::failure;
    return sol;
}

/// Diagonal scalings that map the original problem onto a balanced one.
/// Rows inside one SOC block share a factor, which keeps the cone invariant.
struct Equilibration {
    Eigen::VectorXd d;   // column scales (n)
    Eigen::VectorXd ea;  // equality row scales (p)
    Eigen::VectorXd eg;  // cone row scales (m)
    double c = 1.0;      // objective scale
};

/// Modified Ruiz iteration over the stacked [P; A; G] pattern. Deterministic:
/// a fixed number of sweeps, no data-dependent branching beyond zero guards.
Equilibration equilibrate(const ConicProblem& prob, const Cones& K) {
    const int n = prob.n, p = static_cast<int>(prob.b.size()), m = K.m;
    Equilibration E;
    E.d = Eigen::VectorXd::Ones(n);
    E.ea = Eigen::VectorXd::Ones(p);
    E.eg = Eigen::VectorXd::Ones(m);

    const auto sweep_rows = [&](const SpMat& M, const Eigen::VectorXd& rs,
                                Eigen::VectorXd& out) {
        out.setZero(rs.size());
        for (int k = 0; k < M.outerSize(); ++k)
            for (SpMat::InnerIterator it(M, k); it; ++it) {
                const double v = std::abs(rs[it.row()] * it.value() * E.d[it.col()]);
                out[it.row()] = std::max(out[it.row()], v);
            }
    };
    const auto accum_cols = [&](const SpMat& M, const Eigen::VectorXd& rs,
                                Eigen::VectorXd& cn) {
        for (int k = 0; k < M.outerSize(); ++k)
            for (SpMat::InnerIterator it(M, k); it; ++it) {
                const double v = std::abs(rs[it.row()] * it.value() * E.d[it.col()]);
                cn[it.col()] = std::max(cn[it.col()], v);
            }
    };

    for (int sweep = 0; sweep < 10; ++sweep) {
        Eigen::VectorXd ra, rg;
        sweep_rows(prob.A, E.ea, ra);
        sweep_rows(prob.G, E.eg, rg);
        for (int i = 0; i < p; ++i)
            if (ra[i] > 0.0) E.ea[i] /= std::sqrt(ra[i]);
        for (int i = 0; i < K.ml; ++i)
            if (rg[i] > 0.0) E.eg[i] /= std::sqrt(rg[i]);
        for (size_t bi = 0; bi < K.start.size(); ++bi) {
            const int at = K.start[bi], d = K.dim[bi];
            const double blk = rg.segment(at, d).maxCoeff();
            if (blk > 0.0) E.eg.segment(at, d) /= std::sqrt(blk);
        }
        Eigen::VectorXd cn = Eigen::VectorXd::Zero(n);
        accum_cols(prob.P, E.d, cn);  // P rows scale with d as well
        accum_cols(prob.A, E.ea, cn);
        accum_cols(prob.G, E.eg, cn);
        for (int j = 0; j < n; ++j)
            if (cn[j] > 0.0) E.d[j] /= std::sqrt(cn[j]);
    }
    const Eigen::VectorXd qs = E.d.cwiseProduct(prob.q);
    const double qmax = qs.size() ? qs.cwiseAbs().maxCoeff() : 0.0;
    E.c = 1.0 / std::max(1.0, qmax);
    // A gradient-driven cost scale can sink the scaled quadratic to the size
    // of the KKT regularization, which leaves the factorization effectively
    // singular on the primal block.  Keep the largest quadratic entry a few
    // orders above the regularization; the scale is cosmetic for the optimum.
    double pmax = 0.0;
    for (int j = 0; j < prob.P.outerSize(); ++j)
        for (Eigen::SparseMatrix<double>::InnerIterator it(prob.P, j); it; ++it)
            pmax = std::max(pmax, std::abs(E.d[it.row()] * it.value() * E.d[it.col()]));
    if (pmax > 0.0 && E.c * pmax < 1e-7) E.c = std::min(1.0, 1e-7 / pmax);
    return E;
}

}  // namespace

ConeSolution solve_ipm(const ConicProblem& prob, const BackendOptions& o) {
    prob.validate();
    const Cones K(prob);

    // Equilibrate, solve the balanced problem, then undo the scalings.
    // Residual/gap fields report the balanced solver's internal measures;
    // the objective is recomputed on the original data.
    const Equilibration E = equilibrate(prob, K);
    ConicProblem sp;
    sp.n = prob.n;
    sp.P = E.d.asDiagonal() * prob.P * E.d.asDiagonal();
    sp.P *= E.c;
    sp.q = E.c * E.d.cwiseProduct(prob.q);
    sp.A = E.ea.asDiagonal() * prob.A * E.d.asDiagonal();
    sp.b = E.ea.cwiseProduct(prob.b);
    sp.G = E.eg.asDiagonal() * prob.G * E.d.asDiagonal();
    sp.h = E.eg.cwiseProduct(prob.h);
    sp.nonneg_dim = prob.nonneg_dim;
    sp.soc_dims = prob.soc_dims;

    if (o.trace) {
        const auto mm = [](const char* tag, const SpMat& M) {
            double mx = 0.0, mn = kInf;
            bool fin = true;
            for (int k = 0; k < M.outerSize(); ++k)
                for (SpMat::InnerIterator it(M, k); it; ++it) {
                    if (!std::isfinite(it.value())) fin = false;
                    const double a = std::abs(it.value());
                    if (a > 0.0) mn = std::min(mn, a);
                    mx = std::max(mx, a);
                }
            std::fprintf(stderr, "%s[%.1e,%.1e]f%d ", tag, mn, mx, (int)fin);
        };
        std::fprintf(stderr, "    eq c=%.2e d[%.1e,%.1e] ", E.c,
                     E.d.minCoeff(), E.d.maxCoeff());
        mm("P", sp.P);
        mm("A", sp.A);
        mm("G", sp.G);
        std::fprintf(stderr, "q%.1e b%.1e h%.1e\n",
                     sp.q.size() ? sp.q.cwiseAbs().maxCoeff() : 0.0,
                     sp.b.size() ? sp.b.cwiseAbs().maxCoeff() : 0.0,
                     sp.h.size() ? sp.h.cwiseAbs().maxCoeff() : 0.0);
    }

    ConeSolution sol = solve_ipm_core(sp, o);
    sol.x = E.d.cwiseProduct(sol.x);
    sol.objective = prob.objective(sol.x);
    return sol;
}

ConeSolution backend_solve(const ConicProblem& prob, const BackendOptions& o) {
    if (o.name == "ipm") return solve_ipm(prob, o);
    if (o.name == "admm") return solve_admm(prob, o);
    throw BackendError("unknown cone backend '" + o.name + "'");
}

}  // namespace loiter
