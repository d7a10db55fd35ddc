// admm.cpp: operator-splitting cone solver used as an independent reference
// for the interior-point backend. Splits on w = Kx with K = [A; G] and
// projects w onto the shifted cone {w : u - w in {0}^p x R+^l x SOCs}.

#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <vector>

#include "loiter/conic.hpp"
#include "loiter/errors.hpp"

namespace loiter {

namespace {

void project_soc(Eigen::Ref<Eigen::VectorXd> u) {
    const int d = static_cast<int>(u.size());
    const double t = u[0], rn = u.tail(d - 1).norm();
    if (rn <= t) return;        // already inside
    if (rn <= -t) {             // polar interior: project to the origin
        u.setZero();
        return;
    }
    const double c = 0.5 * (t + rn);
    u[0] = c;
    u.tail(d - 1) *= c / rn;
}

}  // namespace

ConeSolution solve_admm(const ConicProblem& prob, const BackendOptions& o) {
    prob.validate();
    const int n = prob.n;
    const int p = static_cast<int>(prob.b.size());
    const int ml = prob.nonneg_dim;
    const int m = prob.cone_rows();
    const int rows = p + m;

    // Stacked constraint operator and its cone-shifted target u.
    SpMat K(rows, n);
    {
        std::vector<Eigen::Triplet<double>> trip;
        for (int k = 0; k < prob.A.outerSize(); ++k)
            for (SpMat::InnerIterator it(prob.A, k); it; ++it)
                trip.emplace_back(it.row(), it.col(), it.value());
        for (int k = 0; k < prob.G.outerSize(); ++k)
            for (SpMat::InnerIterator it(prob.G, k); it; ++it)
                trip.emplace_back(p + it.row(), it.col(), it.value());
        K.setFromTriplets(trip.begin(), trip.end());
    }
    Eigen::VectorXd u(rows);
    u.head(p) = prob.b;
    u.tail(m) = prob.h;

    constexpr double sigma = 1e-6;
    constexpr double relax = 1.6;
    double rho = 1.0;
    const double rho_eq_boost = 1e3;  // stiffer penalty on equality rows

    Eigen::VectorXd rho_rows(rows);
    Eigen::SimplicialLDLT<SpMat> ldlt;
    const auto refactor = [&]() {
        rho_rows.head(p).setConstant(rho * rho_eq_boost);
        rho_rows.tail(m).setConstant(rho);
        const SpMat Kt = K.transpose();
        const SpMat KtR = Kt * rho_rows.asDiagonal();
        SpMat M = prob.P + SpMat(KtR * K);
        SpMat eye(n, n);
        eye.setIdentity();
        M = M + SpMat(sigma * eye);
        ldlt.compute(M);
        if (ldlt.info() != Eigen::Success)
            throw BackendError("splitting solver could not factor its system");
    };
    refactor();

    // Projection onto {w : u - w in cone}: zero rows force w = u exactly.
    const auto project = [&](Eigen::VectorXd& w) {
        w.head(p) = u.head(p);
        for (int i = 0; i < ml; ++i) w[p + i] = std::min(w[p + i], u[p + i]);
        int at = p + ml;
        for (int d : prob.soc_dims) {
            Eigen::VectorXd res = u.segment(at, d) - w.segment(at, d);
            project_soc(res);
            w.segment(at, d) = u.segment(at, d) - res;
            at += d;
        }
    };

    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd w = u;
    project(w);
    Eigen::VectorXd lam = Eigen::VectorXd::Zero(rows);

    ConeSolution sol;
    sol.x = x;
    const int iters = std::max(o.admm_max_iterations, 100);
    double rp = 0.0, rd = 0.0, ptol = 1.0, dtol = 1.0;
    for (int it = 1; it <= iters; ++it) {
        const Eigen::VectorXd xhat = ldlt.solve(
            sigma * x - prob.q + K.transpose() * (rho_rows.cwiseProduct(w) - lam));
        const Eigen::VectorXd what = K * xhat;
        const Eigen::VectorXd wrel = relax * what + (1.0 - relax) * w;
        Eigen::VectorXd wnew = wrel + lam.cwiseQuotient(rho_rows);
        project(wnew);
        lam += rho_rows.cwiseProduct(wrel - wnew);
        x = xhat;
        w = wnew;
        if (!x.allFinite()) {
            sol.status = ConeStatus::failure;
            return sol;
        }

        if (it % 25 == 0 || it == iters) {
            const Eigen::VectorXd kx = K * x;
            rp = (kx - w).lpNorm<Eigen::Infinity>();
            const Eigen::VectorXd px = prob.P * x;
            const Eigen::VectorXd ktl = K.transpose() * lam;
            rd = (px + prob.q + ktl).lpNorm<Eigen::Infinity>();
            ptol = std::max({1.0, kx.lpNorm<Eigen::Infinity>(),
                             w.lpNorm<Eigen::Infinity>()});
            dtol = std::max({1.0, px.lpNorm<Eigen::Infinity>(),
                             ktl.lpNorm<Eigen::Infinity>(),
                             prob.q.lpNorm<Eigen::Infinity>()});
            sol.iterations = it;
            if (rp <= o.tol * ptol && rd <= o.tol * dtol) {
                sol.x = x;
                sol.objective = prob.objective(x);
                sol.primal_res = rp;
                sol.dual_res = rd;
                sol.status = ConeStatus::optimal;
                return sol;
            }
        }
        if (it % 2000 == 0) {  // residual-balancing penalty update
            const double ratio =
                std::sqrt((rp / ptol) / std::max(rd / dtol, 1e-16));
            const double rho_new =
                std::clamp(rho * std::clamp(ratio, 0.2, 5.0), 1e-6, 1e6);
            if (rho_new > 5.0 * rho || rho_new < rho / 5.0) {
                rho = rho_new;
                refactor();
            }
        }
    }

    sol.x = x;
    sol.objective = prob.objective(x);
    sol.primal_res = rp;
    sol.dual_res = rd;
    sol.status = (rp <= 1e3 * o.tol * ptol && rd <= 1e3 * o.tol * dtol)
                     ? ConeStatus::inaccurate
                     : ConeStatus::failure;
    return sol;
}

}  // namespace loiter
