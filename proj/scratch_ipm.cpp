// scratch: exercise the cone backends on small closed-form problems
#include <cstdio>
#include <cmath>
#include <random>
#include "loiter/conic.hpp"

using namespace loiter;

int main() {
    // 1) box QP: min 1/2 x'x - x'1 s.t. 0 <= x <= 0.4  -> x = 0.4*ones
    {
        ConicBuilder cb;
        cb.add_vars(3);
        for (int i = 0; i < 3; ++i) {
            cb.obj_quad_diag(i, 1.0);
            cb.obj_linear(i, -1.0);
            cb.require_nonneg(LinExpr().add(i, 1.0));               // x >= 0
            cb.require_nonneg(LinExpr(0.4).add(i, -1.0));           // x <= 0.4
        }
        BackendOptions o;
        for (const char* name : {"ipm", "admm"}) {
            o.name = name;
            const ConeSolution s = backend_solve(cb.build(), o);
            std::printf("box-qp %s: status=%s x=(%.8f %.8f %.8f)\n", name,
                        to_string(s.status), s.x[0], s.x[1], s.x[2]);
        }
    }
    // 2) SOC projection: min ||x-a||^2 s.t. ||x|| <= 1, a=(2,1,0) -> a/|a|
    {
        ConicBuilder cb;
        cb.add_vars(3);
        const Eigen::Vector3d a(2.0, 1.0, 0.0);
        for (int i = 0; i < 3; ++i) {
            cb.obj_quad_diag(i, 2.0);
            cb.obj_linear(i, -2.0 * a[i]);
        }
        std::vector<LinExpr> blk(4);
        blk[0] = LinExpr(1.0);  // head = 1
        for (int i = 0; i < 3; ++i) blk[1 + i] = LinExpr().add(i, 1.0);
        cb.require_soc(blk);
        const Eigen::Vector3d want = a / a.norm();
        BackendOptions o;
        for (const char* name : {"ipm", "admm"}) {
            o.name = name;
            const ConeSolution s = backend_solve(cb.build(), o);
            std::printf("soc-proj %s: status=%s err=%.2e\n", name,
                        to_string(s.status), (s.x - want).norm());
        }
    }
    // 3) random strongly convex QPs with eq + ineq + one SOC; ipm vs admm
    {
        std::mt19937_64 rng(7);
        std::normal_distribution<double> g(0.0, 1.0);
        int agree = 0, total = 0;
        for (int trial = 0; trial < 20; ++trial) {
            const int nx = 8;
            ConicBuilder cb;
            cb.add_vars(nx);
            for (int i = 0; i < nx; ++i) {
                cb.obj_quad_diag(i, 1.0 + std::abs(g(rng)));
                cb.obj_linear(i, g(rng));
            }
            for (int r = 0; r < 2; ++r) {
                LinExpr e(0.3 * g(rng));
                for (int i = 0; i < nx; ++i) e.add(i, g(rng));
                cb.require_zero(e);
            }
            for (int r = 0; r < 3; ++r) {
                LinExpr e(2.0 + std::abs(g(rng)));
                for (int i = 0; i < nx; ++i) e.add(i, 0.3 * g(rng));
                cb.require_nonneg(e);
            }
            std::vector<LinExpr> blk(3);
            blk[0] = LinExpr(2.0).add(0, 1.0);
            blk[1] = LinExpr().add(1, 1.0);
            blk[2] = LinExpr().add(2, 1.0);
            cb.require_soc(blk);
            BackendOptions o;
            o.name = "ipm";
            const ConeSolution si = backend_solve(cb.build(), o);
            o.name = "admm";
            const ConeSolution sa = backend_solve(cb.build(), o);
            ++total;
            if (si.status == ConeStatus::optimal &&
                sa.status == ConeStatus::optimal &&
                std::abs(si.objective - sa.objective) <
                    1e-5 * (1.0 + std::abs(si.objective)))
                ++agree;
            else
                std::printf("trial %d: ipm=%s obj=%.10f admm=%s obj=%.10f\n",
                            trial, to_string(si.status), si.objective,
                            to_string(sa.status), sa.objective);
        }
        std::printf("random socp agreement: %d/%d\n", agree, total);
    }
    return 0;
}
