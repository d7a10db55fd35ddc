// ode.hpp: explicit Runge-Kutta integrators shared across the library.
// dopri5_* is the adaptive Dormand-Prince 5(4) pair with 4th-order dense
// output (the verification/ephemeris integrator); rk4_fixed is the classical
// fixed-step scheme kept for order tests and as a transcription fallback.

#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <functional>
#include <vector>

#include "loiter/errors.hpp"

namespace loiter {

/// Right-hand side callback: writes dx = f(t, x) into the provided vector.
using OdeRhs =
    std::function<void(double t, const Eigen::VectorXd& x, Eigen::VectorXd& dx)>;

struct OdeOptions {
    double rtol = 1e-10;
    double atol = 1e-12;
    std::size_t max_steps = 2'000'000;
    double initial_step = 0.0;  ///< 0 = choose automatically
};

/// One accepted Dormand-Prince step with its dense-output polynomial.
struct OdeStep {
    double t0 = 0.0;
    double h = 0.0;
    Eigen::VectorXd rcont1, rcont2, rcont3, rcont4, rcont5;
};

/// Dense-output trajectory: evaluable anywhere inside [t_begin, t_end].
class DenseOdeSolution {
  public:
    double t_begin() const { return t_begin_; }
    double t_end() const { return t_end_; }
    std::size_t step_count() const { return steps_.size(); }
    const Eigen::VectorXd& end_state() const { return end_state_; }

    /// Interpolated state; throws DynamicsError outside the covered span.
    Eigen::VectorXd evaluate(double t) const;

    friend DenseOdeSolution dopri5_dense(const OdeRhs& f, double t0, double t1,
                                         const Eigen::VectorXd& y0,
                                         const OdeOptions& o);

  private:
    double t_begin_ = 0.0;
    double t_end_ = 0.0;
    std::vector<OdeStep> steps_;
    Eigen::VectorXd end_state_;
};

/// Adaptive integration over [t0, t1] (t1 > t0) storing dense output.
DenseOdeSolution dopri5_dense(const OdeRhs& f, double t0, double t1,
                              const Eigen::VectorXd& y0, const OdeOptions& o);

/// Adaptive integration returning the end state only (no step storage).
Eigen::VectorXd dopri5_endpoint(const OdeRhs& f, double t0, double t1,
                                const Eigen::VectorXd& y0, const OdeOptions& o,
                                std::size_t* n_steps = nullptr);

/// Classical RK4 with n_steps equal steps over [t0, t1].
Eigen::VectorXd rk4_fixed(const OdeRhs& f, double t0, double t1,
                          const Eigen::VectorXd& y0, int n_steps);

}  // namespace loiter
