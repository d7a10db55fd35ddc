// shooting.hpp: multiple-shooting transcription. Arcs live on a uniform
// parameter grid; each arc is cut into K subarcs whose endpoint map is
// integrated jointly with its variational system, so the returned transition
// matrices are derivatives of the actual discrete map.

#pragma once

#include <Eigen/Dense>
#include <vector>

#include "loiter/augmentation.hpp"
#include "loiter/cr3bp.hpp"
#include "loiter/decision.hpp"
#include "loiter/ode.hpp"
#include "loiter/trajectory.hpp"

namespace loiter {

/// Arc/subarc counts of the transcription grid.
struct MeshSpec {
    int n_arcs = 0;
    int subarcs_per_arc = 0;

    double subarc_span() const { return 1.0 / subarcs_per_arc; }
    void validate() const;
};

/// Propagation settings for the transcription map.
struct IntegratorOptions {
    enum class Mode { adaptive, rk4_fixed };
    Mode mode = Mode::adaptive;
    double rtol = 1e-11;  ///< adaptive mode controller tolerances
    double atol = 1e-13;
    int rk4_steps = 30;   ///< fixed-mode steps per subarc
};

/// Dynamics seen by the transcription: a state of dim() entries whose last
/// entry is physical time, flowing in the arc parameter at dilation s. The
/// right-hand side is linear in s, so the s-partial defaults to rhs at s=1.
class ArcSystem {
  public:
    virtual ~ArcSystem() = default;
    virtual int dim() const = 0;
    virtual bool with_y() const = 0;
    virtual void rhs(const Eigen::VectorXd& xs, double s,
                     Eigen::VectorXd& out) const = 0;
    virtual void jacobian(const Eigen::VectorXd& xs, double s,
                          Eigen::MatrixXd& out) const = 0;
    virtual void s_partial(const Eigen::VectorXd& xs,
                           Eigen::VectorXd& out) const {
        rhs(xs, 1.0, out);
    }
    /// Instantaneous violation integrand (per unit physical time); zero for
    /// systems that do not track one.
    virtual double violation_rate(const Eigen::VectorXd& xs) const {
        (void)xs;
        return 0.0;
    }
};

/// Relative CR3BP motion about the stored ephemeris, optionally carrying the
/// violation accumulator row.
class Cr3bpArcSystem : public ArcSystem {
  public:
    Cr3bpArcSystem(const TargetEphemeris& eph, const GravParams& grav,
                   const PathConstraintSet& path, bool with_y)
        : eph_(&eph), grav_(&grav), path_(&path), with_y_(with_y) {}

    int dim() const override { return with_y_ ? 8 : 7; }
    bool with_y() const override { return with_y_; }
    void rhs(const Eigen::VectorXd& xs, double s,
             Eigen::VectorXd& out) const override;
    void jacobian(const Eigen::VectorXd& xs, double s,
                  Eigen::MatrixXd& out) const override;
    double violation_rate(const Eigen::VectorXd& xs) const override;

  private:
    const TargetEphemeris* eph_;
    const GravParams* grav_;
    const PathConstraintSet* path_;
    bool with_y_;
};

/// Endpoint of one subarc plus its sensitivities.
struct SubarcResult {
    Eigen::VectorXd end;   ///< state at the subarc's right edge
    Eigen::MatrixXd stm;   ///< d(end)/d(start), dim x dim
    Eigen::MatrixXd sens;  ///< d(end)/d(dilation pair), dim x 2
    size_t n_steps = 0;    ///< integrator steps taken
};

/// Integrate over arc-local [u0, u1] under the FOH dilation pair S. A zero
/// span returns the start state with identity sensitivities.
SubarcResult integrate_span(const ArcSystem& sys, const Eigen::VectorXd& start,
                            const Eigen::Vector2d& S, double u0, double u1,
                            const IntegratorOptions& opts);

/// Subarc k (0-based) of an arc cut into K subarcs, with sensitivities.
SubarcResult integrate_subarc(const ArcSystem& sys,
                              const Eigen::VectorXd& start,
                              const Eigen::Vector2d& S, int k, int K,
                              const IntegratorOptions& opts);

/// Endpoint only (no variational block); used by merit evaluation.
Eigen::VectorXd integrate_subarc_state(const ArcSystem& sys,
                                       const Eigen::VectorXd& start,
                                       const Eigen::Vector2d& S, int k, int K,
                                       const IntegratorOptions& opts);

/// xk1 minus the propagated image of xk over subarc k.
Eigen::VectorXd defect(const ArcSystem& sys, const Eigen::VectorXd& xk,
                       const Eigen::VectorXd& xk1, const Eigen::Vector2d& S,
                       int k, int K, const IntegratorOptions& opts);

/// Dense flow of one whole arc (arc-local u in [0, 1]) for auditing.
DenseOdeSolution propagate_arc_dense(const ArcSystem& sys,
                                     const Eigen::VectorXd& start,
                                     const Eigen::Vector2d& S, double rtol);

/// Dense audit of a transcription iterate: re-propagates each arc from its
/// node start, samples a uniform global grid, and audits the shell.
struct DenseVerification {
    std::vector<TrajectorySample> samples;
    ViolationReport report;
    Eigen::VectorXd arc_budget;  ///< quadrature of the violation integrand
};

DenseVerification dense_verify(const DecisionVector& z, const ArcSystem& sys,
                               const GravParams& grav, double r_min_km,
                               double r_max_km, int grid_points, double rtol);

/// Uncontrolled relative drift from x0 (normalized) at t0 over span T,
/// sampled uniformly; used for drift studies and initial-guess audits.
std::vector<TrajectorySample> free_drift_samples(const TargetEphemeris& eph,
                                                 const GravParams& grav,
                                                 const Vec6& x0, double t0,
                                                 double T, int n_samples,
                                                 double rtol);

}  // namespace loiter
