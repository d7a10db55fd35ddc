// trajectory.hpp: densely sampled relative trajectories and the violation
// audit computed from them. Samples carry kilometre/second units so CSV
// files are directly plottable; the audit works in the same units so a
// write/reload round trip reproduces it bit for bit.

#pragma once

#include <vector>

#include "loiter/cr3bp.hpp"

namespace loiter {

struct TrajectorySample {
    double t_days = 0.0;   ///< physical time since loiter start
    double t_norm = 0.0;   ///< same instant, normalized units
    Vec3 r_km;             ///< relative position [km]
    Vec3 v_mps;            ///< relative velocity [m/s]
    double radius_km = 0;  ///< ‖r_km‖, precomputed for audits and plots
    int arc = 0;           ///< 1-based coast-arc index
    double y_acc = 0.0;    ///< violation accumulator (resets per arc)
};

/// Per-arc slice of the audit.
struct ArcViolation {
    int arc = 0;
    double min_radius_km = 0.0;
    double max_radius_km = 0.0;
    int keep_out_hits = 0;           ///< samples with radius < r_min
    double keep_in_depth_km = 0.0;   ///< max excursion beyond r_max
    double keep_in_span = 0.0;       ///< tau span spent beyond r_max
    double y_final = 0.0;            ///< accumulator value at arc end
};

/// Shell audit over a dense sample set.
struct ViolationReport {
    std::vector<ArcViolation> arcs;
    int keep_out_hits = 0;
    double keep_in_depth_km = 0.0;
    double keep_in_span = 0.0;
    double min_radius_km = 0.0;
    double max_radius_km = 0.0;
    bool keep_out_clean = false;

    /// Build the audit from samples ordered by arc then time. Samples are
    /// assumed uniform in the arc parameter, so spans are sample fractions
    /// scaled by the arc count.
    static ViolationReport from_samples(const std::vector<TrajectorySample>& s,
                                        double r_min_km, double r_max_km,
                                        int n_arcs);
};

}  // namespace loiter
