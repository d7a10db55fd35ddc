// decision.hpp: flat decision vector for the multiple-shooting transcription
// and the index arithmetic that names its slices. Layout, in order: node
// states (arc-major, plus one terminal state), per-arc dilation coefficient
// pairs, per-slot impulses. Node states are 8-wide ([r v y t]) when the
// violation accumulator rides along, 7-wide ([r v t]) otherwise.

#pragma once

#include <Eigen/Dense>

#include "loiter/augmentation.hpp"

namespace loiter {

struct DecisionLayout {
    int n_arcs = 0;
    int subarcs = 0;     ///< K: subarcs (and defects) per arc
    bool with_y = true;  ///< accumulator row present in node states

    int state_dim() const { return with_y ? 8 : 7; }
    int nodes_per_arc() const { return subarcs + 1; }
    int node_count() const { return n_arcs * nodes_per_arc() + 1; }
    int impulse_slots() const { return n_arcs + 1; }
    int dim() const {
        return node_count() * state_dim() + 2 * n_arcs + 3 * impulse_slots();
    }

    /// Offset of node k (0..K) of arc i (0-based), or of the terminal state.
    int node_offset(int arc, int k) const;
    int terminal_offset() const { return node_offset(n_arcs - 1, subarcs) + state_dim(); }
    int dilation_offset(int arc) const;
    int impulse_offset(int slot) const;

    void validate() const;  ///< throws ConfigError on nonsensical sizes
};

/// Decision vector with named accessors. All accessors return live views.
struct DecisionVector {
    DecisionLayout layout;
    Eigen::VectorXd v;

    static DecisionVector zeros(const DecisionLayout& l) {
        return {l, Eigen::VectorXd::Zero(l.dim())};
    }

    Eigen::VectorBlock<Eigen::VectorXd> node(int arc, int k) {
        return v.segment(layout.node_offset(arc, k), layout.state_dim());
    }
    Eigen::VectorBlock<const Eigen::VectorXd> node(int arc, int k) const {
        return v.segment(layout.node_offset(arc, k), layout.state_dim());
    }
    Eigen::VectorBlock<Eigen::VectorXd> terminal() {
        return v.segment(layout.terminal_offset(), layout.state_dim());
    }
    Eigen::VectorBlock<const Eigen::VectorXd> terminal() const {
        return v.segment(layout.terminal_offset(), layout.state_dim());
    }
    Eigen::VectorBlock<Eigen::VectorXd> dilation(int arc) {
        return v.segment(layout.dilation_offset(arc), 2);
    }
    Eigen::VectorBlock<const Eigen::VectorXd> dilation(int arc) const {
        return v.segment(layout.dilation_offset(arc), 2);
    }
    Eigen::VectorBlock<Eigen::VectorXd> impulse(int slot) {
        return v.segment(layout.impulse_offset(slot), 3);
    }
    Eigen::VectorBlock<const Eigen::VectorXd> impulse(int slot) const {
        return v.segment(layout.impulse_offset(slot), 3);
    }

    /// t component of a node state (last entry of the slice).
    double node_time(int arc, int k) const {
        return v[layout.node_offset(arc, k) + layout.state_dim() - 1];
    }
    double terminal_time() const {
        return v[layout.terminal_offset() + layout.state_dim() - 1];
    }
    /// y component (slot 6); requires with_y.
    double node_y(int arc, int k) const;
};

}  // namespace loiter
