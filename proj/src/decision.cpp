// decision.cpp: decision-vector index arithmetic.

#include "loiter/decision.hpp"

#include "loiter/errors.hpp"

namespace loiter {

void DecisionLayout::validate() const {
    if (n_arcs < 1) throw ConfigError("layout needs at least one arc");
    if (subarcs < 1) throw ConfigError("layout needs at least one subarc");
}

int DecisionLayout::node_offset(int arc, int k) const {
    if (arc < 0 || arc >= n_arcs || k < 0 || k > subarcs)
        throw ConfigError("node index outside layout");
    return (arc * nodes_per_arc() + k) * state_dim();
}

int DecisionLayout::dilation_offset(int arc) const {
    if (arc < 0 || arc >= n_arcs) throw ConfigError("arc index outside layout");
    return node_count() * state_dim() + 2 * arc;
}

int DecisionLayout::impulse_offset(int slot) const {
    if (slot < 0 || slot > n_arcs)
        throw ConfigError("impulse slot outside layout");
    return node_count() * state_dim() + 2 * n_arcs + 3 * slot;
}

double DecisionVector::node_y(int arc, int k) const {
    if (!layout.with_y)
        throw ConfigError("accumulator row absent from this layout");
    return v[layout.node_offset(arc, k) + 6];
}

}  // namespace loiter
