// conic.cpp: cone-problem container, validation, expression builder.

#include "loiter/conic.hpp"

#include <cmath>

#include "loiter/errors.hpp"

namespace loiter {

int ConicProblem::cone_rows() const {
    int m = nonneg_dim;
    for (int d : soc_dims) m += d;
    return m;
}

void ConicProblem::validate() const {
    if (n <= 0) throw BackendError("cone problem has no variables");
    if (q.size() != n) throw BackendError("q size mismatch");
    if (P.rows() != n || P.cols() != n) throw BackendError("P shape mismatch");
    if (A.cols() != n || A.rows() != b.size())
        throw BackendError("equality block shape mismatch");
    if (G.cols() != n || G.rows() != h.size())
        throw BackendError("cone block shape mismatch");
    if (nonneg_dim < 0) throw BackendError("negative nonneg dimension");
    for (int d : soc_dims)
        if (d < 2) throw BackendError("SOC blocks need dimension >= 2");
    if (cone_rows() != G.rows())
        throw BackendError("cone dimensions do not cover G");
    if (!q.allFinite() || !b.allFinite() || !h.allFinite())
        throw BackendError("cone problem has non-finite data");
}

double ConicProblem::objective(const Eigen::VectorXd& x) const {
    return 0.5 * x.dot(P * x) + q.dot(x);
}

const char* to_string(ConeStatus s) {
    switch (s) {
        case ConeStatus::optimal: return "optimal";
        case ConeStatus::inaccurate: return "inaccurate";
        case ConeStatus::infeasible: return "infeasible";
        default: return "failure";
    }
}

int ConicBuilder::add_vars(int count) {
    if (count < 1) throw BackendError("add_vars needs a positive count");
    const int first = n_;
    n_ += count;
    return first;
}

void ConicBuilder::obj_linear(int var, double coeff) {
    q_terms_.emplace_back(var, coeff);
}

void ConicBuilder::obj_quad_diag(int var, double coeff) {
    p_diag_.emplace_back(var, coeff);
}

void ConicBuilder::require_zero(const LinExpr& e) {
    const int row = static_cast<int>(eq_rhs_.size());
    for (const auto& [var, coeff] : e.terms)
        eq_trip_.emplace_back(row, var, coeff);
    eq_rhs_.push_back(-e.c);  // sum(a x) = -c
}

void ConicBuilder::require_nonneg(const LinExpr& e) {
    const int row = static_cast<int>(ineq_rhs_.size());
    // slack s = c + sum(a x) >= 0 becomes G row -a, h entry c
    for (const auto& [var, coeff] : e.terms)
        ineq_trip_.emplace_back(row, var, -coeff);
    ineq_rhs_.push_back(e.c);
}

void ConicBuilder::require_soc(const std::vector<LinExpr>& block) {
    if (block.size() < 2) throw BackendError("SOC blocks need dimension >= 2");
    for (const LinExpr& e : block) {
        const int row = static_cast<int>(soc_rhs_.size());
        for (const auto& [var, coeff] : e.terms)
            soc_trip_.emplace_back(row, var, -coeff);
        soc_rhs_.push_back(e.c);
    }
    soc_dims_.push_back(static_cast<int>(block.size()));
}

ConicProblem ConicBuilder::build() const {
    ConicProblem prob;
    prob.n = n_;
    prob.q = Eigen::VectorXd::Zero(n_);
    for (const auto& [var, coeff] : q_terms_) prob.q[var] += coeff;
    std::vector<Eigen::Triplet<double>> ptrip;
    ptrip.reserve(p_diag_.size());
    for (const auto& [var, coeff] : p_diag_)
        ptrip.emplace_back(var, var, coeff);
    prob.P.resize(n_, n_);
    prob.P.setFromTriplets(ptrip.begin(), ptrip.end());

    const int p = static_cast<int>(eq_rhs_.size());
    prob.A.resize(p, n_);
    prob.A.setFromTriplets(eq_trip_.begin(), eq_trip_.end());
    prob.b = Eigen::Map<const Eigen::VectorXd>(eq_rhs_.data(), p);

    const int ml = static_cast<int>(ineq_rhs_.size());
    const int ms = static_cast<int>(soc_rhs_.size());
    std::vector<Eigen::Triplet<double>> gtrip(ineq_trip_);
    gtrip.reserve(ineq_trip_.size() + soc_trip_.size());
    for (const auto& t : soc_trip_)
        gtrip.emplace_back(t.row() + ml, t.col(), t.value());
    prob.G.resize(ml + ms, n_);
    prob.G.setFromTriplets(gtrip.begin(), gtrip.end());
    prob.h.resize(ml + ms);
    for (int i = 0; i < ml; ++i) prob.h[i] = ineq_rhs_[i];
    for (int i = 0; i < ms; ++i) prob.h[ml + i] = soc_rhs_[i];
    prob.nonneg_dim = ml;
    prob.soc_dims = soc_dims_;
    prob.validate();
    return prob;
}

}  // namespace loiter
