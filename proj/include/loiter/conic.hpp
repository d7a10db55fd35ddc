// conic.hpp: sparse convex cone subproblems in standard form
//
//   minimize    (1/2) x'Px + q'x
//   subject to  Ax = b
//               Gx + s = h,   s in (R+)^nonneg x SOC(d_1) x ... x SOC(d_k)
//
// plus an expression-level builder and the two interchangeable solvers
// (a Mehrotra predictor-corrector interior-point method, and an operator-
// splitting reference used for cross-checking).

#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <string>
#include <utility>
#include <vector>

namespace loiter {

using SpMat = Eigen::SparseMatrix<double>;

struct ConicProblem {
    int n = 0;  ///< variable count
    SpMat P;    ///< n x n, diagonal PSD (may be zero)
    Eigen::VectorXd q;
    SpMat A;  ///< p x n equalities
    Eigen::VectorXd b;
    SpMat G;  ///< m x n cone rows: nonneg block first, then SOC blocks
    Eigen::VectorXd h;
    int nonneg_dim = 0;
    std::vector<int> soc_dims;

    int cone_rows() const;
    void validate() const;  ///< throws BackendError on inconsistent shapes
    double objective(const Eigen::VectorXd& x) const;
};

enum class ConeStatus { optimal, inaccurate, infeasible, failure };

const char* to_string(ConeStatus s);

struct ConeSolution {
    Eigen::VectorXd x;
    ConeStatus status = ConeStatus::failure;
    double objective = 0.0;
    int iterations = 0;
    double gap = 0.0;        ///< complementarity gap at exit
    double primal_res = 0.0;
    double dual_res = 0.0;
};

struct BackendOptions {
    std::string name = "ipm";  ///< "ipm" or "admm"
    double tol = 1e-9;
    int max_iterations = 100;     ///< interior-point iterations
    int admm_max_iterations = 400000;
    bool trace = false;           ///< per-iteration dump on stderr
};

/// Dispatch on options.name; throws BackendError for unknown names.
/// Solver failure is reported through ConeSolution::status, never thrown.
ConeSolution backend_solve(const ConicProblem& prob, const BackendOptions& o);

ConeSolution solve_ipm(const ConicProblem& prob, const BackendOptions& o);
ConeSolution solve_admm(const ConicProblem& prob, const BackendOptions& o);

/// Affine expression c + sum(coeff * x[var]) used to phrase constraints.
struct LinExpr {
    double c = 0.0;
    std::vector<std::pair<int, double>> terms;

    LinExpr() = default;
    explicit LinExpr(double constant) : c(constant) {}
    LinExpr& add(int var, double coeff) {
        terms.emplace_back(var, coeff);
        return *this;
    }
};

/// Incremental assembler. Nonnegativity rows collect separately from SOC
/// blocks so the finished G carries the nonneg block first.
class ConicBuilder {
  public:
    int add_vars(int count);
    int num_vars() const { return n_; }

    void obj_linear(int var, double coeff);     // accumulates into q
    void obj_quad_diag(int var, double coeff);  // accumulates into diag(P)

    void require_zero(const LinExpr& e);        // e == 0
    void require_nonneg(const LinExpr& e);      // e >= 0
    void require_soc(const std::vector<LinExpr>& block);  // block in SOC

    ConicProblem build() const;

    int num_eq_rows() const { return static_cast<int>(eq_rhs_.size()); }
    int num_nonneg_rows() const { return static_cast<int>(ineq_rhs_.size()); }
    int num_soc_blocks() const { return static_cast<int>(soc_dims_.size()); }

  private:
    int n_ = 0;
    std::vector<std::pair<int, double>> p_diag_;
    std::vector<std::pair<int, double>> q_terms_;
    std::vector<Eigen::Triplet<double>> eq_trip_;
    std::vector<double> eq_rhs_;
    std::vector<Eigen::Triplet<double>> ineq_trip_;
    std::vector<double> ineq_rhs_;
    std::vector<Eigen::Triplet<double>> soc_trip_;
    std::vector<double> soc_rhs_;
    std::vector<int> soc_dims_;
};

}  // namespace loiter
