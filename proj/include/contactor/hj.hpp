#ifndef CONTACTOR_HJ_HPP
#define CONTACTOR_HJ_HPP

#include <vector>

#include "contactor/implicit.hpp"

namespace contactor {

// Characteristic function W(q). Either symbolic over q1..qn, or a tabulated
// 1-D cubic Hermite interpolant (value and derivative at every node). Second
// derivatives differentiate the cubic interpolant of the derivative table,
// whose node slopes come from three-point differences; this keeps W'' at the
// table's accuracy instead of amplifying node-value roundoff by 1/h^2.
class CharacteristicFn {
public:
    CharacteristicFn() = default;

    static CharacteristicFn symbolic(int n, const std::string& text);
    static CharacteristicFn symbolic(int n, ScalarExpr W);
    static CharacteristicFn tabulated(std::vector<double> q,
                                      std::vector<double> w,
                                      std::vector<double> dw);

    int n() const { return n_; }
    bool is_tabulated() const { return tabulated_; }
    double value(const Vec& q) const;
    Vec grad(const Vec& q) const;
    Mat hess(const Vec& q) const;

private:
    void locate(double q, int& piece, double& t, double& h) const;

    int n_ = 0;
    bool tabulated_ = false;
    ScalarExpr W_;
    std::vector<double> tq_, tw_, td_, ts_;
};

// Full phase-space point on the section: contact (q, grad W, z) with z from
// the reduced state; evolution (q, grad W, W); symplectic (q, grad W).
Vec section_point(const MorseFamilySystem& sys, const CharacteristicFn& W,
                  const Vec& reduced);

// Reduced-space dimension: n+1 (contact: (q, z)) or n (evolution/symplectic).
int reduced_dim(const MorseFamilySystem& sys);

// Projected rate on the reduced space at a constraint-satisfying lambda
// (checked to 1e-10, else ConstraintViolated): contact (qdot, zdot),
// evolution and symplectic (qdot).
Vec reduced_vf(const MorseFamilySystem& sys, const CharacteristicFn& W,
               const Vec& reduced, const Vec& lambda);

struct HJReport {
    Vec residual;             // n dq-components of the condition
    Vec constraint_residual;  // grad_lambda gen on the section
    double dz_cancellation = 0.0;
    double tolerance = 0.0;
    bool verdict = false;
};

// Hamilton-Jacobi residual at a reduced point:
//   contact/evolution:  W''_ij gen_pj + gen_qi + W'_i gen_z    (on the section)
//   symplectic:         W''_ij gen_pj + gen_qi
// The =c forms are tested through the gradient of the composed function, so
// the integration constant never enters. dz_cancellation compares the
// z-slot of d(gen o section) assembled through the section's Jacobian with
// gen_z times the pulled-back contact form; it vanishes identically in the
// contact case and is 0 by convention when the reduced space has no z.
HJReport hj_residual(const MorseFamilySystem& sys, const CharacteristicFn& W,
                     const Vec& reduced, const Vec& lambda, double tol = 1e-10);

// Max entrywise mismatch between the section-lifted reduced tuple and the
// generated submanifold tuple restricted to the section. Only the pdot slot
// can differ, and its value equals the hj_residual entry.
double gamma_related_check(const MorseFamilySystem& sys, const CharacteristicFn& W,
                           const std::vector<Vec>& samples, Vec lambda0);

// RK4 on the reduced dynamics (constraint re-solved per stage for k > 0).
Trajectory integrate_reduced(const MorseFamilySystem& sys,
                             const CharacteristicFn& W, const Vec& reduced0,
                             const IntegratorConfig& cfg, Vec lambda0);

struct LiftResult {
    Trajectory full;
    double max_residual = 0.0;
};

// Lifts a reduced trajectory through the section and measures the full
// equations' defect by centered differences at interior nodes. The reduced
// run must itself solve the reduced system to `pre_tol`
// (ReducedNotASolution otherwise).
LiftResult lift_solution(const CharacteristicFn& W, const Trajectory& reduced,
                         const MorseFamilySystem& sys, Vec lambda0,
                         double pre_tol = 1e-6);

struct HJ1DSolution {
    CharacteristicFn W;
    std::vector<double> grid;
    std::vector<double> values;
    std::vector<double> derivs;
    std::vector<double> residuals;  // |H(q, W', W) - c| at the nodes
};

// Treats H(q, W', W) = c as an implicit ODE for W on a 1-D grid: at each
// node/stage Newton-solves H(q, w, W) = c for w on the chosen branch
// (continuation by warm start; at the first node the root is bracketed by a
// sign scan, branch +/- picking the largest/smallest root) and advances W
// with RK4. BranchLoss on Newton failure or |H_p| < 1e-8 (turning point).
HJ1DSolution solve_evolution_hj_1d(const HamiltonianSystem& sys, double c,
                                   const std::vector<double>& qgrid, double W0,
                                   int branch);

// Explicit-Hamiltonian conveniences (k = 0 families).
HJReport hj_residual(const HamiltonianSystem& sys, ContactVariant variant,
                     const CharacteristicFn& W, const Vec& reduced,
                     double tol = 1e-10);
double gamma_related_check(const HamiltonianSystem& sys, ContactVariant variant,
                           const CharacteristicFn& W,
                           const std::vector<Vec>& samples);

} // namespace contactor

#endif
