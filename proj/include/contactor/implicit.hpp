#ifndef CONTACTOR_IMPLICIT_HPP
#define CONTACTOR_IMPLICIT_HPP

#include <map>
#include <string>
#include <vector>

#include "contactor/dynamics.hpp"
#include "contactor/expr.hpp"
#include "contactor/geometry.hpp"
#include "contactor/trajectory.hpp"

namespace contactor {

enum class DynamicsVariant { Contact, Evolution, Symplectic };

// Constrained generator E(base, lambda). Base coordinates are
// (q1..qn, p1..pn, z) for the contact/evolution variants and (q1..qn, p1..pn)
// for the symplectic one; the generator's variable list is base followed by
// the multipliers. k = 0 recovers an explicit Hamiltonian.
struct MorseFamilySystem {
    int n = 0;
    int k = 0;
    DynamicsVariant variant = DynamicsVariant::Contact;
    ScalarExpr gen;
    std::vector<std::string> multipliers;

    int base_dim() const {
        return variant == DynamicsVariant::Symplectic ? 2 * n : 2 * n + 1;
    }
    std::vector<std::string> base_vars() const {
        return variant == DynamicsVariant::Symplectic ? symplectic_state_vars(n)
                                                      : contact_state_vars(n);
    }
    std::vector<std::string> all_vars() const;

    static MorseFamilySystem make(int n, DynamicsVariant variant,
                                  const std::string& gen_text,
                                  const std::vector<std::string>& multipliers);
    static MorseFamilySystem from_hamiltonian(const HamiltonianSystem& sys,
                                              DynamicsVariant variant);
    // Generator qd.p - L with the velocities as multipliers.
    static MorseFamilySystem herglotz(const LagrangianSystem& sys,
                                      DynamicsVariant variant);
};

struct RankReport {
    int rank = 0;
    bool ok = false;
    double min_sv = 0.0;
    double max_sv = 0.0;
};

// Morse-family rank condition: the k x (base+k) matrix of second partials
// [d2E/dlambda dx | d2E/dlambda dlambda] must have full row rank k (SVD,
// relative threshold 1e-10). k = 0 passes trivially.
RankReport morse_rank_check(const MorseFamilySystem& sys, const Vec& x,
                            const Vec& lambda);

struct ConstraintSolveReport {
    Vec lambda;
    int iterations = 0;
    double residual_norm = 0.0;               // inf-norm over free multipliers
    double jacobian_min_singular_value = 0.0;
};

using PinnedMultipliers = std::map<std::string, double>;

// Damped Newton on g(lambda) = grad_lambda gen with Jacobian the lambda
// Hessian block; tolerance 1e-10 inf-norm, at most 50 iterations, step
// halving up to 30 times when the residual fails to decrease. Pinned
// multipliers are held at their values and excluded from the Newton system.
ConstraintSolveReport solve_constraint(const MorseFamilySystem& sys, const Vec& x,
                                       const Vec& lambda0,
                                       const PinnedMultipliers& pinned = {});

// Constraint gradient (all k components, pinned ones included).
Vec constraint_residual(const MorseFamilySystem& sys, const Vec& x,
                        const Vec& lambda);

// State rate at (x, lambda); lambda need not satisfy the constraint.
//   contact:    (E_p, -E_q - p E_z, p.E_p - E)
//   evolution:  (F_p, -F_q - p F_z, p.F_p)
//   symplectic: (F_p, -F_q)
Vec implicit_rhs(const MorseFamilySystem& sys, const Vec& x, const Vec& lambda);

// Half-explicit RK4: the constraint is re-solved at each stage (warm-started
// from the previous stage), then the rate is evaluated. Records lambda and
// the full constraint residual per node; throws ConsistencyLost when a
// post-step residual exceeds 1e-8.
Trajectory dae_integrate(const MorseFamilySystem& sys, const Vec& x0,
                         const Vec& lambda0, const IntegratorConfig& cfg,
                         const PinnedMultipliers& pinned = {});

enum class LegendrianTarget {
    TangentContact,   // (x, E_p, -E_q - p E_z, p.E_p - E, E_z)    dim 4n+3
    HorizontalTimesR, // (x, F_p, -F_q - p F_z, F_z)               dim 4n+2
    CotangentJet      // (x, -E_q, -E_p, -E_z, -E)                 dim 4n+3
};

// Tuple of the generated submanifold at one (x, lambda); lambda need not
// satisfy the constraint.
Vec submanifold_tuple(const MorseFamilySystem& sys, const Vec& x,
                      const Vec& lambda, LegendrianTarget target);

// Tuples of the generated submanifold at constraint-solved multipliers.
std::vector<Vec> legendrian_points(const MorseFamilySystem& sys,
                                   const std::vector<Vec>& xs, Vec lambda0,
                                   LegendrianTarget target);

// Same tuples as a differentiable parametrization of the base point; the
// multiplier sensitivity comes from the implicit function theorem, so the
// Jacobian is exact wherever the constraint Jacobian is regular.
ParamMap legendrian_param(const MorseFamilySystem& sys, LegendrianTarget target,
                          const Vec& lambda0);

// Generating function Phi(q^a, p_b) over a partition A u B of 1..n.
struct PhiGenerator {
    int n = 0;
    std::vector<int> A;  // 1-based coordinate indices
    std::vector<int> B;
    ScalarExpr phi;      // over q<a> for a in A, p<b> for b in B (A-order, then B-order)

    std::vector<std::string> domain_vars() const;
    static PhiGenerator make(int n, std::vector<int> A, std::vector<int> B,
                             const std::string& phi_text);
};

// (q^a, p_b) -> (q^a, q^b = -Phi_{p_b}, p_a = Phi_{q^a}, p_b,
//                z = Phi - p_b Phi_{p_b}), flattened as (q, p, z).
std::vector<Vec> phi_points(const PhiGenerator& g, const std::vector<Vec>& samples);
ParamMap phi_param(const PhiGenerator& g);

// Constrained generator over the configuration base: E(q, lambda) generates
// {(q, E_q, E) : E_lambda = 0} in the contact phase space.
struct LegendrianFamily {
    int n = 0;
    int k = 0;
    ScalarExpr gen;  // over (q1..qn, multipliers)
    std::vector<std::string> multipliers;
};

// E(q^a, q^b, p_b) = Phi + q^b p_b with the p_b as multipliers.
LegendrianFamily phi_to_morse(const PhiGenerator& g);

ConstraintSolveReport legendrian_family_solve(const LegendrianFamily& fam,
                                              const Vec& q, const Vec& lambda0);
// (q, E_q, E) at the given multiplier values, flattened as (q, p, z).
Vec legendrian_family_point(const LegendrianFamily& fam, const Vec& q,
                            const Vec& lambda);

} // namespace contactor

#endif
