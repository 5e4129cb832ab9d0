#ifndef CONTACTOR_DYNAMICS_HPP
#define CONTACTOR_DYNAMICS_HPP

#include <functional>
#include <string>
#include <vector>

#include "contactor/expr.hpp"
#include "contactor/geometry.hpp"
#include "contactor/trajectory.hpp"

namespace contactor {

enum class ContactVariant { Contact, Evolution };

inline std::vector<std::string> contact_state_vars(int n) {
    std::vector<std::string> v;
    for (int i = 1; i <= n; ++i) v.push_back("q" + std::to_string(i));
    for (int i = 1; i <= n; ++i) v.push_back("p" + std::to_string(i));
    v.push_back("z");
    return v;
}

inline std::vector<std::string> lagrangian_state_vars(int n) {
    std::vector<std::string> v;
    for (int i = 1; i <= n; ++i) v.push_back("q" + std::to_string(i));
    for (int i = 1; i <= n; ++i) v.push_back("qd" + std::to_string(i));
    v.push_back("z");
    return v;
}

inline std::vector<std::string> symplectic_state_vars(int n) {
    std::vector<std::string> v;
    for (int i = 1; i <= n; ++i) v.push_back("q" + std::to_string(i));
    for (int i = 1; i <= n; ++i) v.push_back("p" + std::to_string(i));
    return v;
}

// H(q1..qn, p1..pn, z)
struct HamiltonianSystem {
    int n = 0;
    ScalarExpr H;

    static HamiltonianSystem make(int n, const std::string& text) {
        return {n, ScalarExpr::parse(text, contact_state_vars(n))};
    }
};

// L(q1..qn, qd1..qdn, z)
struct LagrangianSystem {
    int n = 0;
    ScalarExpr L;

    static LagrangianSystem make(int n, const std::string& text) {
        return {n, ScalarExpr::parse(text, lagrangian_state_vars(n))};
    }
};

// qdot = H_p, pdot = -H_q - p H_z, zdot = p.H_p - H
ContactTangent contact_vf(const HamiltonianSystem& sys, const ContactState& x);
// Horizontal counterpart: zdot = p.H_p
ContactTangent evolution_vf(const HamiltonianSystem& sys, const ContactState& x);
// F(q1..qn, p1..pn): qdot = F_p, pdot = -F_q
void symplectic_vf(const ScalarExpr& F, int n, const Vec& q, const Vec& p,
                   Vec& dq, Vec& dp);

struct HerglotzRate {
    Vec dq;
    Vec dqd;
    double dz = 0.0;
};

// Regular Herglotz flow: L_qdqd qdd = L_q + L_z L_qd - L_qdq qd - L_qdz zd
// with zd = L (contact) or zd = qd.L_qd (evolution). Throws
// SingularLagrangian when the velocity Hessian is rank-deficient
// (relative smallest singular value below 1e-10).
HerglotzRate herglotz_vf(const LagrangianSystem& sys, const Vec& q,
                         const Vec& qd, double z, ContactVariant variant);

struct VectorField {
    int dim = 0;
    std::function<Vec(const Vec&)> f;
};

VectorField hamiltonian_field(const HamiltonianSystem& sys, ContactVariant variant);
VectorField herglotz_field(const LagrangianSystem& sys, ContactVariant variant);

// One classical RK4 step. Shared by the explicit and the constrained
// integrators so that the k=0 reduction is bit-compatible.
template <typename F>
Vec rk4_step(const F& f, const Vec& x, double h) {
    Vec k1 = f(x);
    Vec k2 = f(x + (h / 2.0) * k1);
    Vec k3 = f(x + (h / 2.0) * k2);
    Vec k4 = f(x + h * k3);
    return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

// Fixed-step RK4; a DomainError mid-run aborts with the partial trajectory
// and the error mark set.
Trajectory integrate(const VectorField& field, const Vec& x0,
                     const IntegratorConfig& cfg);

// As integrate(), plus per-node diagnostics: H, eta contraction of the
// field, H_drift, and the dissipation residual dH/dt + H_z H (centered
// differences at interior nodes; endpoints report 0).
Trajectory integrate_hamiltonian(const HamiltonianSystem& sys,
                                 const ContactState& x0,
                                 const IntegratorConfig& cfg,
                                 ContactVariant variant);

// Herglotz flow in (q, qd, z) with diagnostics L and, for the evolution
// variant, the drift of the energy qd.L_qd - L.
Trajectory integrate_herglotz(const LagrangianSystem& sys, const Vec& q0,
                              const Vec& qd0, double z0,
                              const IntegratorConfig& cfg,
                              ContactVariant variant);

// Residual components of  i_X d(eta) - (dH - H_z eta)  at x, ordered
// (q-components, p-components, z-component).
Vec cartan_residual(const HamiltonianSystem& sys, const ContactState& x);

// Graph parametrization x -> (x, X_H(x), H_z(x)) of the contact field in
// the iterated tangent bundle (variant Contact, dim 4n+3) or the horizontal
// tuple (x, eps_H(x), H_z(x)) (variant Evolution, dim 4n+2). Jacobians are
// exact (nested duals through H).
ParamMap hamiltonian_graph_param(const HamiltonianSystem& sys, ContactVariant variant);

} // namespace contactor

#endif
