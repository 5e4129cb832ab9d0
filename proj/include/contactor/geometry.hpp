#ifndef CONTACTOR_GEOMETRY_HPP
#define CONTACTOR_GEOMETRY_HPP

#include <functional>
#include <vector>

#include "contactor/dual.hpp"
#include "contactor/expr.hpp"
#include "contactor/linalg.hpp"

namespace contactor {

// Coordinate conventions, used for every flat vector in this module:
//   extended cotangent bundle (contact phase space):   (q, p, z)        dim 2n+1
//   iterated extended tangent bundle:                  (q, p, z, qd, pd, zd, u)   dim 4n+3
//   horizontal bundle x R:                             (q, p, z, qd, pd, u)       dim 4n+2
//   extended cotangent bundle of the phase space:      (q, p, z, pi_q, pi_p, pi_z, s)  dim 4n+3
// Tangent vectors use the same component ordering as the point they sit at.

struct ContactState {
    Vec q;
    Vec p;
    double z = 0.0;
    int n() const { return static_cast<int>(q.size()); }
};

struct ContactTangent {
    Vec dq;
    Vec dp;
    double dz = 0.0;
};

struct ContactCovector {
    Vec a_q;
    Vec a_p;
    double a_z = 0.0;
};

struct ExtTangentState {
    ContactState base;
    Vec dq;
    Vec dp;
    double dz = 0.0;
    double u = 0.0;
};

struct HorizontalState {
    ContactState base;
    Vec dq;
    Vec dp;
    double u = 0.0;
};

struct CovectorJet {
    ContactState base;
    Vec pi_q;
    Vec pi_p;
    double pi_z = 0.0;
    double s = 0.0;
};

// Point of T*(T*Q x R) without the jet slot (codomain of beta_0).
struct CotangentPoint {
    ContactState base;
    Vec pi_q;
    Vec pi_p;
    double pi_z = 0.0;
};

Vec flatten(const ContactState& x);
Vec flatten(const ExtTangentState& X);
Vec flatten(const HorizontalState& Y);
Vec flatten(const CovectorJet& J);
ContactState contact_from_coords(const Vec& c);
ExtTangentState ext_from_coords(const Vec& c);
HorizontalState horizontal_from_coords(const Vec& c);
CovectorJet jet_from_coords(const Vec& c);

// eta = dz - p_i dq^i
double eta(const ContactState& x, const ContactTangent& v);
// sharp map of the Jacobi bivector: (dq, dp, dz) = (a_p, -(a_q + p a_z), a_p . p)
ContactTangent sharp_lambda(const ContactState& x, const ContactCovector& a);

// Lifted contact one-form  eta^T = d(zd) + u dz - (pd_i + u p_i) dq^i - p_i d(qd^i),
// contracted with a tangent vector in (q,p,z,qd,pd,zd,u) component order.
double eta_T(const ExtTangentState& X, const Vec& V);

// theta_eta = u dz - (pd_i + u p_i) dq^i + qd^i dp_i  on the horizontal bundle x R;
// omega_eta = d theta_eta = du^dz - d(pd_i)^dq^i - p_i du^dq^i - u dp_i^dq^i + d(qd^i)^dp_i.
double theta_eta(const HorizontalState& Y, const Vec& V);
double omega_eta(const HorizontalState& Y, const Vec& V1, const Vec& V2);

// (q,p,z,qd,pd,zd,u) -> (q,p,z, u p + pd, -qd, -u, zd - p.qd); exact inverse.
CovectorJet beta_c(const ExtTangentState& X);
ExtTangentState beta_c_inv(const CovectorJet& J);
// Same fiber map without the jet slot.
CotangentPoint beta_0(const HorizontalState& Y);
HorizontalState beta_0_inv(const CotangentPoint& P);
// Horizontal inclusion: inserts zd = p.qd.
ExtTangentState j_embed(const HorizontalState& Y);

// Templated coordinate versions (T = double or Dual<...>), used for exact
// Jacobians of the structure maps.
template <typename T>
std::vector<T> beta_c_coords(int n, const std::vector<T>& x) {
    std::vector<T> out(static_cast<std::size_t>(4 * n + 3));
    for (int i = 0; i < 2 * n + 1; ++i)
        out[i] = x[i];
    const T& u = x[static_cast<std::size_t>(4 * n + 2)];
    T s = x[static_cast<std::size_t>(4 * n + 1)];
    for (int i = 0; i < n; ++i) {
        out[2 * n + 1 + i] = u * x[n + i] + x[3 * n + 1 + i];   // u p + pd
        out[3 * n + 1 + i] = -x[2 * n + 1 + i];                 // -qd
        s = s - x[n + i] * x[2 * n + 1 + i];                    // zd - p.qd
    }
    out[static_cast<std::size_t>(4 * n + 1)] = -u;
    out[static_cast<std::size_t>(4 * n + 2)] = s;
    return out;
}

template <typename T>
std::vector<T> beta_0_coords(int n, const std::vector<T>& x) {
    std::vector<T> out(static_cast<std::size_t>(4 * n + 2));
    for (int i = 0; i < 2 * n + 1; ++i)
        out[i] = x[i];
    const T& u = x[static_cast<std::size_t>(4 * n + 1)];
    for (int i = 0; i < n; ++i) {
        out[2 * n + 1 + i] = u * x[n + i] + x[3 * n + 1 + i];
        out[3 * n + 1 + i] = -x[2 * n + 1 + i];
    }
    out[static_cast<std::size_t>(4 * n + 1)] = -u;
    return out;
}

enum class FormKind { Eta, EtaT, OmegaEta, EtaJet };

// Base dimension n recovered from the target-space dimension; throws on a
// dimension that does not match the form's space.
int form_base_dim(FormKind form, int target_dim);
// One-form contraction at a flat point (Eta, EtaT, EtaJet).
double one_form(FormKind form, const Vec& point, const Vec& tangent);
double omega_eta_form(const Vec& point, const Vec& t1, const Vec& t2);

using DualVec = std::vector<Dual<double>>;

// Differentiable parametrization R^d -> target space. When `fn` is present
// the Jacobian is exact (dual seeding); otherwise `fn_plain` is differenced
// centrally with step 1e-6 (externally supplied tabulated maps).
struct ParamMap {
    int domain_dim = 0;
    int target_dim = 0;
    std::function<DualVec(const DualVec&)> fn;
    std::function<Vec(const Vec&)> fn_plain;

    Vec eval(const Vec& x) const;
    Mat jacobian(const Vec& x) const;

    static ParamMap from_exprs(const std::vector<ScalarExpr>& components,
                               const std::vector<std::string>& domain_vars);
};

// Max over samples and coordinate tangent directions of the form pulled back
// through the parametrization's Jacobian: |form(J e_k)| for one-forms,
// |omega(J e_k, J e_l)| over pairs for omega_eta.
double pullback_isotropy_check(const ParamMap& param, FormKind form,
                               const std::vector<Vec>& samples);

// Strict-pullback residuals of the structure maps at one point, over all
// coordinate tangent directions:
//   beta_c: |eta_{jet}(beta_c(X), D beta_c V) - eta^T(X, V)|
//   beta_0: |-theta(beta_0(Y), D beta_0 V) - theta_eta(Y, V)|
double beta_c_pullback_residual(const ExtTangentState& X);
double beta_0_pullback_residual(const HorizontalState& Y);

} // namespace contactor

#endif
