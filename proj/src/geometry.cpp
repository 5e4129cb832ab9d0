#include "contactor/geometry.hpp"

#include <cmath>

#include "contactor/errors.hpp"

namespace contactor {

Vec flatten(const ContactState& x) {
    int n = x.n();
    Vec c(2 * n + 1);
    c.segment(0, n) = x.q;
    c.segment(n, n) = x.p;
    c(2 * n) = x.z;
    return c;
}

Vec flatten(const ExtTangentState& X) {
    int n = X.base.n();
    Vec c(4 * n + 3);
    c.segment(0, 2 * n + 1) = flatten(X.base);
    c.segment(2 * n + 1, n) = X.dq;
    c.segment(3 * n + 1, n) = X.dp;
    c(4 * n + 1) = X.dz;
    c(4 * n + 2) = X.u;
    return c;
}

Vec flatten(const HorizontalState& Y) {
    int n = Y.base.n();
    Vec c(4 * n + 2);
    c.segment(0, 2 * n + 1) = flatten(Y.base);
    c.segment(2 * n + 1, n) = Y.dq;
    c.segment(3 * n + 1, n) = Y.dp;
    c(4 * n + 1) = Y.u;
    return c;
}

Vec flatten(const CovectorJet& J) {
    int n = J.base.n();
    Vec c(4 * n + 3);
    c.segment(0, 2 * n + 1) = flatten(J.base);
    c.segment(2 * n + 1, n) = J.pi_q;
    c.segment(3 * n + 1, n) = J.pi_p;
    c(4 * n + 1) = J.pi_z;
    c(4 * n + 2) = J.s;
    return c;
}

ContactState contact_from_coords(const Vec& c) {
    int n = (static_cast<int>(c.size()) - 1) / 2;
    ContactState x;
    x.q = c.segment(0, n);
    x.p = c.segment(n, n);
    x.z = c(2 * n);
    return x;
}

ExtTangentState ext_from_coords(const Vec& c) {
    int n = (static_cast<int>(c.size()) - 3) / 4;
    ExtTangentState X;
    X.base = contact_from_coords(c.segment(0, 2 * n + 1));
    X.dq = c.segment(2 * n + 1, n);
    X.dp = c.segment(3 * n + 1, n);
    X.dz = c(4 * n + 1);
    X.u = c(4 * n + 2);
    return X;
}

HorizontalState horizontal_from_coords(const Vec& c) {
    int n = (static_cast<int>(c.size()) - 2) / 4;
    HorizontalState Y;
    Y.base = contact_from_coords(c.segment(0, 2 * n + 1));
    Y.dq = c.segment(2 * n + 1, n);
    Y.dp = c.segment(3 * n + 1, n);
    Y.u = c(4 * n + 1);
    return Y;
}

CovectorJet jet_from_coords(const Vec& c) {
    int n = (static_cast<int>(c.size()) - 3) / 4;
    CovectorJet J;
    J.base = contact_from_coords(c.segment(0, 2 * n + 1));
    J.pi_q = c.segment(2 * n + 1, n);
    J.pi_p = c.segment(3 * n + 1, n);
    J.pi_z = c(4 * n + 1);
    J.s = c(4 * n + 2);
    return J;
}

double eta(const ContactState& x, const ContactTangent& v) {
    return v.dz - x.p.dot(v.dq);
}

ContactTangent sharp_lambda(const ContactState& x, const ContactCovector& a) {
    ContactTangent out;
    out.dq = a.a_p;
    out.dp = -(a.a_q + x.p * a.a_z);
    out.dz = a.a_p.dot(x.p);
    return out;
}

double eta_T(const ExtTangentState& X, const Vec& V) {
    int n = X.base.n();
    double r = V(4 * n + 1) + X.u * V(2 * n);
    for (int i = 0; i < n; ++i) {
        r -= (X.dp(i) + X.u * X.base.p(i)) * V(i);
        r -= X.base.p(i) * V(2 * n + 1 + i);
    }
    return r;
}

double theta_eta(const HorizontalState& Y, const Vec& V) {
    int n = Y.base.n();
    double r = Y.u * V(2 * n);
    for (int i = 0; i < n; ++i) {
        r -= (Y.dp(i) + Y.u * Y.base.p(i)) * V(i);
        r += Y.dq(i) * V(n + i);
    }
    return r;
}

double omega_eta(const HorizontalState& Y, const Vec& V1, const Vec& V2) {
    int n = Y.base.n();
    auto wedge = [&](int a, int b) { return V1(a) * V2(b) - V2(a) * V1(b); };
    int iz = 2 * n;
    int iu = 4 * n + 1;
    double r = wedge(iu, iz);
    for (int i = 0; i < n; ++i) {
        r -= wedge(3 * n + 1 + i, i);                 // d(pd_i) ^ dq^i
        r -= Y.base.p(i) * wedge(iu, i);              // p_i du ^ dq^i
        r -= Y.u * wedge(n + i, i);                   // u dp_i ^ dq^i
        r += wedge(2 * n + 1 + i, n + i);             // d(qd^i) ^ dp_i
    }
    return r;
}

CovectorJet beta_c(const ExtTangentState& X) {
    CovectorJet J;
    J.base = X.base;
    J.pi_q = X.u * X.base.p + X.dp;
    J.pi_p = -X.dq;
    J.pi_z = -X.u;
    J.s = X.dz - X.base.p.dot(X.dq);
    return J;
}

ExtTangentState beta_c_inv(const CovectorJet& J) {
    ExtTangentState X;
    X.base = J.base;
    X.u = -J.pi_z;
    X.dq = -J.pi_p;
    X.dp = J.pi_q - X.u * J.base.p;
    X.dz = J.s + J.base.p.dot(X.dq);
    return X;
}

CotangentPoint beta_0(const HorizontalState& Y) {
    CotangentPoint P;
    P.base = Y.base;
    P.pi_q = Y.u * Y.base.p + Y.dp;
    P.pi_p = -Y.dq;
    P.pi_z = -Y.u;
    return P;
}

HorizontalState beta_0_inv(const CotangentPoint& P) {
    HorizontalState Y;
    Y.base = P.base;
    Y.u = -P.pi_z;
    Y.dq = -P.pi_p;
    Y.dp = P.pi_q - Y.u * P.base.p;
    return Y;
}

ExtTangentState j_embed(const HorizontalState& Y) {
    ExtTangentState X;
    X.base = Y.base;
    X.dq = Y.dq;
    X.dp = Y.dp;
    X.dz = Y.base.p.dot(Y.dq);
    X.u = Y.u;
    return X;
}

int form_base_dim(FormKind form, int target_dim) {
    int n = -1;
    switch (form) {
    case FormKind::Eta:
        if (target_dim >= 3 && (target_dim - 1) % 2 == 0)
            n = (target_dim - 1) / 2;
        break;
    case FormKind::EtaT:
    case FormKind::EtaJet:
        if (target_dim >= 7 && (target_dim - 3) % 4 == 0)
            n = (target_dim - 3) / 4;
        break;
    case FormKind::OmegaEta:
        if (target_dim >= 6 && (target_dim - 2) % 4 == 0)
            n = (target_dim - 2) / 4;
        break;
    }
    if (n <= 0)
        throw DomainError("target dimension does not match the form's space");
    return n;
}

double one_form(FormKind form, const Vec& point, const Vec& tangent) {
    int n = form_base_dim(form, static_cast<int>(point.size()));
    switch (form) {
    case FormKind::Eta: {
        double r = tangent(2 * n);
        for (int i = 0; i < n; ++i)
            r -= point(n + i) * tangent(i);
        return r;
    }
    case FormKind::EtaT:
        return eta_T(ext_from_coords(point), tangent);
    case FormKind::EtaJet: {
        // ds - pi_q dq - pi_p dp - pi_z dz
        double r = tangent(4 * n + 2);
        for (int i = 0; i < n; ++i) {
            r -= point(2 * n + 1 + i) * tangent(i);
            r -= point(3 * n + 1 + i) * tangent(n + i);
        }
        r -= point(4 * n + 1) * tangent(2 * n);
        return r;
    }
    case FormKind::OmegaEta:
        break;
    }
    throw DomainError("omega_eta is not a one-form");
}

double omega_eta_form(const Vec& point, const Vec& t1, const Vec& t2) {
    return omega_eta(horizontal_from_coords(point), t1, t2);
}

Vec ParamMap::eval(const Vec& x) const {
    if (static_cast<int>(x.size()) != domain_dim)
        throw DomainError("parametrization input dimension mismatch");
    if (fn) {
        DualVec in(x.size());
        for (int i = 0; i < x.size(); ++i)
            in[static_cast<std::size_t>(i)] = Dual<double>(x(i), 0.0);
        DualVec out = fn(in);
        Vec v(static_cast<int>(out.size()));
        for (std::size_t i = 0; i < out.size(); ++i)
            v(static_cast<int>(i)) = out[i].v;
        return v;
    }
    return fn_plain(x);
}

Mat ParamMap::jacobian(const Vec& x) const {
    Mat J(target_dim, domain_dim);
    if (fn) {
        for (int k = 0; k < domain_dim; ++k) {
            DualVec in(x.size());
            for (int i = 0; i < x.size(); ++i)
                in[static_cast<std::size_t>(i)] = Dual<double>(x(i), i == k ? 1.0 : 0.0);
            DualVec out = fn(in);
            for (std::size_t i = 0; i < out.size(); ++i)
                J(static_cast<int>(i), k) = out[i].d;
        }
        return J;
    }
    const double h = 1e-6;
    for (int k = 0; k < domain_dim; ++k) {
        Vec xp = x, xm = x;
        xp(k) += h;
        xm(k) -= h;
        J.col(k) = (fn_plain(xp) - fn_plain(xm)) / (2.0 * h);
    }
    return J;
}

ParamMap ParamMap::from_exprs(const std::vector<ScalarExpr>& components,
                              const std::vector<std::string>& domain_vars) {
    std::vector<ScalarExpr> comps;
    comps.reserve(components.size());
    for (const auto& c : components)
        comps.push_back(c.with_vars(domain_vars));
    ParamMap pm;
    pm.domain_dim = static_cast<int>(domain_vars.size());
    pm.target_dim = static_cast<int>(components.size());
    pm.fn = [comps](const DualVec& in) {
        DualVec out(comps.size());
        for (std::size_t i = 0; i < comps.size(); ++i)
            out[i] = comps[i].eval_values<Dual<double>>(in);
        return out;
    };
    return pm;
}

double pullback_isotropy_check(const ParamMap& param, FormKind form,
                               const std::vector<Vec>& samples) {
    form_base_dim(form, param.target_dim);
    double worst = 0.0;
    for (const Vec& s : samples) {
        Vec point = param.eval(s);
        Mat J = param.jacobian(s);
        if (form == FormKind::OmegaEta) {
            for (int k = 0; k < J.cols(); ++k)
                for (int l = k + 1; l < J.cols(); ++l)
                    worst = std::max(worst,
                                     std::abs(omega_eta_form(point, J.col(k), J.col(l))));
        } else {
            for (int k = 0; k < J.cols(); ++k)
                worst = std::max(worst, std::abs(one_form(form, point, J.col(k))));
        }
    }
    return worst;
}

namespace {

// Jacobian of a templated coordinate map via dual seeding.
template <typename MapFn>
Mat coords_jacobian(const MapFn& map, const Vec& x) {
    int dim = static_cast<int>(x.size());
    Mat J;
    for (int k = 0; k < dim; ++k) {
        DualVec in(static_cast<std::size_t>(dim));
        for (int i = 0; i < dim; ++i)
            in[static_cast<std::size_t>(i)] = Dual<double>(x(i), i == k ? 1.0 : 0.0);
        DualVec out = map(in);
        if (k == 0)
            J.resize(static_cast<int>(out.size()), dim);
        for (std::size_t i = 0; i < out.size(); ++i)
            J(static_cast<int>(i), k) = out[i].d;
    }
    return J;
}

} // namespace

double beta_c_pullback_residual(const ExtTangentState& X) {
    int n = X.base.n();
    Vec x = flatten(X);
    Vec image = flatten(beta_c(X));
    Mat J = coords_jacobian(
        [n](const DualVec& in) { return beta_c_coords<Dual<double>>(n, in); }, x);
    double worst = 0.0;
    for (int k = 0; k < x.size(); ++k) {
        Vec e = Vec::Zero(x.size());
        e(k) = 1.0;
        double lhs = one_form(FormKind::EtaJet, image, J.col(k));
        double rhs = eta_T(X, e);
        worst = std::max(worst, std::abs(lhs - rhs));
    }
    return worst;
}

double beta_0_pullback_residual(const HorizontalState& Y) {
    int n = Y.base.n();
    Vec y = flatten(Y);
    CotangentPoint P = beta_0(Y);
    Mat J = coords_jacobian(
        [n](const DualVec& in) { return beta_0_coords<Dual<double>>(n, in); }, y);
    double worst = 0.0;
    for (int k = 0; k < y.size(); ++k) {
        Vec e = Vec::Zero(y.size());
        e(k) = 1.0;
        Vec col = J.col(k);
        // Liouville one-form pi.dx on T*(T*Q x R), pulled back with a sign flip.
        double theta = 0.0;
        for (int i = 0; i < n; ++i) {
            theta += P.pi_q(i) * col(i);
            theta += P.pi_p(i) * col(n + i);
        }
        theta += P.pi_z * col(2 * n);
        double lhs = -theta;
        double rhs = theta_eta(Y, e);
        worst = std::max(worst, std::abs(lhs - rhs));
    }
    return worst;
}

} // namespace contactor
