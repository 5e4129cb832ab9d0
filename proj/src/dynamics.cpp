#include "contactor/dynamics.hpp"

#include <cmath>

#include "contactor/errors.hpp"

namespace contactor {

namespace {

std::vector<double> to_std(const Vec& v) {
    return std::vector<double>(v.data(), v.data() + v.size());
}

// Contact or evolution tuple components from H's partials, templated so the
// same code drives plain evaluation and exact graph Jacobians.
template <typename T>
void hamiltonian_rates(int n, const std::vector<T>& state,
                       const std::vector<T>& dH, const T& Hval,
                       ContactVariant variant, std::vector<T>& dq,
                       std::vector<T>& dp, T& dz) {
    dq.resize(static_cast<std::size_t>(n));
    dp.resize(static_cast<std::size_t>(n));
    T pdotHp{};
    for (int i = 0; i < n; ++i) {
        dq[i] = dH[n + i];
        dp[i] = -dH[i] - state[n + i] * dH[2 * n];
        pdotHp = pdotHp + state[n + i] * dH[n + i];
    }
    dz = (variant == ContactVariant::Contact) ? pdotHp - Hval : pdotHp;
}

} // namespace

ContactTangent contact_vf(const HamiltonianSystem& sys, const ContactState& x) {
    std::vector<double> values = to_std(flatten(x));
    double H;
    std::vector<double> dH;
    eval_value_and_grad(sys.H, values, H, dH);
    std::vector<double> dq, dp;
    double dz;
    hamiltonian_rates(sys.n, values, dH, H, ContactVariant::Contact, dq, dp, dz);
    ContactTangent out;
    out.dq = Eigen::Map<const Vec>(dq.data(), sys.n);
    out.dp = Eigen::Map<const Vec>(dp.data(), sys.n);
    out.dz = dz;
    return out;
}

ContactTangent evolution_vf(const HamiltonianSystem& sys, const ContactState& x) {
    std::vector<double> values = to_std(flatten(x));
    double H;
    std::vector<double> dH;
    eval_value_and_grad(sys.H, values, H, dH);
    std::vector<double> dq, dp;
    double dz;
    hamiltonian_rates(sys.n, values, dH, H, ContactVariant::Evolution, dq, dp, dz);
    ContactTangent out;
    out.dq = Eigen::Map<const Vec>(dq.data(), sys.n);
    out.dp = Eigen::Map<const Vec>(dp.data(), sys.n);
    out.dz = dz;
    return out;
}

void symplectic_vf(const ScalarExpr& F, int n, const Vec& q, const Vec& p,
                   Vec& dq, Vec& dp) {
    std::vector<double> values(static_cast<std::size_t>(2 * n));
    for (int i = 0; i < n; ++i) {
        values[static_cast<std::size_t>(i)] = q(i);
        values[static_cast<std::size_t>(n + i)] = p(i);
    }
    dq.resize(n);
    dp.resize(n);
    for (int i = 0; i < n; ++i) {
        dq(i) = F.derivative_values<double>(values, n + i);
        dp(i) = -F.derivative_values<double>(values, i);
    }
}

HerglotzRate herglotz_vf(const LagrangianSystem& sys, const Vec& q,
                         const Vec& qd, double z, ContactVariant variant) {
    int n = sys.n;
    std::vector<double> values(static_cast<std::size_t>(2 * n + 1));
    for (int i = 0; i < n; ++i) {
        values[static_cast<std::size_t>(i)] = q(i);
        values[static_cast<std::size_t>(n + i)] = qd(i);
    }
    values[static_cast<std::size_t>(2 * n)] = z;

    double L;
    std::vector<double> dL;
    eval_value_and_grad(sys.L, values, L, dL);
    Vec Lq(n), Lqd(n);
    for (int i = 0; i < n; ++i) {
        Lq(i) = dL[static_cast<std::size_t>(i)];
        Lqd(i) = dL[static_cast<std::size_t>(n + i)];
    }
    double Lz = dL[static_cast<std::size_t>(2 * n)];

    double dz = (variant == ContactVariant::Contact) ? L : qd.dot(Lqd);

    // Hessian rows of L with respect to qd, split into the velocity block
    // and the mixed q/z blocks.
    Mat A(n, n), B(n, n);
    Vec c(n);
    std::vector<Dual<double>> inner(values.size());
    for (std::size_t v = 0; v < values.size(); ++v)
        inner[v] = Dual<double>(values[v], 0.0);
    for (int i = 0; i < n; ++i) {
        for (int col = 0; col < 2 * n + 1; ++col) {
            for (std::size_t v = 0; v < values.size(); ++v)
                inner[v].d = (static_cast<int>(v) == col) ? 1.0 : 0.0;
            double second = sys.L.derivative_values<Dual<double>>(inner, n + i).d;
            if (col < n)
                B(i, col) = second;
            else if (col < 2 * n)
                A(i, col - n) = second;
            else
                c(i) = second;
        }
    }

    Eigen::JacobiSVD<Mat> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vec& sv = svd.singularValues();
    double smax = sv(0);
    double smin = sv(sv.size() - 1);
    if (smax == 0.0 || smin < 1e-10 * smax)
        throw SingularLagrangian(
            "velocity Hessian is rank-deficient (sigma_min=" +
            std::to_string(smin) + ", sigma_max=" + std::to_string(smax) +
            "); use the constrained (Morse-family) path");

    Vec rhs = Lq + Lz * Lqd - B * qd - c * dz;
    HerglotzRate out;
    out.dq = qd;
    out.dqd = svd.solve(rhs);
    out.dz = dz;
    return out;
}

VectorField hamiltonian_field(const HamiltonianSystem& sys, ContactVariant variant) {
    VectorField field;
    field.dim = 2 * sys.n + 1;
    field.f = [sys, variant](const Vec& x) {
        ContactState s = contact_from_coords(x);
        ContactTangent t = (variant == ContactVariant::Contact)
                               ? contact_vf(sys, s)
                               : evolution_vf(sys, s);
        Vec out(x.size());
        out.segment(0, sys.n) = t.dq;
        out.segment(sys.n, sys.n) = t.dp;
        out(2 * sys.n) = t.dz;
        return out;
    };
    return field;
}

VectorField herglotz_field(const LagrangianSystem& sys, ContactVariant variant) {
    VectorField field;
    field.dim = 2 * sys.n + 1;
    field.f = [sys, variant](const Vec& x) {
        int n = sys.n;
        HerglotzRate r = herglotz_vf(sys, x.segment(0, n), x.segment(n, n),
                                     x(2 * n), variant);
        Vec out(x.size());
        out.segment(0, n) = r.dq;
        out.segment(n, n) = r.dqd;
        out(2 * n) = r.dz;
        return out;
    };
    return field;
}

Trajectory integrate(const VectorField& field, const Vec& x0,
                     const IntegratorConfig& cfg) {
    if (cfg.h <= 0.0 || cfg.T <= 0.0)
        throw DomainError("step and horizon must be positive");
    double steps_real = cfg.T / cfg.h;
    if (steps_real > 1e8)
        throw DomainError("T/h exceeds 1e8 steps");
    long steps = std::lround(steps_real);

    Trajectory traj;
    traj.times.reserve(static_cast<std::size_t>(steps) + 1);
    traj.states.reserve(static_cast<std::size_t>(steps) + 1);
    Vec x = x0;
    traj.times.push_back(0.0);
    traj.states.push_back(x);
    for (long i = 1; i <= steps; ++i) {
        try {
            x = rk4_step(field.f, x, cfg.h);
        } catch (const DomainError& err) {
            traj.error = err.what();
            return traj;
        }
        traj.times.push_back(static_cast<double>(i) * cfg.h);
        traj.states.push_back(x);
    }
    return traj;
}

Trajectory integrate_hamiltonian(const HamiltonianSystem& sys,
                                 const ContactState& x0,
                                 const IntegratorConfig& cfg,
                                 ContactVariant variant) {
    VectorField field = hamiltonian_field(sys, variant);
    Trajectory traj = integrate(field, flatten(x0), cfg);

    std::size_t m = traj.size();
    std::vector<double> H(m), etaX(m), drift(m), dissip(m, 0.0);
    std::vector<double> Hz(m);
    for (std::size_t i = 0; i < m; ++i) {
        ContactState s = contact_from_coords(traj.states[i]);
        std::vector<double> values = to_std(traj.states[i]);
        H[i] = sys.H.eval_values<double>(values);
        Hz[i] = sys.H.derivative_values<double>(values, 2 * sys.n);
        ContactTangent t = (variant == ContactVariant::Contact)
                               ? contact_vf(sys, s)
                               : evolution_vf(sys, s);
        etaX[i] = eta(s, t);
        drift[i] = H[i] - H[0];
    }
    for (std::size_t i = 1; i + 1 < m; ++i)
        dissip[i] = (H[i + 1] - H[i - 1]) / (2.0 * cfg.h) + Hz[i] * H[i];
    traj.diagnostics["H"] = std::move(H);
    traj.diagnostics["eta_contraction"] = std::move(etaX);
    traj.diagnostics["H_drift"] = std::move(drift);
    traj.diagnostics["dissipation_residual"] = std::move(dissip);
    return traj;
}

Trajectory integrate_herglotz(const LagrangianSystem& sys, const Vec& q0,
                              const Vec& qd0, double z0,
                              const IntegratorConfig& cfg,
                              ContactVariant variant) {
    VectorField field = herglotz_field(sys, variant);
    Vec x0(2 * sys.n + 1);
    x0.segment(0, sys.n) = q0;
    x0.segment(sys.n, sys.n) = qd0;
    x0(2 * sys.n) = z0;
    Trajectory traj = integrate(field, x0, cfg);

    std::size_t m = traj.size();
    std::vector<double> Lvals(m), energy_drift(m);
    double e0 = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        std::vector<double> values = to_std(traj.states[i]);
        Lvals[i] = sys.L.eval_values<double>(values);
        double e = -Lvals[i];
        for (int k = 0; k < sys.n; ++k)
            e += values[static_cast<std::size_t>(sys.n + k)] *
                 sys.L.derivative_values<double>(values, sys.n + k);
        if (i == 0)
            e0 = e;
        energy_drift[i] = e - e0;
    }
    traj.diagnostics["L"] = std::move(Lvals);
    if (variant == ContactVariant::Evolution)
        traj.diagnostics["E_drift"] = std::move(energy_drift);
    return traj;
}

Vec cartan_residual(const HamiltonianSystem& sys, const ContactState& x) {
    int n = sys.n;
    std::vector<double> values = to_std(flatten(x));
    double H;
    std::vector<double> dH;
    eval_value_and_grad(sys.H, values, H, dH);
    ContactTangent X = contact_vf(sys, x);
    Vec res(2 * n + 1);
    // i_X (dq^i ^ dp_i) = X.dq^i dp_i - X.dp_i dq^i ; compare against
    // dH - H_z eta componentwise.
    for (int i = 0; i < n; ++i) {
        res(i) = -X.dp(i) - (dH[static_cast<std::size_t>(i)] +
                             dH[static_cast<std::size_t>(2 * n)] * x.p(i));
        res(n + i) = X.dq(i) - dH[static_cast<std::size_t>(n + i)];
    }
    res(2 * n) = 0.0 - (dH[static_cast<std::size_t>(2 * n)] -
                        dH[static_cast<std::size_t>(2 * n)]);
    return res;
}

ParamMap hamiltonian_graph_param(const HamiltonianSystem& sys,
                                 ContactVariant variant) {
    int n = sys.n;
    ParamMap pm;
    pm.domain_dim = 2 * n + 1;
    pm.target_dim = (variant == ContactVariant::Contact) ? 4 * n + 3 : 4 * n + 2;
    ScalarExpr H = sys.H;
    pm.fn = [H, n, variant](const DualVec& x) {
        using D = Dual<double>;
        D Hval;
        std::vector<D> dH;
        eval_value_and_grad(H, x, Hval, dH);
        std::vector<D> dq, dp;
        D dz;
        hamiltonian_rates(n, x, dH, Hval, variant, dq, dp, dz);
        DualVec out;
        out.reserve(static_cast<std::size_t>(4 * n + 3));
        for (int i = 0; i < 2 * n + 1; ++i)
            out.push_back(x[static_cast<std::size_t>(i)]);
        for (int i = 0; i < n; ++i)
            out.push_back(dq[static_cast<std::size_t>(i)]);
        for (int i = 0; i < n; ++i)
            out.push_back(dp[static_cast<std::size_t>(i)]);
        if (variant == ContactVariant::Contact)
            out.push_back(dz);
        out.push_back(dH[static_cast<std::size_t>(2 * n)]);  // u = H_z
        return out;
    };
    return pm;
}

} // namespace contactor
