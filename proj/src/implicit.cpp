#include "contactor/implicit.hpp"

#include <cmath>
#include <memory>

#include "contactor/errors.hpp"

namespace contactor {

namespace {

std::vector<double> combined_values(const MorseFamilySystem& sys, const Vec& x,
                                    const Vec& lambda) {
    if (static_cast<int>(x.size()) != sys.base_dim())
        throw DomainError("state dimension does not match the family's base");
    if (static_cast<int>(lambda.size()) != sys.k)
        throw DomainError("multiplier dimension does not match the family");
    std::vector<double> values(static_cast<std::size_t>(sys.base_dim() + sys.k));
    for (int i = 0; i < sys.base_dim(); ++i)
        values[static_cast<std::size_t>(i)] = x(i);
    for (int j = 0; j < sys.k; ++j)
        values[static_cast<std::size_t>(sys.base_dim() + j)] = lambda(j);
    return values;
}

// Second partials d2 gen / d values[rows] d values[cols].
Mat hessian_block(const ScalarExpr& gen, const std::vector<double>& values,
                  const std::vector<int>& rows, const std::vector<int>& cols) {
    Mat H(static_cast<int>(rows.size()), static_cast<int>(cols.size()));
    std::vector<Dual<double>> inner(values.size());
    for (std::size_t v = 0; v < values.size(); ++v)
        inner[v] = Dual<double>(values[v], 0.0);
    for (std::size_t c = 0; c < cols.size(); ++c) {
        for (std::size_t v = 0; v < values.size(); ++v)
            inner[v].d = (static_cast<int>(v) == cols[c]) ? 1.0 : 0.0;
        for (std::size_t r = 0; r < rows.size(); ++r)
            H(static_cast<int>(r), static_cast<int>(c)) =
                gen.derivative_values<Dual<double>>(inner, rows[r]).d;
    }
    return H;
}

Vec gradient_at(const ScalarExpr& gen, const std::vector<double>& values,
                const std::vector<int>& slots) {
    Vec g(static_cast<int>(slots.size()));
    for (std::size_t i = 0; i < slots.size(); ++i)
        g(static_cast<int>(i)) = gen.derivative_values<double>(values, slots[i]);
    return g;
}

double inf_norm(const Vec& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

constexpr double kNewtonTol = 1e-10;
constexpr int kNewtonMaxIter = 50;
constexpr int kNewtonMaxHalvings = 30;
constexpr double kSingularRel = 1e-10;

// Damped Newton on grad_lambda(gen) over the free multiplier slots of
// `values` (modified in place). The Jacobian is checked for rank deficiency
// up front so gauge freedom is reported even when the initial residual is
// already below tolerance.
ConstraintSolveReport newton_constraint(const ScalarExpr& gen,
                                        std::vector<double>& values,
                                        const std::vector<int>& free_slots) {
    ConstraintSolveReport report;
    if (free_slots.empty())
        return report;

    auto eval_jacobian = [&](const std::vector<double>& vals) {
        return hessian_block(gen, vals, free_slots, free_slots);
    };
    Mat J = eval_jacobian(values);
    SingularValues sv = singular_values(J, kSingularRel);
    if (sv.max == 0.0 || sv.min < kSingularRel * sv.max)
        throw SingularConstraintJacobian(
            "constraint Jacobian is rank-deficient (sigma_min=" +
            std::to_string(sv.min) + ", sigma_max=" + std::to_string(sv.max) +
            "); pin the deficient multipliers");
    report.jacobian_min_singular_value = sv.min;

    Vec g = gradient_at(gen, values, free_slots);
    double gnorm = inf_norm(g);
    for (int iter = 0; iter < kNewtonMaxIter && gnorm > kNewtonTol; ++iter) {
        if (iter > 0) {
            J = eval_jacobian(values);
            sv = singular_values(J, kSingularRel);
            if (sv.max == 0.0 || sv.min < kSingularRel * sv.max)
                throw SingularConstraintJacobian(
                    "constraint Jacobian became rank-deficient (sigma_min=" +
                    std::to_string(sv.min) + ")");
            report.jacobian_min_singular_value = sv.min;
        }
        Vec delta = J.colPivHouseholderQr().solve(-g);
        double alpha = 1.0;
        bool accepted = false;
        std::vector<double> trial = values;
        for (int halving = 0; halving <= kNewtonMaxHalvings; ++halving) {
            for (std::size_t i = 0; i < free_slots.size(); ++i)
                trial[static_cast<std::size_t>(free_slots[i])] =
                    values[static_cast<std::size_t>(free_slots[i])] +
                    alpha * delta(static_cast<int>(i));
            Vec g_trial = gradient_at(gen, trial, free_slots);
            if (inf_norm(g_trial) < gnorm || gnorm <= kNewtonTol) {
                values = trial;
                g = g_trial;
                gnorm = inf_norm(g);
                accepted = true;
                break;
            }
            alpha /= 2.0;
        }
        ++report.iterations;
        if (!accepted)
            throw NoConvergence("constraint Newton stalled after " +
                                std::to_string(report.iterations) +
                                " iterations (residual " + std::to_string(gnorm) + ")");
    }
    if (gnorm > kNewtonTol)
        throw NoConvergence("constraint Newton did not reach tolerance (residual " +
                            std::to_string(gnorm) + ")");
    report.residual_norm = gnorm;
    return report;
}

std::vector<int> multiplier_slots(int base_dim, int k) {
    std::vector<int> slots(static_cast<std::size_t>(k));
    for (int j = 0; j < k; ++j)
        slots[static_cast<std::size_t>(j)] = base_dim + j;
    return slots;
}

// Tuple of the generated submanifold from the combined (base, lambda) values.
template <typename T>
std::vector<T> legendrian_tuple(const MorseFamilySystem& sys,
                                const std::vector<T>& values,
                                LegendrianTarget target) {
    int n = sys.n;
    int bd = sys.base_dim();
    T E;
    std::vector<T> dE;
    eval_value_and_grad(sys.gen, values, E, dE, bd);
    std::vector<T> out;
    out.reserve(static_cast<std::size_t>(4 * n + 3));
    for (int i = 0; i < bd; ++i)
        out.push_back(values[static_cast<std::size_t>(i)]);
    switch (target) {
    case LegendrianTarget::TangentContact: {
        T pdot_Ep{};
        for (int i = 0; i < n; ++i)
            pdot_Ep = pdot_Ep + values[static_cast<std::size_t>(n + i)] * dE[static_cast<std::size_t>(n + i)];
        for (int i = 0; i < n; ++i)
            out.push_back(dE[static_cast<std::size_t>(n + i)]);
        for (int i = 0; i < n; ++i)
            out.push_back(-dE[static_cast<std::size_t>(i)] -
                          values[static_cast<std::size_t>(n + i)] * dE[static_cast<std::size_t>(2 * n)]);
        out.push_back(pdot_Ep - E);
        out.push_back(dE[static_cast<std::size_t>(2 * n)]);
        return out;
    }
    case LegendrianTarget::HorizontalTimesR: {
        for (int i = 0; i < n; ++i)
            out.push_back(dE[static_cast<std::size_t>(n + i)]);
        for (int i = 0; i < n; ++i)
            out.push_back(-dE[static_cast<std::size_t>(i)] -
                          values[static_cast<std::size_t>(n + i)] * dE[static_cast<std::size_t>(2 * n)]);
        out.push_back(dE[static_cast<std::size_t>(2 * n)]);
        return out;
    }
    case LegendrianTarget::CotangentJet: {
        for (int i = 0; i < n; ++i)
            out.push_back(-dE[static_cast<std::size_t>(i)]);
        for (int i = 0; i < n; ++i)
            out.push_back(-dE[static_cast<std::size_t>(n + i)]);
        out.push_back(-dE[static_cast<std::size_t>(2 * n)]);
        out.push_back(-E);
        return out;
    }
    }
    throw DomainError("unknown target");
}

void check_target(const MorseFamilySystem& sys, LegendrianTarget target) {
    if (sys.variant == DynamicsVariant::Symplectic)
        throw DomainError("submanifold tuples are defined for the contact and evolution variants");
    if (target == LegendrianTarget::HorizontalTimesR &&
        sys.variant != DynamicsVariant::Evolution)
        throw DomainError("horizontal tuples require the evolution variant");
    if (target != LegendrianTarget::HorizontalTimesR &&
        sys.variant != DynamicsVariant::Contact)
        throw DomainError("tangent-contact and jet tuples require the contact variant");
}

} // namespace

std::vector<std::string> MorseFamilySystem::all_vars() const {
    std::vector<std::string> v = base_vars();
    v.insert(v.end(), multipliers.begin(), multipliers.end());
    return v;
}

MorseFamilySystem MorseFamilySystem::make(int n, DynamicsVariant variant,
                                          const std::string& gen_text,
                                          const std::vector<std::string>& multipliers) {
    MorseFamilySystem sys;
    sys.n = n;
    sys.k = static_cast<int>(multipliers.size());
    sys.variant = variant;
    sys.multipliers = multipliers;
    sys.gen = ScalarExpr::parse(gen_text, sys.all_vars());
    return sys;
}

MorseFamilySystem MorseFamilySystem::from_hamiltonian(const HamiltonianSystem& h,
                                                      DynamicsVariant variant) {
    MorseFamilySystem sys;
    sys.n = h.n;
    sys.k = 0;
    sys.variant = variant;
    sys.gen = h.H;
    return sys;
}

MorseFamilySystem MorseFamilySystem::herglotz(const LagrangianSystem& lag,
                                              DynamicsVariant variant) {
    MorseFamilySystem sys;
    sys.n = lag.n;
    sys.k = lag.n;
    sys.variant = variant;
    for (int i = 1; i <= lag.n; ++i)
        sys.multipliers.push_back("qd" + std::to_string(i));

    ExprBuilder b(sys.all_vars());
    int acc = -1;
    std::string text;
    for (int i = 1; i <= lag.n; ++i) {
        int term = b.mul(b.var("qd" + std::to_string(i)), b.var("p" + std::to_string(i)));
        acc = (acc < 0) ? term : b.add(acc, term);
        text += (i > 1 ? " + " : "");
        text += "qd" + std::to_string(i) + "*p" + std::to_string(i);
    }
    int root = b.sub(acc, b.splice(lag.L));
    sys.gen = b.finish(root, text + " - (" + lag.L.text() + ")");
    return sys;
}

RankReport morse_rank_check(const MorseFamilySystem& sys, const Vec& x,
                            const Vec& lambda) {
    RankReport report;
    if (sys.k == 0) {
        report.ok = true;
        return report;
    }
    std::vector<double> values = combined_values(sys, x, lambda);
    std::vector<int> rows = multiplier_slots(sys.base_dim(), sys.k);
    std::vector<int> cols(static_cast<std::size_t>(sys.base_dim() + sys.k));
    for (std::size_t i = 0; i < cols.size(); ++i)
        cols[i] = static_cast<int>(i);
    Mat M = hessian_block(sys.gen, values, rows, cols);
    SingularValues sv = singular_values(M, kSingularRel);
    report.rank = sv.rank;
    report.min_sv = sv.min;
    report.max_sv = sv.max;
    report.ok = (sv.rank == sys.k);
    return report;
}

ConstraintSolveReport solve_constraint(const MorseFamilySystem& sys, const Vec& x,
                                       const Vec& lambda0,
                                       const PinnedMultipliers& pinned) {
    std::vector<double> values = combined_values(sys, x, lambda0);
    std::vector<int> free_slots;
    for (int j = 0; j < sys.k; ++j) {
        auto it = pinned.find(sys.multipliers[static_cast<std::size_t>(j)]);
        if (it != pinned.end())
            values[static_cast<std::size_t>(sys.base_dim() + j)] = it->second;
        else
            free_slots.push_back(sys.base_dim() + j);
    }
    ConstraintSolveReport report = newton_constraint(sys.gen, values, free_slots);
    report.lambda.resize(sys.k);
    for (int j = 0; j < sys.k; ++j)
        report.lambda(j) = values[static_cast<std::size_t>(sys.base_dim() + j)];
    return report;
}

Vec constraint_residual(const MorseFamilySystem& sys, const Vec& x,
                        const Vec& lambda) {
    std::vector<double> values = combined_values(sys, x, lambda);
    return gradient_at(sys.gen, values, multiplier_slots(sys.base_dim(), sys.k));
}

Vec implicit_rhs(const MorseFamilySystem& sys, const Vec& x, const Vec& lambda) {
    std::vector<double> values = combined_values(sys, x, lambda);
    int n = sys.n;
    double E;
    std::vector<double> dE;
    eval_value_and_grad(sys.gen, values, E, dE, sys.base_dim());
    if (sys.variant == DynamicsVariant::Symplectic) {
        Vec rate(2 * n);
        for (int i = 0; i < n; ++i) {
            rate(i) = dE[static_cast<std::size_t>(n + i)];
            rate(n + i) = -dE[static_cast<std::size_t>(i)];
        }
        return rate;
    }
    Vec rate(2 * n + 1);
    double pdot_Ep = 0.0;
    for (int i = 0; i < n; ++i) {
        rate(i) = dE[static_cast<std::size_t>(n + i)];
        rate(n + i) = -dE[static_cast<std::size_t>(i)] -
                      values[static_cast<std::size_t>(n + i)] * dE[static_cast<std::size_t>(2 * n)];
        pdot_Ep += values[static_cast<std::size_t>(n + i)] * dE[static_cast<std::size_t>(n + i)];
    }
    rate(2 * n) = (sys.variant == DynamicsVariant::Contact) ? pdot_Ep - E : pdot_Ep;
    return rate;
}

Trajectory dae_integrate(const MorseFamilySystem& sys, const Vec& x0,
                         const Vec& lambda0, const IntegratorConfig& cfg,
                         const PinnedMultipliers& pinned) {
    if (cfg.h <= 0.0 || cfg.T <= 0.0)
        throw DomainError("step and horizon must be positive");
    double steps_real = cfg.T / cfg.h;
    if (steps_real > 1e8)
        throw DomainError("T/h exceeds 1e8 steps");
    long steps = std::lround(steps_real);

    Vec lam = lambda0;
    auto resolve = [&](const Vec& x) {
        if (sys.k > 0)
            lam = solve_constraint(sys, x, lam, pinned).lambda;
    };
    auto rate = [&](const Vec& x) {
        resolve(x);
        return implicit_rhs(sys, x, lam);
    };

    Trajectory traj;
    std::vector<double> resid_diag, jump_diag;
    Vec x = x0;
    resolve(x);
    traj.times.push_back(0.0);
    traj.states.push_back(x);
    traj.multipliers.push_back(lam);
    resid_diag.push_back(inf_norm(constraint_residual(sys, x, lam)));
    jump_diag.push_back(0.0);

    Vec lam_prev = lam, lam_prev2 = lam;
    for (long i = 1; i <= steps; ++i) {
        x = rk4_step(rate, x, cfg.h);
        resolve(x);
        double resid = inf_norm(constraint_residual(sys, x, lam));
        if (resid > 1e-8)
            throw ConsistencyLost("constraint residual " + std::to_string(resid) +
                                  " after step " + std::to_string(i));
        // Multiplier continuation selects the branch nearest the running
        // lambda; a step far beyond the extrapolated rate flags a possible
        // branch jump.
        double jump = 0.0;
        if (i >= 2 && sys.k > 0) {
            double step_norm = inf_norm(lam - lam_prev);
            double rate_norm = inf_norm(lam_prev - lam_prev2) / cfg.h;
            double floor = 1e-9 * (1.0 + inf_norm(lam));
            if (step_norm > 10.0 * cfg.h * rate_norm + floor)
                jump = 1.0;
        }
        lam_prev2 = lam_prev;
        lam_prev = lam;
        traj.times.push_back(static_cast<double>(i) * cfg.h);
        traj.states.push_back(x);
        traj.multipliers.push_back(lam);
        resid_diag.push_back(resid);
        jump_diag.push_back(jump);
    }
    if (sys.k == 0)
        traj.multipliers.clear();
    traj.diagnostics["constraint_residual"] = std::move(resid_diag);
    traj.diagnostics["branch_jump"] = std::move(jump_diag);
    return traj;
}

Vec submanifold_tuple(const MorseFamilySystem& sys, const Vec& x,
                      const Vec& lambda, LegendrianTarget target) {
    check_target(sys, target);
    std::vector<double> values = combined_values(sys, x, lambda);
    std::vector<double> tuple = legendrian_tuple(sys, values, target);
    return Eigen::Map<const Vec>(tuple.data(), static_cast<int>(tuple.size()));
}

std::vector<Vec> legendrian_points(const MorseFamilySystem& sys,
                                   const std::vector<Vec>& xs, Vec lambda0,
                                   LegendrianTarget target) {
    check_target(sys, target);
    std::vector<Vec> out;
    out.reserve(xs.size());
    Vec lam = lambda0;
    for (const Vec& x : xs) {
        if (sys.k > 0)
            lam = solve_constraint(sys, x, lam).lambda;
        std::vector<double> values = combined_values(sys, x, lam);
        std::vector<double> tuple = legendrian_tuple(sys, values, target);
        out.push_back(Eigen::Map<const Vec>(tuple.data(),
                                            static_cast<int>(tuple.size())));
    }
    return out;
}

ParamMap legendrian_param(const MorseFamilySystem& sys, LegendrianTarget target,
                          const Vec& lambda0) {
    check_target(sys, target);
    int bd = sys.base_dim();
    int n = sys.n;
    ParamMap pm;
    pm.domain_dim = bd;
    pm.target_dim = (target == LegendrianTarget::HorizontalTimesR) ? 4 * n + 2
                                                                   : 4 * n + 3;
    auto warm = std::make_shared<Vec>(lambda0);
    pm.fn = [sys, target, bd, warm](const DualVec& xd) {
        Vec x(bd);
        for (int i = 0; i < bd; ++i)
            x(i) = xd[static_cast<std::size_t>(i)].v;
        DualVec values(static_cast<std::size_t>(bd + sys.k));
        for (int i = 0; i < bd; ++i)
            values[static_cast<std::size_t>(i)] = xd[static_cast<std::size_t>(i)];
        if (sys.k > 0) {
            Vec lam = solve_constraint(sys, x, *warm).lambda;
            *warm = lam;
            // Implicit function theorem for the multiplier sensitivity in
            // the seeded direction: dlam = -H_ll^{-1} H_lx dx.
            std::vector<double> plain = combined_values(sys, x, lam);
            std::vector<int> lslots = multiplier_slots(bd, sys.k);
            std::vector<int> bslots(static_cast<std::size_t>(bd));
            for (int i = 0; i < bd; ++i)
                bslots[static_cast<std::size_t>(i)] = i;
            Mat Hll = hessian_block(sys.gen, plain, lslots, lslots);
            Mat Hlx = hessian_block(sys.gen, plain, lslots, bslots);
            Vec dx(bd);
            for (int i = 0; i < bd; ++i)
                dx(i) = xd[static_cast<std::size_t>(i)].d;
            Vec dlam = Hll.colPivHouseholderQr().solve(-(Hlx * dx));
            for (int j = 0; j < sys.k; ++j)
                values[static_cast<std::size_t>(bd + j)] =
                    Dual<double>(lam(j), dlam(j));
        }
        return legendrian_tuple<Dual<double>>(sys, values, target);
    };
    return pm;
}

std::vector<std::string> PhiGenerator::domain_vars() const {
    std::vector<std::string> v;
    for (int a : A)
        v.push_back("q" + std::to_string(a));
    for (int b : B)
        v.push_back("p" + std::to_string(b));
    return v;
}

PhiGenerator PhiGenerator::make(int n, std::vector<int> A, std::vector<int> B,
                                const std::string& phi_text) {
    PhiGenerator g;
    g.n = n;
    g.A = std::move(A);
    g.B = std::move(B);
    std::vector<bool> seen(static_cast<std::size_t>(n) + 1, false);
    for (int a : g.A) {
        if (a < 1 || a > n || seen[static_cast<std::size_t>(a)])
            throw DomainError("partition A is not a valid index set");
        seen[static_cast<std::size_t>(a)] = true;
    }
    for (int b : g.B) {
        if (b < 1 || b > n || seen[static_cast<std::size_t>(b)])
            throw DomainError("partitions A and B must be disjoint");
        seen[static_cast<std::size_t>(b)] = true;
    }
    for (int i = 1; i <= n; ++i)
        if (!seen[static_cast<std::size_t>(i)])
            throw DomainError("partitions A and B must cover 1..n");
    g.phi = ScalarExpr::parse(phi_text, g.domain_vars());
    return g;
}

namespace {

template <typename T>
std::vector<T> phi_tuple(const PhiGenerator& g, const std::vector<T>& s) {
    int n = g.n;
    int na = static_cast<int>(g.A.size());
    int nb = static_cast<int>(g.B.size());
    T phi;
    std::vector<T> dphi;
    eval_value_and_grad(g.phi, s, phi, dphi);
    std::vector<T> q(static_cast<std::size_t>(n)), p(static_cast<std::size_t>(n));
    T z = phi;
    for (int ia = 0; ia < na; ++ia) {
        q[static_cast<std::size_t>(g.A[static_cast<std::size_t>(ia)] - 1)] =
            s[static_cast<std::size_t>(ia)];
        p[static_cast<std::size_t>(g.A[static_cast<std::size_t>(ia)] - 1)] =
            dphi[static_cast<std::size_t>(ia)];
    }
    for (int ib = 0; ib < nb; ++ib) {
        const T& pb = s[static_cast<std::size_t>(na + ib)];
        const T& phi_pb = dphi[static_cast<std::size_t>(na + ib)];
        q[static_cast<std::size_t>(g.B[static_cast<std::size_t>(ib)] - 1)] = -phi_pb;
        p[static_cast<std::size_t>(g.B[static_cast<std::size_t>(ib)] - 1)] = pb;
        z = z - pb * phi_pb;
    }
    std::vector<T> out;
    out.reserve(static_cast<std::size_t>(2 * n + 1));
    for (int i = 0; i < n; ++i)
        out.push_back(q[static_cast<std::size_t>(i)]);
    for (int i = 0; i < n; ++i)
        out.push_back(p[static_cast<std::size_t>(i)]);
    out.push_back(z);
    return out;
}

} // namespace

std::vector<Vec> phi_points(const PhiGenerator& g, const std::vector<Vec>& samples) {
    std::vector<Vec> out;
    out.reserve(samples.size());
    for (const Vec& s : samples) {
        std::vector<double> sv(s.data(), s.data() + s.size());
        std::vector<double> tuple = phi_tuple(g, sv);
        out.push_back(Eigen::Map<const Vec>(tuple.data(),
                                            static_cast<int>(tuple.size())));
    }
    return out;
}

ParamMap phi_param(const PhiGenerator& g) {
    ParamMap pm;
    pm.domain_dim = g.n;
    pm.target_dim = 2 * g.n + 1;
    pm.fn = [g](const DualVec& s) { return phi_tuple<Dual<double>>(g, s); };
    return pm;
}

LegendrianFamily phi_to_morse(const PhiGenerator& g) {
    LegendrianFamily fam;
    fam.n = g.n;
    fam.k = static_cast<int>(g.B.size());
    for (int b : g.B)
        fam.multipliers.push_back("p" + std::to_string(b));

    std::vector<std::string> vars;
    for (int i = 1; i <= g.n; ++i)
        vars.push_back("q" + std::to_string(i));
    vars.insert(vars.end(), fam.multipliers.begin(), fam.multipliers.end());
    ExprBuilder builder(vars);
    int root = builder.splice(g.phi);
    std::string text = "(" + g.phi.text() + ")";
    for (int b : g.B) {
        root = builder.add(root, builder.mul(builder.var("q" + std::to_string(b)),
                                             builder.var("p" + std::to_string(b))));
        text += " + q" + std::to_string(b) + "*p" + std::to_string(b);
    }
    fam.gen = builder.finish(root, text);
    return fam;
}

ConstraintSolveReport legendrian_family_solve(const LegendrianFamily& fam,
                                              const Vec& q, const Vec& lambda0) {
    std::vector<double> values(static_cast<std::size_t>(fam.n + fam.k));
    for (int i = 0; i < fam.n; ++i)
        values[static_cast<std::size_t>(i)] = q(i);
    for (int j = 0; j < fam.k; ++j)
        values[static_cast<std::size_t>(fam.n + j)] = lambda0(j);
    ConstraintSolveReport report =
        newton_constraint(fam.gen, values, multiplier_slots(fam.n, fam.k));
    report.lambda.resize(fam.k);
    for (int j = 0; j < fam.k; ++j)
        report.lambda(j) = values[static_cast<std::size_t>(fam.n + j)];
    return report;
}

Vec legendrian_family_point(const LegendrianFamily& fam, const Vec& q,
                            const Vec& lambda) {
    std::vector<double> values(static_cast<std::size_t>(fam.n + fam.k));
    for (int i = 0; i < fam.n; ++i)
        values[static_cast<std::size_t>(i)] = q(i);
    for (int j = 0; j < fam.k; ++j)
        values[static_cast<std::size_t>(fam.n + j)] = lambda(j);
    double E;
    std::vector<double> dE;
    eval_value_and_grad(fam.gen, values, E, dE, fam.n);
    Vec out(2 * fam.n + 1);
    for (int i = 0; i < fam.n; ++i) {
        out(i) = q(i);
        out(fam.n + i) = dE[static_cast<std::size_t>(i)];
    }
    out(2 * fam.n) = E;
    return out;
}

} // namespace contactor
