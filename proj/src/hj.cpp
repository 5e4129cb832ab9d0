#include "contactor/hj.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "contactor/errors.hpp"

namespace contactor {

namespace {

std::vector<std::string> q_vars(int n) {
    std::vector<std::string> v;
    for (int i = 1; i <= n; ++i)
        v.push_back("q" + std::to_string(i));
    return v;
}

constexpr double kRestrictedTol = 1e-10;

} // namespace

CharacteristicFn CharacteristicFn::symbolic(int n, const std::string& text) {
    return symbolic(n, ScalarExpr::parse(text, q_vars(n)));
}

CharacteristicFn CharacteristicFn::symbolic(int n, ScalarExpr W) {
    CharacteristicFn f;
    f.n_ = n;
    f.W_ = W.with_vars(q_vars(n));
    return f;
}

CharacteristicFn CharacteristicFn::tabulated(std::vector<double> q,
                                             std::vector<double> w,
                                             std::vector<double> dw) {
    if (q.size() < 3 || q.size() != w.size() || q.size() != dw.size())
        throw DomainError("tabulated characteristic function needs matching q/W/W' columns");
    for (std::size_t i = 1; i < q.size(); ++i)
        if (q[i] <= q[i - 1])
            throw DomainError("tabulated grid must be strictly increasing");
    CharacteristicFn f;
    f.n_ = 1;
    f.tabulated_ = true;
    f.tq_ = std::move(q);
    f.tw_ = std::move(w);
    f.td_ = std::move(dw);
    // Node slopes of the derivative table by three-point differences; the
    // second derivative comes from the derivative-table interpolant, which
    // keeps it at the table's accuracy instead of amplifying value roundoff
    // by 1/h^2.
    std::size_t m = f.tq_.size();
    f.ts_.resize(m);
    auto three_point = [&](std::size_t a, std::size_t b, std::size_t c, double at) {
        double qa = f.tq_[a], qb = f.tq_[b], qc = f.tq_[c];
        double da = f.td_[a], db = f.td_[b], dc = f.td_[c];
        // derivative of the quadratic through (qa,da),(qb,db),(qc,dc) at `at`
        return da * (2 * at - qb - qc) / ((qa - qb) * (qa - qc)) +
               db * (2 * at - qa - qc) / ((qb - qa) * (qb - qc)) +
               dc * (2 * at - qa - qb) / ((qc - qa) * (qc - qb));
    };
    f.ts_[0] = three_point(0, 1, 2, f.tq_[0]);
    for (std::size_t i = 1; i + 1 < m; ++i)
        f.ts_[i] = three_point(i - 1, i, i + 1, f.tq_[i]);
    f.ts_[m - 1] = three_point(m - 3, m - 2, m - 1, f.tq_[m - 1]);
    return f;
}

void CharacteristicFn::locate(double q, int& piece, double& t, double& h) const {
    double span = tq_.back() - tq_.front();
    if (q < tq_.front() - 1e-12 * span || q > tq_.back() + 1e-12 * span)
        throw DomainError("tabulated characteristic function evaluated outside its grid");
    auto it = std::upper_bound(tq_.begin(), tq_.end(), q);
    int idx = static_cast<int>(it - tq_.begin()) - 1;
    idx = std::clamp(idx, 0, static_cast<int>(tq_.size()) - 2);
    h = tq_[static_cast<std::size_t>(idx) + 1] - tq_[static_cast<std::size_t>(idx)];
    t = (q - tq_[static_cast<std::size_t>(idx)]) / h;
    piece = idx;
}

namespace {

// Cubic Hermite piece on [0,1]: value (order 0) or derivative in q (order 1).
double hermite_piece(double t, double h, double v0, double d0, double v1,
                     double d1, int order) {
    double t2 = t * t, t3 = t2 * t;
    if (order == 0)
        return (2 * t3 - 3 * t2 + 1) * v0 + (t3 - 2 * t2 + t) * h * d0 +
               (-2 * t3 + 3 * t2) * v1 + (t3 - t2) * h * d1;
    return (6 * t2 - 6 * t) * v0 / h + (3 * t2 - 4 * t + 1) * d0 +
           (-6 * t2 + 6 * t) * v1 / h + (3 * t2 - 2 * t) * d1;
}

} // namespace

double CharacteristicFn::value(const Vec& q) const {
    if (!tabulated_) {
        std::vector<double> values(q.data(), q.data() + q.size());
        return W_.eval_values<double>(values);
    }
    int i;
    double t, h;
    locate(q(0), i, t, h);
    return hermite_piece(t, h, tw_[i], td_[i], tw_[i + 1], td_[i + 1], 0);
}

Vec CharacteristicFn::grad(const Vec& q) const {
    if (!tabulated_) {
        std::vector<double> values(q.data(), q.data() + q.size());
        Vec g(n_);
        for (int i = 0; i < n_; ++i)
            g(i) = W_.derivative_values<double>(values, i);
        return g;
    }
    int i;
    double t, h;
    locate(q(0), i, t, h);
    Vec g(1);
    g(0) = hermite_piece(t, h, tw_[i], td_[i], tw_[i + 1], td_[i + 1], 1);
    return g;
}

Mat CharacteristicFn::hess(const Vec& q) const {
    if (!tabulated_) {
        std::vector<double> plain(q.data(), q.data() + q.size());
        Mat H(n_, n_);
        std::vector<Dual<double>> inner(plain.size());
        for (std::size_t v = 0; v < plain.size(); ++v)
            inner[v] = Dual<double>(plain[v], 0.0);
        for (int i = 0; i < n_; ++i)
            for (int j = i; j < n_; ++j) {
                for (std::size_t v = 0; v < plain.size(); ++v)
                    inner[v].d = (static_cast<int>(v) == j) ? 1.0 : 0.0;
                double second = W_.derivative_values<Dual<double>>(inner, i).d;
                H(i, j) = second;
                H(j, i) = second;
            }
        return H;
    }
    int i;
    double t, h;
    locate(q(0), i, t, h);
    // derivative of the interpolant of the derivative table
    Mat H(1, 1);
    H(0, 0) = hermite_piece(t, h, td_[i], ts_[i], td_[i + 1], ts_[i + 1], 1);
    return H;
}

int reduced_dim(const MorseFamilySystem& sys) {
    return sys.variant == DynamicsVariant::Contact ? sys.n + 1 : sys.n;
}

Vec section_point(const MorseFamilySystem& sys, const CharacteristicFn& W,
                  const Vec& reduced) {
    int n = sys.n;
    if (static_cast<int>(reduced.size()) != reduced_dim(sys))
        throw DomainError("reduced state dimension mismatch");
    Vec q = reduced.segment(0, n);
    Vec gw = W.grad(q);
    Vec x(sys.base_dim());
    x.segment(0, n) = q;
    x.segment(n, n) = gw;
    if (sys.variant == DynamicsVariant::Contact)
        x(2 * n) = reduced(n);
    else if (sys.variant == DynamicsVariant::Evolution)
        x(2 * n) = W.value(q);
    return x;
}

namespace {

void check_restricted(const MorseFamilySystem& sys, const Vec& x, const Vec& lambda) {
    if (sys.k == 0)
        return;
    Vec g = constraint_residual(sys, x, lambda);
    double norm = g.cwiseAbs().maxCoeff();
    if (norm > kRestrictedTol)
        throw ConstraintViolated("multiplier violates the restricted constraint (|g|=" +
                                 std::to_string(norm) + ")");
}

} // namespace

Vec reduced_vf(const MorseFamilySystem& sys, const CharacteristicFn& W,
               const Vec& reduced, const Vec& lambda) {
    Vec x = section_point(sys, W, reduced);
    check_restricted(sys, x, lambda);
    Vec rate = implicit_rhs(sys, x, lambda);
    if (sys.variant == DynamicsVariant::Contact) {
        Vec out(sys.n + 1);
        out.segment(0, sys.n) = rate.segment(0, sys.n);
        out(sys.n) = rate(2 * sys.n);  // p = grad W on the section
        return out;
    }
    return rate.segment(0, sys.n);
}

HJReport hj_residual(const MorseFamilySystem& sys, const CharacteristicFn& W,
                     const Vec& reduced, const Vec& lambda, double tol) {
    int n = sys.n;
    Vec x = section_point(sys, W, reduced);
    Vec q = x.segment(0, n);

    std::vector<double> values(static_cast<std::size_t>(sys.base_dim() + sys.k));
    for (int i = 0; i < sys.base_dim(); ++i)
        values[static_cast<std::size_t>(i)] = x(i);
    for (int j = 0; j < sys.k; ++j)
        values[static_cast<std::size_t>(sys.base_dim() + j)] = lambda(j);

    double E;
    std::vector<double> dE;
    eval_value_and_grad(sys.gen, values, E, dE);

    Mat Wxx = W.hess(q);
    Vec Wg = W.grad(q);
    HJReport report;
    report.residual.resize(n);
    bool has_z = sys.variant != DynamicsVariant::Symplectic;
    double Ez = has_z ? dE[static_cast<std::size_t>(2 * n)] : 0.0;
    for (int i = 0; i < n; ++i) {
        double r = dE[static_cast<std::size_t>(i)];
        for (int j = 0; j < n; ++j)
            r += Wxx(i, j) * dE[static_cast<std::size_t>(n + j)];
        if (has_z)
            r += Wg(i) * Ez;
        report.residual(i) = r;
    }
    report.constraint_residual.resize(sys.k);
    for (int j = 0; j < sys.k; ++j)
        report.constraint_residual(j) =
            dE[static_cast<std::size_t>(sys.base_dim() + j)];

    if (sys.variant == DynamicsVariant::Contact) {
        // z-slot of d(gen o section) against gen_z times the pulled-back
        // contact form applied to d/dz. The section's z-column is
        // (dq, dp, dz) = (0, 0, 1) since its momentum part is independent of
        // z, so the cancellation is structural; assembling both routes
        // through the Jacobian column keeps the identity observable.
        Vec zcol = Vec::Zero(sys.base_dim());
        zcol(2 * n) = 1.0;
        double route_a = 0.0;
        for (int i = 0; i < sys.base_dim(); ++i)
            route_a += dE[static_cast<std::size_t>(i)] * zcol(i);
        double eta_pullback_dz = zcol(2 * n) - x.segment(n, n).dot(zcol.segment(0, n));
        double route_b = Ez * eta_pullback_dz;
        report.dz_cancellation = route_a - route_b;
    }

    report.tolerance = tol;
    double worst = report.residual.size() ? report.residual.cwiseAbs().maxCoeff() : 0.0;
    if (report.constraint_residual.size())
        worst = std::max(worst, report.constraint_residual.cwiseAbs().maxCoeff());
    report.verdict = worst <= tol;
    return report;
}

double gamma_related_check(const MorseFamilySystem& sys, const CharacteristicFn& W,
                           const std::vector<Vec>& samples, Vec lambda0) {
    int n = sys.n;
    double worst = 0.0;
    Vec lam = lambda0;
    for (const Vec& s : samples) {
        Vec x = section_point(sys, W, s);
        // A supplied multiplier that already satisfies the restricted
        // constraint is used as-is; this admits families whose constraint
        // does not involve the multipliers (singular Newton system).
        if (sys.k > 0 &&
            constraint_residual(sys, x, lam).cwiseAbs().maxCoeff() > kRestrictedTol)
            lam = solve_constraint(sys, x, lam).lambda;
        Vec qdot_full = implicit_rhs(sys, x, lam);
        Vec q = x.segment(0, n);
        Mat Wxx = W.hess(q);

        Vec reduced_rate = reduced_vf(sys, W, s, lam);
        Vec qdot_red = reduced_rate.segment(0, n);
        Vec pdot_lift = Wxx * qdot_red;

        Vec lhs, rhs;
        switch (sys.variant) {
        case DynamicsVariant::Contact: {
            rhs = submanifold_tuple(sys, x, lam, LegendrianTarget::TangentContact);
            lhs.resize(4 * n + 3);
            lhs.segment(0, 2 * n + 1) = x;
            lhs.segment(2 * n + 1, n) = qdot_red;
            lhs.segment(3 * n + 1, n) = pdot_lift;
            lhs(4 * n + 1) = reduced_rate(n);
            lhs(4 * n + 2) = rhs(4 * n + 2);  // conformal slot R(gen), taken as-is
            break;
        }
        case DynamicsVariant::Evolution: {
            rhs = submanifold_tuple(sys, x, lam, LegendrianTarget::HorizontalTimesR);
            lhs.resize(4 * n + 2);
            lhs.segment(0, 2 * n + 1) = x;
            lhs.segment(2 * n + 1, n) = qdot_red;
            lhs.segment(3 * n + 1, n) = pdot_lift;
            lhs(4 * n + 1) = rhs(4 * n + 1);
            break;
        }
        case DynamicsVariant::Symplectic: {
            rhs.resize(4 * n);
            rhs.segment(0, 2 * n) = x;
            rhs.segment(2 * n, 2 * n) = qdot_full;
            lhs.resize(4 * n);
            lhs.segment(0, 2 * n) = x;
            lhs.segment(2 * n, n) = qdot_red;
            lhs.segment(3 * n, n) = pdot_lift;
            break;
        }
        }
        worst = std::max(worst, (lhs - rhs).cwiseAbs().maxCoeff());
    }
    return worst;
}

Trajectory integrate_reduced(const MorseFamilySystem& sys,
                             const CharacteristicFn& W, const Vec& reduced0,
                             const IntegratorConfig& cfg, Vec lambda0) {
    Vec lam = lambda0;
    VectorField field;
    field.dim = reduced_dim(sys);
    field.f = [&](const Vec& s) {
        if (sys.k > 0) {
            Vec x = section_point(sys, W, s);
            lam = solve_constraint(sys, x, lam).lambda;
        }
        return reduced_vf(sys, W, s, lam);
    };
    return integrate(field, reduced0, cfg);
}

LiftResult lift_solution(const CharacteristicFn& W, const Trajectory& reduced,
                         const MorseFamilySystem& sys, Vec lambda0,
                         double pre_tol) {
    if (reduced.size() < 3)
        throw ReducedNotASolution("reduced trajectory too short for centered differences");
    if (static_cast<int>(reduced.states[0].size()) != reduced_dim(sys))
        throw SchemaError("/reduced", "reduced state dimension does not match the system");
    double h = reduced.times[1] - reduced.times[0];

    // The reduced run must itself solve the reduced dynamics.
    Vec lam = lambda0;
    double reduced_defect = 0.0;
    std::vector<Vec> lam_at(reduced.size());
    for (std::size_t i = 0; i < reduced.size(); ++i) {
        if (sys.k > 0) {
            Vec x = section_point(sys, W, reduced.states[i]);
            if (constraint_residual(sys, x, lam).cwiseAbs().maxCoeff() > kRestrictedTol)
                lam = solve_constraint(sys, x, lam).lambda;
        }
        lam_at[i] = lam;
    }
    for (std::size_t i = 1; i + 1 < reduced.size(); ++i) {
        Vec rate = reduced_vf(sys, W, reduced.states[i], lam_at[i]);
        Vec diff = (reduced.states[i + 1] - reduced.states[i - 1]) / (2.0 * h);
        reduced_defect = std::max(reduced_defect, (diff - rate).cwiseAbs().maxCoeff());
    }
    if (reduced_defect > pre_tol)
        throw ReducedNotASolution("reduced trajectory defect " +
                                  std::to_string(reduced_defect) +
                                  " exceeds " + std::to_string(pre_tol));

    LiftResult out;
    out.full.times = reduced.times;
    out.full.states.reserve(reduced.size());
    for (std::size_t i = 0; i < reduced.size(); ++i)
        out.full.states.push_back(section_point(sys, W, reduced.states[i]));

    double worst = 0.0;
    for (std::size_t i = 1; i + 1 < reduced.size(); ++i) {
        Vec rate = implicit_rhs(sys, out.full.states[i], lam_at[i]);
        Vec diff = (out.full.states[i + 1] - out.full.states[i - 1]) / (2.0 * h);
        worst = std::max(worst, (diff - rate).cwiseAbs().maxCoeff());
    }
    out.max_residual = worst;
    return out;
}

namespace {

// Root of H(q, w, Wv) = c in w via expanding sign-scan bracket plus
// bisection; returns all brackets' roots sorted.
std::vector<double> scan_roots(const HamiltonianSystem& sys, double c, double q,
                               double Wv) {
    std::vector<double> state{q, 0.0, Wv};
    auto f = [&](double w) {
        state[1] = w;
        return sys.H.eval_values<double>(state) - c;
    };
    auto f_safe = [&](double w, bool& ok) {
        try {
            ok = true;
            return f(w);
        } catch (const DomainError&) {
            ok = false;
            return 0.0;
        }
    };
    double radius = 4.0 * (1.0 + std::abs(c) + std::abs(Wv) + std::abs(q));
    for (int expand = 0; expand < 8; ++expand) {
        const int M = 4096;
        std::vector<double> roots;
        double prev_w = -radius;
        bool prev_ok;
        double prev_f = f_safe(prev_w, prev_ok);
        for (int i = 1; i <= M; ++i) {
            double w = -radius + 2.0 * radius * static_cast<double>(i) / M;
            bool ok;
            double fv = f_safe(w, ok);
            if (!ok || !prev_ok) {
                prev_w = w;
                prev_f = fv;
                prev_ok = ok;
                continue;
            }
            if (prev_f == 0.0)
                roots.push_back(prev_w);
            else if (prev_f * fv < 0.0) {
                double lo = prev_w, hi = w, flo = prev_f;
                for (int it = 0; it < 200; ++it) {
                    double mid = 0.5 * (lo + hi);
                    double fm = f(mid);
                    if (fm == 0.0) { lo = hi = mid; break; }
                    if (flo * fm < 0.0)
                        hi = mid;
                    else {
                        lo = mid;
                        flo = fm;
                    }
                }
                roots.push_back(0.5 * (lo + hi));
            }
            prev_w = w;
            prev_f = fv;
            prev_ok = ok;
        }
        if (!roots.empty()) {
            std::sort(roots.begin(), roots.end());
            return roots;
        }
        radius *= 4.0;
    }
    return {};
}

} // namespace

HJ1DSolution solve_evolution_hj_1d(const HamiltonianSystem& sys, double c,
                                   const std::vector<double>& qgrid, double W0,
                                   int branch) {
    if (sys.n != 1)
        throw DomainError("the 1-D solver needs a single degree of freedom");
    if (qgrid.size() < 2)
        throw DomainError("grid needs at least two nodes");

    auto f_and_fp = [&](double q, double w, double Wv, double& fval, double& fp) {
        std::vector<double> state{q, w, Wv};
        fval = sys.H.eval_values<double>(state) - c;
        fp = sys.H.derivative_values<double>(state, 1);
    };

    // Newton continuation from a warm start, polished to the machine floor
    // (iterate while the residual improves). Turning points and divergence
    // surface as BranchLoss.
    auto newton_w = [&](double q, double Wv, double w) {
        double scale = 1.0 + std::abs(c);
        double best = std::numeric_limits<double>::infinity();
        for (int it = 0; it < 80; ++it) {
            double fval, fp;
            f_and_fp(q, w, Wv, fval, fp);
            if (std::abs(fp) < 1e-8)
                throw BranchLoss("turning point: |dH/dp| < 1e-8 at q=" +
                                 std::to_string(q));
            double af = std::abs(fval);
            if (af <= 1e-15 * scale || (af <= 1e-13 * scale && af >= best))
                return w;
            if (af >= best && af <= 1e-10 * scale)
                return w;  // roundoff floor above the polish target
            best = std::min(best, af);
            w -= fval / fp;
            if (!std::isfinite(w))
                throw BranchLoss("Newton diverged at q=" + std::to_string(q));
        }
        throw BranchLoss("Newton failed to converge at q=" + std::to_string(q));
    };

    std::vector<double> roots = scan_roots(sys, c, qgrid.front(), W0);
    if (roots.empty())
        throw BranchLoss("no real branch of H(q,w,W)=c at the first node");
    double w = branch >= 0 ? roots.back() : roots.front();
    w = newton_w(qgrid.front(), W0, w);

    HJ1DSolution sol;
    sol.grid = qgrid;
    sol.values.resize(qgrid.size());
    sol.derivs.resize(qgrid.size());
    sol.residuals.resize(qgrid.size());
    sol.values[0] = W0;
    sol.derivs[0] = w;

    for (std::size_t i = 0; i + 1 < qgrid.size(); ++i) {
        double q0 = qgrid[i], q1 = qgrid[i + 1];
        double h = q1 - q0;
        if (h <= 0.0)
            throw DomainError("grid must be strictly increasing");
        double Wv = sol.values[i];
        double k1 = w;
        double k2 = (w = newton_w(q0 + h / 2.0, Wv + h / 2.0 * k1, w));
        double k3 = (w = newton_w(q0 + h / 2.0, Wv + h / 2.0 * k2, w));
        double k4 = (w = newton_w(q1, Wv + h * k3, w));
        sol.values[i + 1] = Wv + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        w = newton_w(q1, sol.values[i + 1], w);
        sol.derivs[i + 1] = w;
    }
    for (std::size_t i = 0; i < qgrid.size(); ++i) {
        std::vector<double> state{qgrid[i], sol.derivs[i], sol.values[i]};
        sol.residuals[i] = std::abs(sys.H.eval_values<double>(state) - c);
    }
    sol.W = CharacteristicFn::tabulated(sol.grid, sol.values, sol.derivs);
    return sol;
}

HJReport hj_residual(const HamiltonianSystem& sys, ContactVariant variant,
                     const CharacteristicFn& W, const Vec& reduced, double tol) {
    MorseFamilySystem fam = MorseFamilySystem::from_hamiltonian(
        sys, variant == ContactVariant::Contact ? DynamicsVariant::Contact
                                                : DynamicsVariant::Evolution);
    return hj_residual(fam, W, reduced, Vec(), tol);
}

double gamma_related_check(const HamiltonianSystem& sys, ContactVariant variant,
                           const CharacteristicFn& W,
                           const std::vector<Vec>& samples) {
    MorseFamilySystem fam = MorseFamilySystem::from_hamiltonian(
        sys, variant == ContactVariant::Contact ? DynamicsVariant::Contact
                                                : DynamicsVariant::Evolution);
    return gamma_related_check(fam, W, samples, Vec());
}

} // namespace contactor
