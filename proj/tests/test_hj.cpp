#include <doctest.h>

#include <cmath>

#include "contactor/hj.hpp"
#include "contactor/rng.hpp"
#include "test_util.hpp"

using namespace contactor;

namespace {

HamiltonianSystem dho() { return HamiltonianSystem::make(1, "p1^2/2 + q1^2/2 + 0.2*z"); }
HamiltonianSystem transport() { return HamiltonianSystem::make(1, "p1"); }

MorseFamilySystem fam_of(const HamiltonianSystem& h, DynamicsVariant v) {
    return MorseFamilySystem::from_hamiltonian(h, v);
}

} // namespace

TEST_CASE("characteristic functions: symbolic and tabulated agree on a cubic") {
    auto sym = CharacteristicFn::symbolic(1, "0.5*q1^3 - q1 + 2");
    // Hermite interpolation reproduces cubics exactly
    std::vector<double> grid, vals, ders;
    for (int i = 0; i <= 20; ++i) {
        double q = -1.0 + 0.1 * i;
        grid.push_back(q);
        vals.push_back(0.5 * q * q * q - q + 2.0);
        ders.push_back(1.5 * q * q - 1.0);
    }
    auto tab = CharacteristicFn::tabulated(grid, vals, ders);
    Rng rng(1);
    for (int trial = 0; trial < 50; ++trial) {
        Vec q = Vec::Constant(1, rng.uniform(-1.0, 1.0));
        CHECK(std::abs(tab.value(q) - sym.value(q)) <= 1e-13);
        CHECK(std::abs(tab.grad(q)(0) - sym.grad(q)(0)) <= 1e-12);
        CHECK(std::abs(tab.hess(q)(0, 0) - sym.hess(q)(0, 0)) <= 1e-11);
    }
    CHECK_THROWS_AS(tab.value(Vec::Constant(1, 3.0)), DomainError);
}

TEST_CASE("reduced dynamics on the section") {
    auto W = CharacteristicFn::symbolic(1, "0.7*q1");
    auto fam = fam_of(transport(), DynamicsVariant::Contact);
    Vec s(2);
    s << 0.3, -0.1;  // (q, z)
    Vec rate = reduced_vf(fam, W, s, Vec());
    CHECK(rate(0) == 1.0);
    CHECK(std::abs(rate(1)) <= 1e-15);  // W'·H_p - H = k - k

    auto flat = fam_of(HamiltonianSystem::make(1, "q1^2 + z"), DynamicsVariant::Contact);
    Vec rate2 = reduced_vf(flat, W, s, Vec());
    CHECK(rate2(0) == 0.0);  // H independent of p

    // explicit oscillator: qdot = p on the section = W'(q)
    auto anyW = CharacteristicFn::symbolic(1, "0.4*q1^2 - 0.2*q1");
    auto fam3 = fam_of(dho(), DynamicsVariant::Contact);
    Rng rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        Vec sr(2);
        sr << rng.uniform(), rng.uniform();
        Vec r3 = reduced_vf(fam3, anyW, sr, Vec());
        CHECK(r3(0) == doctest::Approx(anyW.grad(sr.segment(0, 1))(0)).epsilon(1e-14));
    }
}

TEST_CASE("reduced_vf rejects multipliers off the restricted constraint") {
    auto lag = LagrangianSystem::make(1, "qd1^2/2 - q1^2/2 - 0.2*z");
    auto fam = MorseFamilySystem::herglotz(lag, DynamicsVariant::Contact);
    auto W = CharacteristicFn::symbolic(1, "0.7*q1");
    Vec s(2);
    s << 0.5, 0.0;
    // constraint: p - qd = 0 with p = W'(q) = 0.7
    Vec good = Vec::Constant(1, 0.7);
    CHECK_NOTHROW(reduced_vf(fam, W, s, good));
    Vec bad = Vec::Constant(1, 0.2);
    CHECK_THROWS_AS(reduced_vf(fam, W, s, bad), ConstraintViolated);
}

TEST_CASE("hj residual examples") {
    auto W = CharacteristicFn::symbolic(1, "0.7*q1");
    auto fam = fam_of(transport(), DynamicsVariant::Contact);
    Vec s(2);
    s << 0.4, 0.2;
    auto rep = hj_residual(fam, W, s, Vec());
    CHECK(std::abs(rep.residual(0)) <= 1e-15);
    CHECK(rep.verdict);
    CHECK(std::abs(rep.dz_cancellation) <= 1e-13);

    // oscillator with W = 0: residual is H_q + 0 + 0 = q on the section
    auto zeroW = CharacteristicFn::symbolic(1, "0");
    auto famd = fam_of(dho(), DynamicsVariant::Contact);
    Vec s2(2);
    s2 << 0.6, -0.3;
    auto rep2 = hj_residual(famd, zeroW, s2, Vec());
    CHECK(rep2.residual(0) == doctest::Approx(0.6).epsilon(1e-14));
    CHECK(!rep2.verdict);
}

TEST_CASE("dz-cancellation holds regardless of whether W solves anything") {
    Rng rng(42);
    std::vector<std::string> state_vars{"q1", "p1", "z"};
    for (int trial = 0; trial < 40; ++trial) {
        auto H = HamiltonianSystem{1, ScalarExpr::parse(
            testutil::random_expression(rng, state_vars), contact_state_vars(1))};
        auto W = CharacteristicFn::symbolic(
            1, testutil::random_expression(rng, {"q1"}, 2));
        auto fam = fam_of(H, DynamicsVariant::Contact);
        Vec s(2);
        s << rng.uniform(), rng.uniform();
        auto rep = hj_residual(fam, W, s, Vec());
        CHECK(std::abs(rep.dz_cancellation) <= 1e-13);
    }
}

TEST_CASE("gamma-relatedness mismatch equals the residual entrywise") {
    Rng rng(7);
    auto famd = fam_of(dho(), DynamicsVariant::Contact);
    auto W = CharacteristicFn::symbolic(1, "0.3*q1^2 - 0.5*q1");
    for (int trial = 0; trial < 30; ++trial) {
        Vec s(2);
        s << rng.uniform(), rng.uniform();
        auto rep = hj_residual(famd, W, s, Vec());
        double mismatch = gamma_related_check(famd, W, {s}, Vec());
        CHECK(std::abs(mismatch - rep.residual.cwiseAbs().maxCoeff()) <= 1e-12);
    }

    auto famt = fam_of(transport(), DynamicsVariant::Contact);
    auto Wk = CharacteristicFn::symbolic(1, "0.7*q1");
    Vec s(2);
    s << 0.1, 0.9;
    CHECK(gamma_related_check(famt, Wk, {s}, Vec()) <= 1e-15);

    auto zeroW = CharacteristicFn::symbolic(1, "0");
    Vec s2(2);
    s2 << -0.8, 0.4;
    CHECK(gamma_related_check(famd, zeroW, {s2}, Vec()) ==
          doctest::Approx(0.8).epsilon(1e-13));
}

namespace {

struct EquivCase {
    MorseFamilySystem fam;
    CharacteristicFn W;
    Vec lambda0;
    bool expect_pass;
};

std::vector<EquivCase> equivalence_cases() {
    std::vector<EquivCase> cases;
    // explicit contact: transport pair solves, oscillator with quadratic W fails
    cases.push_back({fam_of(transport(), DynamicsVariant::Contact),
                     CharacteristicFn::symbolic(1, "0.7*q1"), Vec(), true});
    cases.push_back({fam_of(dho(), DynamicsVariant::Contact),
                     CharacteristicFn::symbolic(1, "0.3*q1^2"), Vec(), false});
    // implicit contact (k=1)
    cases.push_back({MorseFamilySystem::make(1, DynamicsVariant::Contact,
                                             "p1 + l1^2", {"l1"}),
                     CharacteristicFn::symbolic(1, "0.7*q1"), Vec::Zero(1), true});
    cases.push_back({MorseFamilySystem::herglotz(
                         LagrangianSystem::make(1, "qd1^2/2 - q1^2/2 - 0.2*z"),
                         DynamicsVariant::Contact),
                     CharacteristicFn::symbolic(1, "0"), Vec::Zero(1), false});
    // explicit evolution
    cases.push_back({fam_of(transport(), DynamicsVariant::Evolution),
                     CharacteristicFn::symbolic(1, "0.7*q1"), Vec(), true});
    cases.push_back({fam_of(dho(), DynamicsVariant::Evolution),
                     CharacteristicFn::symbolic(1, "0"), Vec(), false});
    // implicit evolution (k=1)
    cases.push_back({MorseFamilySystem::make(1, DynamicsVariant::Evolution,
                                             "p1 + l1^2", {"l1"}),
                     CharacteristicFn::symbolic(1, "0.7*q1"), Vec::Zero(1), true});
    cases.push_back({MorseFamilySystem::herglotz(
                         LagrangianSystem::make(1, "qd1^2/2 - q1^2/2 - 0.2*z"),
                         DynamicsVariant::Evolution),
                     CharacteristicFn::symbolic(1, "0.1*q1^2"), Vec::Zero(1), false});
    // symplectic baseline, explicit and constrained
    cases.push_back({MorseFamilySystem::make(1, DynamicsVariant::Symplectic,
                                             "p1 + l1^2", {"l1"}),
                     CharacteristicFn::symbolic(1, "0.7*q1"), Vec::Zero(1), true});
    cases.push_back({MorseFamilySystem::make(1, DynamicsVariant::Symplectic,
                                             "p1^2/2 + q1^2/2 + l1*(p1-q1)", {"l1"}),
                     CharacteristicFn::symbolic(1, "q1^2/2"),
                     Vec::Constant(1, 0.3), false});
    return cases;
}

} // namespace

TEST_CASE("residual and relatedness verdicts agree at both tolerances") {
    Rng rng(2024);
    for (auto& c : equivalence_cases()) {
        int d = reduced_dim(c.fam);
        std::vector<Vec> samples;
        for (int i = 0; i < 100; ++i) {
            Vec s = rng.uniform_vec(d);
            s(0) = rng.uniform(0.2, 1.0);  // keep the failing cases off q=0
            samples.push_back(s);
        }
        for (double tol : {1e-10, 1e-6}) {
            bool residual_ok = true;
            Vec lam = c.lambda0;
            for (const Vec& s : samples) {
                if (c.fam.k > 0) {
                    Vec x = section_point(c.fam, c.W, s);
                    if (constraint_residual(c.fam, x, lam).cwiseAbs().maxCoeff() > 1e-10)
                        lam = solve_constraint(c.fam, x, lam).lambda;
                }
                auto rep = hj_residual(c.fam, c.W, s, lam, tol);
                residual_ok = residual_ok && rep.verdict;
            }
            double mismatch = gamma_related_check(c.fam, c.W, samples, c.lambda0);
            bool related_ok = mismatch <= tol;
            CHECK(residual_ok == related_ok);
            CHECK(residual_ok == c.expect_pass);
        }
    }
}

TEST_CASE("closed-form lift: transport pair") {
    auto fam = fam_of(transport(), DynamicsVariant::Contact);
    auto W = CharacteristicFn::symbolic(1, "0.7*q1");
    Vec s0(2);
    s0 << 0.2, 1.5;
    auto reduced = integrate_reduced(fam, W, s0, IntegratorConfig{1e-3, 1.0}, Vec());
    auto lifted = lift_solution(W, reduced, fam, Vec());
    CHECK(lifted.max_residual <= 1e-10);
    for (std::size_t i = 0; i < lifted.full.size(); ++i) {
        CHECK(lifted.full.states[i](0) ==
              doctest::Approx(0.2 + reduced.times[i]).epsilon(1e-12));
        CHECK(lifted.full.states[i](1) == doctest::Approx(0.7).epsilon(1e-14));
        CHECK(lifted.full.states[i](2) == doctest::Approx(1.5).epsilon(1e-12));
    }
}

TEST_CASE("1-D solver: linear Hamiltonian is exact") {
    std::vector<double> grid;
    for (int i = 0; i <= 100; ++i)
        grid.push_back(-1.0 + 0.02 * i);
    auto sol = solve_evolution_hj_1d(transport(), 0.7, grid, 0.3, +1);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        CHECK(std::abs(sol.values[i] - (0.3 + 0.7 * (grid[i] + 1.0))) <= 1e-13);
        CHECK(sol.residuals[i] <= 1e-13);
    }
}

TEST_CASE("1-D solver: oscillator branch solves pointwise, bisection agrees") {
    auto sys = dho();
    std::vector<double> grid;
    const int N = 2000;
    for (int i = 0; i <= N; ++i)
        grid.push_back(0.0 + 0.5 * i / N);
    auto sol = solve_evolution_hj_1d(sys, 1.0, grid, 0.0, +1);
    for (double r : sol.residuals)
        CHECK(r <= 1e-10);
    for (double d : sol.derivs)
        CHECK(d > 0.0);

    // independent check: bisection on p at 10 nodes
    for (int k = 0; k < 10; ++k) {
        std::size_t i = static_cast<std::size_t>(k) * (grid.size() - 1) / 9;
        double q = grid[i], Wv = sol.values[i];
        auto f = [&](double p) {
            return sys.H.eval({{"q1", q}, {"p1", p}, {"z", Wv}}) - 1.0;
        };
        double lo = 0.0, hi = 3.0;
        REQUIRE(f(lo) < 0.0);
        REQUIRE(f(hi) > 0.0);
        for (int it = 0; it < 100; ++it) {
            double mid = 0.5 * (lo + hi);
            (f(mid) < 0.0 ? lo : hi) = mid;
        }
        CHECK(std::abs(0.5 * (lo + hi) - sol.derivs[i]) <= 1e-9);
    }

    auto sol_minus = solve_evolution_hj_1d(sys, 1.0, grid, 0.0, -1);
    for (double d : sol_minus.derivs)
        CHECK(d < 0.0);
}

TEST_CASE("1-D solver: no real branch raises BranchLoss") {
    auto sys = HamiltonianSystem::make(1, "p1^2 + q1^2");
    std::vector<double> grid{0.5, 0.6, 0.7};
    CHECK_THROWS_AS(solve_evolution_hj_1d(sys, 0.0, grid, 0.0, +1), BranchLoss);
}

TEST_CASE("solved W lifts to an evolution solution") {
    auto sys = dho();
    std::vector<double> grid;
    // second derivatives of the tabulated W carry O(h^2) interpolation
    // error, so the 1e-8 gradient-residual bound needs a fine grid
    const int N = 12000;
    for (int i = 0; i <= N; ++i)
        grid.push_back(0.0 + 0.6 * i / N);
    auto sol = solve_evolution_hj_1d(sys, 1.0, grid, 0.0, +1);

    // residual of the solved W on its grid, through the tabulated interpolant
    auto fam = fam_of(sys, DynamicsVariant::Evolution);
    double worst_grid = 0.0;
    for (int k = 0; k <= 40; ++k) {
        std::size_t i = static_cast<std::size_t>(k) * (grid.size() - 1) / 40;
        Vec s = Vec::Constant(1, grid[i]);
        auto rep = hj_residual(fam, sol.W, s, Vec());
        worst_grid = std::max(worst_grid, rep.residual.cwiseAbs().maxCoeff());
    }
    CHECK(worst_grid <= 1e-8);

    IntegratorConfig cfg{1e-3, 0.25};
    auto reduced = integrate_reduced(fam, sol.W, Vec::Constant(1, 0.05), cfg, Vec());
    REQUIRE(!reduced.error);
    auto lifted = lift_solution(sol.W, reduced, fam, Vec());
    CHECK(lifted.max_residual <= 1e-5);

    // H is pinned to c along the lift
    double worstH = 0.0;
    for (const Vec& x : lifted.full.states) {
        double H = sys.H.eval({{"q1", x(0)}, {"p1", x(1)}, {"z", x(2)}});
        worstH = std::max(worstH, std::abs(H - 1.0));
    }
    CHECK(worstH <= 1e-6);

    // oracle: direct evolution integration from the lifted initial point
    auto direct = integrate_hamiltonian(
        sys, ContactState{lifted.full.states[0].segment(0, 1),
                          lifted.full.states[0].segment(1, 1),
                          lifted.full.states[0](2)},
        cfg, ContactVariant::Evolution);
    REQUIRE(direct.size() == lifted.full.size());
    double worst_traj = 0.0;
    for (std::size_t i = 0; i < direct.size(); ++i)
        worst_traj = std::max(worst_traj, (direct.states[i] - lifted.full.states[i])
                                              .cwiseAbs()
                                              .maxCoeff());
    CHECK(worst_traj <= 1e-4);
}

TEST_CASE("lift soundness bound") {
    // solving pairs: lifted defect <= 5 (reduced defect + 1e-10 * horizon)
    struct Case {
        MorseFamilySystem fam;
        CharacteristicFn W;
        Vec s0;
        double T;
    };
    std::vector<Case> cases;
    {
        Vec s0(2);
        s0 << 0.2, 1.5;
        cases.push_back({fam_of(transport(), DynamicsVariant::Contact),
                         CharacteristicFn::symbolic(1, "0.7*q1"), s0, 1.0});
    }
    {
        auto sys = dho();
        std::vector<double> grid;
        const int N = 4000;
        for (int i = 0; i <= N; ++i)
            grid.push_back(0.0 + 0.6 * i / N);
        auto sol = solve_evolution_hj_1d(sys, 1.0, grid, 0.0, +1);
        cases.push_back({fam_of(sys, DynamicsVariant::Evolution), sol.W,
                         Vec::Constant(1, 0.05), 0.25});
    }
    for (auto& c : cases) {
        IntegratorConfig cfg{1e-3, c.T};
        auto reduced = integrate_reduced(c.fam, c.W, c.s0, cfg, Vec());
        double h = cfg.h;
        double reduced_defect = 0.0;
        for (std::size_t i = 1; i + 1 < reduced.size(); ++i) {
            Vec rate = reduced_vf(c.fam, c.W, reduced.states[i], Vec());
            Vec diff = (reduced.states[i + 1] - reduced.states[i - 1]) / (2.0 * h);
            reduced_defect =
                std::max(reduced_defect, (diff - rate).cwiseAbs().maxCoeff());
        }
        auto lifted = lift_solution(c.W, reduced, c.fam, Vec());
        CHECK(lifted.max_residual <= 5.0 * (reduced_defect + 1e-10 * c.T) + 1e-12);
    }
}

TEST_CASE("bad characteristic functions are reported, not silently lifted") {
    auto fam = fam_of(dho(), DynamicsVariant::Contact);
    auto zeroW = CharacteristicFn::symbolic(1, "0");
    Vec s0(2);
    s0 << 1.0, 0.0;
    auto reduced = integrate_reduced(fam, zeroW, s0, IntegratorConfig{1e-3, 1.0}, Vec());
    auto lifted = lift_solution(zeroW, reduced, fam, Vec());
    CHECK(lifted.max_residual > 1e-2);  // bounded below by the O(1) HJ defect

    // a trajectory that does not solve the reduced system is rejected
    Trajectory junk = reduced;
    for (auto& s : junk.states)
        s(0) += 0.3 * std::sin(3.0 * s(1));
    CHECK_THROWS_AS(lift_solution(zeroW, junk, fam, Vec()), ReducedNotASolution);
}

TEST_CASE("classical Hamilton-Jacobi is the z-independent special case") {
    Rng rng(5);
    auto Hc = HamiltonianSystem::make(1, "p1^2/2 + sin(q1)");  // z absent
    auto fam_contact = fam_of(Hc, DynamicsVariant::Contact);
    MorseFamilySystem fam_symp;
    fam_symp.n = 1;
    fam_symp.k = 0;
    fam_symp.variant = DynamicsVariant::Symplectic;
    fam_symp.gen = ScalarExpr::parse("p1^2/2 + sin(q1)", symplectic_state_vars(1));
    auto W = CharacteristicFn::symbolic(1, "0.3*q1^2 - 0.1*q1");
    for (int trial = 0; trial < 30; ++trial) {
        Vec s(2);
        s << rng.uniform(), rng.uniform();
        auto rc = hj_residual(fam_contact, W, s, Vec());
        auto rs = hj_residual(fam_symp, W, s.segment(0, 1), Vec());
        CHECK(std::abs(rc.residual(0) - rs.residual(0)) <= 1e-14);
    }
}
