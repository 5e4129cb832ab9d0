#include <doctest.h>

#include <cmath>

#include "contactor/implicit.hpp"
#include "contactor/rng.hpp"

using namespace contactor;

namespace {

LagrangianSystem oscillator_lag() {
    return LagrangianSystem::make(1, "qd1^2/2 - q1^2/2 - 0.2*z");
}

HamiltonianSystem oscillator_ham() {
    return HamiltonianSystem::make(1, "p1^2/2 + q1^2/2 + 0.2*z");
}

} // namespace

TEST_CASE("herglotz families always pass the rank check") {
    Rng rng(42);
    auto fams = {MorseFamilySystem::herglotz(oscillator_lag(), DynamicsVariant::Contact),
                 MorseFamilySystem::herglotz(
                     LagrangianSystem::make(2, "qd1^2/2 + qd1*qd2 + qd2^2 - q1*q2 - 0.2*z"),
                     DynamicsVariant::Evolution)};
    for (const auto& fam : fams)
        for (int trial = 0; trial < 25; ++trial) {
            Vec x = rng.uniform_vec(fam.base_dim());
            Vec lam = rng.uniform_vec(fam.k);
            auto report = morse_rank_check(fam, x, lam);
            CHECK(report.ok);
            CHECK(report.rank == fam.k);
        }
}

TEST_CASE("rank check on degenerate and mixed generators") {
    // E = l1^2: generates the zero section; the multiplier row has a unit
    // entry in the l1 column, so the condition holds.
    auto zero_sec = MorseFamilySystem::make(1, DynamicsVariant::Contact, "l1^2", {"l1"});
    auto r1 = morse_rank_check(zero_sec, Vec::Zero(3), Vec::Zero(1));
    CHECK(r1.ok);
    CHECK(r1.rank == 1);

    // E = q1*l1: the mixed block carries the rank.
    auto mixed = MorseFamilySystem::make(1, DynamicsVariant::Contact, "q1*l1", {"l1"});
    auto r2 = morse_rank_check(mixed, Vec::Zero(3), Vec::Zero(1));
    CHECK(r2.ok);
    CHECK(r2.rank == 1);

    // E depending on nothing the multiplier touches: all second partials in
    // the multiplier row vanish.
    auto flat = MorseFamilySystem::make(1, DynamicsVariant::Contact, "q1^2 + l1", {"l1"});
    auto r3 = morse_rank_check(flat, Vec::Zero(3), Vec::Zero(1));
    CHECK(!r3.ok);
    CHECK(r3.rank == 0);

    // k = 0 (explicit) is trivially fine.
    auto expl = MorseFamilySystem::from_hamiltonian(oscillator_ham(), DynamicsVariant::Contact);
    CHECK(morse_rank_check(expl, Vec::Zero(3), Vec()).ok);
}

TEST_CASE("constraint solve examples") {
    auto herg = MorseFamilySystem::herglotz(oscillator_lag(), DynamicsVariant::Contact);
    Vec x(3);
    x << 0.0, 1.0, 0.0;
    auto rep = solve_constraint(herg, x, Vec::Zero(1));
    CHECK(std::abs(rep.lambda(0) - 1.0) <= 1e-12);

    auto affine = MorseFamilySystem::make(1, DynamicsVariant::Contact,
                                          "l1^2/2 - 3*l1", {"l1"});
    auto rep2 = solve_constraint(affine, Vec::Zero(3), Vec::Zero(1));
    CHECK(rep2.lambda(0) == doctest::Approx(3.0));
    CHECK(rep2.iterations == 1);

    // L independent of qd2: zero row in the multiplier Hessian
    auto gauge = MorseFamilySystem::herglotz(
        LagrangianSystem::make(2, "qd1^2/2 - q1^2/2 - 0.2*z"), DynamicsVariant::Contact);
    Vec x2(5);
    x2 << 1.0, 0.0, 0.0, 0.0, 0.0;
    CHECK_THROWS_AS(solve_constraint(gauge, x2, Vec::Zero(2)), SingularConstraintJacobian);
    // pinning the deficient direction makes it solvable
    auto rep3 = solve_constraint(gauge, x2, Vec::Zero(2), {{"qd2", 0.0}});
    CHECK(std::abs(rep3.lambda(0) - 0.0) <= 1e-12);
    CHECK(rep3.lambda(1) == 0.0);
}

TEST_CASE("implicit rates reproduce the Herglotz identities on the constraint") {
    auto lag = oscillator_lag();
    auto fam_c = MorseFamilySystem::herglotz(lag, DynamicsVariant::Contact);
    auto fam_e = MorseFamilySystem::herglotz(lag, DynamicsVariant::Evolution);
    Rng rng(7);
    for (int trial = 0; trial < 30; ++trial) {
        double q = rng.uniform(), qd = rng.uniform(), z = rng.uniform();
        double p = qd;  // p = L_qd for this Lagrangian
        Vec x(3);
        x << q, p, z;
        Vec lam = Vec::Constant(1, qd);
        double L = lag.L.eval({{"q1", q}, {"qd1", qd}, {"z", z}});
        double Lq = -q, Lz = -0.2, Lqd = qd;

        Vec rc = implicit_rhs(fam_c, x, lam);
        CHECK(rc(0) == doctest::Approx(qd).epsilon(1e-14));
        CHECK(rc(1) == doctest::Approx(Lq + Lz * Lqd).epsilon(1e-13));
        CHECK(rc(2) == doctest::Approx(L).epsilon(1e-13));

        Vec re = implicit_rhs(fam_e, x, lam);
        CHECK(re(2) == doctest::Approx(p * qd).epsilon(1e-13));
    }
}

TEST_CASE("k=0 reduction matches the explicit fields exactly") {
    auto ham = oscillator_ham();
    auto fam = MorseFamilySystem::from_hamiltonian(ham, DynamicsVariant::Contact);
    auto fam_e = MorseFamilySystem::from_hamiltonian(ham, DynamicsVariant::Evolution);
    Rng rng(3);
    for (int trial = 0; trial < 30; ++trial) {
        Vec x = rng.uniform_vec(3);
        ContactState s{x.segment(0, 1), x.segment(1, 1), x(2)};
        auto tc = contact_vf(ham, s);
        Vec rc = implicit_rhs(fam, x, Vec());
        CHECK(rc(0) == tc.dq(0));
        CHECK(rc(1) == tc.dp(0));
        CHECK(rc(2) == tc.dz);
        auto te = evolution_vf(ham, s);
        Vec re = implicit_rhs(fam_e, x, Vec());
        CHECK(re(2) == te.dz);
    }
}

TEST_CASE("constrained run matches the explicit Legendre-transformed run") {
    auto lag = oscillator_lag();
    auto ham = oscillator_ham();
    IntegratorConfig cfg{1e-3, 10.0};
    Vec x0(3);
    x0 << 1.0, 0.0, 0.0;

    for (auto variant : {DynamicsVariant::Contact, DynamicsVariant::Evolution}) {
        auto fam = MorseFamilySystem::herglotz(lag, variant);
        auto dae = dae_integrate(fam, x0, Vec::Zero(1), cfg);
        auto expl = integrate_hamiltonian(
            ham, ContactState{x0.segment(0, 1), x0.segment(1, 1), x0(2)}, cfg,
            variant == DynamicsVariant::Contact ? ContactVariant::Contact
                                                : ContactVariant::Evolution);
        REQUIRE(dae.size() == expl.size());
        double worst = 0.0;
        for (std::size_t i = 0; i < dae.size(); ++i)
            worst = std::max(worst,
                             (dae.states[i] - expl.states[i]).cwiseAbs().maxCoeff());
        CHECK(worst <= 1e-6);
        for (double r : dae.diagnostics.at("constraint_residual"))
            CHECK(r <= 1e-8);
    }
}

TEST_CASE("k=0 constrained stepping is bit-compatible with the explicit path") {
    auto ham = oscillator_ham();
    auto fam = MorseFamilySystem::from_hamiltonian(ham, DynamicsVariant::Contact);
    IntegratorConfig cfg{1e-2, 1.0};
    Vec x0(3);
    x0 << 1.0, 0.0, 0.0;
    auto dae = dae_integrate(fam, x0, Vec(), cfg);
    auto expl = integrate_hamiltonian(ham, ContactState{x0.segment(0, 1), x0.segment(1, 1), x0(2)},
                                      cfg, ContactVariant::Contact);
    REQUIRE(dae.size() == expl.size());
    for (std::size_t i = 0; i < dae.size(); ++i)
        CHECK((dae.states[i] - expl.states[i]).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("gauge directions: pinned run reproduces the reduced system, unpinned fails") {
    auto lag2 = LagrangianSystem::make(2, "qd1^2/2 - q1^2/2 - 0.2*z");
    auto fam2 = MorseFamilySystem::herglotz(lag2, DynamicsVariant::Contact);
    IntegratorConfig cfg{1e-3, 10.0};
    Vec x0(5);
    x0 << 1.0, 0.0, 0.0, 0.0, 0.0;  // q=(1,0), p=(0,0), z=0

    CHECK_THROWS_AS(dae_integrate(fam2, x0, Vec::Zero(2), cfg),
                    SingularConstraintJacobian);

    auto pinned = dae_integrate(fam2, x0, Vec::Zero(2), cfg, {{"qd2", 0.0}});

    auto fam1 = MorseFamilySystem::herglotz(oscillator_lag(), DynamicsVariant::Contact);
    Vec y0(3);
    y0 << 1.0, 0.0, 0.0;
    auto one_dof = dae_integrate(fam1, y0, Vec::Zero(1), cfg);

    REQUIRE(pinned.size() == one_dof.size());
    double worst = 0.0, worst_p2 = 0.0;
    for (std::size_t i = 0; i < pinned.size(); ++i) {
        const Vec& s2 = pinned.states[i];
        const Vec& s1 = one_dof.states[i];
        worst = std::max({worst, std::abs(s2(0) - s1(0)), std::abs(s2(2) - s1(1)),
                          std::abs(s2(4) - s1(2))});
        worst_p2 = std::max(worst_p2, std::abs(s2(3)));
    }
    CHECK(worst <= 1e-10);
    CHECK(worst_p2 <= 1e-12);
}

TEST_CASE("generated submanifolds are isotropic for their structures") {
    Rng rng(2025);
    std::vector<Vec> samples;
    for (int i = 0; i < 60; ++i)
        samples.push_back(rng.uniform_vec(3));

    auto lag = oscillator_lag();
    auto fam_c = MorseFamilySystem::herglotz(lag, DynamicsVariant::Contact);
    ParamMap pm_c = legendrian_param(fam_c, LegendrianTarget::TangentContact, Vec::Zero(1));
    CHECK(pullback_isotropy_check(pm_c, FormKind::EtaT, samples) <= 1e-8);

    auto fam_e = MorseFamilySystem::herglotz(lag, DynamicsVariant::Evolution);
    ParamMap pm_e = legendrian_param(fam_e, LegendrianTarget::HorizontalTimesR, Vec::Zero(1));
    CHECK(pullback_isotropy_check(pm_e, FormKind::OmegaEta, samples) <= 1e-8);

    ParamMap pm_j = legendrian_param(fam_c, LegendrianTarget::CotangentJet, Vec::Zero(1));
    CHECK(pullback_isotropy_check(pm_j, FormKind::EtaJet, samples) <= 1e-8);
}

TEST_CASE("explicit tuples coincide with the field graphs at k=0") {
    auto ham = oscillator_ham();
    auto fam = MorseFamilySystem::from_hamiltonian(ham, DynamicsVariant::Contact);
    Rng rng(31);
    std::vector<Vec> xs;
    for (int i = 0; i < 20; ++i)
        xs.push_back(rng.uniform_vec(3));
    auto points = legendrian_points(fam, xs, Vec(), LegendrianTarget::TangentContact);
    for (std::size_t i = 0; i < xs.size(); ++i) {
        ContactState s{xs[i].segment(0, 1), xs[i].segment(1, 1), xs[i](2)};
        auto t = contact_vf(ham, s);
        double Hz = ham.H.grad({"z"}, {{"q1", s.q(0)}, {"p1", s.p(0)}, {"z", s.z}})[0];
        CHECK(points[i](3) == t.dq(0));
        CHECK(points[i](4) == t.dp(0));
        CHECK(points[i](5) == t.dz);
        CHECK(points[i](6) == Hz);
    }
}

TEST_CASE("herglotz tuples carry the Lagrangian data on the constraint") {
    auto lag = oscillator_lag();
    auto fam = MorseFamilySystem::herglotz(lag, DynamicsVariant::Contact);
    auto fam_e = MorseFamilySystem::herglotz(lag, DynamicsVariant::Evolution);
    Rng rng(64);
    for (int trial = 0; trial < 20; ++trial) {
        double q = rng.uniform(), qd = rng.uniform(), z = rng.uniform();
        Vec x(3);
        x << q, qd, z;  // p = L_qd = qd on the constraint
        Bindings b{{"q1", q}, {"qd1", qd}, {"z", z}};
        double L = lag.L.eval(b);

        Vec tuple = submanifold_tuple(fam, x, Vec::Constant(1, qd),
                                      LegendrianTarget::TangentContact);
        CHECK(tuple(3) == doctest::Approx(qd).epsilon(1e-14));             // qdot
        CHECK(tuple(4) == doctest::Approx(-0.2 * qd - q).epsilon(1e-13));  // L_z L_qd + L_q
        CHECK(tuple(5) == doctest::Approx(L).epsilon(1e-13));              // zdot = L
        CHECK(tuple(6) == doctest::Approx(0.2).epsilon(1e-14));            // -L_z

        Vec tuple_e = submanifold_tuple(fam_e, x, Vec::Constant(1, qd),
                                        LegendrianTarget::HorizontalTimesR);
        CHECK(tuple_e(3) == doctest::Approx(qd).epsilon(1e-14));
        CHECK(tuple_e(4) == doctest::Approx(-0.2 * qd - q).epsilon(1e-13));
        CHECK(tuple_e(5) == doctest::Approx(0.2).epsilon(1e-14));
    }
}

TEST_CASE("beta_c carries the contact tuples onto the jet tuples") {
    auto fam = MorseFamilySystem::herglotz(oscillator_lag(), DynamicsVariant::Contact);
    Rng rng(11);
    std::vector<Vec> xs;
    for (int i = 0; i < 40; ++i)
        xs.push_back(rng.uniform_vec(3));
    auto tangent = legendrian_points(fam, xs, Vec::Zero(1), LegendrianTarget::TangentContact);
    auto jets = legendrian_points(fam, xs, Vec::Zero(1), LegendrianTarget::CotangentJet);
    for (std::size_t i = 0; i < xs.size(); ++i) {
        Vec mapped = flatten(beta_c(ext_from_coords(tangent[i])));
        CHECK((mapped - jets[i]).cwiseAbs().maxCoeff() <= 1e-12);
    }
}

TEST_CASE("generating-function samples and the prolongation special case") {
    // B empty: points are the first prolongation of Phi(q)
    auto flat = PhiGenerator::make(2, {1, 2}, {}, "0.5*q1^2*q2 + q2^3/3");
    Rng rng(5);
    for (int trial = 0; trial < 10; ++trial) {
        Vec s = rng.uniform_vec(2);
        auto pts = phi_points(flat, {s});
        Bindings b{{"q1", s(0)}, {"q2", s(1)}};
        auto grad = flat.phi.grad({"q1", "q2"}, b);
        CHECK(pts[0](0) == s(0));
        CHECK(pts[0](1) == s(1));
        CHECK(pts[0](2) == grad[0]);
        CHECK(pts[0](3) == grad[1]);
        CHECK(pts[0](4) == flat.phi.eval(b));
    }

    // A empty, Phi = p^2/2: (q, p, z) = (-p, p, -p^2/2)
    auto mom = PhiGenerator::make(1, {}, {1}, "p1^2/2");
    for (int trial = 0; trial < 10; ++trial) {
        double p = rng.uniform();
        auto pts = phi_points(mom, {Vec::Constant(1, p)});
        CHECK(pts[0](0) == -p);
        CHECK(pts[0](1) == p);
        CHECK(pts[0](2) == -p * p / 2.0);
    }

    // generated submanifolds are eta-isotropic
    std::vector<Vec> samples;
    for (int i = 0; i < 30; ++i)
        samples.push_back(rng.uniform_vec(2));
    CHECK(pullback_isotropy_check(phi_param(flat), FormKind::Eta, samples) <= 1e-12);
}

TEST_CASE("generating function and its constrained family carve the same submanifold") {
    Rng rng(2026);
    for (int round = 0; round < 3; ++round) {
        // random cubic Phi(q1, p2), kept Newton-friendly by a quadratic term
        char buf[160];
        std::snprintf(buf, sizeof(buf),
                      "%.3f*q1^3 + %.3f*q1^2 + %.3f*q1*p2 + %.3f*p2^2 + %.3f*p2^3",
                      rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5),
                      rng.uniform(-0.8, 0.8), rng.uniform(0.6, 1.0),
                      rng.uniform(-0.3, 0.3));
        auto g = PhiGenerator::make(2, {1}, {2}, buf);
        auto fam = phi_to_morse(g);
        CHECK(fam.k == 1);

        double worst_fwd = 0.0, worst_bwd = 0.0;
        for (int i = 0; i < 70; ++i) {
            Vec s(2);
            s << rng.uniform(-0.8, 0.8), rng.uniform(-0.4, 0.4);
            Vec point = phi_points(g, {s})[0];

            // family solution at the same base point, warm-started from the
            // sampled multiplier branch
            Vec q = point.segment(0, 2);
            auto rep = legendrian_family_solve(fam, q, s.segment(1, 1));
            Vec family_point = legendrian_family_point(fam, q, rep.lambda);
            worst_fwd = std::max(worst_fwd,
                                 (family_point - point).cwiseAbs().maxCoeff());

            // and back: rebuild the sample from the family's multiplier
            Vec s_back(2);
            s_back << q(0), rep.lambda(0);
            Vec point_back = phi_points(g, {s_back})[0];
            worst_bwd = std::max(worst_bwd,
                                 (point_back - family_point).cwiseAbs().maxCoeff());
        }
        CHECK(worst_fwd <= 1e-8);
        CHECK(worst_bwd <= 1e-8);
    }
}

TEST_CASE("consistency is enforced along constrained runs") {
    // constraint l1 - q1 = 0 forces l1 to track q1; the rate ignores l1, so
    // the residual stays tiny and the run completes
    auto fam = MorseFamilySystem::make(1, DynamicsVariant::Contact,
                                       "p1 + (l1 - q1)^2/2", {"l1"});
    Vec x0(3);
    x0 << 0.0, 0.3, 0.0;
    auto traj = dae_integrate(fam, x0, Vec::Zero(1), IntegratorConfig{1e-2, 1.0});
    CHECK(traj.size() == 101);
    for (double r : traj.diagnostics.at("constraint_residual"))
        CHECK(r <= 1e-8);
    REQUIRE(traj.multipliers.size() == traj.size());
    for (std::size_t i = 0; i < traj.size(); ++i)
        CHECK(std::abs(traj.multipliers[i](0) - traj.states[i](0)) <= 1e-9);
}
