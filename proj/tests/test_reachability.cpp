#include <doctest.h>

#include <random>

#include "chainscope/reachability.hpp"
#include "oracles.hpp"

using namespace chainscope;

namespace {

const Grid kUnit(Domain::interval(0, 1), 1024);

Point pt(double x) { return {x, 0.0}; }

}  // namespace

TEST_SUITE("reachability") {
  TEST_CASE("orbit reach examples") {
    const auto sq = orbit_reach(catalog::square(), kUnit, pt(0.5));
    CHECK(sq.converged);
    CHECK(sq.mode == ReachMode::OrbitSampled);
    for (double x : {0.5, 0.25, 0.0625, 0.00390625, 0.0}) CHECK(sq.cells.contains(kUnit.cell_of(pt(x))));

    const auto id = orbit_reach(catalog::identity(), kUnit, pt(0.5));
    CHECK(id.converged);
    CHECK(id.cells == CellSet::of_point(kUnit, pt(0.5)));

    const Grid circle(Domain::circle(), 3072);
    const auto rot = orbit_reach(catalog::rotation(1.0 / 3.0), circle, pt(0.0));
    CHECK(rot.converged);
    CHECK(rot.steps_used == 3);
    CHECK(rot.cells.count() == 3);
    for (double x : {0.0, 1.0 / 3.0, 2.0 / 3.0}) CHECK(rot.cells.contains(circle.cell_of(pt(x))));
  }

  TEST_CASE("orbit reach of a control tree and non-convergence") {
    const Grid g(Domain::interval(-1, 1), 400);
    const auto tree = orbit_reach(catalog::drift_control(0.5), g, pt(0.0));
    CHECK(tree.converged);
    CHECK(tree.cells.contains(g.cell_of(pt(0.1))));
    CHECK(tree.cells.contains(g.cell_of(pt(-0.15))));
    CHECK(!tree.cells.contains(g.cell_of(pt(0.5))));

    const auto cut = orbit_reach(catalog::rotation(0.6180339887), Grid(Domain::circle(), 4096), pt(0.0),
                                 ControlPolicy::every(), 10);
    CHECK(!cut.converged);
    CHECK(cut.steps_used == 10);
  }

  TEST_CASE("chain reach examples") {
    const Grid g(Domain::interval(0, 1), 256);
    const auto id = chain_reach(catalog::identity(), CellSet::of_point(g, pt(0.5)), 0.1, 4);
    REQUIRE(id.levels.size() == 4);
    for (const auto& lv : id.levels) CHECK(lv.cells.is_full());

    const auto k = chain_reach(catalog::constant(0.3), CellSet::of_point(g, pt(0.9)), 0.1, 3);
    REQUIRE(k.final);
    const Grid& fine = k.final->grid();
    CHECK(k.final->contains(fine.cell_of(pt(0.9))));
    CHECK(k.final->contains(fine.cell_of(pt(0.3))));
    CHECK(!k.final->contains(fine.cell_of(pt(0.6))));
    CHECK(k.levels[2].cells.count() < k.levels[0].cells.refined_to(fine).count());

    const auto sq = chain_reach(catalog::square(), CellSet::of_point(g, pt(1.0)), 0.1, 3);
    REQUIRE(sq.final);
    CHECK(sq.final->is_full());
  }

  TEST_CASE("chain reach levels are nested and distribute over unions") {
    std::mt19937_64 gen(31);
    const Grid g(Domain::interval(0, 1), 128);
    const System systems[] = {catalog::square(), catalog::logistic(3.2), catalog::constant(0.7)};
    for (const auto& sys : systems) {
      for (int t = 0; t < 4; ++t) {
        const auto a = oracle::random_set(g, gen, 0.01);
        const auto b = oracle::random_set(g, gen, 0.01);
        const auto ra = chain_reach(sys, a, 0.2, 3);
        const auto rb = chain_reach(sys, b, 0.2, 3);
        const auto rab = chain_reach(sys, a | b, 0.2, 3);
        for (std::size_t k = 0; k < rab.levels.size(); ++k) {
          CHECK(rab.levels[k].cells == (ra.levels[k].cells | rb.levels[k].cells));
          if (k > 0) {
            const auto& prev = ra.levels[k - 1];
            CHECK(ra.levels[k].cells.subset_of(fatten(prev.cells, prev.eps).refined_to(ra.levels[k].grid)));
          }
        }
      }
    }
  }

  TEST_CASE("sampled orbits sit inside chain reach") {
    const Grid g(Domain::interval(0, 1), 256);
    const System systems[] = {catalog::square(), catalog::logistic(3.7), catalog::identity()};
    for (const auto& sys : systems) {
      for (double x : {0.05, 0.37, 0.5, 0.81, 1.0}) {
        const auto res = chain_reach(sys, CellSet::of_point(g, pt(x)), 0.1, 3);
        for (const auto& lv : res.levels) {
          const auto orbit = orbit_reach(sys, lv.grid, pt(x), ControlPolicy::every(), 20000);
          CHECK(orbit.cells.subset_of(lv.cells));
        }
      }
    }
  }

  TEST_CASE("resource cap yields partial levels") {
    const Grid g(Domain::interval(0, 1), 256);
    setenv("CHAINSCOPE_MAX_CELLS", "1024", 1);
    bool thrown = false;
    try {
      chain_reach(catalog::square(), CellSet::of_point(g, pt(0.5)), 0.1, 5);
    } catch (const ChainReachResourceError& e) {
      thrown = true;
      CHECK(e.partial().levels.size() == 3);
    }
    unsetenv("CHAINSCOPE_MAX_CELLS");
    CHECK(thrown);
  }

  TEST_CASE("default schedule and validation") {
    const auto s = default_delta_schedule(0.1, kUnit);
    REQUIRE(!s.empty());
    CHECK(s.front() == doctest::Approx(0.05));
    CHECK(s.back() >= 4.0 * kUnit.cell_diameter());
    CHECK(s.back() / 2 < 4.0 * kUnit.cell_diameter());
    CHECK_THROWS_AS(default_delta_schedule(0.005, kUnit), ResolutionError);
    const std::vector<double> bad{0.05, 0.05};
    CHECK_THROWS(validate_schedule(bad, kUnit));
  }

  TEST_CASE("robustness: square at 1 is not robust, at 0 it is") {
    const auto sq = catalog::square();
    const auto one = robustness_check(sq, kUnit, pt(1.0), 0.1);
    CHECK(one.verdict == RobustVerdict::NonRobustAtResolution);
    CHECK(one.witness_valid);
    CHECK(one.witness_endpoint_distance > 0.1);
    CHECK(is_delta_chain(sq, pt(1.0), one.witness, one.delta_min));
    CHECK(replay_certificate(sq, pt(1.0), one));

    const auto zero = robustness_check(sq, kUnit, pt(0.0), 0.1);
    CHECK(zero.verdict == RobustVerdict::RobustAtResolution);
    REQUIRE(zero.delta);
    CHECK(*zero.delta >= 0.02);
    CHECK(replay_certificate(sq, pt(0.0), zero));

    const auto k = robustness_check(catalog::constant(0.3), kUnit, pt(0.9), 0.1);
    CHECK(k.verdict == RobustVerdict::RobustAtResolution);
  }

  TEST_CASE("robustness: inconclusive when the orbit does not converge") {
    const Grid circle(Domain::circle(), 1024);
    const auto schedule = default_delta_schedule(0.1, circle);
    CHECK_THROWS_AS(robustness_check(catalog::rotation(0.6180339887), circle, pt(0.1), 0.1, schedule, 5),
                    InconclusiveError);
  }

  TEST_CASE("tampered witnesses fail to replay") {
    const auto sq = catalog::square();
    auto cert = robustness_check(sq, kUnit, pt(1.0), 0.1);
    REQUIRE(cert.witness.size() > 2);
    cert.witness[1].point[0] -= 0.05;
    CHECK(!is_delta_chain(sq, pt(1.0), cert.witness, cert.delta_min));
    CHECK(!replay_certificate(sq, pt(1.0), cert));
  }

  TEST_CASE("lemma 2 verifier") {
    const auto sq = catalog::square();
    const auto start = CellSet::of_box(kUnit, pt(0.0), pt(0.1));
    const auto rep = verify_lemma2(sq, start, 0.1, 200, default_delta_schedule(0.1, kUnit));
    REQUIRE(rep.delta);
    CHECK(*rep.delta <= 0.05);

    const Grid circle(Domain::circle(), 3072);
    const auto rot = verify_lemma2(catalog::rotation(1.0 / 3.0), CellSet::of_point(circle, pt(0.2)), 0.08, 200,
                                   default_delta_schedule(0.08, circle));
    REQUIRE(rot.delta);
    CHECK(*rot.delta <= 0.04);

    // delta = eps with the start unfattened at n = 1 fails: the fattened start already spills.
    const std::vector<double> only_eps{0.1};
    const auto fail = verify_lemma2(sq, CellSet::of_point(kUnit, pt(0.5)), 0.1, 1, only_eps);
    CHECK(!fail.delta);
    REQUIRE(fail.rejected.size() == 1);
  }

  TEST_CASE("initial fattening does not change the limit") {
    const Grid g(Domain::interval(0, 1), 256);
    const std::vector<std::pair<System, double>> cases{
        {catalog::constant(0.3), 0.5}, {catalog::square(), 1.0}, {catalog::identity(), 0.2}};
    for (const auto& [sys, x] : cases) {
      const auto rep = verify_initial_fattening(sys, CellSet::of_point(g, pt(x)), 0.1, 4);
      CHECK(rep.equal);
      CHECK(rep.residual <= rep.finest_diameter);
    }
  }

  TEST_CASE("semicontinuity probes") {
    const auto sq = catalog::square();
    const auto sched = default_delta_schedule(0.1, kUnit);
    const auto usc = semicontinuity_probe(sq, kUnit, pt(1.0), 0.1, ProbeMode::Usc, sched);
    CHECK(!usc.delta);
    REQUIRE(usc.violating);
    CHECK((*usc.violating)[0] < 1.0);
    const auto lsc = semicontinuity_probe(sq, kUnit, pt(1.0), 0.1, ProbeMode::Lsc, sched);
    CHECK(lsc.delta);
    for (auto mode : {ProbeMode::Usc, ProbeMode::Lsc}) {
      const auto id = semicontinuity_probe(catalog::identity(), kUnit, pt(0.4), 0.1, mode, sched);
      REQUIRE(id.delta);
      CHECK(*id.delta == doctest::Approx(sched.front()));
    }
    const auto samples = ball_samples(kUnit.domain(), pt(0.99), 0.05, 32);
    CHECK(samples.size() == 32);
    for (const auto& s : samples) {
      CHECK(kUnit.domain().contains(s));
      CHECK(kUnit.domain().distance(s, pt(0.99)) <= 0.05 + 1e-12);
    }
  }

  TEST_CASE("safety examples") {
    const auto sq = catalog::square();
    const auto safe = CellSet::of_box(kUnit, pt(0.0), pt(0.6));
    const auto a = safety_check(sq, kUnit, pt(0.5), safe, 0.05);
    CHECK(a.safe);
    CHECK(a.eps_safe);
    CHECK(a.perturbed_guarantee);
    CHECK(a.delta);

    const Grid g100(Domain::interval(0, 1), 100);
    const auto half = CellSet::of_box(g100, pt(0.0), pt(0.5));
    const auto b = safety_check(sq, g100, pt(0.5), half, 0.05);
    CHECK(b.safe);
    CHECK(!b.eps_safe);
    CHECK(!b.perturbed_guarantee);

    const auto c = safety_check(catalog::identity(), kUnit, pt(0.5), CellSet::of_box(kUnit, pt(0.4), pt(0.6)), 0.05);
    CHECK(c.eps_safe);
    CHECK(!c.perturbed_guarantee);
    REQUIRE(c.robustness);
    CHECK(c.robustness->verdict == RobustVerdict::NonRobustAtResolution);
  }

  TEST_CASE("robust at every scale implies chain reach near the fattened orbit") {
    const auto sq = catalog::square();
    const Grid g(Domain::interval(0, 1), 512);
    const auto res = chain_reach(sq, CellSet::of_point(g, pt(0.0)), 0.1, 3);
    for (const auto& lv : res.levels) {
      CHECK(robustness_check(sq, lv.grid, pt(0.0), lv.eps).verdict == RobustVerdict::RobustAtResolution);
    }
    const auto& last = res.levels.back();
    const auto orbit = orbit_reach(sq, last.grid, pt(0.0));
    CHECK(hausdorff(*res.final, fatten(orbit.cells, last.eps)) <= last.eps + last.grid.cell_diameter());
  }
}
