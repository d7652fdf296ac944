#include <doctest.h>

#include "chainscope/minimal.hpp"
#include "chainscope/transition.hpp"
#include "oracles.hpp"

using namespace chainscope;

namespace {

Point pt(double x) { return {x, 0.0}; }

}  // namespace

TEST_SUITE("minimal") {
  TEST_CASE("classification") {
    const Grid g(Domain::interval(0, 1), 1024);
    const double tol = 2 * g.cell_diameter();
    CHECK(classify_point(catalog::square(), pt(0.0), 64, tol).kind == OrbitKind::FixedPoint);
    const auto rot = classify_point(catalog::rotation(1.0 / 3.0), pt(0.1), 64, tol);
    CHECK(rot.kind == OrbitKind::Periodic);
    CHECK(rot.period == 3);
    CHECK(rot.label() == "periodic(3)");
    CHECK(classify_point(catalog::rotation(0.6180339887), pt(0.4), 64, tol).kind == OrbitKind::Other);
    CHECK(classify_point(catalog::rotation(0.1), pt(0.4), 64, tol).period == 10);
    CHECK(classify_point(catalog::rotation(1.0 / 97.0), pt(0.4), 64, 1e-9).kind == OrbitKind::Other);

    const auto near0 = CellSet::of_box(g, pt(0.0), pt(0.02));
    CHECK(classify_component(catalog::square(), near0, 64, tol).kind == OrbitKind::FixedPoint);

    const auto drift = classify_point(catalog::drift_control(0.5), pt(0.0), 64, tol);
    CHECK(drift.fixed_control);
    CHECK(drift.control == 0.0);
    CHECK(drift.kind == OrbitKind::FixedPoint);
  }

  TEST_CASE("Lyapunov stability of the square's fixed points") {
    const Grid g(Domain::interval(0, 1), 4096);
    const auto sq = catalog::square();
    const auto zero = CellSet::of_point(g, pt(0.0));
    const auto stable = lyapunov_stability(sq, zero, 0.1);
    CHECK(stable.flag == Stability::StableCertified);
    REQUIRE(stable.w_radius);
    CHECK(*stable.w_radius == doctest::Approx(0.05));
    CHECK(replay_stability(sq, zero, stable));

    const auto one = CellSet::of_point(g, pt(1.0));
    const auto unstable = lyapunov_stability(sq, one, 0.1);
    CHECK(unstable.flag == Stability::UnstableWitnessed);
    REQUIRE(unstable.escape.size() >= 2);
    CHECK(g.domain().distance(unstable.escape.back().point, pt(1.0)) > 0.1);
    CHECK(!replay_stability(sq, one, unstable));
  }

  TEST_CASE("identity stability is inconclusive") {
    const Grid g(Domain::interval(0, 1), 1024);
    const auto rep = lyapunov_stability(catalog::identity(), CellSet::of_point(g, pt(0.5)), 0.1);
    CHECK(rep.flag == Stability::Inconclusive);
    CHECK(rep.note.find("artifact") != std::string::npos);
  }

  TEST_CASE("omega limits") {
    const Grid g(Domain::interval(0, 1), 1024);
    const auto lg = omega_limit(catalog::logistic(2.8), g, pt(0.3), 10000, 1000, 2 * g.cell_diameter());
    CHECK(lg.stabilized);
    REQUIRE(lg.cells.count() == 1);
    CHECK(std::abs(static_cast<long>(lg.cells.first()) - static_cast<long>(g.cell_of(pt(1.0 - 1.0 / 2.8)))) <= 1);

    const Grid circle(Domain::circle(), 3072);
    const auto rot = omega_limit(catalog::rotation(1.0 / 3.0), circle, pt(0.0), 100, 30, circle.cell_diameter());
    CHECK(rot.cells.count() == 3);
    for (double x : {0.0, 1.0 / 3.0, 2.0 / 3.0}) CHECK(rot.cells.contains(circle.cell_of(pt(x))));

    const auto k = omega_limit(catalog::constant(0.3), g, pt(0.8), 1, 10, g.cell_diameter());
    CHECK(k.cells == CellSet::of_point(g, pt(0.3)));
  }

  TEST_CASE("census: square, constant, rotations, identity") {
    const Grid g(Domain::interval(0, 1), 512);
    const auto sq = minimal_sets(catalog::square(), g, 0.05, 2);
    CHECK(sq.count == CensusCount::Finite);
    REQUIRE(sq.sets.size() == 2);
    CHECK(sq.sets[0].cells.contains(0));
    CHECK(sq.sets[0].classification.kind == OrbitKind::FixedPoint);
    CHECK(sq.sets[0].stability == Stability::StableCertified);
    CHECK(sq.sets[1].cells.contains(sq.finest_grid.size() - 1));
    CHECK(sq.sets[1].classification.kind == OrbitKind::FixedPoint);
    CHECK(sq.sets[1].stability == Stability::UnstableWitnessed);

    const auto k = minimal_sets(catalog::constant(0.3), g, 0.05, 2);
    CHECK(k.count == CensusCount::One);
    REQUIRE(k.sets.size() == 1);
    CHECK(k.sets[0].classification.kind == OrbitKind::FixedPoint);
    CHECK(k.sets[0].stability == Stability::StableCertified);
    CHECK(k.sets[0].isolated == Isolation::Yes);

    const Grid circle(Domain::circle(), 3072);
    const auto rot = minimal_sets(catalog::rotation(1.0 / 3.0), circle, 0.05, 2);
    CHECK(rot.components_per_level == std::vector<std::size_t>{1, 1});
    REQUIRE(!rot.sets.empty());
    CHECK(rot.sets[0].cells.is_full());
    CHECK(rot.sets[0].classification.period == 3);
    CHECK(rot.count == CensusCount::UnboundedAtResolution);

    const auto irr = minimal_sets(catalog::rotation(0.6180339887), circle, 0.05, 2);
    CHECK(irr.count == CensusCount::One);
    REQUIRE(irr.sets.size() == 1);
    CHECK(irr.sets[0].cells.is_full());
    CHECK(irr.sets[0].classification.kind == OrbitKind::Other);

    const auto id = minimal_sets(catalog::identity(), g, 0.1, 2);
    CHECK(id.count == CensusCount::UnboundedAtResolution);
    for (const auto& m : id.sets) CHECK(m.isolated == Isolation::No);
  }

  TEST_CASE("census invariants") {
    const Grid g(Domain::interval(0, 1), 256);
    const System systems[] = {catalog::square(), catalog::logistic(2.8), catalog::logistic(3.2),
                              catalog::constant(0.6)};
    for (const auto& sys : systems) {
      const auto census = minimal_sets(sys, g, 0.1, 3);
      const auto& fine = census.finest_grid;
      const double tol = 2 * fine.cell_diameter();
      for (const auto& m : census.sets) {
        CHECK(m.nested);
        // forward-invariant at graph level
        CHECK(image_set(sys, m.cells).subset_of(fatten(m.cells, census.finest_eps)));
        if (m.classification.kind == OrbitKind::Periodic || m.classification.kind == OrbitKind::FixedPoint) {
          const auto again = classify_point(sys, m.classification.representative, 64, tol);
          CHECK(again.period == m.classification.period);
        }
        if (m.stability == Stability::StableCertified) CHECK(replay_stability(sys, m.cells, m.lyapunov));
      }
    }
  }

  TEST_CASE("weak basin") {
    const Grid g(Domain::interval(0, 1), 256);
    const auto sq = catalog::square();
    const auto near0 = CellSet::of_box(g, pt(0.0), pt(0.02));
    const auto basin = weak_basin(sq, near0, 0.05, 2);
    CHECK(near0.refined_to(basin.grid()).subset_of(basin));
    const auto g_fine = build_graph(sq, basin.grid(), 0.025);
    CHECK(backward_reach(g_fine, basin) == basin);
    CHECK(basin.contains(basin.grid().cell_of(pt(0.9))));

    const auto k = catalog::constant(0.3);
    const auto band = fatten(CellSet::of_point(g, pt(0.3)), 0.05);
    CHECK(weak_basin(k, band, 0.05, 2).is_full());

    const auto top = CellSet::of_point(g, pt(0.5));
    CHECK_THROWS_AS(weak_basin(sq, top, 0.05, 2), PreconditionError);
  }

  TEST_CASE("dichotomy reports") {
    const Grid g(Domain::interval(0, 1), 512);
    DichotomyOptions opts;
    opts.eps0 = 0.05;
    opts.levels = 2;

    const std::vector<Point> k_samples{pt(0.1), pt(0.5), pt(0.9)};
    const auto k = dichotomy_report(catalog::constant(0.3), g, k_samples, opts);
    CHECK(k.census.count == CensusCount::One);
    CHECK(k.all_robust);
    CHECK(k.verdict_consistent);
    REQUIRE(k.global_attraction);
    CHECK(*k.global_attraction);

    const std::vector<Point> sq_samples{pt(0.0), pt(0.5), pt(1.0)};
    const auto sq = dichotomy_report(catalog::square(), g, sq_samples, opts);
    CHECK(!sq.all_robust);
    CHECK(sq.verdict_consistent);
    CHECK(!sq.global_attraction);
    bool silent = false;
    for (const auto& n : sq.notes) silent = silent || n.find("silent") != std::string::npos;
    CHECK(silent);

    opts.eps0 = 0.1;
    const auto id = dichotomy_report(catalog::identity(), g, sq_samples, opts);
    CHECK(id.census.count == CensusCount::UnboundedAtResolution);
    CHECK(!id.all_robust);
    bool converse = false;
    for (const auto& n : id.notes) converse = converse || n.find("converse") != std::string::npos;
    CHECK(converse);
  }

  TEST_CASE("robust samples never meet an unstable component") {
    const Grid g(Domain::interval(0, 1), 512);
    DichotomyOptions opts;
    opts.eps0 = 0.05;
    const System systems[] = {catalog::constant(0.3), catalog::logistic(2.8), catalog::square(),
                              catalog::logistic(3.2)};
    const std::vector<Point> samples{pt(0.0), pt(0.2), pt(0.5), pt(0.8), pt(1.0)};
    for (const auto& sys : systems) {
      const auto rep = dichotomy_report(sys, g, samples, opts);
      if (!rep.all_robust) continue;
      for (const auto& m : rep.census.sets) CHECK(m.stability != Stability::UnstableWitnessed);
    }
  }
}
