#include <doctest.h>

#include <random>

#include "chainscope/systems.hpp"
#include "oracles.hpp"

using namespace chainscope;

TEST_SUITE("systems") {
  TEST_CASE("closed-form point images") {
    CHECK(image_point(catalog::rotation(0.25), {0.5, 0}, 0.0)[0] == doctest::Approx(0.75));
    CHECK(image_point(catalog::rotation(0.25), {0.9, 0}, 0.0)[0] == doctest::Approx(0.15));
    CHECK(image_point(catalog::square(), {0.5, 0}, 0.0)[0] == doctest::Approx(0.25));
    CHECK(image_point(catalog::drift_control(0.5), {0.4, 0}, 0.1)[0] == doctest::Approx(0.3));
    CHECK(image_point(catalog::logistic(2.8), {0.5, 0}, 0.0)[0] == doctest::Approx(0.7));
    CHECK(image_point(catalog::constant(0.3), {0.9, 0}, 0.0)[0] == doctest::Approx(0.3));
    const auto aff = catalog::affine2d({0.5, 0.0, 0.0, 0.5}, {0.25, 0.25});
    const auto y = image_point(aff, {1.0, 0.0}, 0.0);
    CHECK(y[0] == doctest::Approx(0.75));
    CHECK(y[1] == doctest::Approx(0.25));
  }

  TEST_CASE("errors") {
    CHECK_THROWS_AS(image_point(catalog::drift_control(0.5), {0.4, 0}, 0.2), ControlError);
    CHECK_THROWS_AS(image_point(catalog::square(), {1.5, 0}, 0.0), DomainError);
    CHECK_THROWS_AS(catalog::drift_control(1.5), SelfMapError);
    CHECK_THROWS_AS(catalog::logistic(4.5), PreconditionError);
    CHECK_THROWS_AS(catalog::constant(1.5), PreconditionError);
    CHECK_THROWS_AS(catalog::affine2d({2.0, 0, 0, 1}, {0, 0}), SelfMapError);
    CHECK_THROWS_AS(catalog::make("nope", {}), PreconditionError);
    CHECK_THROWS_AS(catalog::make("square", {{"r", 1.0}}), PreconditionError);
  }

  TEST_CASE("catalog make round-trips parameters") {
    const auto s = catalog::make("logistic", {{"r", 3.2}});
    CHECK(s.name() == "logistic");
    CHECK(s.params().at("r") == 3.2);
    CHECK(s.lipschitz() == doctest::Approx(3.2));
    const auto d = catalog::make("drift_control", {{"a", 0.5}}, std::vector<double>{0.1, -0.1, 0.1});
    CHECK(d.controls() == std::vector<double>{-0.1, 0.1});
    CHECK(!d.single_valued());
    for (const auto& name : catalog::names()) CHECK_NOTHROW(catalog::make(name, {}));
  }

  TEST_CASE("Lipschitz bounds hold on sampled pairs") {
    std::mt19937_64 gen(1);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (const auto& name : catalog::names()) {
      const auto sys = catalog::make(name, {});
      const Domain& dom = sys.domain();
      for (int i = 0; i < 300; ++i) {
        auto pick = [&] {
          Point p{dom.lo(0) + u(gen) * dom.width(0), 0.0};
          if (dom.dim() == 2) p[1] = dom.lo(1) + u(gen) * dom.width(1);
          return dom.normalize(p);
        };
        const Point x = pick(), y = pick();
        for (double c : sys.controls()) {
          const double lhs = dom.distance(sys.image(x, c), sys.image(y, c));
          CHECK(lhs <= sys.lipschitz() * dom.distance(x, y) + 1e-12);
        }
      }
    }
  }

  TEST_CASE("image_cell examples") {
    const Grid g(Domain::interval(0, 1), 100);
    const auto id = catalog::identity();
    for (CellId c = 0; c < g.size(); c += 7) CHECK(image_cell(id, c, g).contains(c));
    const auto sq = image_cell(catalog::square(), 50, g);
    for (double x = 0.25; x <= 0.2601; x += 0.0005) CHECK(sq.contains(g.cell_of({x, 0})));
    const auto k = catalog::constant(0.3);
    for (CellId c = 0; c < g.size(); c += 9) CHECK(image_cell(k, c, g).contains(g.cell_of({0.3, 0})));
  }

  TEST_CASE("image_cell is sound on random samples") {
    std::mt19937_64 gen(2);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const std::vector<std::pair<System, Grid>> cases{
        {catalog::square(), Grid(Domain::interval(0, 1), 256)},
        {catalog::logistic(3.7), Grid(Domain::interval(0, 1), 300)},
        {catalog::rotation(0.6180339887), Grid(Domain::circle(), 128)},
        {catalog::drift_control(0.8), Grid(Domain::interval(-1, 1), 200)},
        {catalog::affine2d({0.6, 0.3, -0.2, 0.5}, {0.05, 0.3}), Grid(Domain::box({0, 0}, {1, 1}), {32, 32})},
    };
    for (const auto& [sys, grid] : cases) {
      for (int i = 0; i < 1000; ++i) {
        const CellId c = static_cast<CellId>(gen() % grid.size());
        const Point lo = grid.cell_lo(c);
        Point x{lo[0] + u(gen) * grid.cell_width(0), grid.dim() == 2 ? lo[1] + u(gen) * grid.cell_width(1) : 0.0};
        x = grid.domain().normalize(x);
        const double ctl = sys.controls()[gen() % sys.controls().size()];
        CHECK(image_cell(sys, c, grid).contains(grid.cell_of(sys.image(x, ctl))));
      }
    }
  }

  TEST_CASE("monotone maps: image_cell is the interval image within one cell per side") {
    const Grid g(Domain::interval(0, 1), 128);
    const System maps[] = {catalog::square(), catalog::identity(), catalog::constant(0.3)};
    for (const auto& sys : maps) {
      for (CellId c = 0; c < g.size(); ++c) {
        const double a = sys.image(g.cell_lo(c), 0.0)[0];
        const double b = sys.image(g.cell_hi(c), 0.0)[0];
        const CellId lo = g.cell_of({std::min(a, b), 0}), hi = g.cell_of({std::max(a, b), 0});
        const auto img = image_cell(sys, c, g);
        for (CellId d = lo; d <= hi; ++d) CHECK(img.contains(d));
        const auto members = img.members();
        CHECK(members.front() + 1 >= lo);
        CHECK(members.back() <= hi + 1);
        CHECK(members.size() == members.back() - members.front() + 1);
      }
    }
  }

  TEST_CASE("image_set is the union of cell images") {
    std::mt19937_64 gen(4);
    const Grid g(Domain::interval(0, 1), 90);
    const auto sys = catalog::logistic(3.3);
    for (int t = 0; t < 10; ++t) {
      const auto s = oracle::random_set(g, gen, 0.1);
      CellSet expect(g);
      for (CellId c : s.members()) expect |= image_cell(sys, c, g);
      CHECK(image_set(sys, s) == expect);
    }
  }
}
