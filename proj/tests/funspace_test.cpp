#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <string>
#include <vector>

#include "orditer/funspace.hpp"

using namespace orditer;

namespace {

Ordinal O(const char* s) { return parse_ordinal(s); }
PiecewiseFn F(const char* s) { return parse_fn(s); }

// Probe grid: dense finite prefix plus representatives of each limit region
// a piecewise function can distinguish.
std::vector<Ordinal> probe_points() {
  std::vector<Ordinal> xs;
  for (unsigned long long n = 0; n <= 24; ++n) xs.push_back(Ordinal(n));
  for (const char* s : {"w", "w+1", "w+2", "w+5", "w*2", "w*2+1", "w*3+4", "w^2", "w^2+1",
                        "w^2+w", "w^2+w+3", "w^2*4+w*2+1", "w^3", "w^3+w^2+w+1"})
    xs.push_back(O(s));
  return xs;
}

struct FnGen {
  std::mt19937_64 rng{7};
  std::vector<PiecewiseFn> atoms;

  FnGen() {
    for (const char* s :
         {"shift(0)", "shift(1)", "shift(2)", "shift(w)", "shift(w+1)", "shift(w^2)",
          "const(0)", "const(1)", "const(2)", "const(w)", "const(w+3)", "const(w^2)",
          "parity", "staircase", "gmax", "hmin",
          "pw{[0,3):const(5);[3,inf):x+1}",
          "pw{[0,w):x+2;[w,w*2):const(w*2);[w*2,inf):x+0}",
          "pw{[0,4):parity(3,1);[4,inf):x+0}",
          "pw{[0,2):parity(0,4);[2,w):x+1;[w,inf):const(w*2)}"})
      atoms.push_back(F(s));
  }

  std::size_t idx(std::size_t n) { return static_cast<std::size_t>(rng() % n); }

  PiecewiseFn fn(int depth = 2) {
    if (depth == 0 || idx(3) == 0) return atoms[idx(atoms.size())];
    PiecewiseFn a = fn(depth - 1);
    PiecewiseFn b = fn(depth - 1);
    try {
      switch (idx(3)) {
        case 0: return pointwise_max(a, b);
        case 1: return pointwise_min(a, b);
        default: return compose(a, b);
      }
    } catch (const FragmentOverflow&) {
      return a;
    }
  }
};

}  // namespace

TEST_CASE("builtin function shapes") {
  CHECK(format(builtin("id")) == "shift(0)");
  CHECK(format(builtin("f0")) == "shift(0)");
  CHECK(format(builtin("succ")) == "shift(1)");
  CHECK(format(builtin("f1")) == "const(2)");
  CHECK(format(builtin("parity")) == "pw{[0,w):parity(1,0);[w,inf):const(0)}");
  CHECK(format(builtin("staircase")) ==
        "pw{[0,w):x+1;[w,w+2):const(w);[w+2,inf):const(w+1)}");
  CHECK(format(builtin("gmax")) == "pw{[0,2):const(2);[2,inf):x+0}");
  CHECK(format(builtin("hmin")) == "pw{[0,2):x+0;[2,inf):const(2)}");
  CHECK(format(builtin("const(w*2+1)")) == "const(w*2+1)");
  CHECK(format(builtin("shift(w)")) == "shift(w)");
  CHECK_THROWS_AS(builtin("frobnicate"), UnknownBuiltin);
}

TEST_CASE("pointwise evaluation") {
  PiecewiseFn stair = builtin("staircase");
  CHECK(eval(stair, O("5")) == O("6"));
  CHECK(eval(stair, O("w")) == O("w"));
  CHECK(eval(stair, O("w+1")) == O("w"));
  CHECK(eval(stair, O("w+2")) == O("w+1"));
  CHECK(eval(stair, O("w^2*7")) == O("w+1"));

  PiecewiseFn par = builtin("parity");
  CHECK(eval(par, O("4")) == O("1"));
  CHECK(eval(par, O("7")) == O("0"));
  CHECK(eval(par, O("0")) == O("1"));
  CHECK(eval(par, O("w")) == O("0"));
  CHECK(eval(par, O("w^2+3")) == O("0"));

  PiecewiseFn g = builtin("gmax");
  CHECK(eval(g, O("0")) == O("2"));
  CHECK(eval(g, O("2")) == O("2"));
  CHECK(eval(g, O("3")) == O("3"));
  CHECK(eval(g, O("w")) == O("w"));

  PiecewiseFn h = builtin("hmin");
  CHECK(eval(h, O("0")) == O("0"));
  CHECK(eval(h, O("1")) == O("1"));
  CHECK(eval(h, O("5")) == O("2"));
  CHECK(eval(h, O("w")) == O("2"));
}

TEST_CASE("construction normalizes pieces") {
  // A shift over a bounded range that absorbs its argument is a constant.
  CHECK(format(F("pw{[0,w):x+w;[w,inf):x+0}")) == "pw{[0,w):const(w);[w,inf):x+0}");
  // Degenerate parity collapses.
  CHECK(format(F("pw{[0,w):parity(5,5);[w,inf):const(0)}")) ==
        "pw{[0,w):const(5);[w,inf):const(0)}");
  // Width-one parity collapses to the value it takes.
  CHECK(format(F("pw{[0,1):parity(9,4);[1,inf):x+0}")) ==
        "pw{[0,1):const(9);[1,inf):x+0}");
  // Boundary points whose values match the right-hand piece move right.
  CHECK(format(F("pw{[0,3):const(2);[3,inf):x+0}")) == "pw{[0,2):const(2);[2,inf):x+0}");
  CHECK(format(F("pw{[0,3):x+0;[3,inf):const(2)}")) == "pw{[0,2):x+0;[2,inf):const(2)}");
  CHECK(format(F("pw{[0,3):x+0;[3,inf):const(1)}")) == "pw{[0,3):x+0;[3,inf):const(1)}");
  // Identical neighbors merge, even across several pieces.
  CHECK(format(F("pw{[0,2):x+1;[2,5):x+1;[5,inf):x+1}")) == "shift(1)");
  // A huge finite boundary with an absorbed shift on the right collapses fast.
  CHECK(format(F("pw{[0,100000000000000000000):const(w);[100000000000000000000,inf):x+w}")) ==
        "shift(w)");
  // Rebuilding from an already normal piece list is stable.
  for (const char* s : {"parity", "staircase", "gmax", "hmin"}) {
    PiecewiseFn f = builtin(s);
    CHECK(format(PiecewiseFn::make(f.pieces())) == format(f));
  }
}

TEST_CASE("construction rejects ill-formed piece lists") {
  CHECK_THROWS_AS(PiecewiseFn::make({}), std::invalid_argument);
  CHECK_THROWS_AS(F("pw{[1,inf):const(0)}"), std::invalid_argument);
  CHECK_THROWS_AS(F("pw{[0,2):const(1);[3,inf):const(2)}"), std::invalid_argument);
  CHECK_THROWS_AS(F("pw{[0,2):const(1);[1,inf):const(2)}"), std::invalid_argument);
  CHECK_THROWS_AS(F("pw{[0,w):const(1)}"), std::invalid_argument);
  CHECK_THROWS_AS(F("pw{[2,2):const(1)}"), std::invalid_argument);
  CHECK_THROWS_AS(F("pw{[0,w+1):parity(1,0);[w+1,inf):const(0)}"), std::invalid_argument);
  CHECK_THROWS_AS(F("pw{[0,inf):parity(1,0)}"), std::invalid_argument);
}

TEST_CASE("function literals parse and reject") {
  for (const char* s :
       {"shift(0)", "const(w^2+1)", "pw{[0,w):parity(1,0);[w,inf):const(0)}",
        "pw{[0,2):const(2);[2,inf):x+0}", "pw{[0,w):x+1;[w,w+2):const(w);[w+2,inf):const(w+1)}"})
    CHECK(format(F(s)) == s);
  CHECK(equal_ext(F("parity"), builtin("parity")));
  CHECK(format(F("succ")) == "shift(1)");

  for (const char* s : {"", "frobnicate", "pw{}", "pw{[0,inf):x+}", "pw{[0,inf)const(1)}",
                        "pw{[0,inf):const(1)", "const()", "shift(w", "id5", "pw",
                        "pw{[0,inf):parity(1)}", "const(1)x"})
    CHECK_THROWS_AS(F(s), SyntaxError);
}

TEST_CASE("pointwise comparison with witnesses") {
  PointwiseCompare pc = compare_pointwise(builtin("f0"), builtin("f1"));
  REQUIRE(pc.kind == PointwiseCompare::Kind::Incomparable);
  CHECK(pc.above_witness == O("3"));
  CHECK(pc.below_witness == O("0"));

  CHECK(compare_pointwise(builtin("f0"), builtin("gmax")).kind == PointwiseCompare::Kind::LE);
  CHECK(compare_pointwise(builtin("gmax"), builtin("f0")).kind == PointwiseCompare::Kind::GE);
  CHECK(compare_pointwise(builtin("hmin"), builtin("f1")).kind == PointwiseCompare::Kind::LE);
  CHECK(compare_pointwise(builtin("parity"), builtin("parity")).kind ==
        PointwiseCompare::Kind::EQ);

  CHECK(le_ext(builtin("hmin"), builtin("f0")));
  CHECK(le_ext(builtin("hmin"), builtin("f1")));
  CHECK(le_ext(builtin("f0"), builtin("gmax")));
  CHECK(le_ext(builtin("f1"), builtin("gmax")));
  CHECK_FALSE(le_ext(builtin("f0"), builtin("f1")));
  CHECK_FALSE(le_ext(builtin("f1"), builtin("f0")));

  // Structurally different spellings of one function compare equal.
  CHECK(equal_ext(F("pw{[0,2):x+1;[2,inf):x+0}"), F("pw{[0,2):parity(1,2);[2,inf):x+0}")));
  CHECK_FALSE(equal_ext(F("pw{[0,2):x+1;[2,inf):x+0}"), F("shift(0)")));
}

TEST_CASE("lattice operations match the pinned forms") {
  CHECK(format(pointwise_max(builtin("f0"), builtin("f1"))) == format(builtin("gmax")));
  CHECK(format(pointwise_min(builtin("f0"), builtin("f1"))) == format(builtin("hmin")));
  CHECK(format(pointwise_max(builtin("parity"), F("const(1)"))) == "const(1)");
  CHECK(format(pointwise_max(builtin("parity"), F("shift(0)"))) ==
        "pw{[0,1):const(1);[1,inf):x+0}");
  // An unbounded mixed parity/shift region has no representation here.
  CHECK_THROWS_AS(pointwise_max(F("pw{[0,w):parity(w,0);[w,inf):const(0)}"), F("shift(0)")),
                  FragmentOverflow);
}

TEST_CASE("composition") {
  CHECK(format(compose(builtin("parity"), builtin("parity"))) ==
        "pw{[0,w):parity(0,1);[w,inf):const(1)}");
  CHECK(format(compose(F("shift(1)"), F("shift(1)"))) == "shift(2)");
  CHECK(format(compose(F("const(2)"), builtin("staircase"))) == "const(2)");
  CHECK(format(compose(builtin("staircase"), F("shift(w)"))) ==
        "pw{[0,w):const(w);[w,inf):const(w+1)}");
  // Odd finite shifts flip which residue the outer parity sees.
  CHECK(format(compose(builtin("parity"), F("shift(1)"))) ==
        "pw{[0,w):parity(0,1);[w,inf):const(0)}");
}

TEST_CASE("monotonicity analysis") {
  CHECK(is_monotone(builtin("staircase")).monotone);
  CHECK(is_monotone(builtin("gmax")).monotone);
  CHECK(is_monotone(builtin("hmin")).monotone);
  CHECK(is_monotone(F("const(w)")).monotone);

  MonotoneCheck mc = is_monotone(builtin("parity"));
  REQUIRE_FALSE(mc.monotone);
  CHECK(mc.x == O("0"));
  CHECK(mc.y == O("1"));

  MonotoneCheck drop = is_monotone(F("pw{[0,w):x+0;[w,inf):const(5)}"));
  REQUIRE_FALSE(drop.monotone);
  CHECK(drop.x == O("6"));
  CHECK(drop.y == O("w"));
  CHECK(drop.x < drop.y);
  CHECK(eval(F("pw{[0,w):x+0;[w,inf):const(5)}"), drop.x) >
        eval(F("pw{[0,w):x+0;[w,inf):const(5)}"), drop.y));
}

TEST_CASE("inflationarity analysis") {
  CHECK(is_inflationary(F("shift(0)")).inflationary);
  CHECK(is_inflationary(F("shift(w^2)")).inflationary);
  CHECK(is_inflationary(builtin("gmax")).inflationary);

  InflationaryCheck c2 = is_inflationary(builtin("f1"));
  REQUIRE_FALSE(c2.inflationary);
  CHECK(c2.witness == O("3"));

  InflationaryCheck st = is_inflationary(builtin("staircase"));
  REQUIRE_FALSE(st.inflationary);
  CHECK(st.witness == O("w+1"));
  CHECK(eval(builtin("staircase"), st.witness) < st.witness);

  InflationaryCheck pa = is_inflationary(builtin("parity"));
  REQUIRE_FALSE(pa.inflationary);
  CHECK(pa.witness == O("1"));

  InflationaryCheck hm = is_inflationary(builtin("hmin"));
  REQUIRE_FALSE(hm.inflationary);
  CHECK(hm.witness == O("3"));
}

TEST_CASE("comparator verdicts agree with pointwise probing") {
  FnGen gen;
  std::vector<Ordinal> xs = probe_points();
  for (int round = 0; round < 300; ++round) {
    PiecewiseFn f = gen.fn();
    PiecewiseFn g = gen.fn();
    PointwiseCompare pc = compare_pointwise(f, g);
    bool any_above = false, any_below = false;
    for (const Ordinal& x : xs) {
      Ordinal fv = eval(f, x);
      Ordinal gv = eval(g, x);
      if (fv > gv) any_above = true;
      if (fv < gv) any_below = true;
      if (pc.kind == PointwiseCompare::Kind::Incomparable) {
        // Witnesses are least of their kind, so smaller probes stay clean.
        if (x < pc.above_witness) REQUIRE(fv <= gv);
        if (x < pc.below_witness) REQUIRE(fv >= gv);
      }
    }
    switch (pc.kind) {
      case PointwiseCompare::Kind::EQ:
        REQUIRE_FALSE(any_above);
        REQUIRE_FALSE(any_below);
        break;
      case PointwiseCompare::Kind::LE:
        REQUIRE_FALSE(any_above);
        break;
      case PointwiseCompare::Kind::GE:
        REQUIRE_FALSE(any_below);
        break;
      case PointwiseCompare::Kind::Incomparable:
        REQUIRE(eval(f, pc.above_witness) > eval(g, pc.above_witness));
        REQUIRE(eval(f, pc.below_witness) < eval(g, pc.below_witness));
        break;
    }
  }
}

TEST_CASE("lattice and composition laws hold extensionally") {
  FnGen gen;
  std::vector<Ordinal> xs = probe_points();
  int done = 0;
  for (int round = 0; done < 200 && round < 400; ++round) {
    PiecewiseFn f = gen.fn();
    PiecewiseFn g = gen.fn();
    PiecewiseFn h = gen.fn();
    try {
      PiecewiseFn fg = pointwise_max(f, g);
      PiecewiseFn fgm = pointwise_min(f, g);
      for (const Ordinal& x : xs) {
        Ordinal fv = eval(f, x), gv = eval(g, x);
        REQUIRE(eval(fg, x) == (fv < gv ? gv : fv));
        REQUIRE(eval(fgm, x) == (fv < gv ? fv : gv));
      }
      REQUIRE(equal_ext(fg, pointwise_max(g, f)));
      REQUIRE(equal_ext(fgm, pointwise_min(g, f)));
      REQUIRE(equal_ext(pointwise_max(f, pointwise_max(g, h)),
                        pointwise_max(pointwise_max(f, g), h)));
      REQUIRE(equal_ext(pointwise_max(f, fgm), f));
      REQUIRE(equal_ext(pointwise_min(f, fg), f));

      PiecewiseFn fog = compose(f, g);
      for (const Ordinal& x : xs) REQUIRE(eval(fog, x) == eval(f, eval(g, x)));
      REQUIRE(equal_ext(compose(f, compose(g, h)), compose(compose(f, g), h)));
      ++done;
    } catch (const FragmentOverflow&) {
      continue;  // unrepresentable combination; try another triple
    }
  }
  REQUIRE(done == 200);
}

TEST_CASE("analysis verdicts agree with pointwise probing") {
  FnGen gen;
  std::vector<Ordinal> xs = probe_points();
  for (int round = 0; round < 300; ++round) {
    PiecewiseFn f = gen.fn();

    MonotoneCheck mc = is_monotone(f);
    if (mc.monotone) {
      for (std::size_t i = 0; i < xs.size(); ++i)
        for (std::size_t j = 0; j < xs.size(); ++j)
          if (xs[i] < xs[j]) REQUIRE(eval(f, xs[i]) <= eval(f, xs[j]));
    } else {
      REQUIRE(mc.x < mc.y);
      REQUIRE(eval(f, mc.x) > eval(f, mc.y));
    }

    InflationaryCheck ic = is_inflationary(f);
    if (ic.inflationary) {
      for (const Ordinal& x : xs) REQUIRE(eval(f, x) >= x);
    } else {
      REQUIRE(eval(f, ic.witness) < ic.witness);
      for (const Ordinal& x : xs)
        if (x < ic.witness) REQUIRE(eval(f, x) >= x);
    }

    // A monotone map takes the max of a finite set to the max of its image.
    if (mc.monotone) {
      Ordinal biggest = xs[0], image_max = eval(f, xs[0]);
      for (const Ordinal& x : xs) {
        if (x > biggest) biggest = x;
        Ordinal v = eval(f, x);
        if (v > image_max) image_max = v;
      }
      REQUIRE(eval(f, biggest) == image_max);
    }
  }
}
