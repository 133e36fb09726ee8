#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <string>
#include <vector>

#include "orditer/checks.hpp"
#include "orditer/iteration.hpp"

using namespace orditer;

namespace {

Ordinal O(const char* s) { return parse_ordinal(s); }
PiecewiseFn F(const char* s) { return parse_fn(s); }

// Independent oracle for finite iteration counts: apply the function n times,
// nothing shared with the engine's ray or cycle machinery.
Ordinal loop_iter(const PiecewiseFn& f, Ordinal x, unsigned n) {
  for (unsigned i = 0; i < n; ++i) x = eval(f, x);
  return x;
}

std::vector<Ordinal> probe_points() {
  std::vector<Ordinal> xs;
  for (unsigned long long n = 0; n <= 16; ++n) xs.push_back(Ordinal(n));
  for (const char* s : {"w", "w+1", "w+7", "w*2", "w*2+3", "w^2", "w^2+1", "w^2+w",
                        "w^2*3+w*2+1", "w^3", "w^3+w^2+5"})
    xs.push_back(O(s));
  return xs;
}

}  // namespace

TEST_CASE("finite iteration matches the plain loop") {
  EngineContext ctx;
  std::mt19937_64 rng(11);
  std::vector<PiecewiseFn> pool;
  for (const char* s :
       {"shift(0)", "shift(1)", "shift(2)", "shift(w)", "shift(w+1)", "const(0)", "const(2)",
        "const(w)", "const(w^2)", "parity", "staircase", "gmax", "hmin",
        "pw{[0,3):const(5);[3,inf):x+1}", "pw{[0,w):x+2;[w,w*2):const(w*2);[w*2,inf):x+0}",
        "pw{[0,4):parity(3,1);[4,inf):x+0}", "pw{[0,2):parity(0,4);[2,w):x+1;[w,inf):const(w*2)}"})
    pool.push_back(F(s));
  std::vector<Ordinal> xs = probe_points();

  int cases = 0;
  while (cases < 200) {
    const PiecewiseFn& f = pool[rng() % pool.size()];
    const Ordinal& x = xs[rng() % xs.size()];
    unsigned n = static_cast<unsigned>(rng() % 13);
    Ordinal expect = loop_iter(f, x, n);
    IterResult got = iter1_at(ctx, Ordinal(n), f, x);
    REQUIRE(got.cert.verified);
    if (got.value != expect) {
      INFO("f=" << format(f) << " x=" << format(x) << " n=" << n);
      REQUIRE(format(got.value) == format(expect));
    }
    ++cases;
  }
}

TEST_CASE("zero and one step are trivial") {
  EngineContext ctx;
  for (const char* fs : {"parity", "staircase", "shift(w)", "const(2)"}) {
    PiecewiseFn f = F(fs);
    for (const Ordinal& x : probe_points()) {
      CHECK(iter1_at(ctx, Ordinal(0), f, x).value == x);
      CHECK(iter1_at(ctx, Ordinal(1), f, x).value == eval(f, x));
    }
  }
}

TEST_CASE("the parity run separates value from supremum") {
  EngineContext ctx;
  PiecewiseFn parity = builtin("parity");

  // Orbit 0,1,0,1,...: every even index emits 0, every odd emits 1. The
  // limit value is the limsup 1, and restarting from 1 repeats the cycle.
  IterResult r = iter1_at(ctx, O("w"), parity, Ordinal(0));
  CHECK(r.value == Ordinal(1));
  CHECK(r.cert.verified);

  // Squaring the function collapses the cycle: parity(parity(x)) sends 0 to 0.
  PiecewiseFn parity2 = iter1_fn(ctx, Ordinal(2), parity);
  CHECK(eval(parity2, Ordinal(0)) == Ordinal(0));
  CHECK(eval(parity2, Ordinal(1)) == Ordinal(1));
  IterResult sq = iter1_at(ctx, O("w"), parity2, Ordinal(0));
  CHECK(sq.value == Ordinal(0));
  CHECK(sq.cert.verified);

  // 2*w = w, so iterating the original function 2*w times is the same walk.
  CHECK(mul(Ordinal(2), O("w")) == O("w"));
  IterResult tw = iter1_at(ctx, mul(Ordinal(2), O("w")), parity, Ordinal(0));
  CHECK(tw.value == Ordinal(1));

  // But w*2 decomposes as two w-blocks and restarts from the limit value 1.
  IterResult wtwo = iter1_at(ctx, O("w*2"), parity, Ordinal(0));
  CHECK(wtwo.value == Ordinal(1));
}

TEST_CASE("a constant map pulls the limit below the start") {
  EngineContext ctx;
  PiecewiseFn zero = F("const(0)");
  IterResult r = iter1_at(ctx, O("w"), zero, Ordinal(1));
  CHECK(r.value == Ordinal(0));
  CHECK(r.cert.verified);

  // The segment supremum still sees the start: sup {1, 0, 0, ...} = 1.
  CrossResult c = cross_power(ctx, Ordinal(1), zero, Ordinal(1));
  CHECK(c.value == Ordinal(0));
  CHECK(c.sup == Ordinal(1));
}

TEST_CASE("successor climbs through every power") {
  EngineContext ctx;
  PiecewiseFn succ = builtin("succ");
  CHECK(iter1_at(ctx, O("w"), succ, Ordinal(0)).value == O("w"));
  CHECK(iter1_at(ctx, O("w"), succ, O("w")).value == O("w*2"));
  CHECK(iter1_at(ctx, O("w^2"), succ, Ordinal(0)).value == O("w^2"));
  CHECK(iter1_at(ctx, O("w^2+w"), succ, Ordinal(5)).value == O("w^2+w"));
  CHECK(iter1_at(ctx, O("w^3"), succ, O("w+4")).value == O("w^3"));
  // The finite start is absorbed by the infinite index: 1 + w^2*2+w*3+4.
  IterResult big = iter1_at(ctx, O("w^2*2+w*3+4"), succ, Ordinal(1));
  CHECK(big.value == O("w^2*2+w*3+4"));
  CHECK(big.cert.verified);
}

TEST_CASE("shift iterates are shifts scaled by the index") {
  EngineContext ctx;
  std::vector<Ordinal> gammas;
  for (const char* s : {"0", "1", "2", "5", "w", "w+1", "w*2", "w^2", "w^2+w", "w^2*3"})
    gammas.push_back(O(s));
  for (const char* cs : {"1", "2", "w", "w+1", "w^2"}) {
    Ordinal c = O(cs);
    PiecewiseFn f = PiecewiseFn::shift(c);
    for (const Ordinal& g : gammas) {
      Ordinal scaled = mul(c, g);
      // Pointwise law at sampled arguments.
      for (const Ordinal& x : {Ordinal(0), Ordinal(3), O("w"), O("w^2+1")}) {
        IterResult r = iter1_at(ctx, g, f, x);
        CHECK(r.cert.verified);
        CHECK(r.value == add(x, scaled));
      }
      // Function-level law when the index stays below w^w.
      PiecewiseFn lifted = iter1_fn(ctx, g, f);
      CHECK(equal_ext(lifted, PiecewiseFn::shift(scaled)));
    }
  }
}

TEST_CASE("staircase flattens to its ceiling after w steps") {
  EngineContext ctx;
  PiecewiseFn stair = builtin("staircase");
  PiecewiseFn lifted = iter1_fn(ctx, O("w"), stair);
  CHECK(equal_ext(lifted, F("const(w)")));

  // The lifted map and the original are pointwise incomparable, with honest
  // witnesses on each side.
  PointwiseCompare pc = compare_pointwise(lifted, stair);
  REQUIRE(pc.kind == PointwiseCompare::Kind::Incomparable);
  CHECK(eval(lifted, pc.above_witness) > eval(stair, pc.above_witness));
  CHECK(eval(lifted, pc.below_witness) < eval(stair, pc.below_witness));
}

TEST_CASE("function level iteration at small finite indices") {
  EngineContext ctx;
  for (const char* fs : {"parity", "staircase", "gmax", "shift(w)",
                         "pw{[0,w):x+2;[w,w*2):const(w*2);[w*2,inf):x+0}"}) {
    PiecewiseFn f = F(fs);
    CHECK(equal_ext(iter1_fn(ctx, Ordinal(0), f), identity_fn()));
    CHECK(equal_ext(iter1_fn(ctx, Ordinal(1), f), f));
    CHECK(equal_ext(iter1_fn(ctx, Ordinal(2), f), compose(f, f)));
    CHECK(equal_ext(iter1_fn(ctx, Ordinal(3), f), compose(f, compose(f, f))));
  }
}

TEST_CASE("level maps agree with direct runs") {
  EngineContext ctx;
  for (const char* fs : {"parity", "staircase", "gmax", "hmin", "shift(1)", "shift(w)",
                         "const(w)", "pw{[0,w):const(w);[w,inf):x+1}",
                         "pw{[0,w):x+2;[w,w*2):const(w*2);[w*2,inf):x+0}"}) {
    PiecewiseFn f = F(fs);
    const FnPair& lp = level_pair(ctx, f, 1);
    for (const Ordinal& x : probe_points()) {
      RunSummary rs = omega_run(ctx, f, x);
      INFO("f=" << format(f) << " x=" << format(x));
      CHECK(eval(lp.fn, x) == rs.limsup);
      CHECK(eval(lp.span_sup, x) == rs.sup);
    }
  }
}

TEST_CASE("tail invariance under random restarts") {
  EngineContext ctx;
  std::mt19937_64 rng(23);
  std::vector<PiecewiseFn> pool;
  for (const char* s : {"shift(1)", "shift(2)", "shift(w)", "const(w)", "parity", "staircase",
                        "gmax", "hmin", "pw{[0,w):x+1;[w,inf):x+0}",
                        "pw{[0,w):const(w);[w,inf):x+1}"})
    pool.push_back(F(s));
  std::vector<Ordinal> idxs;
  for (const char* s : {"0", "1", "2", "3", "w", "w+1", "w*2", "w^2", "w^2+w", "w^2*2"})
    idxs.push_back(O(s));
  std::vector<Ordinal> xs = probe_points();

  int done = 0;
  while (done < 100) {
    const PiecewiseFn& f = pool[rng() % pool.size()];
    const Ordinal& g = idxs[rng() % idxs.size()];
    const Ordinal& a = idxs[rng() % idxs.size()];
    const Ordinal& x = xs[rng() % xs.size()];
    IterResult inner = iter1_at(ctx, g, f, x);
    IterResult lhs = iter1_at(ctx, a, f, inner.value);
    IterResult rhs = iter1_at(ctx, add(g, a), f, x);
    INFO("f=" << format(f) << " gamma=" << format(g) << " alpha=" << format(a)
              << " x=" << format(x));
    CHECK(lhs.value == rhs.value);
    ++done;
  }
}

TEST_CASE("results are stable under a larger budget") {
  std::vector<std::tuple<const char*, const char*, const char*>> cases = {
      {"w", "parity", "0"},        {"w^2", "staircase", "3"}, {"w^2+w", "shift(w)", "w"},
      {"w*2", "gmax", "0"},        {"w^3", "shift(1)", "0"},  {"w^2*2", "const(w)", "1"},
      {"w+5", "staircase", "w+1"},
  };
  for (const auto& [as, fs, xs] : cases) {
    EngineContext small;
    EngineContext big;
    big.cfg.horizon = 128;
    big.cfg.confirm = 32;
    IterResult a = iter1_at(small, O(as), F(fs), O(xs));
    IterResult b = iter1_at(big, O(as), F(fs), O(xs));
    CHECK(a.cert.verified);
    CHECK(b.cert.verified);
    CHECK(a.value == b.value);
  }
}

TEST_CASE("monotone maps never split liminf from limsup") {
  EngineContext ctx;
  ctx.cfg.track_monotone_law = true;
  for (const char* fs : {"shift(1)", "shift(w)", "gmax", "staircase", "const(w)"}) {
    PiecewiseFn f = F(fs);
    REQUIRE(is_monotone(f).monotone);
    iter1_at(ctx, O("w^2*2+w"), f, Ordinal(0));
    iter1_at(ctx, O("w^2"), f, O("w+3"));
  }
  CHECK(ctx.stats.law_checked > 0);
  CHECK(ctx.stats.law_violations == 0);

  EngineContext bad;
  bad.cfg.track_monotone_law = true;
  iter1_at(bad, O("w"), builtin("parity"), Ordinal(0));
  CHECK(bad.stats.law_violations >= 1);
}

TEST_CASE("iterate values grow with the index on climbing maps") {
  EngineContext ctx;
  std::vector<Ordinal> chain;
  for (const char* s : {"0", "1", "2", "w", "w+1", "w*2", "w^2", "w^2+w", "w^2*2"})
    chain.push_back(O(s));
  for (const char* fs : {"shift(1)", "shift(w)", "staircase",
                         "pw{[0,w):x+2;[w,inf):x+1}"}) {
    PiecewiseFn f = F(fs);
    for (const Ordinal& x : {Ordinal(0), Ordinal(4), O("w")}) {
      Ordinal prev = iter1_at(ctx, chain[0], f, x).value;
      for (std::size_t i = 1; i < chain.size(); ++i) {
        Ordinal cur = iter1_at(ctx, chain[i], f, x).value;
        INFO("f=" << format(f) << " x=" << format(x) << " step " << i);
        CHECK(prev <= cur);
        prev = cur;
      }
    }
  }
}

TEST_CASE("second order functionals on the two-point frame") {
  EngineContext ctx;
  PiecewiseFn f0 = builtin("f0");
  PiecewiseFn f1 = builtin("f1");
  PiecewiseFn g = builtin("gmax");
  PiecewiseFn h = builtin("hmin");
  F2 phi = make_phi();
  F2 psi = make_psi();

  // The decision list swaps the two generators and fixes everything at or
  // below their minimum.
  CHECK(equal_ext(apply2(ctx, *phi, f0), f1));
  CHECK(equal_ext(apply2(ctx, *phi, f1), f0));
  CHECK(equal_ext(apply2(ctx, *phi, h), h));
  CHECK(equal_ext(apply2(ctx, *phi, g), g));
  CHECK(equal_ext(apply2(ctx, *phi, F("shift(5)")), g));

  // The square fixes both generators.
  CHECK(equal_ext(apply2(ctx, *psi, f0), f0));
  CHECK(equal_ext(apply2(ctx, *psi, f1), f1));

  // Guard disjointness: no sampled function satisfies two decision cases.
  const auto* dec = std::get_if<DecisionF>(&phi->node);
  REQUIRE(dec != nullptr);
  for (const char* fs : {"f0", "f1", "gmax", "hmin", "const(0)", "const(1)", "const(2)",
                         "shift(2)", "parity", "staircase", "const(w)"}) {
    PiecewiseFn f = F(fs);
    int hits = 0;
    for (const DecisionCase& dc : dec->cases) {
      bool all = true;
      for (const GuardAtom& a : dc.atoms) {
        bool le = le_ext(f, a.bound);
        if (a.negated ? le : !le) all = false;
      }
      if (all) ++hits;
    }
    CHECK(hits <= 1);
  }

  // At width w the swap cycle's pointwise ceiling appears, while the square
  // never leaves the start.
  PiecewiseFn lim_phi = iter2_fn(ctx, O("w"), *phi, f0);
  CHECK(equal_ext(lim_phi, g));
  PiecewiseFn lim_psi = iter2_fn(ctx, O("w"), *psi, f0);
  CHECK(equal_ext(lim_psi, f0));
  CHECK(!equal_ext(lim_phi, lim_psi));
  CHECK(equal_ext(iter2_fn(ctx, Ordinal(0), *phi, f0), f0));
  CHECK(equal_ext(iter2_fn(ctx, Ordinal(1), *phi, f0), f1));
  CHECK(equal_ext(iter2_fn(ctx, Ordinal(7), *phi, f0), f1));
}

TEST_CASE("second order evaluation through first order layers") {
  EngineContext ctx;
  PiecewiseFn succ = builtin("succ");

  // The w-fold layer applied to itself: shift(1) lifts to shift(w), which
  // lifts again to shift(w^2).
  IterResult two = iter2_at(ctx, Ordinal(2), *make_iter_functional(O("w")), succ, Ordinal(0));
  CHECK(two.value == O("w^2"));
  CHECK(two.cert.verified);

  // w-fold doubling of a shift multiplies the offset by 2^w = w.
  IterResult ww = iter2_at(ctx, O("w"), *make_iter_functional(Ordinal(2)), succ, Ordinal(0));
  CHECK(ww.value == O("w"));
  CHECK(ww.cert.verified);

  // Index 0 leaves the base function untouched, so the value is f(x).
  IterResult zero = iter2_at(ctx, Ordinal(0), *make_iter_functional(O("w")), succ, Ordinal(3));
  CHECK(zero.value == eval(succ, Ordinal(3)));

  for (const char* as : {"1", "2", "3"}) {
    IterResult direct =
        iter2_at(ctx, O(as), *make_iter_functional(O("w")), succ, Ordinal(0));
    PiecewiseFn lifted = iter2_fn(ctx, O(as), *make_iter_functional(O("w")), succ);
    CHECK(direct.value == eval(lifted, Ordinal(0)));
  }
}

TEST_CASE("identity checks report honest verdicts") {
  EngineContext ctx;
  std::vector<Ordinal> xs = {Ordinal(0), Ordinal(1), Ordinal(7), O("w")};

  CheckReport add_ok = check_addition(ctx, builtin("succ"), O("w"), O("w"), xs);
  CHECK(add_ok.verdict == Verdict::Pass);
  CHECK(add_ok.cert.verified);

  CheckReport mul_ok = check_multiplication(ctx, builtin("succ"), O("w"), O("w"), xs);
  CHECK(mul_ok.verdict == Verdict::Pass);

  // The refuting instance: through the lens of the squared function the
  // double-length walk lands at 0, the product index walk at 1.
  CheckReport mul_bad =
      check_multiplication(ctx, builtin("parity"), Ordinal(2), O("w"), {Ordinal(0)});
  CHECK(mul_bad.verdict == Verdict::Fail);
  CHECK(mul_bad.lhs == Ordinal(0));
  CHECK(mul_bad.rhs == Ordinal(1));

  CheckReport exp_fin = check_exponentiation(ctx, builtin("succ"), Ordinal(2), O("w"),
                                             {Ordinal(0), Ordinal(1)});
  CHECK(exp_fin.verdict == Verdict::Pass);

  CheckReport exp_inf =
      check_exponentiation(ctx, builtin("succ"), O("w"), Ordinal(2), {Ordinal(0), O("w")});
  CHECK(exp_inf.verdict == Verdict::Pass);

  std::string line = render_check_line(mul_bad);
  CHECK(line.find("CHECK mul") == 0);
  CHECK(line.find("FAIL") != std::string::npos);
  CHECK(line.find("lhs=0") != std::string::npos);
  CHECK(line.find("rhs=1") != std::string::npos);
  CHECK(line.find("certainty=verified") != std::string::npos);
}

TEST_CASE("bundled reproductions all pass") {
  EngineContext ctx;
  for (const std::string& name : reproduction_names()) {
    CheckReport r = reproduce(ctx, name);
    INFO(render_check_line(r));
    CHECK(r.verdict == Verdict::Pass);
    CHECK(r.cert.verified);
  }
  CHECK_THROWS_AS(reproduce(ctx, "no-such-scenario"), std::invalid_argument);
}

TEST_CASE("check vectors parse and run") {
  EngineContext ctx;
  auto v = parse_check_vector("CHECK add f=succ gamma=w alpha=w x=0");
  REQUIRE(v.has_value());
  CHECK(!v->expect_fail);
  CheckReport r = run_check_vector(ctx, *v);
  CHECK(r.verdict == Verdict::Pass);

  auto bang = parse_check_vector("!CHECK mul f=parity gamma=2 alpha=w x=0");
  REQUIRE(bang.has_value());
  CHECK(bang->expect_fail);
  CheckReport rb = run_check_vector(ctx, *bang);
  CHECK(rb.verdict == Verdict::Pass);
  CHECK(rb.note.find("expected-fail") != std::string::npos);

  // A vector marked expect-fail that actually holds is reported as a failure.
  auto missed = parse_check_vector("!CHECK add f=succ gamma=1 alpha=1 x=0");
  REQUIRE(missed.has_value());
  CHECK(run_check_vector(ctx, *missed).verdict == Verdict::Fail);

  CHECK(!parse_check_vector("").has_value());
  CHECK(!parse_check_vector("# comment").has_value());
  CHECK(!parse_check_vector("   ").has_value());
  CHECK_THROWS_AS(parse_check_vector("CHECK frob f=succ gamma=1 alpha=1 x=0"), SyntaxError);
  CHECK_THROWS_AS(parse_check_vector("CHECK add f=succ gamma=1"), SyntaxError);
}

TEST_CASE("engine refusals are typed, not wrong") {
  EngineContext ctx;
  // Lifting a non-shift map across w^w widths exceeds the finite level
  // ladder; the engine must say so rather than guess.
  CHECK_THROWS_AS(iter1_fn(ctx, O("w^(w)"), builtin("staircase")), NonComputable);
}

TEST_CASE("absorption shortcuts are counted and exact") {
  EngineContext ctx;
  PiecewiseFn f = PiecewiseFn::shift(O("w"));
  IterResult r = iter1_at(ctx, O("w^2"), f, Ordinal(0));
  CHECK(r.value == O("w^3"));
  CHECK(r.cert.verified);
  CHECK(ctx.stats.absorption_certs > 0);
}
