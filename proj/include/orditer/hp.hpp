#pragma once

#include <random>
#include <string>
#include <vector>

#include "orditer/checks.hpp"
#include "orditer/iteration.hpp"
#include "orditer/sequences.hpp"

namespace orditer {

// Honest progress for a fragment function is decidable outright; for a
// functional it is only ever sampled, and the verdict says so.
struct HpVerdict {
  enum class Kind { ExactYes, ExactNo, Unrefuted, Refuted } kind;
  Ordinal witness;          // offending argument for ExactNo
  Ordinal witness2;         // second point of a monotonicity violation
  bool witness_pair = false;
  std::string detail;       // offending sampled function(s) for Refuted
  std::size_t samples = 0;
};

inline HpVerdict is_hp_fn(const PiecewiseFn& f) {
  InflationaryCheck ic = is_inflationary(f);
  if (!ic.inflationary) return {HpVerdict::Kind::ExactNo, ic.witness, Ordinal(), false, "", 0};
  MonotoneCheck mc = is_monotone(f);
  if (!mc.monotone) return {HpVerdict::Kind::ExactNo, mc.x, mc.y, true, "", 0};
  return {HpVerdict::Kind::ExactYes, Ordinal(), Ordinal(), false, "", 0};
}

struct HpLe {
  bool yes;
  Ordinal witness;  // least argument where the left side exceeds the right
};

inline HpLe hp_le_fn(const PiecewiseFn& f, const PiecewiseFn& g) {
  PointwiseCompare pc = compare_pointwise(f, g);
  if (pc.kind == PointwiseCompare::Kind::EQ || pc.kind == PointwiseCompare::Kind::LE)
    return {true, Ordinal()};
  return {false, pc.above_witness};
}

// Deterministic pool of honest-progress functions: shifts, ceiling plateaus,
// climb-then-coast ramps, and lattice combinations thereof. Every sample is
// revalidated before it is returned.
inline std::vector<PiecewiseFn> sample_hp_fns(unsigned long long seed, std::size_t n) {
  std::mt19937_64 gen(seed);
  auto pick = [&](std::size_t k) { return static_cast<std::size_t>(gen() % k); };

  const std::vector<Ordinal> offsets = {
      Ordinal(),          Ordinal(1ULL),           Ordinal(2ULL),
      Ordinal(3ULL),      Ordinal(5ULL),           omega(),
      succ(omega()),      mul(omega(), Ordinal(2ULL)), omega_pow(Ordinal(2ULL)),
      add(omega_pow(Ordinal(2ULL)), omega()),
      mul(omega_pow(Ordinal(2ULL)), Ordinal(3ULL))};
  const std::vector<Ordinal> bounds = {omega(), mul(omega(), Ordinal(2ULL)),
                                       omega_pow(Ordinal(2ULL))};

  std::vector<PiecewiseFn> out;
  auto try_add = [&](const PiecewiseFn& f) {
    if (is_hp_fn(f).kind != HpVerdict::Kind::ExactYes) return;
    for (const PiecewiseFn& g : out)
      if (equal_ext(f, g)) return;
    out.push_back(f);
  };

  unsigned long long guard = 0;
  while (out.size() < n && guard++ < 100000) {
    switch (pick(5)) {
      case 0:
        try_add(PiecewiseFn::shift(offsets[pick(offsets.size())]));
        break;
      case 1: {  // climb below a limit boundary, then coast
        const Ordinal& b = bounds[pick(bounds.size())];
        Ordinal c(static_cast<unsigned long long>(1 + pick(4)));
        const Ordinal& d = offsets[pick(offsets.size())];
        try_add(PiecewiseFn::make({Piece{Ordinal(), Bound::at(b), ShiftPiece{c}},
                                   Piece{b, Bound::top(), ShiftPiece{d}}}));
        break;
      }
      case 2: {  // jump straight to the boundary, then climb
        const Ordinal& b = bounds[pick(bounds.size())];
        Ordinal d(static_cast<unsigned long long>(pick(3)));
        try_add(PiecewiseFn::make({Piece{Ordinal(), Bound::at(b), ConstPiece{b}},
                                   Piece{b, Bound::top(), ShiftPiece{d}}}));
        break;
      }
      case 3: {
        if (out.size() < 2) break;
        const PiecewiseFn& a = out[pick(out.size())];
        const PiecewiseFn& b = out[pick(out.size())];
        try {
          try_add(pointwise_max(a, b));
        } catch (const FragmentOverflow&) {
        }
        break;
      }
      default: {
        if (out.size() < 2) break;
        const PiecewiseFn& a = out[pick(out.size())];
        const PiecewiseFn& b = out[pick(out.size())];
        try {
          try_add(pointwise_min(a, b));
        } catch (const FragmentOverflow&) {
        }
        break;
      }
    }
  }
  if (out.size() < n) throw std::logic_error("honest-progress sampler starved");
  return out;
}

// Sampled refutation search over the three defining clauses: preserves the
// class, is inflationary on it, and is monotone on it.
inline HpVerdict is_hp_functional2(EngineContext& ctx, const Functional2& F,
                                   unsigned long long seed, std::size_t n) {
  std::vector<PiecewiseFn> fs = sample_hp_fns(seed, n);
  std::vector<PiecewiseFn> applied;
  applied.reserve(fs.size());
  for (const PiecewiseFn& f : fs) {
    PiecewiseFn g = apply2(ctx, F, f);
    if (is_hp_fn(g).kind != HpVerdict::Kind::ExactYes)
      return {HpVerdict::Kind::Refuted, Ordinal(), Ordinal(), false,
              "image leaves the class at f=" + format(f), n};
    HpLe le = hp_le_fn(f, g);
    if (!le.yes)
      return {HpVerdict::Kind::Refuted, le.witness, Ordinal(), false,
              "not inflationary at f=" + format(f), n};
    applied.push_back(std::move(g));
  }
  std::mt19937_64 gen(seed ^ 0x9e3779b97f4a7c15ULL);
  std::size_t pairs = n * 3;
  for (std::size_t t = 0; t < pairs; ++t) {
    std::size_t i = static_cast<std::size_t>(gen() % fs.size());
    std::size_t j = static_cast<std::size_t>(gen() % fs.size());
    if (!hp_le_fn(fs[i], fs[j]).yes) continue;
    HpLe le = hp_le_fn(applied[i], applied[j]);
    if (!le.yes)
      return {HpVerdict::Kind::Refuted, le.witness, Ordinal(), false,
              "order not preserved between f=" + format(fs[i]) + " and g=" + format(fs[j]), n};
  }
  return {HpVerdict::Kind::Unrefuted, Ordinal(), Ordinal(), false, "", n};
}

inline std::string render_hp_verdict(const HpVerdict& v) {
  switch (v.kind) {
    case HpVerdict::Kind::ExactYes: return "hp=exact-yes";
    case HpVerdict::Kind::ExactNo:
      return "hp=exact-no(" + format(v.witness) +
             (v.witness_pair ? "," + format(v.witness2) : "") + ")";
    case HpVerdict::Kind::Unrefuted: return "hp=unrefuted(" + std::to_string(v.samples) + ")";
    default: break;
  }
  return "hp=refuted(" + (v.detail.empty() ? format(v.witness) : v.detail) + ")";
}

// Iteration preserves honest progress: sampled over the given indices.
inline CheckReport check_miter_hp(EngineContext& ctx, const std::vector<Ordinal>& alphas,
                                  unsigned long long seed, std::size_t n) {
  if (alphas.empty()) throw std::invalid_argument("need at least one index");
  for (const Ordinal& a : alphas)
    if (a.is_zero()) throw std::invalid_argument("index 0 erases progress; indices must be >= 1");
  CheckReport r;
  r.name = "miter-hp";
  r.samples = n;
  try {
    for (const Ordinal& a : alphas) {
      F2 F = make_iter_functional(a);
      HpVerdict v = is_hp_functional2(ctx, *F, seed, n);
      r.lhs = a;
      r.rhs = a;
      if (v.kind != HpVerdict::Kind::Unrefuted) {
        r.verdict = Verdict::Fail;
        r.note = render_hp_verdict(v);
        return r;
      }
    }
    r.verdict = Verdict::Pass;
    r.note = "hp=unrefuted(" + std::to_string(n) + ")";
  } catch (const NonComputable& e) {
    r.verdict = Verdict::Inconclusive;
    r.note = std::string("reason=") + e.what();
  } catch (const FragmentOverflow& e) {
    r.verdict = Verdict::Inconclusive;
    r.note = std::string("reason=") + e.what();
  }
  return r;
}

// A smaller index never overtakes a larger one on honest-progress functions.
inline CheckReport check_miter_incr(EngineContext& ctx,
                                    const std::vector<std::pair<Ordinal, Ordinal>>& pairs,
                                    unsigned long long seed, std::size_t nfns) {
  for (const auto& [a, b] : pairs)
    if (!(a < b)) throw std::invalid_argument("index pairs must be strictly increasing");
  CheckReport r;
  r.name = "miter-incr";
  r.samples = pairs.size();
  try {
    std::vector<PiecewiseFn> fs = sample_hp_fns(seed, nfns);
    const std::vector<Ordinal> xs = {Ordinal(), Ordinal(1ULL), Ordinal(7ULL), omega(),
                                     add(omega_pow(Ordinal(2ULL)), Ordinal(3ULL))};
    std::mt19937_64 gen(seed + 1);
    for (const auto& [a, b] : pairs) {
      const PiecewiseFn& f = fs[static_cast<std::size_t>(gen() % fs.size())];
      for (const Ordinal& x : xs) {
        IterResult va = iter1_at(ctx, a, f, x);
        IterResult vb = iter1_at(ctx, b, f, x);
        r.lhs = va.value;
        r.rhs = vb.value;
        r.cert = meet(r.cert, meet(va.cert, vb.cert));
        if (va.value > vb.value) {
          r.verdict = Verdict::Fail;
          r.note = "witness=" + format(x) + " f=" + format(f);
          return r;
        }
      }
    }
    r.verdict = Verdict::Pass;
  } catch (const NonComputable& e) {
    r.verdict = Verdict::Inconclusive;
    r.note = std::string("reason=") + e.what();
  } catch (const FragmentOverflow& e) {
    r.verdict = Verdict::Inconclusive;
    r.note = std::string("reason=") + e.what();
  }
  return r;
}

// Limit-superior bookkeeping: nondecreasing sequences attain their supremum,
// and pointwise limits of iterate families match the iterate at the limit
// index on honest-progress functions.
inline CheckReport check_limsup_props(EngineContext& ctx, unsigned long long seed,
                                      std::size_t n) {
  CheckReport r;
  r.name = "limsup-props";
  r.samples = n;
  std::mt19937_64 gen(seed + 2);
  auto pick = [&](std::size_t k) { return static_cast<std::size_t>(gen() % k); };
  const std::vector<Ordinal> small = {Ordinal(1ULL), Ordinal(2ULL), Ordinal(3ULL),
                                      Ordinal(5ULL), omega(), succ(omega()),
                                      mul(omega(), Ordinal(2ULL))};
  const std::vector<Ordinal> xs = {Ordinal(), Ordinal(2ULL), omega(),
                                   add(mul(omega(), Ordinal(2ULL)), Ordinal(1ULL))};
  try {
    std::vector<PiecewiseFn> fs = sample_hp_fns(seed, 16);
    for (std::size_t t = 0; t < n; ++t) {
      switch (t % 3) {
        case 0: {  // nondecreasing explicit sequence: limsup equals supremum
          std::vector<Ordinal> head;
          Ordinal acc;
          for (std::size_t i = 0, hn = 1 + pick(4); i < hn; ++i) {
            acc = add(acc, small[pick(small.size())]);
            head.push_back(acc);
          }
          OmegaSeq s(head, Constant{add(acc, small[pick(small.size())])});
          r.lhs = limsup(s);
          r.rhs = sup_all(s);
          break;
        }
        case 1: {  // recurring index family
          std::vector<Ordinal> cyc;
          for (std::size_t i = 0, cn = 2 + pick(3); i < cn; ++i)
            cyc.push_back(small[pick(small.size())]);
          const PiecewiseFn& f = fs[pick(fs.size())];
          const Ordinal& x = xs[pick(xs.size())];
          Ordinal idx_limsup = limsup(OmegaSeq({}, Cycle{cyc}));
          Ordinal value_limsup;
          for (const Ordinal& a : cyc) {
            Ordinal v = iter1_at(ctx, a, f, x).value;
            if (v > value_limsup) value_limsup = std::move(v);
          }
          r.lhs = value_limsup;
          r.rhs = iter1_at(ctx, idx_limsup, f, x).value;
          break;
        }
        default: {  // drifting index family
          Ordinal base = small[pick(small.size())];
          Ordinal step = small[pick(2)];  // 1 or 2
          const PiecewiseFn& f = fs[pick(fs.size())];
          const Ordinal& x = xs[pick(xs.size())];
          Ordinal idx_limsup = limsup(OmegaSeq({}, AffineStep{base, step}));
          std::vector<Ordinal> window;
          Ordinal idx = base;
          for (unsigned long long i = 0; i < ctx.cfg.horizon / 2 + 8; ++i) {
            window.push_back(iter1_at(ctx, idx, f, x).value);
            idx = add(idx, step);
          }
          std::optional<Ordinal> fitted = detail::fit_window(window, ctx.cfg.confirm);
          if (!fitted) {
            r.verdict = Verdict::Inconclusive;
            r.note = "reason=index family value window admits no pattern";
            return r;
          }
          r.cert = meet(r.cert, Certainty::fitted(ctx.cfg.horizon));
          r.lhs = *fitted;
          r.rhs = iter1_at(ctx, idx_limsup, f, x).value;
          break;
        }
      }
      if (r.lhs != r.rhs) {
        r.verdict = Verdict::Fail;
        r.note = "witness=case:" + std::to_string(t);
        return r;
      }
    }
    r.verdict = Verdict::Pass;
  } catch (const NonComputable& e) {
    r.verdict = Verdict::Inconclusive;
    r.note = std::string("reason=") + e.what();
  } catch (const FragmentOverflow& e) {
    r.verdict = Verdict::Inconclusive;
    r.note = std::string("reason=") + e.what();
  }
  return r;
}

}  // namespace orditer
