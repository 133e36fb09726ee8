#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "orditer/errors.hpp"
#include "orditer/funspace.hpp"
#include "orditer/ordinal.hpp"
#include "orditer/sequences.hpp"

namespace orditer {

// Exact results are marked verified; extrapolated ones carry the observation
// horizon they were fitted at and are reproducible from it.
struct Certainty {
  bool verified;
  unsigned long long horizon;
  static Certainty exact() { return {true, 0}; }
  static Certainty fitted(unsigned long long h) { return {false, h}; }
};

inline Certainty meet(const Certainty& a, const Certainty& b) {
  if (a.verified && b.verified) return Certainty::exact();
  return Certainty::fitted(a.horizon > b.horizon ? a.horizon : b.horizon);
}

struct IterResult {
  Ordinal value;
  Certainty cert;
};

enum class OrbitClass { FixedPoint, FiniteCycle, AffineTail, BandTail, Fitted };

struct EngineConfig {
  unsigned long long horizon = 64;   // orbit / milestone step budget
  unsigned long long confirm = 16;   // extra agreement demanded from fits
  bool track_monotone_law = false;   // count run summaries with liminf != limsup
};

struct EvalStats {
  unsigned long long runs = 0;
  unsigned long long fixed_certs = 0;
  unsigned long long cycle_certs = 0;
  unsigned long long affine_certs = 0;
  unsigned long long absorption_certs = 0;
  unsigned long long stability_certs = 0;
  unsigned long long symbolic_certs = 0;
  unsigned long long fitted_uses = 0;
  unsigned long long law_checked = 0;
  unsigned long long law_violations = 0;
};

struct FnPair {
  PiecewiseFn fn;        // value reached after crossing this level's width
  PiecewiseFn span_sup;  // supremum over the crossed segment, as a function of the start
};

struct EngineContext {
  EngineConfig cfg;
  EvalStats stats;
  std::map<std::string, std::vector<FnPair>> level_cache;
};

inline const PiecewiseFn& identity_fn() {
  static const PiecewiseFn id = PiecewiseFn::shift(Ordinal());
  return id;
}

inline constexpr unsigned long long kMaxExitSplit = 64;

namespace detail {

inline Ordinal ray_point(const Ordinal& start, const Ordinal& step, const Nat& k) {
  return add(start, mul(step, Ordinal(k)));
}

// Least k with start + step*k >= bound. Requires step >= 1 and the bound to be
// reachable, i.e. bound < start + step*w.
inline Nat least_k_reaching(const Ordinal& start, const Ordinal& step, const Ordinal& bound) {
  if (start >= bound) return Nat(0);
  Nat lo = 0, hi = 1;
  while (ray_point(start, step, hi) < bound) {
    lo = hi;
    hi <<= 1;
  }
  while (lo + 1 < hi) {
    Nat mid = (lo + hi) >> 1;
    if (ray_point(start, step, mid) >= bound)
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

// Extremum of E over the finite ray {start + step*k : 0 <= k < count}.
inline Ordinal ray_emission_extreme(const PiecewiseFn& E, const Ordinal& start,
                                    const Ordinal& step, const Nat& count, bool maximize) {
  std::optional<Ordinal> best;
  auto consider = [&](const Ordinal& v) {
    if (!best || (maximize ? v > *best : v < *best)) best = v;
  };
  for (const Piece& p : E.pieces()) {
    Nat k1 = least_k_reaching(start, step, p.lo);
    Nat k2 = count;
    if (!p.hi.is_top) {
      if (p.hi.value <= start) continue;
      if (!bound_lt(ray_point(start, step, count - 1), p.hi)) {
        Nat exit = least_k_reaching(start, step, p.hi.value);
        if (exit < k2) k2 = exit;
      }
    }
    if (k1 >= k2) continue;
    if (const auto* c = std::get_if<ConstPiece>(&p.expr)) {
      consider(c->value);
    } else if (const auto* s = std::get_if<ShiftPiece>(&p.expr)) {
      consider(add(ray_point(start, step, maximize ? k2 - 1 : k1), s->offset));
    } else {
      const auto& q = std::get<ParityPiece>(p.expr);
      Nat first = finite_value(ray_point(start, step, k1));
      if (is_finite(step) && finite_value(step) % 2 == 1 && k2 - k1 >= 2) {
        consider(q.even_value);
        consider(q.odd_value);
      } else {
        consider(first % 2 == 0 ? q.even_value : q.odd_value);
      }
    }
  }
  return *best;
}

struct TailBounds {
  Ordinal limsup;
  Ordinal liminf;
  Ordinal sup;  // over the whole infinite ray, prefix included
};

// Emission bounds of E along the infinite ray start, start+step, ... with
// step >= 1; the ray is cofinal in start + step*w.
inline TailBounds ray_emission_tail(const PiecewiseFn& E, const Ordinal& start,
                                    const Ordinal& step) {
  Ordinal limit = add(start, mul(step, omega()));
  Nat k_tail = 0;
  for (const Piece& p : E.pieces()) {
    if (p.lo > start && p.lo < limit) {
      Nat k = least_k_reaching(start, step, p.lo);
      if (k > k_tail) k_tail = k;
    }
  }
  Ordinal tail_start = ray_point(start, step, k_tail);
  const Piece& q = piece_at(E, tail_start);
  Ordinal ls, li;
  if (const auto* c = std::get_if<ConstPiece>(&q.expr)) {
    ls = li = c->value;
  } else if (const auto* s = std::get_if<ShiftPiece>(&q.expr)) {
    if (degree(s->offset) > degree(step)) {
      ls = li = add(tail_start, s->offset);  // the offset absorbs every increment
    } else {
      ls = li = limit;
    }
  } else {
    const auto& pp = std::get<ParityPiece>(q.expr);
    if (finite_value(step) % 2 == 1) {
      ls = pp.even_value < pp.odd_value ? pp.odd_value : pp.even_value;
      li = pp.even_value < pp.odd_value ? pp.even_value : pp.odd_value;
    } else {
      ls = li = finite_value(tail_start) % 2 == 0 ? pp.even_value : pp.odd_value;
    }
  }
  Ordinal sup = ls;
  if (k_tail > 0) {
    Ordinal prefix = ray_emission_extreme(E, start, step, k_tail, true);
    if (prefix > sup) sup = prefix;
  }
  return {std::move(ls), std::move(li), std::move(sup)};
}

}  // namespace detail

struct RunSummary {
  Ordinal limsup;
  Ordinal liminf;
  Ordinal sup;
  OrbitClass kind;
};

// Exact classification of the emitted sequence E(G^n(v)) for n -> w: the
// orbit of v under G either reaches a fixed point, revisits a value (and so
// cycles), or ends in an unbounded arithmetic ray inside one shift piece.
// Slow steps and ray exits are budgeted; the budget failing is an honest
// refusal, never a wrong answer.
inline RunSummary pair_omega_at(EngineContext& ctx, const PiecewiseFn& G,
                                const PiecewiseFn& E, const Ordinal& v) {
  ++ctx.stats.runs;
  auto finish = [&](RunSummary r) {
    if (ctx.cfg.track_monotone_law) {
      ++ctx.stats.law_checked;
      if (r.limsup != r.liminf) ++ctx.stats.law_violations;
    }
    switch (r.kind) {
      case OrbitClass::FixedPoint: ++ctx.stats.fixed_certs; break;
      case OrbitClass::FiniteCycle: ++ctx.stats.cycle_certs; break;
      case OrbitClass::AffineTail: ++ctx.stats.affine_certs; break;
      default: break;
    }
    return r;
  };

  Ordinal cur = v;
  Ordinal seen_max = eval(E, cur);
  std::vector<Ordinal> seen;

  // One deterministic step from w: either a slow move or a full ray skip.
  // Returns the next value; flags whether the position was a fixed point or
  // the start of an unbounded ray.
  enum class StepKind { Slow, RayExit, Fixed, InfiniteRay };
  auto step_of = [&](const Ordinal& w, Nat* ray_len) -> std::pair<StepKind, Ordinal> {
    const Piece& p = piece_at(G, w);
    if (const auto* s = std::get_if<ShiftPiece>(&p.expr)) {
      if (s->offset.is_zero()) return {StepKind::Fixed, w};
      if (p.hi.is_top || add(w, mul(s->offset, omega())) <= p.hi.value)
        return {StepKind::InfiniteRay, w};
      Nat j = detail::least_k_reaching(w, s->offset, p.hi.value);
      if (ray_len) *ray_len = j;
      return {StepKind::RayExit, detail::ray_point(w, s->offset, j)};
    }
    Ordinal nxt = eval_expr(p.expr, w);
    if (nxt == w) return {StepKind::Fixed, w};
    return {StepKind::Slow, std::move(nxt)};
  };

  for (unsigned long long budget = ctx.cfg.horizon * 4; budget > 0; --budget) {
    Nat ray_len = 0;
    auto [kind, nxt] = step_of(cur, &ray_len);
    if (kind == StepKind::Fixed) {
      Ordinal em = eval(E, cur);
      Ordinal sup = seen_max < em ? em : seen_max;
      return finish({em, em, std::move(sup), OrbitClass::FixedPoint});
    }
    if (kind == StepKind::InfiniteRay) {
      const Piece& p = piece_at(G, cur);
      detail::TailBounds tb =
          detail::ray_emission_tail(E, cur, std::get<ShiftPiece>(p.expr).offset);
      Ordinal sup = seen_max < tb.sup ? tb.sup : seen_max;
      return finish({std::move(tb.limsup), std::move(tb.liminf), std::move(sup),
                     OrbitClass::AffineTail});
    }
    if (kind == StepKind::RayExit) {
      const Piece& p = piece_at(G, cur);
      Ordinal ray_max = detail::ray_emission_extreme(
          E, cur, std::get<ShiftPiece>(p.expr).offset, ray_len, true);
      if (ray_max > seen_max) seen_max = std::move(ray_max);
    }
    for (const Ordinal& old : seen) {
      if (old == cur) {
        // Re-walk the loop once to take exact emission bounds over it.
        Ordinal cmax = eval(E, cur), cmin = cmax;
        Ordinal w = cur;
        do {
          Nat rl = 0;
          auto [k2, n2] = step_of(w, &rl);
          if (k2 == StepKind::RayExit) {
            const Piece& q = piece_at(G, w);
            const Ordinal& st = std::get<ShiftPiece>(q.expr).offset;
            Ordinal a = detail::ray_emission_extreme(E, w, st, rl, true);
            Ordinal b = detail::ray_emission_extreme(E, w, st, rl, false);
            if (a > cmax) cmax = std::move(a);
            if (b < cmin) cmin = std::move(b);
          }
          w = n2;
          Ordinal em = eval(E, w);
          if (em > cmax) cmax = em;
          if (em < cmin) cmin = std::move(em);
        } while (w != cur);
        Ordinal sup = seen_max < cmax ? cmax : seen_max;
        return finish({std::move(cmax), std::move(cmin), std::move(sup),
                       OrbitClass::FiniteCycle});
      }
    }
    seen.push_back(cur);
    cur = std::move(nxt);
    Ordinal em = eval(E, cur);
    if (em > seen_max) seen_max = std::move(em);
  }
  throw NonComputable("orbit classification budget exhausted");
}

inline RunSummary omega_run(EngineContext& ctx, const PiecewiseFn& f, const Ordinal& v) {
  return pair_omega_at(ctx, f, identity_fn(), v);
}

// ---------------------------------------------------------------------------
// Window extrapolation for sequences no certificate covers.

namespace detail {

inline std::optional<Ordinal> fit_window(const std::vector<Ordinal>& w, unsigned long long confirm);

inline std::optional<Ordinal> fit_window_terms(const std::vector<Ordinal>& w,
                                               unsigned long long confirm) {
  bool all_equal = true;
  for (std::size_t i = 1; i < w.size(); ++i) {
    if (w[i - 1] > w[i]) return std::nullopt;  // only nondecreasing tails are fit
    if (w[i] != w[0]) all_equal = false;
  }
  if (all_equal) return w[0];
  std::size_t settle = confirm / 2 + 4 < w.size() ? confirm / 2 + 4 : w.size();
  bool tail_const = true;
  for (std::size_t i = w.size() - settle; i + 1 < w.size() && tail_const; ++i)
    tail_const = w[i] == w[i + 1];
  if (tail_const) return w.back();  // the climb has settled
  // Longest common leading run of CNF terms.
  std::size_t plen = w[0].terms().size();
  for (const Ordinal& u : w) {
    std::size_t m = 0;
    while (m < plen && m < u.terms().size() && u.terms()[m].exponent == w[0].terms()[m].exponent &&
           u.terms()[m].coefficient == w[0].terms()[m].coefficient)
      ++m;
    plen = m;
  }
  std::vector<Ordinal::Term> prefix(w[0].terms().begin(),
                                    w[0].terms().begin() + static_cast<std::ptrdiff_t>(plen));
  Ordinal base = Ordinal::from_terms(prefix);
  std::vector<Ordinal> rest;
  for (const Ordinal& u : w) {
    std::vector<Ordinal::Term> t(u.terms().begin() + static_cast<std::ptrdiff_t>(plen),
                                 u.terms().end());
    Ordinal r = Ordinal::from_terms(std::move(t));
    // Entries equal to the prefix can only form a leading run (the window is
    // nondecreasing); they contribute nothing to the growth shape.
    if (r.is_zero()) {
      if (!rest.empty()) return std::nullopt;
      continue;
    }
    rest.push_back(std::move(r));
  }
  if (rest.size() < 2) return std::nullopt;
  bool same_degree = true, rising_degree = true;
  for (std::size_t i = 1; i < rest.size(); ++i) {
    if (degree(rest[i]) != degree(rest[0])) same_degree = false;
    if (degree(rest[i - 1]) >= degree(rest[i])) rising_degree = false;
  }
  if (same_degree) {
    for (std::size_t i = 1; i < rest.size(); ++i)
      if (lead_coefficient(rest[i - 1]) >= lead_coefficient(rest[i])) return std::nullopt;
    return add(base, omega_pow(succ(degree(rest[0]))));
  }
  if (rising_degree) {
    std::vector<Ordinal> degs;
    for (const Ordinal& r : rest) degs.push_back(degree(r));
    std::optional<Ordinal> e = fit_window(degs, confirm);
    if (!e) return std::nullopt;
    return add(base, omega_pow(*e));
  }
  return std::nullopt;
}

inline std::optional<Ordinal> fit_window(const std::vector<Ordinal>& w,
                                         unsigned long long confirm) {
  std::size_t minlen = confirm / 2 + 4;
  if (w.size() < minlen) return std::nullopt;
  // The quantity being estimated only depends on tails, so early entries that
  // break an otherwise clean shape may be shed.
  std::size_t max_drop = w.size() - minlen;
  if (max_drop > w.size() / 4) max_drop = w.size() / 4;
  for (std::size_t drop = 0; drop <= max_drop; ++drop) {
    std::vector<Ordinal> tail(w.begin() + static_cast<std::ptrdiff_t>(drop), w.end());
    if (auto r = fit_window_terms(tail, confirm)) return r;
  }
  return std::nullopt;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Symbolic crossing of one w: given the step function G and the running
// segment-sup function E, produce the pair (value after the crossing,
// supremum over the crossed stretch) as functions of the start value.

namespace detail {

inline void append_clipped(std::vector<Piece>& out, const PiecewiseFn& fn, const Ordinal& lo,
                           const Bound& hi) {
  for (const Piece& p : fn.pieces()) {
    Ordinal nlo = p.lo < lo ? lo : p.lo;
    Bound nhi = p.hi;
    if (!hi.is_top && (nhi.is_top || hi.value < nhi.value)) nhi = hi;
    if (bound_lt(nlo, nhi) && (p.hi.is_top || nlo < p.hi.value) && bound_lt(p.lo, nhi))
      out.push_back(Piece{std::move(nlo), std::move(nhi), p.expr});
  }
}

inline PiecewiseFn totalize_above(const std::vector<Piece>& upper, const Ordinal& from) {
  std::vector<Piece> ps;
  if (!from.is_zero()) ps.push_back(Piece{Ordinal(), Bound::at(from), ConstPiece{Ordinal()}});
  for (const Piece& p : upper) ps.push_back(p);
  return PiecewiseFn::make(std::move(ps));
}

}  // namespace detail

inline FnPair omega_pair_fn(EngineContext& ctx, const PiecewiseFn& G, const PiecewiseFn& E) {
  const std::vector<Piece>& gp = G.pieces();
  std::vector<Piece> fparts, sparts;  // accumulated from the top piece down

  for (std::size_t pi = gp.size(); pi-- > 0;) {
    const Piece& p = gp[pi];
    std::vector<Piece> flocal, slocal;

    if (const auto* cst = std::get_if<ConstPiece>(&p.expr)) {
      RunSummary pr = pair_omega_at(ctx, G, E, cst->value);
      flocal.push_back(Piece{p.lo, p.hi, ConstPiece{pr.limsup}});
      PiecewiseFn m = pointwise_max(E, PiecewiseFn::constant(pr.sup));
      detail::append_clipped(slocal, m, p.lo, p.hi);
    } else if (const auto* par = std::get_if<ParityPiece>(&p.expr)) {
      RunSummary pe = pair_omega_at(ctx, G, E, par->even_value);
      RunSummary po = pair_omega_at(ctx, G, E, par->odd_value);
      flocal.push_back(Piece{p.lo, p.hi, ParityPiece{pe.limsup, po.limsup}});
      std::vector<Piece> qp;
      if (!p.lo.is_zero())
        qp.push_back(Piece{Ordinal(), Bound::at(p.lo), ConstPiece{Ordinal()}});
      qp.push_back(Piece{p.lo, p.hi, ParityPiece{pe.sup, po.sup}});
      qp.push_back(Piece{p.hi.value, Bound::top(), ConstPiece{Ordinal()}});
      PiecewiseFn m = pointwise_max(E, PiecewiseFn::make(std::move(qp)));
      detail::append_clipped(slocal, m, p.lo, p.hi);
    } else {
      const Ordinal& c = std::get<ShiftPiece>(p.expr).offset;
      if (c.is_zero()) {
        detail::append_clipped(flocal, E, p.lo, p.hi);
        detail::append_clipped(slocal, E, p.lo, p.hi);
      } else {
        Ordinal comega = mul(c, omega());
        // Stay region: from these starts the ray never leaves the piece.
        Bound stay_end = p.hi;
        if (!p.hi.is_top) {
          Ordinal t = least_shift_preimage(comega, succ(p.hi.value));
          stay_end = bound_min(p.hi, t);
        }
        if (bound_lt(p.lo, stay_end)) {
          // Sub-split so that within a block the whole ray from v sits inside
          // a single piece of E (or is uniformly multi-piece).
          std::vector<Ordinal> cuts{p.lo};
          for (const Piece& ep : E.pieces()) {
            for (const Ordinal& t : {ep.lo, least_shift_preimage(comega, succ(ep.lo))})
              if (p.lo < t && bound_lt(t, stay_end)) cuts.push_back(t);
          }
          std::sort(cuts.begin(), cuts.end(),
                    [](const Ordinal& a, const Ordinal& b) { return a < b; });
          cuts.erase(std::unique(cuts.begin(), cuts.end(),
                                 [](const Ordinal& a, const Ordinal& b) { return a == b; }),
                     cuts.end());
          for (std::size_t i = 0; i < cuts.size(); ++i) {
            const Ordinal& u0 = cuts[i];
            Bound u1 = i + 1 < cuts.size() ? Bound::at(cuts[i + 1]) : stay_end;
            const Piece& q = piece_at(E, u0);
            bool single = q.hi.is_top || add(u0, comega) <= q.hi.value;
            if (single) {
              PieceExpr fe, se;
              if (const auto* qc = std::get_if<ConstPiece>(&q.expr)) {
                fe = se = ConstPiece{qc->value};
              } else if (const auto* qs = std::get_if<ShiftPiece>(&q.expr)) {
                if (degree(qs->offset) > degree(c))
                  fe = se = ShiftPiece{qs->offset};
                else
                  fe = se = ShiftPiece{comega};
              } else {
                const auto& qq = std::get<ParityPiece>(q.expr);
                if (finite_value(c) % 2 == 1) {
                  const Ordinal& mx =
                      qq.even_value < qq.odd_value ? qq.odd_value : qq.even_value;
                  fe = se = ConstPiece{mx};
                } else {
                  fe = se = ParityPiece{qq.even_value, qq.odd_value};
                }
              }
              flocal.push_back(Piece{u0, u1, fe});
              slocal.push_back(Piece{u0, u1, se});
            } else {
              // Mixed rays: expand pointwise, within a hard cap.
              if (u1.is_top || !is_finite(u1.value) || !is_finite(u0) ||
                  finite_value(u1.value) - finite_value(u0) > kMaxUnitSplit)
                throw FragmentOverflow("mixed ray block too wide for pointwise expansion");
              for (Ordinal x = u0; x < u1.value; x = succ(x)) {
                RunSummary pr = pair_omega_at(ctx, G, E, x);
                flocal.push_back(Piece{x, Bound::at(succ(x)), ConstPiece{pr.limsup}});
                slocal.push_back(Piece{x, Bound::at(succ(x)), ConstPiece{pr.sup}});
              }
            }
          }
        }
        // Exit region: the ray leaves the piece after finitely many steps.
        if (!p.hi.is_top && (stay_end.is_top || stay_end.value < p.hi.value)) {
          Ordinal blo = stay_end.is_top ? p.lo : (stay_end.value < p.lo ? p.lo : stay_end.value);
          Nat jmax = detail::least_k_reaching(blo, c, p.hi.value);
          if (jmax > kMaxExitSplit)
            throw FragmentOverflow("exit region needs too many split levels");
          PiecewiseFn ftop = detail::totalize_above(fparts, p.hi.value);
          PiecewiseFn stop = detail::totalize_above(sparts, p.hi.value);
          PiecewiseFn prefix_max = E;  // max of E over the first j ray points
          unsigned long long j = 1;
          Ordinal right = p.hi.value;
          std::vector<std::vector<Piece>> fstack, sstack;
          while (true) {
            // On [max(sigma_j, blo), right) the exit takes exactly j steps.
            Ordinal cj = mul(c, Ordinal(Nat(j)));
            Ordinal sigma = least_shift_preimage(cj, p.hi.value);
            Ordinal left = sigma < blo ? blo : sigma;
            if (left < right) {
              PiecewiseFn fout = compose(ftop, PiecewiseFn::shift(cj));
              PiecewiseFn sout =
                  pointwise_max(prefix_max, compose(stop, PiecewiseFn::shift(cj)));
              std::vector<Piece> fl, sl;
              detail::append_clipped(fl, fout, left, Bound::at(right));
              detail::append_clipped(sl, sout, left, Bound::at(right));
              fstack.push_back(std::move(fl));
              sstack.push_back(std::move(sl));
              right = left;
            }
            if (left <= blo) break;
            prefix_max = pointwise_max(
                prefix_max, compose(E, PiecewiseFn::shift(mul(c, Ordinal(Nat(j))))));
            ++j;
            if (j > jmax + 1) throw FragmentOverflow("exit split failed to close");
          }
          for (std::size_t r = fstack.size(); r-- > 0;) {
            for (Piece& q : fstack[r]) flocal.push_back(std::move(q));
            for (Piece& q : sstack[r]) slocal.push_back(std::move(q));
          }
        }
      }
    }
    for (std::size_t r = flocal.size(); r-- > 0;) fparts.insert(fparts.begin(), std::move(flocal[r]));
    for (std::size_t r = slocal.size(); r-- > 0;) sparts.insert(sparts.begin(), std::move(slocal[r]));
  }

  FnPair out{PiecewiseFn::make(std::move(fparts)), PiecewiseFn::make(std::move(sparts))};

  // Spot-check the construction against the concrete classifier; a mismatch
  // means the symbolic route must not be trusted for this input.
  std::vector<Ordinal> probes;
  for (const Piece& q : out.fn.pieces()) {
    probes.push_back(q.lo);
    if (bound_lt(succ(q.lo), q.hi)) probes.push_back(succ(q.lo));
  }
  for (const Piece& q : out.span_sup.pieces()) probes.push_back(q.lo);
  for (const Ordinal& x : probes) {
    RunSummary pr = pair_omega_at(ctx, G, E, x);
    if (eval(out.fn, x) != pr.limsup || eval(out.span_sup, x) != pr.sup)
      throw NonComputable("symbolic run summary failed its spot check");
  }
  ++ctx.stats.symbolic_certs;
  return out;
}

// Chain of symbolic levels for f: entry m holds the crossing of width w^m and
// its segment-sup companion.
inline const FnPair& level_pair(EngineContext& ctx, const PiecewiseFn& f, std::size_t m) {
  std::vector<FnPair>& chain = ctx.level_cache[format(f)];
  if (chain.empty()) chain.push_back(FnPair{f, identity_fn()});
  while (chain.size() <= m) {
    const FnPair& prev = chain.back();
    chain.push_back(omega_pair_fn(ctx, prev.fn, prev.span_sup));
  }
  return chain[m];
}

// ---------------------------------------------------------------------------
// Crossing w^beta from a value, with certificates.

struct CrossResult {
  Ordinal value;  // value reached at the end of the crossing
  Ordinal sup;    // supremum over the crossed stretch (start included)
  Certainty cert;
};

inline CrossResult cross_power(EngineContext& ctx, const Ordinal& beta, const PiecewiseFn& f,
                               const Ordinal& v);

namespace detail {

inline std::optional<CrossResult> try_absorption(EngineContext& ctx, const Ordinal& width_exp,
                                                 const PiecewiseFn& f, const Ordinal& v,
                                                 const Nat& copies) {
  const Piece& p = piece_at(f, v);
  const auto* s = std::get_if<ShiftPiece>(&p.expr);
  if (!s || s->offset.is_zero()) return std::nullopt;
  Ordinal delta = mul(s->offset, mul(omega_pow(width_exp), Ordinal(copies)));
  Ordinal target = add(v, delta);
  if (!p.hi.is_top && target > p.hi.value) return std::nullopt;
  ++ctx.stats.absorption_certs;
  return CrossResult{target, std::move(target), Certainty::exact()};
}

inline CrossResult fitted_cross(EngineContext& ctx, std::vector<Ordinal> sups) {
  std::optional<Ordinal> guess = fit_window(sups, ctx.cfg.confirm);
  if (!guess) throw NonComputable("no certificate and no usable growth pattern");
  ++ctx.stats.fitted_uses;
  return CrossResult{*guess, *guess, Certainty::fitted(ctx.cfg.horizon)};
}

}  // namespace detail

inline CrossResult cross_power(EngineContext& ctx, const Ordinal& beta, const PiecewiseFn& f,
                               const Ordinal& v) {
  if (beta.is_zero()) {
    Ordinal w = eval(f, v);
    return {std::move(w), v, Certainty::exact()};
  }
  if (auto ab = detail::try_absorption(ctx, beta, f, v, Nat(1))) return *ab;
  RunSummary ro = omega_run(ctx, f, v);
  if (beta == Ordinal(1ULL)) return {ro.limsup, ro.sup, Certainty::exact()};
  if (ro.limsup == v && ro.sup == v) {
    ++ctx.stats.stability_certs;  // a one-w fixed pair stays fixed at every width
    return {v, v, Certainty::exact()};
  }

  if (is_successor(beta)) {
    if (is_finite(beta)) {
      std::size_t m =
          static_cast<std::size_t>(finite_value(beta).convert_to<unsigned long long>()) - 1;
      try {
        const FnPair lp = level_pair(ctx, f, m);
        RunSummary pr = pair_omega_at(ctx, lp.fn, lp.span_sup, v);
        return {pr.limsup, pr.sup, Certainty::exact()};
      } catch (const FragmentOverflow&) {
      } catch (const NonComputable&) {
      }
    }
    // Concrete milestone walk: w^beta is w uniform copies of the next width
    // down, so the step is autonomous and a revisited milestone value
    // certifies a cycle.
    Ordinal inner = pred(beta);
    Ordinal cur = v;
    std::vector<Ordinal> milestones, sups;
    Certainty cert = Certainty::exact();
    for (unsigned long long n = 0; n < ctx.cfg.horizon; ++n) {
      for (std::size_t p = 0; p < milestones.size(); ++p) {
        if (milestones[p] == cur) {
          Ordinal ls = sups[p], all = sups[0];
          for (std::size_t i = 0; i < sups.size(); ++i) {
            if (i >= p && sups[i] > ls) ls = sups[i];
            if (sups[i] > all) all = sups[i];
          }
          return {std::move(ls), std::move(all), cert};
        }
      }
      milestones.push_back(cur);
      CrossResult r = cross_power(ctx, inner, f, cur);
      cert = meet(cert, r.cert);
      sups.push_back(r.sup);
      cur = std::move(r.value);
    }
    CrossResult r = detail::fitted_cross(ctx, sups);
    r.cert = meet(r.cert, cert);
    return r;
  }

  // Limit width: segment widths follow the canonical approach to beta, so the
  // walk is not autonomous and value revisits certify nothing. Stability and
  // absorption remain valid at every suffix.
  Ordinal cur = v;
  std::vector<Ordinal> sups;
  Certainty cert = Certainty::exact();
  for (unsigned long long n = 0; n < ctx.cfg.horizon; ++n) {
    if (n > 0) {
      if (auto ab = detail::try_absorption(ctx, beta, f, cur, Nat(1))) {
        Ordinal all = ab->sup;
        for (const Ordinal& s : sups)
          if (s > all) all = s;
        return {ab->value, std::move(all), meet(cert, ab->cert)};
      }
      RunSummary rs = omega_run(ctx, f, cur);
      if (rs.limsup == cur && rs.sup == cur) {
        ++ctx.stats.stability_certs;
        Ordinal all = cur;
        for (const Ordinal& s : sups)
          if (s > all) all = s;
        return {cur, std::move(all), cert};
      }
    }
    CrossResult r = cross_power(ctx, fundamental_seq(beta, n), f, cur);
    cert = meet(cert, r.cert);
    sups.push_back(r.sup);
    cur = std::move(r.value);
  }
  CrossResult r = detail::fitted_cross(ctx, sups);
  r.cert = meet(r.cert, cert);
  return r;
}

// ---------------------------------------------------------------------------
// Finite iteration with exact fast-forwarding.

inline Ordinal finite_iter(EngineContext& ctx, const PiecewiseFn& f, Ordinal v, Nat k) {
  std::vector<std::pair<Ordinal, Nat>> seen;  // value -> remaining count at slow steps
  bool detect = true;
  unsigned long long budget = ctx.cfg.horizon * 8;
  while (k > 0) {
    if (budget-- == 0) throw NonComputable("finite iteration budget exhausted");
    const Piece& p = piece_at(f, v);
    if (const auto* s = std::get_if<ShiftPiece>(&p.expr)) {
      if (s->offset.is_zero()) return v;
      if (p.hi.is_top || add(v, mul(s->offset, omega())) <= p.hi.value)
        return add(v, mul(s->offset, Ordinal(k)));
      Nat j = detail::least_k_reaching(v, s->offset, p.hi.value);
      if (k < j) return add(v, mul(s->offset, Ordinal(k)));
      v = detail::ray_point(v, s->offset, j);
      k -= j;
      continue;
    }
    Ordinal nxt = eval_expr(p.expr, v);
    if (nxt == v) return v;
    if (detect) {
      for (const auto& [val, rem] : seen) {
        if (val == v) {
          Nat period = rem - k;
          k %= period;
          detect = false;
          break;
        }
      }
      if (detect) seen.emplace_back(v, k);
    }
    if (k == 0) break;
    v = std::move(nxt);
    --k;
  }
  return v;
}

// ---------------------------------------------------------------------------
// The level-1 iterate at a point: walk the CNF of the index left to right;
// the state after a prefix is a single ordinal, so each term is a run of
// identical-width crossings.

inline IterResult iter1_at(EngineContext& ctx, const Ordinal& alpha, const PiecewiseFn& f,
                           const Ordinal& x) {
  Ordinal v = x;
  Certainty cert = Certainty::exact();
  for (const Ordinal::Term& term : alpha.terms()) {
    if (term.exponent.is_zero()) {
      v = finite_iter(ctx, f, v, term.coefficient);
      continue;
    }
    Nat remaining = term.coefficient;
    std::vector<std::pair<Ordinal, Nat>> seen;
    bool detect = true;
    while (remaining > 0) {
      if (auto ab = detail::try_absorption(ctx, term.exponent, f, v, remaining)) {
        v = ab->value;
        remaining = 0;
        break;
      }
      if (detect) {
        bool skipped = false;
        for (const auto& [val, rem] : seen) {
          if (val == v) {
            Nat period = rem - remaining;
            remaining %= period;
            detect = false;
            skipped = true;
            break;
          }
        }
        if (skipped) continue;
        seen.emplace_back(v, remaining);
      }
      CrossResult r = cross_power(ctx, term.exponent, f, v);
      cert = meet(cert, r.cert);
      if (r.value == v && r.sup == v) {
        remaining = 0;  // the crossing is a no-op from here on
        v = r.value;
        break;
      }
      v = std::move(r.value);
      --remaining;
    }
  }
  return {std::move(v), cert};
}

// ---------------------------------------------------------------------------
// The level-1 iterate as a function object.

namespace detail {

inline PiecewiseFn fn_pow(const PiecewiseFn& g, Nat k) {
  if (k == 0) return identity_fn();
  if (k == 1) return g;
  PiecewiseFn gg = compose(g, g);
  if (equal_ext(gg, g)) return g;  // idempotent
  PiecewiseFn acc = identity_fn();
  PiecewiseFn base = g;
  bool acc_id = true;
  for (Nat kk = k; kk > 0; kk >>= 1) {
    if ((kk & 1) != 0) {
      acc = acc_id ? base : compose(base, acc);
      acc_id = false;
    }
    if (kk > 1) base = compose(base, base);
  }
  return acc;
}

}  // namespace detail

inline PiecewiseFn iter1_fn(EngineContext& ctx, const Ordinal& alpha, const PiecewiseFn& f) {
  PiecewiseFn acc = identity_fn();
  bool acc_id = true;
  for (const Ordinal::Term& term : alpha.terms()) {
    PiecewiseFn layer = identity_fn();
    if (term.exponent.is_zero()) {
      layer = detail::fn_pow(f, term.coefficient);
    } else {
      if (!is_finite(term.exponent))
        throw NonComputable("function-space crossing beyond finite level widths");
      std::size_t m = static_cast<std::size_t>(
          finite_value(term.exponent).convert_to<unsigned long long>());
      layer = detail::fn_pow(level_pair(ctx, f, m).fn, term.coefficient);
    }
    acc = acc_id ? layer : compose(layer, acc);
    acc_id = false;
  }
  return acc;
}

// ---------------------------------------------------------------------------
// Type-2 functionals over the fragment.

struct Functional2;
using F2 = std::shared_ptr<const Functional2>;

struct IterF {
  Ordinal alpha;
};
struct ComposeF {
  F2 outer, inner;
};
struct ConstF {
  PiecewiseFn fn;
};
struct IdentityF {};
struct GuardAtom {
  PiecewiseFn bound;
  bool negated;  // false: arg <= bound must hold; true: arg <= bound must fail
};
struct DecisionCase {
  std::vector<GuardAtom> atoms;
  PiecewiseFn out;
};
struct DecisionF {
  std::vector<DecisionCase> cases;  // first match wins
  PiecewiseFn otherwise;
};

struct Functional2 {
  std::variant<IterF, ComposeF, ConstF, IdentityF, DecisionF> node;
};

inline F2 make_iter_functional(Ordinal alpha) {
  return std::make_shared<Functional2>(Functional2{IterF{std::move(alpha)}});
}
inline F2 make_compose_functional(F2 outer, F2 inner) {
  return std::make_shared<Functional2>(Functional2{ComposeF{std::move(outer), std::move(inner)}});
}
inline F2 make_const_functional(PiecewiseFn g) {
  return std::make_shared<Functional2>(Functional2{ConstF{std::move(g)}});
}
inline F2 make_identity_functional() {
  return std::make_shared<Functional2>(Functional2{IdentityF{}});
}

// The interchange functional: fixes the lattice extremes of {f0, f1} and
// swaps the two generators; everything else is sent to the join.
inline F2 make_phi() {
  PiecewiseFn f0 = builtin("f0"), f1 = builtin("f1");
  PiecewiseFn g = builtin("gmax"), h = builtin("hmin");
  std::vector<DecisionCase> cases;
  cases.push_back({{GuardAtom{h, false}}, h});
  cases.push_back({{GuardAtom{f0, false}, GuardAtom{h, true}}, f1});
  cases.push_back({{GuardAtom{f1, false}, GuardAtom{h, true}}, f0});
  return std::make_shared<Functional2>(Functional2{DecisionF{std::move(cases), std::move(g)}});
}

inline F2 make_psi() {
  F2 phi = make_phi();
  return make_compose_functional(phi, phi);
}

inline PiecewiseFn apply2(EngineContext& ctx, const Functional2& F, const PiecewiseFn& f) {
  if (const auto* it = std::get_if<IterF>(&F.node)) return iter1_fn(ctx, it->alpha, f);
  if (const auto* co = std::get_if<ComposeF>(&F.node))
    return apply2(ctx, *co->outer, apply2(ctx, *co->inner, f));
  if (const auto* cn = std::get_if<ConstF>(&F.node)) return cn->fn;
  if (std::holds_alternative<IdentityF>(F.node)) return f;
  const auto& d = std::get<DecisionF>(F.node);
  for (const DecisionCase& c : d.cases) {
    bool hold = true;
    for (const GuardAtom& a : c.atoms) {
      bool le = le_ext(f, a.bound);
      if (le == a.negated) {
        hold = false;
        break;
      }
    }
    if (hold) return c.out;
  }
  return d.otherwise;
}

// Multiplier of a functional built purely from iteration layers: applying it
// to a shift multiplies the offset by this ordinal (a directly provable fact
// about shifts, not an appeal to any index identity).
inline std::optional<Ordinal> shift_multiplier(const Functional2& F) {
  if (const auto* it = std::get_if<IterF>(&F.node)) return it->alpha;
  if (std::holds_alternative<IdentityF>(F.node)) return Ordinal(1ULL);
  if (const auto* co = std::get_if<ComposeF>(&F.node)) {
    auto a = shift_multiplier(*co->outer);
    auto b = shift_multiplier(*co->inner);
    if (a && b) return mul(*b, *a);
    return std::nullopt;
  }
  return std::nullopt;
}

namespace detail {

inline std::optional<Ordinal> pure_shift_offset(const PiecewiseFn& g) {
  if (g.pieces().size() != 1) return std::nullopt;
  if (const auto* s = std::get_if<ShiftPiece>(&g.pieces()[0].expr)) return s->offset;
  return std::nullopt;
}

}  // namespace detail

// Crossing w^beta in function space: the orbit either reaches a function the
// functional fixes (valid at every width), cycles (its pointwise join is the
// limit, valid exactly at width w), or is a growing pure shift driven by an
// iteration multiplier (closed form at every width).
inline PiecewiseFn fn_cross_power(EngineContext& ctx, const Ordinal& beta, const Functional2& F,
                                  const PiecewiseFn& g) {
  std::vector<PiecewiseFn> hist{g};
  PiecewiseFn cur = g;
  bool cycle_seen = false;
  for (unsigned long long step = 0; step < ctx.cfg.horizon; ++step) {
    PiecewiseFn nxt = apply2(ctx, F, cur);
    if (equal_ext(nxt, cur)) return cur;  // held fixed from here on
    bool looped = false;
    for (std::size_t p = 0; p < hist.size(); ++p) {
      if (equal_ext(hist[p], nxt)) {
        if (beta == Ordinal(1ULL)) {
          PiecewiseFn acc = hist[p];
          for (std::size_t i = p + 1; i < hist.size(); ++i) acc = pointwise_max(acc, hist[i]);
          return acc;  // pointwise limit superior over the recurring functions
        }
        cycle_seen = true;
        looped = true;
        break;
      }
    }
    if (looped) break;
    hist.push_back(nxt);
    cur = std::move(nxt);
  }
  if (auto mu = shift_multiplier(F)) {
    if (*mu >= Ordinal(2ULL)) {
      if (auto c = detail::pure_shift_offset(g))
        return PiecewiseFn::shift(mul(*c, pow(*mu, omega_pow(beta))));
    }
  }
  throw NonComputable(cycle_seen ? "recurring function orbit at a width above w"
                                 : "function orbit admits no certificate");
}

namespace detail {

inline PiecewiseFn fn_orbit_pow(EngineContext& ctx, const Functional2& F, PiecewiseFn g, Nat k) {
  std::vector<PiecewiseFn> hist;
  Nat i = 0;
  while (i < k) {
    for (std::size_t p = 0; p < hist.size(); ++p) {
      if (equal_ext(hist[p], g)) {
        Nat period = i - Nat(p);
        Nat idx = Nat(p) + (k - Nat(p)) % period;
        return hist[static_cast<std::size_t>(idx.convert_to<unsigned long long>())];
      }
    }
    if (hist.size() > ctx.cfg.horizon)
      throw NonComputable("function orbit budget exhausted");
    hist.push_back(g);
    g = apply2(ctx, F, g);
    ++i;
  }
  return g;
}

}  // namespace detail

inline PiecewiseFn iter2_fn(EngineContext& ctx, const Ordinal& alpha, const Functional2& F,
                            const PiecewiseFn& f) {
  PiecewiseFn g = f;
  for (const Ordinal::Term& term : alpha.terms()) {
    if (term.exponent.is_zero()) {
      g = detail::fn_orbit_pow(ctx, F, g, term.coefficient);
      continue;
    }
    std::vector<PiecewiseFn> hist;
    Nat remaining = term.coefficient;
    while (remaining > 0) {
      bool skipped = false;
      for (std::size_t p = 0; p < hist.size(); ++p) {
        if (equal_ext(hist[p], g)) {
          Nat period = Nat(hist.size()) - Nat(p);
          remaining %= period;
          hist.clear();
          skipped = true;
          break;
        }
      }
      if (skipped) {
        if (remaining == 0) break;
        continue;
      }
      hist.push_back(g);
      g = fn_cross_power(ctx, term.exponent, F, g);
      --remaining;
    }
  }
  return g;
}

// Evaluate the level-2 iterate at several arguments, sharing the expensive
// per-orbit work. When the function-space route fails at the final crossing
// of width w, the pointwise value window is extrapolated instead.
inline std::vector<IterResult> iter2_eval_many(EngineContext& ctx, const Ordinal& alpha,
                                               const Functional2& F, const PiecewiseFn& f,
                                               const std::vector<Ordinal>& xs) {
  std::vector<IterResult> out;
  try {
    PiecewiseFn g = iter2_fn(ctx, alpha, F, f);
    for (const Ordinal& x : xs) out.push_back({eval(g, x), Certainty::exact()});
    return out;
  } catch (const NonComputable&) {
  } catch (const FragmentOverflow&) {
  }

  // Re-walk to find where the function route stops; only a final one-w
  // crossing can be served by value extrapolation.
  PiecewiseFn g = f;
  std::vector<Ordinal::Term> terms = alpha.terms();
  for (std::size_t ti = 0; ti < terms.size(); ++ti) {
    const Ordinal::Term& term = terms[ti];
    if (term.exponent.is_zero()) {
      g = detail::fn_orbit_pow(ctx, F, g, term.coefficient);
      continue;
    }
    Nat remaining = term.coefficient;
    while (remaining > 0) {
      bool last_op = (ti + 1 == terms.size()) && remaining == 1;
      bool crossed = false;
      try {
        g = fn_cross_power(ctx, term.exponent, F, g);
        --remaining;
        crossed = true;
      } catch (const NonComputable&) {
      } catch (const FragmentOverflow&) {
      }
      if (crossed) continue;
      if (!last_op || term.exponent != Ordinal(1ULL))
        throw NonComputable("function-space route fails before the final crossing");
      // The orbit may stop being representable partway through; a long
      // enough prefix still determines the pointwise windows.
      std::vector<PiecewiseFn> orbit{g};
      for (unsigned long long n = 0; n + 1 < ctx.cfg.horizon; ++n) {
        try {
          orbit.push_back(apply2(ctx, F, orbit.back()));
        } catch (const NonComputable&) {
          break;
        } catch (const FragmentOverflow&) {
          break;
        }
      }
      for (const Ordinal& x : xs) {
        std::vector<Ordinal> window;
        for (const PiecewiseFn& h : orbit) window.push_back(eval(h, x));
        std::optional<Ordinal> guess = detail::fit_window(window, ctx.cfg.confirm);
        if (!guess) throw NonComputable("pointwise window admits no growth pattern");
        ++ctx.stats.fitted_uses;
        out.push_back({std::move(*guess), Certainty::fitted(ctx.cfg.horizon)});
      }
      return out;
    }
  }
  for (const Ordinal& x : xs) out.push_back({eval(g, x), Certainty::exact()});
  return out;
}

inline IterResult iter2_at(EngineContext& ctx, const Ordinal& alpha, const Functional2& F,
                           const PiecewiseFn& f, const Ordinal& x) {
  return iter2_eval_many(ctx, alpha, F, f, {x})[0];
}

}  // namespace orditer
