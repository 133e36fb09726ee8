#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "orditer/errors.hpp"
#include "orditer/ordinal.hpp"

namespace orditer {

// Upper interval bound: an ordinal or the representation ceiling.
struct Bound {
  bool is_top;
  Ordinal value;
  static Bound top() { return Bound{true, Ordinal()}; }
  static Bound at(Ordinal v) { return Bound{false, std::move(v)}; }
};

inline bool bound_lt(const Ordinal& x, const Bound& b) { return b.is_top || x < b.value; }
inline bool bound_eq(const Bound& a, const Bound& b) {
  if (a.is_top != b.is_top) return false;
  return a.is_top || a.value == b.value;
}
inline Bound bound_min(const Bound& b, const Ordinal& t) {
  if (b.is_top || t < b.value) return Bound::at(t);
  return b;
}

struct ConstPiece {
  Ordinal value;
};
struct ShiftPiece {
  Ordinal offset;  // x |-> x + offset
};
struct ParityPiece {
  Ordinal even_value;
  Ordinal odd_value;  // defined on finite arguments only
};
using PieceExpr = std::variant<ConstPiece, ShiftPiece, ParityPiece>;

inline bool expr_eq(const PieceExpr& a, const PieceExpr& b) {
  if (a.index() != b.index()) return false;
  if (const auto* c = std::get_if<ConstPiece>(&a))
    return c->value == std::get<ConstPiece>(b).value;
  if (const auto* s = std::get_if<ShiftPiece>(&a))
    return s->offset == std::get<ShiftPiece>(b).offset;
  const auto& p = std::get<ParityPiece>(a);
  const auto& q = std::get<ParityPiece>(b);
  return p.even_value == q.even_value && p.odd_value == q.odd_value;
}

inline Ordinal eval_expr(const PieceExpr& e, const Ordinal& x) {
  if (const auto* c = std::get_if<ConstPiece>(&e)) return c->value;
  if (const auto* s = std::get_if<ShiftPiece>(&e)) return add(x, s->offset);
  const auto& p = std::get<ParityPiece>(e);
  if (!is_finite(x)) throw std::logic_error("parity expression on infinite argument");
  return finite_value(x) % 2 == 0 ? p.even_value : p.odd_value;
}

struct Piece {
  Ordinal lo;
  Bound hi;
  PieceExpr expr;
};

inline constexpr std::size_t kMaxPieces = 512;
inline constexpr unsigned long long kMaxUnitSplit = 256;

namespace detail {
inline std::vector<Piece> normalize_pieces(std::vector<Piece> ps);
}

// Total function [0, Top) -> ordinals, as contiguous pieces. Values are
// normalized on construction, so structurally distinct instances of the same
// function are rare (and extensional equality never relies on structure).
class PiecewiseFn {
 public:
  static PiecewiseFn make(std::vector<Piece> pieces) {
    if (pieces.empty()) throw std::invalid_argument("piecewise function needs pieces");
    if (!pieces[0].lo.is_zero()) throw std::invalid_argument("pieces must start at 0");
    for (std::size_t i = 0; i < pieces.size(); ++i) {
      const Piece& p = pieces[i];
      if (!bound_lt(p.lo, p.hi)) throw std::invalid_argument("empty piece interval");
      if (i + 1 < pieces.size()) {
        if (p.hi.is_top || p.hi.value != pieces[i + 1].lo)
          throw std::invalid_argument("pieces must tile [0, Top) contiguously");
      } else if (!p.hi.is_top) {
        throw std::invalid_argument("last piece must reach Top");
      }
      if (std::holds_alternative<ParityPiece>(p.expr) &&
          (p.hi.is_top || p.hi.value > omega()))
        throw std::invalid_argument("parity pieces live below w");
    }
    std::vector<Piece> norm = detail::normalize_pieces(std::move(pieces));
    if (norm.size() > kMaxPieces) throw FragmentOverflow("piece budget exceeded");
    return PiecewiseFn(std::move(norm));
  }

  static PiecewiseFn constant(Ordinal v) {
    return make({Piece{Ordinal(), Bound::top(), ConstPiece{std::move(v)}}});
  }
  static PiecewiseFn shift(Ordinal c) {
    return make({Piece{Ordinal(), Bound::top(), ShiftPiece{std::move(c)}}});
  }

  const std::vector<Piece>& pieces() const { return pieces_; }

 private:
  explicit PiecewiseFn(std::vector<Piece> p) : pieces_(std::move(p)) {}
  std::vector<Piece> pieces_;
};

inline const Piece& piece_at(const PiecewiseFn& f, const Ordinal& x) {
  for (const auto& p : f.pieces())
    if (bound_lt(x, p.hi)) return p;  // contiguous from 0: first open bound wins
  throw std::logic_error("piece lookup fell off a total partition");
}

inline Ordinal eval(const PiecewiseFn& f, const Ordinal& x) {
  return eval_expr(piece_at(f, x).expr, x);
}

namespace detail {

inline const Ordinal& omax(const Ordinal& a, const Ordinal& b) { return a < b ? b : a; }
inline const Ordinal& omin(const Ordinal& a, const Ordinal& b) { return a < b ? a : b; }

// Least x0 in [lo, b] such that the two expressions agree on all of [x0, b).
// Distinct Const/Shift pairs agree exactly on a shift-preimage interval;
// pairs involving a parity expression agree on at most two consecutive
// points, so a short bounded walk suffices for them.
inline Ordinal suffix_agreement_start(const PieceExpr& left, const PieceExpr& right,
                                      const Ordinal& lo, const Ordinal& b) {
  if (expr_eq(left, right)) return lo;
  const bool lp = std::holds_alternative<ParityPiece>(left);
  const bool rp = std::holds_alternative<ParityPiece>(right);
  if (!lp && !rp) {
    const auto* lc = std::get_if<ConstPiece>(&left);
    const auto* rc = std::get_if<ConstPiece>(&right);
    if ((lc != nullptr) == (rc != nullptr)) return b;  // distinct same-kind pairs never tie
    const Ordinal& K = lc ? lc->value : rc->value;
    const Ordinal& c = lc ? std::get<ShiftPiece>(right).offset : std::get<ShiftPiece>(left).offset;
    Ordinal t1 = least_shift_preimage(c, K);
    Ordinal t2 = least_shift_preimage(c, succ(K));
    if (b <= t2 && t1 < b) return omax(lo, t1);
    return b;
  }
  Ordinal x0 = b;
  for (int k = 0; k < 4; ++k) {
    if (!is_successor(x0)) break;
    Ordinal x = pred(x0);
    if (x < lo) break;
    if (eval_expr(left, x) != eval_expr(right, x)) break;
    x0 = std::move(x);
  }
  return x0;
}

inline std::vector<Piece> normalize_pieces(std::vector<Piece> ps) {
  bool changed = true;
  while (changed) {
    changed = false;
    for (auto& p : ps) {
      if (const auto* s = std::get_if<ShiftPiece>(&p.expr)) {
        if (!p.hi.is_top) {
          Ordinal v = add(p.lo, s->offset);
          if (p.hi.value <= least_shift_preimage(s->offset, succ(v))) {
            p.expr = ConstPiece{std::move(v)};
            changed = true;
          }
        }
      } else if (const auto* q = std::get_if<ParityPiece>(&p.expr)) {
        if (q->even_value == q->odd_value) {
          p.expr = ConstPiece{q->even_value};
          changed = true;
        } else if (!p.hi.is_top && p.hi.value == succ(p.lo)) {
          p.expr = ConstPiece{eval_expr(p.expr, p.lo)};
          changed = true;
        }
      }
    }
    // Boundary points whose neighbor expressions agree belong to the right
    // piece; push such boundaries left until tight.
    for (std::size_t i = 1; i < ps.size();) {
      if (expr_eq(ps[i - 1].expr, ps[i].expr)) {
        ++i;  // the merge pass below absorbs identical neighbors
        continue;
      }
      Ordinal s = suffix_agreement_start(ps[i - 1].expr, ps[i].expr, ps[i - 1].lo, ps[i].lo);
      if (s == ps[i].lo) {
        ++i;
        continue;
      }
      changed = true;
      ps[i].lo = s;
      if (ps[i - 1].lo == s) {
        ps.erase(ps.begin() + static_cast<std::ptrdiff_t>(i) - 1);
        if (i > 1) --i;
      } else {
        ps[i - 1].hi = Bound::at(std::move(s));
        ++i;
      }
    }
    for (std::size_t i = 1; i < ps.size();) {
      if (expr_eq(ps[i - 1].expr, ps[i].expr)) {
        ps[i - 1].hi = ps[i].hi;
        ps.erase(ps.begin() + static_cast<std::ptrdiff_t>(i));
        changed = true;
      } else {
        ++i;
      }
    }
  }
  return ps;
}

struct Refined {
  Ordinal lo;
  Bound hi;
  const PieceExpr* fe;
  const PieceExpr* ge;
};

inline std::vector<Refined> refine(const PiecewiseFn& f, const PiecewiseFn& g) {
  std::vector<Ordinal> bs;
  for (const auto& p : f.pieces()) bs.push_back(p.lo);
  for (const auto& p : g.pieces()) bs.push_back(p.lo);
  std::sort(bs.begin(), bs.end(), [](const Ordinal& a, const Ordinal& b) { return a < b; });
  bs.erase(std::unique(bs.begin(), bs.end(),
                       [](const Ordinal& a, const Ordinal& b) { return a == b; }),
           bs.end());
  std::vector<Refined> out;
  for (std::size_t i = 0; i < bs.size(); ++i) {
    Bound hi = i + 1 < bs.size() ? Bound::at(bs[i + 1]) : Bound::top();
    out.push_back({bs[i], std::move(hi), &piece_at(f, bs[i]).expr, &piece_at(g, bs[i]).expr});
  }
  return out;
}

// Flags for one refined interval: does the first side exceed / fall below the
// second side anywhere, and where.
struct Flags {
  std::optional<Ordinal> above;
  std::optional<Ordinal> below;
};

inline Flags swap_sides(Flags f) { return Flags{std::move(f.below), std::move(f.above)}; }

inline std::optional<Ordinal> first_with_parity(const Ordinal& lo, const Bound& hi, int r) {
  if (!bound_lt(lo, hi)) return std::nullopt;
  if (!is_finite(lo)) return std::nullopt;  // parity ranges sit below w
  Nat n = finite_value(lo);
  if (n % 2 != r) ++n;
  Ordinal x{n};
  if (bound_lt(x, hi)) return x;
  return std::nullopt;
}

inline std::optional<Ordinal> min_opt(std::optional<Ordinal> a, std::optional<Ordinal> b) {
  if (!a) return b;
  if (!b) return a;
  return *a < *b ? a : b;
}

// Const K versus Shift c on [lo, hi): where the constant side wins and loses.
inline Flags const_vs_shift(const Ordinal& K, const Ordinal& c, const Ordinal& lo,
                            const Bound& hi) {
  Flags fl;
  Ordinal t1 = least_shift_preimage(c, K);        // x >= t1  <=>  x + c >= K
  Ordinal t2 = least_shift_preimage(c, succ(K));  // x >= t2  <=>  x + c > K
  if (lo < t1 && bound_lt(lo, hi)) fl.above = lo;
  Ordinal w = t2 > lo ? t2 : lo;
  if (bound_lt(w, hi)) fl.below = std::move(w);
  return fl;
}

inline Flags const_vs_parity(const Ordinal& K, const ParityPiece& p, const Ordinal& lo,
                             const Bound& hi) {
  Flags fl;
  std::optional<Ordinal> ab, be;
  if (K > p.even_value) ab = first_with_parity(lo, hi, 0);
  if (K > p.odd_value) ab = min_opt(std::move(ab), first_with_parity(lo, hi, 1));
  if (K < p.even_value) be = first_with_parity(lo, hi, 0);
  if (K < p.odd_value) be = min_opt(std::move(be), first_with_parity(lo, hi, 1));
  fl.above = std::move(ab);
  fl.below = std::move(be);
  return fl;
}

// Shift c versus Parity on [lo, hi) below w: per residue, x + c crosses the
// residue's value at a shift-preimage threshold.
inline Flags shift_vs_parity(const Ordinal& c, const ParityPiece& p, const Ordinal& lo,
                             const Bound& hi) {
  Flags fl;
  std::optional<Ordinal> ab, be;
  for (int r = 0; r < 2; ++r) {
    const Ordinal& v = r == 0 ? p.even_value : p.odd_value;
    Ordinal t2 = least_shift_preimage(c, succ(v));
    Ordinal start = t2 > lo ? t2 : lo;
    if (auto w = first_with_parity(start, hi, r)) ab = min_opt(std::move(ab), std::move(w));
    Ordinal t1 = least_shift_preimage(c, v);
    if (auto w = first_with_parity(lo, bound_min(hi, t1), r))
      be = min_opt(std::move(be), std::move(w));
  }
  fl.above = std::move(ab);
  fl.below = std::move(be);
  return fl;
}

inline Flags interval_flags(const PieceExpr& fe, const PieceExpr& ge, const Ordinal& lo,
                            const Bound& hi) {
  if (const auto* fc = std::get_if<ConstPiece>(&fe)) {
    if (const auto* gc = std::get_if<ConstPiece>(&ge)) {
      Flags fl;
      if (fc->value > gc->value) fl.above = lo;
      if (fc->value < gc->value) fl.below = lo;
      return fl;
    }
    if (const auto* gs = std::get_if<ShiftPiece>(&ge))
      return const_vs_shift(fc->value, gs->offset, lo, hi);
    return const_vs_parity(fc->value, std::get<ParityPiece>(ge), lo, hi);
  }
  if (const auto* fs = std::get_if<ShiftPiece>(&fe)) {
    if (const auto* gc = std::get_if<ConstPiece>(&ge))
      return swap_sides(const_vs_shift(gc->value, fs->offset, lo, hi));
    if (const auto* gs = std::get_if<ShiftPiece>(&ge)) {
      Flags fl;
      if (fs->offset > gs->offset) fl.above = lo;
      if (fs->offset < gs->offset) fl.below = lo;
      return fl;
    }
    return shift_vs_parity(fs->offset, std::get<ParityPiece>(ge), lo, hi);
  }
  const auto& fp = std::get<ParityPiece>(fe);
  if (const auto* gc = std::get_if<ConstPiece>(&ge))
    return swap_sides(const_vs_parity(gc->value, fp, lo, hi));
  if (const auto* gs = std::get_if<ShiftPiece>(&ge))
    return swap_sides(shift_vs_parity(gs->offset, fp, lo, hi));
  const auto& gp = std::get<ParityPiece>(ge);
  Flags fl;
  std::optional<Ordinal> ab, be;
  if (fp.even_value > gp.even_value) ab = first_with_parity(lo, hi, 0);
  if (fp.odd_value > gp.odd_value) ab = min_opt(std::move(ab), first_with_parity(lo, hi, 1));
  if (fp.even_value < gp.even_value) be = first_with_parity(lo, hi, 0);
  if (fp.odd_value < gp.odd_value) be = min_opt(std::move(be), first_with_parity(lo, hi, 1));
  fl.above = std::move(ab);
  fl.below = std::move(be);
  return fl;
}

}  // namespace detail

struct PointwiseCompare {
  enum class Kind { EQ, LE, GE, Incomparable } kind;
  Ordinal above_witness;  // f exceeds g here (Incomparable only)
  Ordinal below_witness;  // f falls below g here (Incomparable only)
};

inline PointwiseCompare compare_pointwise(const PiecewiseFn& f, const PiecewiseFn& g) {
  std::optional<Ordinal> above, below;
  for (const auto& iv : detail::refine(f, g)) {
    detail::Flags fl = detail::interval_flags(*iv.fe, *iv.ge, iv.lo, iv.hi);
    if (!above && fl.above) above = std::move(fl.above);
    if (!below && fl.below) below = std::move(fl.below);
    if (above && below) break;
  }
  if (above && below)
    return {PointwiseCompare::Kind::Incomparable, std::move(*above), std::move(*below)};
  if (above) return {PointwiseCompare::Kind::GE, {}, {}};
  if (below) return {PointwiseCompare::Kind::LE, {}, {}};
  return {PointwiseCompare::Kind::EQ, {}, {}};
}

inline bool le_ext(const PiecewiseFn& f, const PiecewiseFn& g) {
  auto k = compare_pointwise(f, g).kind;
  return k == PointwiseCompare::Kind::EQ || k == PointwiseCompare::Kind::LE;
}

inline bool equal_ext(const PiecewiseFn& f, const PiecewiseFn& g) {
  return compare_pointwise(f, g).kind == PointwiseCompare::Kind::EQ;
}

namespace detail {

inline void emit(std::vector<Piece>& out, Ordinal lo, Bound hi, PieceExpr e) {
  if (!bound_lt(lo, hi)) return;
  out.push_back(Piece{std::move(lo), std::move(hi), std::move(e)});
}

inline void lattice_interval(std::vector<Piece>& out, const PieceExpr& fe,
                             const PieceExpr& ge, const Ordinal& lo, const Bound& hi,
                             bool want_max) {
  if (expr_eq(fe, ge)) {
    emit(out, lo, hi, fe);
    return;
  }
  const auto* fc = std::get_if<ConstPiece>(&fe);
  const auto* gc = std::get_if<ConstPiece>(&ge);
  const auto* fs = std::get_if<ShiftPiece>(&fe);
  const auto* gs = std::get_if<ShiftPiece>(&ge);
  const auto* fp = std::get_if<ParityPiece>(&fe);
  const auto* gp = std::get_if<ParityPiece>(&ge);
  if (fc && gc) {
    emit(out, lo, hi, ConstPiece{want_max ? omax(fc->value, gc->value)
                                          : omin(fc->value, gc->value)});
    return;
  }
  if (fs && gs) {
    emit(out, lo, hi, ShiftPiece{want_max ? omax(fs->offset, gs->offset)
                                          : omin(fs->offset, gs->offset)});
    return;
  }
  if ((fc && gs) || (fs && gc)) {
    const Ordinal& K = fc ? fc->value : gc->value;
    const Ordinal& c = fs ? fs->offset : gs->offset;
    Ordinal t = least_shift_preimage(c, K);  // from t on, x + c >= K
    PieceExpr low = want_max ? PieceExpr(ConstPiece{K}) : PieceExpr(ShiftPiece{c});
    PieceExpr high = want_max ? PieceExpr(ShiftPiece{c}) : PieceExpr(ConstPiece{K});
    emit(out, lo, bound_min(hi, t), std::move(low));
    emit(out, omax(t, lo), hi, std::move(high));
    return;
  }
  if (fp && gp) {
    emit(out, lo, hi,
         ParityPiece{want_max ? omax(fp->even_value, gp->even_value)
                              : omin(fp->even_value, gp->even_value),
                     want_max ? omax(fp->odd_value, gp->odd_value)
                              : omin(fp->odd_value, gp->odd_value)});
    return;
  }
  if ((fp && gc) || (gp && fc)) {
    const ParityPiece& p = fp ? *fp : *gp;
    const Ordinal& K = fc ? fc->value : gc->value;
    emit(out, lo, hi,
         ParityPiece{want_max ? omax(p.even_value, K) : omin(p.even_value, K),
                     want_max ? omax(p.odd_value, K) : omin(p.odd_value, K)});
    return;
  }
  // Parity against Shift: three zones, the middle one mixed per point.
  const ParityPiece& p = fp ? *fp : *gp;
  const Ordinal& c = fs ? fs->offset : gs->offset;
  Ordinal te = least_shift_preimage(c, p.even_value);
  Ordinal to = least_shift_preimage(c, p.odd_value);
  const Ordinal& tmin = omin(te, to);
  const Ordinal& tmax = omax(te, to);
  emit(out, lo, bound_min(hi, tmin),
       want_max ? PieceExpr(ParityPiece{p}) : PieceExpr(ShiftPiece{c}));
  Ordinal bstart = omax(tmin, lo);
  Bound bend = bound_min(hi, tmax);
  if (bound_lt(bstart, bend)) {
    if (!is_finite(bend.value))
      throw FragmentOverflow("parity/shift crossover zone is unbounded");
    if (finite_value(bend.value) - finite_value(bstart) > kMaxUnitSplit)
      throw FragmentOverflow("parity/shift crossover zone exceeds split budget");
    for (Ordinal x = bstart; x < bend.value; x = succ(x)) {
      Ordinal pv = eval_expr(PieceExpr(ParityPiece{p}), x);
      Ordinal sv = add(x, c);
      Ordinal v = want_max ? omax(pv, sv) : omin(pv, sv);
      emit(out, x, Bound::at(succ(x)), ConstPiece{std::move(v)});
    }
  }
  emit(out, omax(tmax, lo), hi,
       want_max ? PieceExpr(ShiftPiece{c}) : PieceExpr(ParityPiece{p}));
}

inline PiecewiseFn lattice(const PiecewiseFn& f, const PiecewiseFn& g, bool want_max) {
  std::vector<Piece> out;
  for (const auto& iv : refine(f, g))
    lattice_interval(out, *iv.fe, *iv.ge, iv.lo, iv.hi, want_max);
  return PiecewiseFn::make(std::move(out));
}

}  // namespace detail

inline PiecewiseFn pointwise_max(const PiecewiseFn& f, const PiecewiseFn& g) {
  return detail::lattice(f, g, true);
}
inline PiecewiseFn pointwise_min(const PiecewiseFn& f, const PiecewiseFn& g) {
  return detail::lattice(f, g, false);
}

// x |-> f(g(x)).
inline PiecewiseFn compose(const PiecewiseFn& f, const PiecewiseFn& g) {
  std::vector<Piece> out;
  for (const auto& gp : g.pieces()) {
    if (const auto* ce = std::get_if<ConstPiece>(&gp.expr)) {
      out.push_back(Piece{gp.lo, gp.hi, ConstPiece{eval(f, ce->value)}});
      continue;
    }
    if (const auto* pe = std::get_if<ParityPiece>(&gp.expr)) {
      out.push_back(
          Piece{gp.lo, gp.hi, ParityPiece{eval(f, pe->even_value), eval(f, pe->odd_value)}});
      continue;
    }
    const Ordinal& c = std::get<ShiftPiece>(gp.expr).offset;
    // Split where the shifted argument crosses f's piece starts; within a
    // segment the inner value stays inside one piece of f.
    std::vector<Ordinal> cuts{gp.lo};
    for (const auto& fpiece : f.pieces()) {
      Ordinal s = least_shift_preimage(c, fpiece.lo);
      if (gp.lo < s && bound_lt(s, gp.hi)) cuts.push_back(std::move(s));
    }
    std::sort(cuts.begin(), cuts.end(), [](const Ordinal& a, const Ordinal& b) { return a < b; });
    cuts.erase(std::unique(cuts.begin(), cuts.end(),
                           [](const Ordinal& a, const Ordinal& b) { return a == b; }),
               cuts.end());
    for (std::size_t i = 0; i < cuts.size(); ++i) {
      Bound hi = i + 1 < cuts.size() ? Bound::at(cuts[i + 1]) : gp.hi;
      const Piece& target = piece_at(f, add(cuts[i], c));
      PieceExpr e;
      if (const auto* tc = std::get_if<ConstPiece>(&target.expr)) {
        e = ConstPiece{tc->value};
      } else if (const auto* ts = std::get_if<ShiftPiece>(&target.expr)) {
        e = ShiftPiece{add(c, ts->offset)};
      } else {
        const auto& tp = std::get<ParityPiece>(target.expr);
        // The inner value is finite here, hence so is c.
        if (finite_value(c) % 2 == 0)
          e = ParityPiece{tp.even_value, tp.odd_value};
        else
          e = ParityPiece{tp.odd_value, tp.even_value};
      }
      out.push_back(Piece{cuts[i], std::move(hi), std::move(e)});
    }
  }
  return PiecewiseFn::make(std::move(out));
}

// Identity on every representable instance: construction normalizes.
inline PiecewiseFn normalize(const PiecewiseFn& f) { return f; }

struct MonotoneCheck {
  bool monotone;
  Ordinal x;  // witness pair with x < y and f(x) > f(y), when !monotone
  Ordinal y;
};

namespace detail {

// Sup of a piece's value set; exact, possibly unattained.
inline Ordinal piece_sup(const Piece& p) {
  if (const auto* c = std::get_if<ConstPiece>(&p.expr)) return c->value;
  if (const auto* s = std::get_if<ShiftPiece>(&p.expr)) {
    if (p.hi.is_top) throw std::logic_error("sup of unbounded shift piece");
    return sup_shift_image(p.hi.value, s->offset);
  }
  const auto& q = std::get<ParityPiece>(p.expr);
  if (!p.hi.is_top && p.hi.value == succ(p.lo)) return eval_expr(p.expr, p.lo);
  return omax(q.even_value, q.odd_value);
}

}  // namespace detail

inline MonotoneCheck is_monotone(const PiecewiseFn& f) {
  const auto& ps = f.pieces();
  for (const auto& p : ps) {
    const auto* q = std::get_if<ParityPiece>(&p.expr);
    if (!q) continue;  // Const and Shift pieces are monotone on their own
    const bool width2 = !p.hi.is_top && p.hi.value == succ(succ(p.lo));
    if (width2) {
      Ordinal v0 = eval_expr(p.expr, p.lo);
      Ordinal v1 = eval_expr(p.expr, succ(p.lo));
      if (v0 > v1) return {false, p.lo, succ(p.lo)};
      continue;
    }
    // width >= 3: an adjacent pair starting on the larger residue exists
    if (q->even_value == q->odd_value) continue;
    int r = q->even_value > q->odd_value ? 0 : 1;
    auto x = detail::first_with_parity(p.lo, p.hi, r);
    if (x && bound_lt(succ(*x), p.hi)) return {false, *x, succ(*x)};
  }
  for (std::size_t i = 0; i + 1 < ps.size(); ++i) {
    Ordinal sup = detail::piece_sup(ps[i]);
    const Ordinal& next_lo = ps[i + 1].lo;
    Ordinal vnext = eval(f, next_lo);
    if (sup <= vnext) continue;
    // find a concrete argument in piece i whose value exceeds vnext
    Ordinal w = ps[i].lo;
    if (const auto* s = std::get_if<ShiftPiece>(&ps[i].expr))
      w = detail::omax(ps[i].lo, least_shift_preimage(s->offset, succ(vnext)));
    if (const auto* q = std::get_if<ParityPiece>(&ps[i].expr)) {
      std::optional<Ordinal> cand;
      if (q->even_value > vnext) cand = detail::first_with_parity(ps[i].lo, ps[i].hi, 0);
      if (q->odd_value > vnext)
        cand = detail::min_opt(std::move(cand), detail::first_with_parity(ps[i].lo, ps[i].hi, 1));
      w = *cand;
    }
    return {false, std::move(w), next_lo};
  }
  return {true, {}, {}};
}

struct InflationaryCheck {
  bool inflationary;
  Ordinal witness;  // least x with f(x) < x, when !inflationary
};

inline InflationaryCheck is_inflationary(const PiecewiseFn& f) {
  for (const auto& p : f.pieces()) {
    if (std::holds_alternative<ShiftPiece>(p.expr)) continue;
    if (const auto* c = std::get_if<ConstPiece>(&p.expr)) {
      Ordinal w = detail::omax(p.lo, succ(c->value));
      if (bound_lt(w, p.hi)) return {false, std::move(w)};
      continue;
    }
    const auto& q = std::get<ParityPiece>(p.expr);
    std::optional<Ordinal> cand;
    for (int r = 0; r < 2; ++r) {
      const Ordinal& v = r == 0 ? q.even_value : q.odd_value;
      if (!is_finite(v)) continue;  // an infinite value dominates every finite argument
      Nat n = finite_value(v) + 1;
      if (n % 2 != r) ++n;
      Ordinal w0{n};
      cand = detail::min_opt(std::move(cand),
                             detail::first_with_parity(detail::omax(p.lo, w0), p.hi, r));
    }
    if (cand) return {false, std::move(*cand)};
  }
  return {true, {}};
}

inline PiecewiseFn builtin(const std::string& name) {
  const Ordinal W = omega();
  if (name == "id" || name == "f0") return PiecewiseFn::shift(Ordinal());
  if (name == "succ") return PiecewiseFn::shift(Ordinal(1ULL));
  if (name == "f1") return PiecewiseFn::constant(Ordinal(2ULL));
  if (name == "parity")
    return PiecewiseFn::make({Piece{Ordinal(), Bound::at(W), ParityPiece{1, 0}},
                              Piece{W, Bound::top(), ConstPiece{Ordinal()}}});
  if (name == "staircase")
    return PiecewiseFn::make({Piece{Ordinal(), Bound::at(W), ShiftPiece{Ordinal(1ULL)}},
                              Piece{W, Bound::at(add(W, 2)), ConstPiece{W}},
                              Piece{add(W, 2), Bound::top(), ConstPiece{succ(W)}}});
  if (name == "gmax")
    return PiecewiseFn::make({Piece{Ordinal(), Bound::at(Ordinal(2ULL)), ConstPiece{Ordinal(2ULL)}},
                              Piece{Ordinal(2ULL), Bound::top(), ShiftPiece{Ordinal()}}});
  if (name == "hmin")
    return PiecewiseFn::make({Piece{Ordinal(), Bound::at(Ordinal(2ULL)), ShiftPiece{Ordinal()}},
                              Piece{Ordinal(2ULL), Bound::top(), ConstPiece{Ordinal(2ULL)}}});
  if (name.size() > 7 && name.rfind("const(", 0) == 0 && name.back() == ')')
    return PiecewiseFn::constant(parse_ordinal(std::string_view(name).substr(6, name.size() - 7)));
  if (name.size() > 7 && name.rfind("shift(", 0) == 0 && name.back() == ')')
    return PiecewiseFn::shift(parse_ordinal(std::string_view(name).substr(6, name.size() - 7)));
  throw UnknownBuiltin(name);
}

// fn ::= builtin-name | "const(" ord ")" | "shift(" ord ")" | "pw{" piece (";" piece)* "}"
// piece ::= "[" ord "," (ord | "inf") "):" ("const(" ord ")" | "x+" ord | "parity(" ord "," ord ")")
inline PiecewiseFn parse_fn_at(std::string_view s, std::size_t& pos) {
  auto fail = [&](const std::string& msg) -> void { throw SyntaxError(msg, pos); };
  auto eat = [&](std::string_view lit) {
    if (s.substr(pos, lit.size()) != lit) return false;
    pos += lit.size();
    return true;
  };
  auto expect = [&](char c) {
    if (pos >= s.size() || s[pos] != c) fail(std::string("expected '") + c + "'");
    ++pos;
  };
  if (eat("pw{")) {
    std::vector<Piece> pieces;
    while (true) {
      expect('[');
      Ordinal lo = parse_ordinal_at(s, pos);
      expect(',');
      Bound hi = Bound::top();
      if (!eat("inf")) hi = Bound::at(parse_ordinal_at(s, pos));
      expect(')');
      expect(':');
      PieceExpr e;
      if (eat("const(")) {
        e = ConstPiece{parse_ordinal_at(s, pos)};
        expect(')');
      } else if (eat("x+")) {
        e = ShiftPiece{parse_ordinal_at(s, pos)};
      } else if (eat("parity(")) {
        Ordinal ev = parse_ordinal_at(s, pos);
        expect(',');
        Ordinal ov = parse_ordinal_at(s, pos);
        expect(')');
        e = ParityPiece{std::move(ev), std::move(ov)};
      } else {
        fail("expected piece expression (const, x+, parity)");
      }
      pieces.push_back(Piece{std::move(lo), std::move(hi), std::move(e)});
      if (eat(";")) continue;
      expect('}');
      break;
    }
    return PiecewiseFn::make(std::move(pieces));
  }
  const std::size_t start = pos;
  while (pos < s.size() && ((s[pos] >= 'a' && s[pos] <= 'z') || (s[pos] >= '0' && s[pos] <= '9')))
    ++pos;
  std::string name(s.substr(start, pos - start));
  if (name.empty()) fail("expected function");
  if (name == "const" || name == "shift") {
    expect('(');
    Ordinal v = parse_ordinal_at(s, pos);
    expect(')');
    return name == "const" ? PiecewiseFn::constant(std::move(v))
                           : PiecewiseFn::shift(std::move(v));
  }
  try {
    return builtin(name);
  } catch (const UnknownBuiltin&) {
    pos = start;
    fail("unknown function name: " + name);
    throw;  // unreachable
  }
}

inline PiecewiseFn parse_fn(std::string_view s) {
  std::size_t pos = 0;
  PiecewiseFn f = parse_fn_at(s, pos);
  if (pos != s.size()) throw SyntaxError("trailing characters", pos);
  return f;
}

inline std::string format(const PieceExpr& e) {
  if (const auto* c = std::get_if<ConstPiece>(&e)) return "const(" + format(c->value) + ")";
  if (const auto* sh = std::get_if<ShiftPiece>(&e)) return "x+" + format(sh->offset);
  const auto& p = std::get<ParityPiece>(e);
  return "parity(" + format(p.even_value) + "," + format(p.odd_value) + ")";
}

inline std::string format(const PiecewiseFn& f) {
  const auto& ps = f.pieces();
  if (ps.size() == 1) {
    if (const auto* c = std::get_if<ConstPiece>(&ps[0].expr))
      return "const(" + format(c->value) + ")";
    if (const auto* sh = std::get_if<ShiftPiece>(&ps[0].expr))
      return "shift(" + format(sh->offset) + ")";
  }
  std::string out = "pw{";
  for (std::size_t i = 0; i < ps.size(); ++i) {
    if (i) out += ';';
    out += '[' + format(ps[i].lo) + ',' +
           (ps[i].hi.is_top ? std::string("inf") : format(ps[i].hi.value)) + "):";
    out += format(ps[i].expr);
  }
  out += '}';
  return out;
}

}  // namespace orditer
