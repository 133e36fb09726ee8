#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "orditer/errors.hpp"
#include "orditer/ordinal.hpp"

namespace orditer {

struct NoLimit : std::runtime_error {
  Ordinal limsup_value;
  Ordinal liminf_value;
  NoLimit(Ordinal ls, Ordinal li)
      : std::runtime_error("sequence has no limit: limsup " + format(ls) +
                           ", liminf " + format(li)),
        limsup_value(std::move(ls)),
        liminf_value(std::move(li)) {}
};

struct Constant {
  Ordinal value;
};
struct Cycle {
  std::vector<Ordinal> values;  // nonempty
};
struct AffineStep {
  Ordinal base;
  Ordinal step;  // >= 1; entry head_len+n is base + step*n
};
using TailRule = std::variant<Constant, Cycle, AffineStep>;

// Minimal-period cycles; single-value cycles collapse to Constant.
inline TailRule normalize_tail(TailRule t) {
  if (auto* cy = std::get_if<Cycle>(&t)) {
    auto& v = cy->values;
    if (v.empty()) throw std::invalid_argument("cycle needs at least one value");
    for (std::size_t p = 1; p < v.size(); ++p) {
      if (v.size() % p != 0) continue;
      bool periodic = true;
      for (std::size_t i = p; i < v.size() && periodic; ++i) periodic = v[i] == v[i % p];
      if (periodic) {
        v.resize(p);
        break;
      }
    }
    if (v.size() == 1) return Constant{v[0]};
  } else if (auto* af = std::get_if<AffineStep>(&t)) {
    if (af->step.is_zero()) throw std::invalid_argument("affine step must be positive");
  }
  return t;
}

// An omega-indexed sequence of ordinals: finitely many explicit entries, then
// a tail rule that decides every later entry.
class OmegaSeq {
 public:
  OmegaSeq(std::vector<Ordinal> head, TailRule tail)
      : head_(std::move(head)), tail_(normalize_tail(std::move(tail))) {}

  const std::vector<Ordinal>& head() const { return head_; }
  const TailRule& tail() const { return tail_; }

 private:
  std::vector<Ordinal> head_;
  TailRule tail_;
};

inline Ordinal at(const OmegaSeq& s, const Nat& n) {
  if (n < s.head().size()) return s.head()[n.convert_to<std::size_t>()];
  const Nat k = n - s.head().size();
  if (const auto* c = std::get_if<Constant>(&s.tail())) return c->value;
  if (const auto* cy = std::get_if<Cycle>(&s.tail()))
    return cy->values[(k % cy->values.size()).convert_to<std::size_t>()];
  const auto& af = std::get<AffineStep>(s.tail());
  return add(af.base, mul_finite(af.step, k));
}

namespace detail {

inline Ordinal tail_sup(const TailRule& t) {
  if (const auto* c = std::get_if<Constant>(&t)) return c->value;
  if (const auto* cy = std::get_if<Cycle>(&t)) {
    Ordinal m = cy->values[0];
    for (const auto& v : cy->values)
      if (v > m) m = v;
    return m;
  }
  const auto& af = std::get<AffineStep>(t);
  return add(af.base, mul(af.step, omega()));
}

inline Ordinal tail_inf(const TailRule& t) {
  if (const auto* c = std::get_if<Constant>(&t)) return c->value;
  if (const auto* cy = std::get_if<Cycle>(&t)) {
    Ordinal m = cy->values[0];
    for (const auto& v : cy->values)
      if (v < m) m = v;
    return m;
  }
  const auto& af = std::get<AffineStep>(t);
  return add(af.base, mul(af.step, omega()));  // nondecreasing: liminf = sup
}

}  // namespace detail

// Head entries never matter: only tail behavior survives.
inline Ordinal limsup(const OmegaSeq& s) { return detail::tail_sup(s.tail()); }
inline Ordinal liminf(const OmegaSeq& s) { return detail::tail_inf(s.tail()); }

inline Ordinal lim(const OmegaSeq& s) {
  Ordinal ls = limsup(s);
  Ordinal li = liminf(s);
  if (ls != li) throw NoLimit(std::move(ls), std::move(li));
  return ls;
}

// Sup of all entries at indices >= m.
inline Ordinal sup_from(const OmegaSeq& s, std::size_t m) {
  Ordinal best = detail::tail_sup(s.tail());
  for (std::size_t i = m; i < s.head().size(); ++i)
    if (s.head()[i] > best) best = s.head()[i];
  return best;
}

inline Ordinal sup_all(const OmegaSeq& s) { return sup_from(s, 0); }

// Least m whose suffix sup already equals the limsup, with that value.
// Such m exists: from the head's end on, suffix sups equal the tail limsup.
inline std::pair<std::size_t, Ordinal> tail_witness(const OmegaSeq& s) {
  const Ordinal target = limsup(s);
  std::size_t m = 0;
  while (m < s.head().size() && sup_from(s, m) != target) ++m;
  return {m, target};
}

// Index selector n |-> offset + stride*n.
struct Selector {
  Nat offset;
  Nat stride;  // >= 1
  Selector(Nat a, Nat b) : offset(std::move(a)), stride(std::move(b)) {
    if (stride < 1) throw std::invalid_argument("selector stride must be positive");
  }
};

inline OmegaSeq subsequence(const OmegaSeq& s, const Selector& q) {
  const Nat h = s.head().size();
  std::vector<Ordinal> head;
  Nat hprime = 0;
  if (q.offset < h) hprime = (h - q.offset + q.stride - 1) / q.stride;
  for (Nat n = 0; n < hprime; ++n) head.push_back(at(s, q.offset + q.stride * n));
  const Nat k0 = q.offset + q.stride * hprime - h;
  if (const auto* c = std::get_if<Constant>(&s.tail()))
    return OmegaSeq(std::move(head), Constant{c->value});
  if (const auto* cy = std::get_if<Cycle>(&s.tail())) {
    const std::size_t p = cy->values.size();
    const std::size_t g = boost::multiprecision::gcd(q.stride, Nat(p)).convert_to<std::size_t>();
    const std::size_t pprime = p / g;
    std::vector<Ordinal> vals;
    for (std::size_t i = 0; i < pprime; ++i)
      vals.push_back(cy->values[((k0 + q.stride * i) % p).convert_to<std::size_t>()]);
    return OmegaSeq(std::move(head), Cycle{std::move(vals)});
  }
  const auto& af = std::get<AffineStep>(s.tail());
  return OmegaSeq(std::move(head),
                  AffineStep{add(af.base, mul_finite(af.step, k0)),
                             mul_finite(af.step, q.stride)});
}

// seq ::= "[" [ord ("," ord)*] "]" tail
// tail ::= "const(" ord ")" | "cycle(" ord ("," ord)* ")" | "affine(" ord ";" ord ")"
inline OmegaSeq parse_seq_at(std::string_view s, std::size_t& pos) {
  auto fail = [&](const std::string& msg) -> void { throw SyntaxError(msg, pos); };
  auto expect = [&](char c) {
    if (pos >= s.size() || s[pos] != c) fail(std::string("expected '") + c + "'");
    ++pos;
  };
  expect('[');
  std::vector<Ordinal> head;
  if (pos < s.size() && s[pos] != ']') {
    head.push_back(parse_ordinal_at(s, pos));
    while (pos < s.size() && s[pos] == ',') {
      ++pos;
      head.push_back(parse_ordinal_at(s, pos));
    }
  }
  expect(']');
  const std::size_t word_start = pos;
  while (pos < s.size() && s[pos] >= 'a' && s[pos] <= 'z') ++pos;
  const std::string_view word = s.substr(word_start, pos - word_start);
  if (word == "const") {
    expect('(');
    Ordinal v = parse_ordinal_at(s, pos);
    expect(')');
    return OmegaSeq(std::move(head), Constant{std::move(v)});
  }
  if (word == "cycle") {
    expect('(');
    std::vector<Ordinal> vals;
    vals.push_back(parse_ordinal_at(s, pos));
    while (pos < s.size() && s[pos] == ',') {
      ++pos;
      vals.push_back(parse_ordinal_at(s, pos));
    }
    expect(')');
    return OmegaSeq(std::move(head), Cycle{std::move(vals)});
  }
  if (word == "affine") {
    expect('(');
    Ordinal base = parse_ordinal_at(s, pos);
    expect(';');
    const std::size_t steppos = pos;
    Ordinal step = parse_ordinal_at(s, pos);
    if (step.is_zero()) throw SyntaxError("affine step must be positive", steppos);
    expect(')');
    return OmegaSeq(std::move(head), AffineStep{std::move(base), std::move(step)});
  }
  pos = word_start;
  fail("expected tail rule (const, cycle, affine)");
  throw std::logic_error("unreachable");
}

inline OmegaSeq parse_seq(std::string_view s) {
  std::size_t pos = 0;
  OmegaSeq r = parse_seq_at(s, pos);
  if (pos != s.size()) throw SyntaxError("trailing characters", pos);
  return r;
}

inline std::string format(const OmegaSeq& s) {
  std::string out = "[";
  for (std::size_t i = 0; i < s.head().size(); ++i) {
    if (i) out += ',';
    out += format(s.head()[i]);
  }
  out += ']';
  if (const auto* c = std::get_if<Constant>(&s.tail())) {
    out += "const(" + format(c->value) + ")";
  } else if (const auto* cy = std::get_if<Cycle>(&s.tail())) {
    out += "cycle(";
    for (std::size_t i = 0; i < cy->values.size(); ++i) {
      if (i) out += ',';
      out += format(cy->values[i]);
    }
    out += ')';
  } else {
    const auto& af = std::get<AffineStep>(s.tail());
    out += "affine(" + format(af.base) + ";" + format(af.step) + ")";
  }
  return out;
}

}  // namespace orditer
