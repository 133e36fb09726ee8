#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cassert>
#include <cstddef>
#include <ostream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "orditer/errors.hpp"

namespace orditer {

using Nat = boost::multiprecision::cpp_int;

enum class Cmp { LT, EQ, GT };

// Ordinals below epsilon_0 in Cantor normal form: a sum of terms w^e * c with
// strictly decreasing exponents and coefficients >= 1.  Values are immutable.
class Ordinal {
 public:
  struct Term;

  Ordinal();
  Ordinal(unsigned long long n);  // naturals embed, implicit by design
  Ordinal(Nat n);                 // naturals embed, implicit by design

  // w^exponent * coefficient; a zero coefficient yields zero.
  static Ordinal single(const Ordinal& exponent, const Nat& coefficient);
  // Requires terms already in normal form (decreasing exponents, coeffs >= 1).
  static Ordinal from_terms(std::vector<Term> terms);

  const std::vector<Term>& terms() const;
  bool is_zero() const;

 private:
  std::vector<Term> terms_;
};

struct Ordinal::Term {
  Ordinal exponent;
  Nat coefficient;
};

inline Ordinal::Ordinal() = default;

inline Ordinal::Ordinal(unsigned long long n) {
  if (n != 0) terms_.push_back(Term{Ordinal(), Nat(n)});
}

inline Ordinal::Ordinal(Nat n) {
  if (n < 0) throw std::invalid_argument("ordinal from negative number");
  if (n != 0) terms_.push_back(Term{Ordinal(), std::move(n)});
}

inline Ordinal Ordinal::single(const Ordinal& exponent, const Nat& coefficient) {
  Ordinal r;
  if (coefficient > 0) r.terms_.push_back(Term{exponent, coefficient});
  return r;
}

inline const std::vector<Ordinal::Term>& Ordinal::terms() const { return terms_; }
inline bool Ordinal::is_zero() const { return terms_.empty(); }

inline Cmp compare(const Ordinal& a, const Ordinal& b) {
  const auto& ta = a.terms();
  const auto& tb = b.terms();
  const std::size_t n = ta.size() < tb.size() ? ta.size() : tb.size();
  for (std::size_t i = 0; i < n; ++i) {
    Cmp c = compare(ta[i].exponent, tb[i].exponent);
    if (c != Cmp::EQ) return c;
    if (ta[i].coefficient != tb[i].coefficient)
      return ta[i].coefficient < tb[i].coefficient ? Cmp::LT : Cmp::GT;
  }
  if (ta.size() != tb.size()) return ta.size() < tb.size() ? Cmp::LT : Cmp::GT;
  return Cmp::EQ;
}

inline Ordinal Ordinal::from_terms(std::vector<Term> terms) {
  for (std::size_t i = 0; i < terms.size(); ++i) {
    assert(terms[i].coefficient > 0);
    assert(i == 0 || compare(terms[i - 1].exponent, terms[i].exponent) == Cmp::GT);
  }
  Ordinal r;
  r.terms_ = std::move(terms);
  return r;
}

inline bool operator==(const Ordinal& a, const Ordinal& b) { return compare(a, b) == Cmp::EQ; }
inline bool operator!=(const Ordinal& a, const Ordinal& b) { return compare(a, b) != Cmp::EQ; }
inline bool operator<(const Ordinal& a, const Ordinal& b) { return compare(a, b) == Cmp::LT; }
inline bool operator>(const Ordinal& a, const Ordinal& b) { return compare(a, b) == Cmp::GT; }
inline bool operator<=(const Ordinal& a, const Ordinal& b) { return compare(a, b) != Cmp::GT; }
inline bool operator>=(const Ordinal& a, const Ordinal& b) { return compare(a, b) != Cmp::LT; }

inline bool is_finite(const Ordinal& a) {
  return a.is_zero() || (a.terms().size() == 1 && a.terms()[0].exponent.is_zero());
}

// Requires is_finite(a).
inline Nat finite_value(const Ordinal& a) {
  assert(is_finite(a));
  return a.is_zero() ? Nat(0) : a.terms()[0].coefficient;
}

inline Ordinal degree(const Ordinal& a) {
  return a.is_zero() ? Ordinal() : a.terms()[0].exponent;
}

inline Nat lead_coefficient(const Ordinal& a) {
  return a.is_zero() ? Nat(0) : a.terms()[0].coefficient;
}

inline Ordinal omega() { return Ordinal::single(Ordinal(1ULL), Nat(1)); }
inline Ordinal omega_pow(const Ordinal& e) { return Ordinal::single(e, Nat(1)); }

// Sum of a's terms with exponent strictly greater than g.
inline Ordinal restrict_above(const Ordinal& a, const Ordinal& g) {
  std::vector<Ordinal::Term> out;
  for (const auto& t : a.terms()) {
    if (compare(t.exponent, g) != Cmp::GT) break;
    out.push_back(t);
  }
  return Ordinal::from_terms(std::move(out));
}

// Sum of a's terms with exponent >= g.
inline Ordinal restrict_at_least(const Ordinal& a, const Ordinal& g) {
  std::vector<Ordinal::Term> out;
  for (const auto& t : a.terms()) {
    if (compare(t.exponent, g) == Cmp::LT) break;
    out.push_back(t);
  }
  return Ordinal::from_terms(std::move(out));
}

// Sum of a's terms with exponent strictly below g.
inline Ordinal restrict_below(const Ordinal& a, const Ordinal& g) {
  std::vector<Ordinal::Term> out;
  for (const auto& t : a.terms())
    if (compare(t.exponent, g) == Cmp::LT) out.push_back(t);
  return Ordinal::from_terms(std::move(out));
}

inline Nat coefficient_at(const Ordinal& a, const Ordinal& g) {
  for (const auto& t : a.terms())
    if (compare(t.exponent, g) == Cmp::EQ) return t.coefficient;
  return Nat(0);
}

inline Ordinal add(const Ordinal& a, const Ordinal& b) {
  if (b.is_zero()) return a;
  if (a.is_zero()) return b;
  const Ordinal& e = b.terms()[0].exponent;
  std::vector<Ordinal::Term> out;
  for (const auto& t : a.terms()) {
    if (compare(t.exponent, e) != Cmp::GT) break;
    out.push_back(t);
  }
  Nat c = b.terms()[0].coefficient;
  if (out.size() < a.terms().size() &&
      compare(a.terms()[out.size()].exponent, e) == Cmp::EQ)
    c += a.terms()[out.size()].coefficient;
  out.push_back(Ordinal::Term{e, std::move(c)});
  out.insert(out.end(), b.terms().begin() + 1, b.terms().end());
  return Ordinal::from_terms(std::move(out));
}

inline Ordinal succ(const Ordinal& a) { return add(a, Ordinal(1ULL)); }

inline Ordinal mul_finite(const Ordinal& a, const Nat& n) {
  if (a.is_zero() || n == 0) return Ordinal();
  std::vector<Ordinal::Term> out(a.terms().begin(), a.terms().end());
  out[0].coefficient *= n;
  return Ordinal::from_terms(std::move(out));
}

inline Ordinal mul(const Ordinal& a, const Ordinal& b) {
  if (a.is_zero() || b.is_zero()) return Ordinal();
  Ordinal acc;
  for (const auto& t : b.terms()) {
    // a * w^e = w^(deg(a) + e) for e >= 1; finite factors scale the lead term.
    Ordinal piece = t.exponent.is_zero()
                        ? mul_finite(a, t.coefficient)
                        : Ordinal::single(add(degree(a), t.exponent), t.coefficient);
    acc = add(acc, piece);
  }
  return acc;
}

// n^k on naturals, guarded against unreasonable materialization.
inline Nat nat_pow(const Nat& n, const Nat& k) {
  if (k > 1000000) throw std::overflow_error("finite exponent too large to materialize");
  return boost::multiprecision::pow(n, k.convert_to<unsigned>());
}

inline Ordinal pow(const Ordinal& a, const Ordinal& b) {
  if (b.is_zero()) return Ordinal(1ULL);
  if (a.is_zero()) return Ordinal();
  if (is_finite(a) && finite_value(a) == 1) return Ordinal(1ULL);
  const Nat k = coefficient_at(b, Ordinal());
  const Ordinal mu = restrict_above(b, Ordinal());
  if (is_finite(a)) {
    // n^(w^e * c): the exponent e steps down by one when finite.
    Ordinal expsum;
    for (const auto& t : mu.terms()) {
      Ordinal estar = is_finite(t.exponent) ? Ordinal(finite_value(t.exponent) - 1)
                                            : t.exponent;
      expsum = add(expsum, Ordinal::single(estar, t.coefficient));
    }
    Nat fin = nat_pow(finite_value(a), k);
    if (mu.is_zero()) return Ordinal(std::move(fin));
    return Ordinal::single(expsum, fin);
  }
  // Infinite base: a^mu collapses to an omega power over deg(a) * mu.
  if (k > 1000000) throw std::overflow_error("finite exponent too large to materialize");
  Ordinal res = mu.is_zero() ? Ordinal(1ULL) : omega_pow(mul(degree(a), mu));
  Ordinal base = a;
  Ordinal acc(1ULL);
  for (Nat kk = k; kk > 0; kk >>= 1) {
    if ((kk & 1) != 0) acc = mul(acc, base);
    if (kk > 1) base = mul(base, base);
  }
  return mul(res, acc);
}

enum class OrdKind { zero, successor, limit };

inline OrdKind classify(const Ordinal& a) {
  if (a.is_zero()) return OrdKind::zero;
  return a.terms().back().exponent.is_zero() ? OrdKind::successor : OrdKind::limit;
}

inline bool is_limit(const Ordinal& a) { return classify(a) == OrdKind::limit; }
inline bool is_successor(const Ordinal& a) { return classify(a) == OrdKind::successor; }

inline Ordinal pred(const Ordinal& a) {
  if (!is_successor(a)) throw std::invalid_argument("pred of non-successor");
  std::vector<Ordinal::Term> ts(a.terms().begin(), a.terms().end());
  if (--ts.back().coefficient == 0) ts.pop_back();
  return Ordinal::from_terms(std::move(ts));
}

// n-th element of the canonical increasing sequence converging to a limit.
inline Ordinal fundamental_seq(const Ordinal& lambda, const Nat& n) {
  if (!is_limit(lambda)) throw NotALimit();
  std::vector<Ordinal::Term> ts(lambda.terms().begin(), lambda.terms().end());
  Ordinal e = ts.back().exponent;  // e >= 1
  if (--ts.back().coefficient == 0) ts.pop_back();
  Ordinal delta = Ordinal::from_terms(std::move(ts));
  if (is_successor(e)) return add(delta, Ordinal::single(pred(e), n));
  return add(delta, omega_pow(fundamental_seq(e, n)));
}

// Least x with x + c >= t.  The satisfying set is upward closed since
// x |-> x + c is monotone, so a least element exists.
inline Ordinal least_shift_preimage(const Ordinal& c, const Ordinal& t) {
  if (compare(c, t) != Cmp::LT) return Ordinal();
  if (c.is_zero()) return t;
  const Ordinal g = degree(c);
  Ordinal t_hi = restrict_above(t, g);
  const Nat d = coefficient_at(t, g);
  const Ordinal t_rest = restrict_below(t, g);
  const Nat& cg = c.terms()[0].coefficient;
  const Ordinal c_rest = Ordinal::from_terms(
      std::vector<Ordinal::Term>(c.terms().begin() + 1, c.terms().end()));
  Nat m;
  if (cg > d)
    m = 0;
  else if (compare(c_rest, t_rest) != Cmp::LT)
    m = d - cg;
  else
    m = d - cg + 1;
  return add(t_hi, Ordinal::single(g, m));
}

// Exact sup over x < hi of x + d; hi == 0 (empty range) gives 0.
inline Ordinal sup_shift_image(const Ordinal& hi, const Ordinal& d) {
  if (hi.is_zero()) return Ordinal();
  if (d.is_zero()) return is_limit(hi) ? hi : pred(hi);
  const Ordinal g = degree(d);
  if (!restrict_below(hi, g).is_zero()) return add(restrict_at_least(hi, g), d);
  const Nat m = coefficient_at(hi, g);
  if (m > 0) return add(add(restrict_above(hi, g), Ordinal::single(g, m - 1)), d);
  return hi;  // every exponent of hi exceeds deg(d); the sup is not attained
}

namespace detail {

struct OrdTextParser {
  std::string_view s;
  std::size_t pos = 0;

  [[noreturn]] void fail(const std::string& msg) const { throw SyntaxError(msg, pos); }
  bool at_end() const { return pos >= s.size(); }
  char peek() const { return at_end() ? '\0' : s[pos]; }
  bool eat(char c) {
    if (peek() == c) {
      ++pos;
      return true;
    }
    return false;
  }
  void expect(char c) {
    if (!eat(c)) fail(std::string("expected '") + c + "'");
  }

  Nat nat() {
    const std::size_t start = pos;
    while (!at_end() && s[pos] >= '0' && s[pos] <= '9') ++pos;
    if (pos == start) fail("expected number");
    if (pos - start > 1 && s[start] == '0') {
      pos = start;
      fail("leading zero");
    }
    return Nat(std::string(s.substr(start, pos - start)));
  }

  Ordinal term() {
    if (eat('w')) {
      Ordinal e(1ULL);
      if (eat('^')) {
        if (eat('(')) {
          e = ord();
          expect(')');
        } else {
          e = Ordinal(nat());
        }
      }
      Nat c(1);
      if (eat('*')) {
        const std::size_t cpos = pos;
        c = nat();
        if (c == 0) {
          pos = cpos;
          fail("zero coefficient");
        }
      }
      return Ordinal::single(e, c);
    }
    return Ordinal(nat());
  }

  Ordinal ord() {
    const std::size_t tpos = pos;
    Ordinal acc = term();
    while (peek() == '+') {
      if (acc.is_zero()) {
        pos = tpos;
        fail("zero term in sum");
      }
      ++pos;
      const std::size_t upos = pos;
      Ordinal t = term();
      if (t.is_zero()) {
        pos = upos;
        fail("zero term in sum");
      }
      acc = add(acc, t);
    }
    return acc;
  }
};

}  // namespace detail

// Parses one ordinal starting at pos and advances pos past it.
inline Ordinal parse_ordinal_at(std::string_view s, std::size_t& pos) {
  detail::OrdTextParser p{s, pos};
  Ordinal r = p.ord();
  pos = p.pos;
  return r;
}

inline Ordinal parse_ordinal(std::string_view s) {
  std::size_t pos = 0;
  Ordinal r = parse_ordinal_at(s, pos);
  if (pos != s.size()) throw SyntaxError("trailing characters", pos);
  return r;
}

inline std::string format(const Ordinal& a) {
  if (a.is_zero()) return "0";
  std::string out;
  bool first = true;
  for (const auto& t : a.terms()) {
    if (!first) out += '+';
    first = false;
    if (t.exponent.is_zero()) {
      out += t.coefficient.str();
      continue;
    }
    out += 'w';
    if (!(is_finite(t.exponent) && finite_value(t.exponent) == 1)) {
      out += '^';
      if (is_finite(t.exponent)) {
        out += finite_value(t.exponent).str();
      } else {
        out += '(';
        out += format(t.exponent);
        out += ')';
      }
    }
    if (t.coefficient != 1) {
      out += '*';
      out += t.coefficient.str();
    }
  }
  return out;
}

inline std::ostream& operator<<(std::ostream& os, const Ordinal& a) {
  return os << format(a);
}

}  // namespace orditer
