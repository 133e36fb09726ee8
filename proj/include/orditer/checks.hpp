#pragma once

#include <cstddef>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "orditer/iteration.hpp"

namespace orditer {

enum class Verdict { Pass, Fail, Inconclusive };

struct CheckReport {
  std::string name;
  std::string operands;
  std::size_t samples = 0;
  Verdict verdict = Verdict::Inconclusive;
  Ordinal lhs, rhs;            // witness pair on Fail, last evaluated pair on Pass
  Certainty cert = Certainty::exact();
  std::string note;            // failure witness or inconclusive reason
};

inline std::string render_certainty(const Certainty& c) {
  if (c.verified) return "verified";
  return "fitted:" + std::to_string(c.horizon);
}

inline std::string render_check_line(const CheckReport& r) {
  std::ostringstream os;
  os << "CHECK " << r.name << ' ';
  switch (r.verdict) {
    case Verdict::Pass: os << "PASS"; break;
    case Verdict::Fail: os << "FAIL"; break;
    case Verdict::Inconclusive: os << "INCONCLUSIVE"; break;
  }
  os << " lhs=" << format(r.lhs) << " rhs=" << format(r.rhs)
     << " certainty=" << render_certainty(r.cert);
  if (!r.note.empty()) os << ' ' << r.note;
  return os.str();
}

namespace detail {

inline std::string render_operands(const PiecewiseFn& f, const Ordinal& gamma,
                                   const Ordinal& alpha) {
  return "f=" + format(f) + " gamma=" + format(gamma) + " alpha=" + format(alpha);
}

template <typename Fn>
inline CheckReport run_identity(const std::string& name, const PiecewiseFn& f,
                                const Ordinal& gamma, const Ordinal& alpha,
                                const std::vector<Ordinal>& xs, Fn&& one_case) {
  CheckReport r;
  r.name = name;
  r.operands = render_operands(f, gamma, alpha);
  r.samples = xs.size();
  try {
    for (const Ordinal& x : xs) {
      auto [lhs, rhs, cert] = one_case(x);
      r.cert = meet(r.cert, cert);
      r.lhs = lhs;
      r.rhs = rhs;
      if (lhs != rhs) {
        r.verdict = Verdict::Fail;
        r.note = "witness=" + format(x);
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

}  // namespace detail

struct IdentityCase {
  Ordinal lhs, rhs;
  Certainty cert;
};

// Splitting the index: iterating alpha more steps after gamma steps must land
// where iterating gamma+alpha lands.
inline CheckReport check_addition(EngineContext& ctx, const PiecewiseFn& f, const Ordinal& gamma,
                                  const Ordinal& alpha, const std::vector<Ordinal>& xs) {
  return detail::run_identity("add", f, gamma, alpha, xs, [&](const Ordinal& x) {
    IterResult inner = iter1_at(ctx, gamma, f, x);
    IterResult lhs = iter1_at(ctx, alpha, f, inner.value);
    IterResult rhs = iter1_at(ctx, add(gamma, alpha), f, x);
    return IdentityCase{lhs.value, rhs.value, meet(meet(inner.cert, lhs.cert), rhs.cert)};
  });
}

// Iterating the gamma-fold iterate alpha times against iterating gamma*alpha
// times. Fails in general; the parity counterexample pins the gap.
inline CheckReport check_multiplication(EngineContext& ctx, const PiecewiseFn& f,
                                        const Ordinal& gamma, const Ordinal& alpha,
                                        const std::vector<Ordinal>& xs) {
  CheckReport r;
  r.name = "mul";
  r.operands = detail::render_operands(f, gamma, alpha);
  r.samples = xs.size();
  try {
    PiecewiseFn g = iter1_fn(ctx, gamma, f);
    return detail::run_identity("mul", f, gamma, alpha, xs, [&](const Ordinal& x) {
      IterResult lhs = iter1_at(ctx, alpha, g, x);
      IterResult rhs = iter1_at(ctx, mul(gamma, alpha), f, x);
      return IdentityCase{lhs.value, rhs.value, meet(lhs.cert, rhs.cert)};
    });
  } catch (const NonComputable& e) {
    r.verdict = Verdict::Inconclusive;
    r.note = std::string("reason=") + e.what();
  } catch (const FragmentOverflow& e) {
    r.verdict = Verdict::Inconclusive;
    r.note = std::string("reason=") + e.what();
  }
  return r;
}

// Iterating the iteration functional itself against the power index.
inline CheckReport check_exponentiation(EngineContext& ctx, const PiecewiseFn& f,
                                        const Ordinal& gamma, const Ordinal& alpha,
                                        const std::vector<Ordinal>& xs) {
  CheckReport r;
  r.name = "exp";
  r.operands = detail::render_operands(f, gamma, alpha);
  r.samples = xs.size();
  try {
    F2 F = make_iter_functional(gamma);
    std::vector<IterResult> lhs = iter2_eval_many(ctx, alpha, *F, f, xs);
    Ordinal idx = pow(gamma, alpha);
    for (std::size_t i = 0; i < xs.size(); ++i) {
      IterResult rhs = iter1_at(ctx, idx, f, xs[i]);
      r.cert = meet(r.cert, lhs[i].cert);  // the left side carries the certainty
      r.lhs = lhs[i].value;
      r.rhs = rhs.value;
      if (lhs[i].value != rhs.value) {
        r.verdict = Verdict::Fail;
        r.note = "witness=" + format(xs[i]);
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

// ---------------------------------------------------------------------------
// Canned scenarios with published outcomes.

inline CheckReport reproduce(EngineContext& ctx, const std::string& name) {
  CheckReport r;
  r.name = name;
  try {
    if (name == "parity") {
      PiecewiseFn f = builtin("parity");
      PiecewiseFn g = iter1_fn(ctx, Ordinal(2ULL), f);
      IterResult a = iter1_at(ctx, omega(), g, Ordinal());
      IterResult b = iter1_at(ctx, mul(Ordinal(2ULL), omega()), f, Ordinal());
      IterResult c = iter1_at(ctx, omega(), f, Ordinal());
      r.operands = "f=parity";
      r.samples = 3;
      r.lhs = a.value;
      r.rhs = b.value;
      r.cert = meet(meet(a.cert, b.cert), c.cert);
      bool ok = a.value == Ordinal() && b.value == Ordinal(1ULL) && c.value == Ordinal(1ULL) &&
                a.value != b.value;
      r.verdict = ok ? Verdict::Pass : Verdict::Fail;
      return r;
    }
    if (name == "phi") {
      F2 phi = make_phi();
      F2 psi = make_psi();
      PiecewiseFn f0 = builtin("f0"), f1 = builtin("f1"), g = builtin("gmax");
      bool fix0 = equal_ext(apply2(ctx, *psi, f0), f0);
      bool fix1 = equal_ext(apply2(ctx, *psi, f1), f1);
      PiecewiseFn wpsi = iter2_fn(ctx, omega(), *psi, f0);
      PiecewiseFn wphi = iter2_fn(ctx, omega(), *phi, f0);
      bool psi_back = equal_ext(wpsi, f0);
      bool phi_join = equal_ext(wphi, g);
      bool differ = !equal_ext(wpsi, wphi);
      r.operands = "f=f0";
      r.samples = 5;
      r.lhs = eval(wphi, Ordinal());
      r.rhs = eval(wpsi, Ordinal());
      r.cert = Certainty::exact();
      r.verdict = (fix0 && fix1 && psi_back && phi_join && differ) ? Verdict::Pass : Verdict::Fail;
      return r;
    }
    if (name == "staircase") {
      PiecewiseFn f = builtin("staircase");
      PiecewiseFn lim = iter1_fn(ctx, omega(), f);
      bool is_const = equal_ext(lim, PiecewiseFn::constant(omega()));
      PointwiseCompare pc = compare_pointwise(lim, f);
      bool incomparable = pc.kind == PointwiseCompare::Kind::Incomparable;
      bool witnesses_ok = incomparable &&
                          eval(lim, pc.above_witness) > eval(f, pc.above_witness) &&
                          eval(lim, pc.below_witness) < eval(f, pc.below_witness);
      r.operands = "f=staircase";
      r.samples = 3;
      r.lhs = eval(lim, Ordinal());
      r.rhs = eval(f, Ordinal());
      r.cert = Certainty::exact();
      r.verdict = (is_const && incomparable && witnesses_ok) ? Verdict::Pass : Verdict::Fail;
      return r;
    }
    if (name == "sup_anomaly") {
      PiecewiseFn f = PiecewiseFn::constant(Ordinal());
      IterResult a = iter1_at(ctx, omega(), f, Ordinal(1ULL));
      CrossResult cr = cross_power(ctx, Ordinal(1ULL), f, Ordinal(1ULL));
      r.operands = "f=const(0)";
      r.samples = 2;
      r.lhs = a.value;
      r.rhs = cr.sup;
      r.cert = meet(a.cert, cr.cert);
      // The crossing's value drops below the supremum of the crossed stretch.
      bool ok = a.value == Ordinal() && cr.sup == Ordinal(1ULL);
      r.verdict = ok ? Verdict::Pass : Verdict::Fail;
      return r;
    }
  } catch (const NonComputable& e) {
    r.verdict = Verdict::Inconclusive;
    r.note = std::string("reason=") + e.what();
    return r;
  } catch (const FragmentOverflow& e) {
    r.verdict = Verdict::Inconclusive;
    r.note = std::string("reason=") + e.what();
    return r;
  }
  throw std::invalid_argument("unknown reproduction: " + name);
}

inline const std::vector<std::string>& reproduction_names() {
  static const std::vector<std::string> names{"parity", "phi", "staircase", "sup_anomaly"};
  return names;
}

// ---------------------------------------------------------------------------
// Check vector lines: [!]CHECK <add|mul|exp> f=<fn> gamma=<ord> alpha=<ord> x=<ord>

struct CheckVector {
  bool expect_fail = false;
  std::string kind;
  PiecewiseFn f = identity_fn();
  Ordinal gamma, alpha, x;
};

inline std::optional<CheckVector> parse_check_vector(const std::string& line) {
  std::string s;
  s.reserve(line.size());
  for (char ch : line)
    if (ch != '\r') s.push_back(ch);
  std::size_t at = s.find_first_not_of(" \t");
  if (at == std::string::npos) return std::nullopt;  // blank
  if (s[at] == '#') return std::nullopt;             // comment
  CheckVector v;
  if (s[at] == '!') {
    v.expect_fail = true;
    ++at;
  }
  auto expect = [&](const std::string& word) {
    if (s.compare(at, word.size(), word) != 0)
      throw SyntaxError("expected '" + word + "'", at);
    at += word.size();
  };
  expect("CHECK ");
  std::size_t sp = s.find(' ', at);
  if (sp == std::string::npos) throw SyntaxError("missing identity kind", at);
  v.kind = s.substr(at, sp - at);
  if (v.kind != "add" && v.kind != "mul" && v.kind != "exp")
    throw SyntaxError("unknown identity kind '" + v.kind + "'", at);
  at = sp + 1;
  expect("f=");
  v.f = parse_fn_at(s, at);
  expect(" gamma=");
  v.gamma = parse_ordinal_at(s, at);
  expect(" alpha=");
  v.alpha = parse_ordinal_at(s, at);
  expect(" x=");
  v.x = parse_ordinal_at(s, at);
  if (at != s.size()) throw SyntaxError("trailing input after vector", at);
  return v;
}

inline CheckReport run_check_vector(EngineContext& ctx, const CheckVector& v) {
  CheckReport r;
  if (v.kind == "add")
    r = check_addition(ctx, v.f, v.gamma, v.alpha, {v.x});
  else if (v.kind == "mul")
    r = check_multiplication(ctx, v.f, v.gamma, v.alpha, {v.x});
  else
    r = check_exponentiation(ctx, v.f, v.gamma, v.alpha, {v.x});
  if (v.expect_fail) {
    if (r.verdict == Verdict::Fail) {
      r.verdict = Verdict::Pass;
      r.note += (r.note.empty() ? "" : " ");
      r.note += "expected-fail=yes";
    } else if (r.verdict == Verdict::Pass) {
      r.verdict = Verdict::Fail;
      r.note = "expected-fail=missed";
    }
  }
  return r;
}

}  // namespace orditer
