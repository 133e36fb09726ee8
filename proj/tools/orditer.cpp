// Command line surface: evaluate one expression, replay a bundled scenario,
// or run a named check suite / external vector file. Output is plain text,
// one record per line, and byte-stable for a fixed seed and configuration.

#include <algorithm>
#include <cstddef>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "orditer/suites.hpp"

namespace {

using namespace orditer;

// Exit codes: 0 success, 1 a check failed, 2 usage or parse trouble,
// 3 the engine refused the input.
constexpr int kOk = 0;
constexpr int kCheckFailed = 1;
constexpr int kUsage = 2;
constexpr int kRefused = 3;

struct EvalOutcome {
  Ordinal value;
  Certainty cert;
};

void expect(std::string_view s, std::size_t& pos, char c) {
  if (pos >= s.size() || s[pos] != c)
    throw SyntaxError(std::string("expected '") + c + "'", pos);
  ++pos;
}

bool take_word(std::string_view s, std::size_t& pos, std::string_view word) {
  if (s.substr(pos, word.size()) != word) return false;
  pos += word.size();
  return true;
}

void check_index(const Ordinal& idx, const Ordinal& ceiling) {
  if (idx > ceiling)
    throw std::invalid_argument("iteration index " + format(idx) +
                                " exceeds the ceiling " + format(ceiling) +
                                " (raise --max-index)");
}

F2 parse_f2(std::string_view s, std::size_t& pos, const Ordinal& ceiling) {
  if (take_word(s, pos, "phi")) return make_phi();
  if (take_word(s, pos, "psi")) return make_psi();
  if (take_word(s, pos, "iter(")) {
    Ordinal a = parse_ordinal_at(s, pos);
    expect(s, pos, ')');
    check_index(a, ceiling);
    return make_iter_functional(std::move(a));
  }
  if (take_word(s, pos, "id")) return make_identity_functional();
  if (take_word(s, pos, "const(")) {
    PiecewiseFn g = parse_fn_at(s, pos);
    expect(s, pos, ')');
    return make_const_functional(std::move(g));
  }
  throw SyntaxError("expected a functional: phi, psi, id, iter(<ord>) or const(<fn>)", pos);
}

// Grammar, after every space is stripped:
//   iter(<ord>,<fn>,<ord>)            iterate the function, evaluate at a start
//   iter2(<ord>,<F2>,<fn>)@<ord>      iterate the functional, evaluate at a point
//   add|mul|pow(<ord>,<ord>)          ordinal arithmetic
//   limsup|liminf|lim(<seq>)          sequence limits
EvalOutcome eval_expression(EngineContext& ctx, const std::string& expr,
                            const Ordinal& ceiling) {
  std::string_view s(expr);
  std::size_t pos = 0;
  EvalOutcome out{Ordinal(), Certainty::exact()};

  if (take_word(s, pos, "iter2(")) {
    Ordinal alpha = parse_ordinal_at(s, pos);
    expect(s, pos, ',');
    F2 F = parse_f2(s, pos, ceiling);
    expect(s, pos, ',');
    PiecewiseFn f = parse_fn_at(s, pos);
    expect(s, pos, ')');
    expect(s, pos, '@');
    Ordinal x = parse_ordinal_at(s, pos);
    check_index(alpha, ceiling);
    if (pos != s.size()) throw SyntaxError("trailing input", pos);
    IterResult r = iter2_at(ctx, alpha, *F, f, x);
    return {std::move(r.value), r.cert};
  }
  if (take_word(s, pos, "iter(")) {
    Ordinal alpha = parse_ordinal_at(s, pos);
    expect(s, pos, ',');
    PiecewiseFn f = parse_fn_at(s, pos);
    expect(s, pos, ',');
    Ordinal x = parse_ordinal_at(s, pos);
    expect(s, pos, ')');
    check_index(alpha, ceiling);
    if (pos != s.size()) throw SyntaxError("trailing input", pos);
    IterResult r = iter1_at(ctx, alpha, f, x);
    return {std::move(r.value), r.cert};
  }
  for (const char* op : {"add", "mul", "pow"}) {
    std::size_t save = pos;
    if (!take_word(s, pos, op)) {
      pos = save;
      continue;
    }
    expect(s, pos, '(');
    Ordinal a = parse_ordinal_at(s, pos);
    expect(s, pos, ',');
    Ordinal b = parse_ordinal_at(s, pos);
    expect(s, pos, ')');
    if (pos != s.size()) throw SyntaxError("trailing input", pos);
    std::string_view o(op);
    out.value = o == "add" ? add(a, b) : o == "mul" ? mul(a, b) : pow(a, b);
    return out;
  }
  for (const char* op : {"limsup", "liminf", "lim"}) {
    std::size_t save = pos;
    if (!take_word(s, pos, op)) {
      pos = save;
      continue;
    }
    expect(s, pos, '(');
    OmegaSeq seq = parse_seq_at(s, pos);
    expect(s, pos, ')');
    if (pos != s.size()) throw SyntaxError("trailing input", pos);
    std::string_view o(op);
    out.value = o == "limsup" ? limsup(seq) : o == "liminf" ? liminf(seq) : lim(seq);
    return out;
  }
  throw SyntaxError("expected iter, iter2, add, mul, pow, limsup, liminf or lim", pos);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"exact transfinite iteration over ordinals in Cantor normal form"};
  app.require_subcommand(1);

  RunConfig rc;
  std::string max_index_text = "w^3";
  app.add_option("--horizon", rc.horizon, "orbit and milestone step budget (>= 8)")
      ->check(CLI::Range(8ULL, 1000000ULL))
      ->capture_default_str();
  app.add_option("--confirm", rc.confirm, "extra agreement demanded from fits (>= 4)")
      ->check(CLI::Range(4ULL, 1000000ULL))
      ->capture_default_str();
  app.add_option("--samples", rc.samples, "sampled cases per suite (>= 1)")
      ->check(CLI::Range(static_cast<std::size_t>(1), static_cast<std::size_t>(1000000)))
      ->capture_default_str();
  app.add_option("--seed", rc.seed, "deterministic seed for sampled suites")
      ->capture_default_str();
  app.add_option("--max-index", max_index_text, "ceiling on iteration indices")
      ->capture_default_str();

  std::string expr_text;
  CLI::App* cmd_eval = app.add_subcommand("eval", "evaluate one expression");
  cmd_eval->add_option("expr", expr_text, "expression, e.g. iter(w,parity,0)")->required();

  std::string repro_name;
  CLI::App* cmd_repro = app.add_subcommand("reproduce", "replay a bundled scenario");
  cmd_repro->add_option("name", repro_name, "scenario name or 'all'")->required();

  std::string suite_name;
  std::string vector_path;
  CLI::App* cmd_check = app.add_subcommand("check", "run a check suite or a vector file");
  cmd_check->add_option("suite", suite_name, "thm-mon, thm-hp, hp-props, ord-laws or seq-laws");
  cmd_check->add_option("--file", vector_path, "external vector file, one check per line");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    rc.max_index = parse_ordinal(max_index_text);
  } catch (const SyntaxError& e) {
    std::cerr << "orditer: --max-index: " << e.what() << "\n";
    return kUsage;
  }

  try {
    if (cmd_eval->parsed()) {
      std::string stripped = expr_text;
      stripped.erase(std::remove(stripped.begin(), stripped.end(), ' '), stripped.end());
      EngineContext ctx = make_context(rc);
      EvalOutcome r = eval_expression(ctx, stripped, rc.max_index);
      std::cout << "VALUE " << stripped << " = " << format(r.value)
                << " certainty=" << render_certainty(r.cert) << "\n";
      return kOk;
    }

    if (cmd_repro->parsed()) {
      EngineContext ctx = make_context(rc);
      std::vector<std::string> names;
      if (repro_name == "all")
        names = reproduction_names();
      else
        names.push_back(repro_name);
      bool all_pass = true;
      for (const std::string& n : names) {
        CheckReport r = reproduce(ctx, n);
        std::cout << render_check_line(r) << "\n";
        all_pass = all_pass && r.verdict == Verdict::Pass;
      }
      return all_pass ? kOk : kCheckFailed;
    }

    // check
    if (!vector_path.empty() && !suite_name.empty()) {
      std::cerr << "orditer: give either a suite name or --file, not both\n";
      return kUsage;
    }
    if (vector_path.empty() && suite_name.empty()) {
      std::cerr << "orditer: check needs a suite name or --file\n";
      return kUsage;
    }
    SuiteResult sr =
        vector_path.empty() ? run_suite(suite_name, rc) : run_vector_file(rc, vector_path);
    for (const std::string& line : sr.lines) std::cout << line << "\n";
    std::cout << sr.summary_line() << "\n";
    return sr.ok() ? kOk : kCheckFailed;
  } catch (const SyntaxError& e) {
    std::cerr << "orditer: parse: " << e.what() << "\n";
    return kUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "orditer: " << e.what() << "\n";
    return kUsage;
  } catch (const UnknownBuiltin& e) {
    std::cerr << "orditer: " << e.what() << "\n";
    return kUsage;
  } catch (const NotALimit& e) {
    std::cerr << "orditer: " << e.what() << "\n";
    return kRefused;
  } catch (const NoLimit& e) {
    std::cerr << "orditer: " << e.what() << "\n";
    return kRefused;
  } catch (const FragmentOverflow& e) {
    std::cerr << "orditer: " << e.what() << "\n";
    return kRefused;
  } catch (const NonComputable& e) {
    std::cerr << "orditer: " << e.what() << "\n";
    return kRefused;
  }
}
