// SPDX-License-Identifier: Apache-2.0
#include "doctest.h"

#include <cmath>
#include <map>
#include <set>

#include "oracles.hpp"
#include "paircal/pcfg.hpp"
#include "support.hpp"

using namespace paircal;
using testing::error_of;

namespace {

double prob(int digit, const std::string& sentence) {
  const auto t = tokenize(sentence);
  return pcfg_inside_prob(digit, t);
}

}  // namespace

TEST_CASE("grammar probabilities") {
  for (int d = 0; d < 10; ++d) CHECK(std::abs(prob(d, "Reply hazy, try again") - 0.01) < 1e-15);

  // Product of rule weights; the VALUE rule is rescaled by its printed total 1.78.
  const double its7 = 0.99 * 0.138 * (0.56 / 1.78) * 0.616 * 0.677;
  CHECK(std::abs(prob(7, "It's 7") - its7) < 1e-15);
  CHECK(std::abs(its7 * 1.78 - 0.03191) < 5e-6);

  CHECK(prob(7, "That's an even number") == 0.0);
  CHECK(prob(7, "That's an odd number") > 0.0);
  CHECK(prob(3, "It's 7") == 0.0);
  CHECK(prob(3, "It's spelled T H R E E") > 0.0);
  CHECK(prob(3, "It is spelled with 5 letters") > 0.0);
  CHECK(prob(3, "It is spelled with 4 letters") == 0.0);
  CHECK(prob(3, "Banana") == 0.0);
}

TEST_CASE("VALUE weights are renormalized and recorded") {
  const auto g = digit_grammar(4);
  REQUIRE(g.renormalized().size() == 1);
  CHECK(g.renormalized()[0].nonterminal == "VALUE");
  CHECK(std::abs(g.renormalized()[0].original_sum - 1.78) < 1e-12);
  for (const auto& [name, prods] : g.rules()) {
    double s = 0.0;
    for (const auto& p : prods) s += p.weight;
    CHECK(std::abs(s - 1.0) <= 1e-12);
  }
}

TEST_CASE("support enumeration") {
  std::size_t size0 = pcfg_enumerate_support(0).size();
  CHECK(size0 == 57);
  for (int d = 0; d < 10; ++d) {
    const auto& support = pcfg_enumerate_support(d);
    CHECK(support.size() == size0);
    double total = 0.0;
    std::set<std::string> texts;
    for (const auto& s : support) {
      total += s.prob;
      texts.insert(s.text);
      REQUIRE(std::abs(s.prob - pcfg_inside_prob(d, s.tokens)) <= 1e-12);
      CHECK(s.prob > 0.0);
      CHECK(semantic_key(s.text) == s.key);
    }
    CHECK(std::abs(total - 1.0) <= 1e-12);
    CHECK(texts.size() == support.size());
  }
}

TEST_CASE("semantic equivalence") {
  CHECK(semantic_key("Sure, it's the number 3") == semantic_key("That is three"));
  CHECK(semantic_key("It's 3") == semantic_key("That's the number three"));
  CHECK(semantic_key("It's spelled T H R E E") != semantic_key("It's 3"));
  CHECK(semantic_key("It's an odd number") == semantic_key("That is an odd number"));
  CHECK(semantic_key("It's an odd number") != semantic_key("It's an even number"));
  CHECK(semantic_key("Reply hazy, try again") == "hazy");
  CHECK(semantic_key("It's 12") == "");
}

TEST_CASE("sampling follows the grammar") {
  const auto g = digit_grammar(5);
  const auto& support = pcfg_enumerate_support(5);
  std::map<std::string, double> freq;
  Rng rng(3);
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    std::string key;
    const auto toks = g.sample(rng, &key);
    const auto text = join_tokens(toks);
    CHECK(key == semantic_key(text));
    freq[text] += 1.0;
  }
  for (const auto& s : support) {
    const double f = freq[s.text] / n;
    CHECK(std::abs(f - s.prob) <= 4.5 * oracle::sigma(s.prob, n) + 1e-9);
  }
  CHECK(freq.size() <= support.size());
}

TEST_CASE("tokenize and join") {
  const auto t = tokenize("  Sure, it's   the number 3 ");
  REQUIRE(t.size() == 5);
  CHECK(t[0] == "Sure,");
  CHECK(join_tokens(t) == "Sure, it's the number 3");
}

TEST_CASE("grammar validation") {
  using S = GrammarSymbol;
  std::map<std::string, std::vector<Production>> undefined{{"A", {{{S::nonterminal("B")}, 1.0, ""}}}};
  CHECK(error_of([&] { Pcfg("A", undefined); }) == ErrorCode::ConfigInvalid);
  std::map<std::string, std::vector<Production>> cyc{{"A", {{{S::nonterminal("B")}, 1.0, ""}}},
                                                     {"B", {{{S::nonterminal("A")}, 1.0, ""}}}};
  CHECK(error_of([&] { Pcfg("A", cyc); }) == ErrorCode::ConfigInvalid);
  std::map<std::string, std::vector<Production>> unnorm{{"A", {{{S::word("x")}, 0.5, ""}, {{S::word("y")}, 0.4, ""}}}};
  CHECK(error_of([&] { Pcfg("A", unnorm); }) == ErrorCode::ConfigInvalid);
  const Pcfg fixed("A", unnorm, true);
  const std::vector<std::string> x{"x"};
  CHECK(std::abs(fixed.inside_prob(x) - 0.5 / 0.9) < 1e-15);

  // Ambiguous derivations of the same text are summed.
  std::map<std::string, std::vector<Production>> amb{
      {"A", {{{S::word("a b")}, 0.3, ""}, {{S::word("a"), S::nonterminal("B")}, 0.7, ""}}},
      {"B", {{{S::word("b")}, 0.5, ""}, {{S::word("c")}, 0.5, ""}}}};
  const Pcfg g("A", amb);
  const std::vector<std::string> ab{"a", "b"};
  CHECK(std::abs(g.inside_prob(ab) - 0.65) < 1e-15);
  CHECK(g.enumerate().size() == 2);
  CHECK_FALSE(g.to_json().empty());
}
