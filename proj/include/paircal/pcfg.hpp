// SPDX-License-Identifier: Apache-2.0
//
// Finite, non-recursive probabilistic context-free grammars over word
// tokens, plus the digit-conditioned statement grammar used by the digits
// task.
#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "paircal/random.hpp"

namespace paircal {

struct GrammarSymbol {
  bool terminal = true;
  std::string text;  // terminal words (space separated) or a nonterminal name

  static GrammarSymbol word(std::string t) { return {true, std::move(t)}; }
  static GrammarSymbol nonterminal(std::string n) { return {false, std::move(n)}; }
};

struct Production {
  std::vector<GrammarSymbol> rhs;
  double weight = 1.0;
  std::string tag;  // contributes to the semantic key when non-empty
};

struct Renormalization {
  std::string nonterminal;
  double original_sum = 1.0;
};

/// One sentence in the support with its probability and semantic key.
struct SentenceInfo {
  std::string text;
  std::vector<std::string> tokens;
  double prob = 0.0;
  std::string key;
};

class Pcfg {
 public:
  /// Rules per nonterminal must sum to 1 within 1e-12 unless `renormalize`,
  /// in which case each offending nonterminal is rescaled and recorded.
  /// Throws ConfigInvalid for undefined symbols, empty productions or cycles.
  Pcfg(std::string start, std::map<std::string, std::vector<Production>> rules, bool renormalize = false);

  const std::string& start() const noexcept { return start_; }
  const std::map<std::string, std::vector<Production>>& rules() const noexcept { return rules_; }
  const std::vector<Renormalization>& renormalized() const noexcept { return renormalized_; }

  /// Total probability of all derivations of `tokens`; 0 if not derivable.
  double inside_prob(std::span<const std::string> tokens) const;

  /// Every sentence with positive probability (derivations of the same text
  /// are merged), in derivation order.
  std::vector<SentenceInfo> enumerate() const;

  /// Draws a sentence; `key` receives its semantic key when given.
  std::vector<std::string> sample(Rng& rng, std::string* key = nullptr) const;

  /// JSON text of the grammar for inspection.
  std::string to_json() const;

 private:
  std::string start_;
  std::map<std::string, std::vector<Production>> rules_;
  std::vector<Renormalization> renormalized_;
};

std::vector<std::string> tokenize(std::string_view sentence);
std::string join_tokens(std::span<const std::string> tokens);

/// Statement grammar for digit d; VALUE weights are renormalized.
Pcfg digit_grammar(int digit);

/// Letters in the English name of each digit.
int spell_length(int digit);

double pcfg_inside_prob(int digit, std::span<const std::string> tokens);

/// Cached support of digit_grammar(digit).
const std::vector<SentenceInfo>& pcfg_enumerate_support(int digit);

/// Semantic key of a sentence derivable under some digit; empty if the
/// sentence is malformed (not derivable under any digit).
std::string semantic_key(const std::string& sentence);

}  // namespace paircal
