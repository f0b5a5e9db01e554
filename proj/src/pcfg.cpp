// SPDX-License-Identifier: Apache-2.0
#include "paircal/pcfg.hpp"

#include "json.hpp"

#include <array>
#include <cmath>
#include <functional>
#include <mutex>
#include <set>
#include <sstream>
#include <tuple>
#include <unordered_map>

#include "paircal/error.hpp"

namespace paircal {

namespace {

std::string join_tags(const std::string& a, const std::string& b) {
  if (a.empty()) return b;
  if (b.empty()) return a;
  return a + "|" + b;
}

const char* const kDigitNames[10] = {"zero", "one", "two", "three", "four",
                                     "five", "six", "seven", "eight", "nine"};

}  // namespace

std::vector<std::string> tokenize(std::string_view sentence) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : sentence) {
    if (ch == ' ' || ch == '\t' || ch == '\n') {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

std::string join_tokens(std::span<const std::string> tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out.push_back(' ');
    out += tokens[i];
  }
  return out;
}

Pcfg::Pcfg(std::string start, std::map<std::string, std::vector<Production>> rules, bool renormalize)
    : start_(std::move(start)), rules_(std::move(rules)) {
  require(rules_.count(start_) == 1, ErrorCode::ConfigInvalid, "start symbol '" + start_ + "' has no rules");
  for (auto& [name, prods] : rules_) {
    require(!prods.empty(), ErrorCode::ConfigInvalid, "nonterminal '" + name + "' has no productions");
    double total = 0.0;
    for (const auto& p : prods) {
      require(!p.rhs.empty(), ErrorCode::ConfigInvalid, "empty production for '" + name + "'");
      require(p.weight > 0.0 && std::isfinite(p.weight), ErrorCode::ConfigInvalid, "weights must be positive");
      for (const auto& s : p.rhs) {
        if (s.terminal)
          require(!tokenize(s.text).empty(), ErrorCode::ConfigInvalid, "empty terminal in '" + name + "'");
        else
          require(rules_.count(s.text) == 1, ErrorCode::ConfigInvalid, "undefined nonterminal '" + s.text + "'");
      }
      total += p.weight;
    }
    if (std::abs(total - 1.0) > 1e-12) {
      require(renormalize, ErrorCode::ConfigInvalid,
              "weights of '" + name + "' sum to " + std::to_string(total) + ", not 1");
      for (auto& p : prods) p.weight /= total;
      renormalized_.push_back({name, total});
    }
  }
  // Reject cycles so the support stays finite.
  std::map<std::string, int> state;
  std::function<void(const std::string&)> visit = [&](const std::string& n) {
    int& s = state[n];
    require(s != 1, ErrorCode::ConfigInvalid, "grammar is recursive at '" + n + "'");
    if (s == 2) return;
    s = 1;
    for (const auto& p : rules_.at(n))
      for (const auto& sym : p.rhs)
        if (!sym.terminal) visit(sym.text);
    state[n] = 2;
  };
  visit(start_);
}

double Pcfg::inside_prob(std::span<const std::string> tokens) const {
  const std::size_t n = tokens.size();
  std::map<std::tuple<std::string, std::size_t, std::size_t>, double> memo;
  std::function<double(const std::string&, std::size_t, std::size_t)> inside;
  std::function<double(const std::vector<GrammarSymbol>&, std::size_t, std::size_t, std::size_t)> seq;

  seq = [&](const std::vector<GrammarSymbol>& rhs, std::size_t k, std::size_t i, std::size_t j) -> double {
    if (k == rhs.size()) return i == j ? 1.0 : 0.0;
    const auto& sym = rhs[k];
    if (sym.terminal) {
      const auto words = tokenize(sym.text);
      if (i + words.size() > j) return 0.0;
      for (std::size_t w = 0; w < words.size(); ++w)
        if (tokens[i + w] != words[w]) return 0.0;
      return seq(rhs, k + 1, i + words.size(), j);
    }
    double total = 0.0;
    for (std::size_t m = i + 1; m <= j; ++m) {
      const double left = inside(sym.text, i, m);
      if (left > 0.0) total += left * seq(rhs, k + 1, m, j);
    }
    return total;
  };
  inside = [&](const std::string& nt, std::size_t i, std::size_t j) -> double {
    const auto key = std::make_tuple(nt, i, j);
    if (auto it = memo.find(key); it != memo.end()) return it->second;
    double total = 0.0;
    for (const auto& p : rules_.at(nt)) total += p.weight * seq(p.rhs, 0, i, j);
    memo[key] = total;
    return total;
  };
  if (n == 0) return 0.0;
  return inside(start_, 0, n);
}

namespace {

struct Partial {
  std::vector<std::string> tokens;
  double prob = 1.0;
  std::string key;
};

std::vector<Partial> expand(const std::map<std::string, std::vector<Production>>& rules, const std::string& nt) {
  std::vector<Partial> out;
  for (const auto& p : rules.at(nt)) {
    std::vector<Partial> acc{{{}, p.weight, p.tag}};
    for (const auto& sym : p.rhs) {
      std::vector<Partial> next;
      if (sym.terminal) {
        const auto words = tokenize(sym.text);
        for (auto& a : acc) {
          a.tokens.insert(a.tokens.end(), words.begin(), words.end());
          next.push_back(std::move(a));
        }
      } else {
        const auto sub = expand(rules, sym.text);
        for (const auto& a : acc)
          for (const auto& s : sub) {
            Partial c = a;
            c.tokens.insert(c.tokens.end(), s.tokens.begin(), s.tokens.end());
            c.prob *= s.prob;
            c.key = join_tags(c.key, s.key);
            next.push_back(std::move(c));
          }
      }
      acc = std::move(next);
    }
    for (auto& a : acc) out.push_back(std::move(a));
  }
  return out;
}

}  // namespace

std::vector<SentenceInfo> Pcfg::enumerate() const {
  std::vector<SentenceInfo> out;
  std::unordered_map<std::string, std::size_t> index;
  for (auto& d : expand(rules_, start_)) {
    std::string text = join_tokens(d.tokens);
    if (auto it = index.find(text); it != index.end()) {
      auto& s = out[it->second];
      s.prob += d.prob;
      require(s.key == d.key, ErrorCode::ConfigInvalid, "sentence '" + text + "' has two semantic keys");
      continue;
    }
    index.emplace(text, out.size());
    out.push_back({std::move(text), std::move(d.tokens), d.prob, std::move(d.key)});
  }
  return out;
}

std::vector<std::string> Pcfg::sample(Rng& rng, std::string* key) const {
  std::vector<std::string> tokens;
  std::string k;
  std::function<void(const std::string&)> walk = [&](const std::string& nt) {
    const auto& prods = rules_.at(nt);
    double u = rng.uniform();
    const Production* chosen = &prods.back();
    for (const auto& p : prods) {
      if (u < p.weight) {
        chosen = &p;
        break;
      }
      u -= p.weight;
    }
    k = join_tags(k, chosen->tag);
    for (const auto& sym : chosen->rhs) {
      if (sym.terminal) {
        for (auto& w : tokenize(sym.text)) tokens.push_back(std::move(w));
      } else {
        walk(sym.text);
      }
    }
  };
  walk(start_);
  if (key) *key = k;
  return tokens;
}

std::string Pcfg::to_json() const {
  nlohmann::ordered_json j;
  j["start"] = start_;
  nlohmann::ordered_json rules = nlohmann::ordered_json::object();
  for (const auto& [name, prods] : rules_) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& p : prods) {
      nlohmann::ordered_json rhs = nlohmann::ordered_json::array();
      for (const auto& s : p.rhs) rhs.push_back({{s.terminal ? "word" : "nonterminal", s.text}});
      nlohmann::ordered_json prod{{"rhs", rhs}, {"weight", p.weight}};
      if (!p.tag.empty()) prod["tag"] = p.tag;
      arr.push_back(prod);
    }
    rules[name] = arr;
  }
  j["rules"] = rules;
  nlohmann::ordered_json ren = nlohmann::ordered_json::array();
  for (const auto& r : renormalized_) ren.push_back({{"nonterminal", r.nonterminal}, {"original_sum", r.original_sum}});
  j["renormalized"] = ren;
  return j.dump(2);
}

int spell_length(int digit) {
  require(digit >= 0 && digit <= 9, ErrorCode::InvalidArgument, "digit must be 0..9");
  return static_cast<int>(std::string(kDigitNames[digit]).size());
}

Pcfg digit_grammar(int digit) {
  require(digit >= 0 && digit <= 9, ErrorCode::InvalidArgument, "digit must be 0..9");
  using S = GrammarSymbol;
  const std::string name = kDigitNames[digit];
  std::string spelled;
  for (char c : name) {
    if (!spelled.empty()) spelled.push_back(' ');
    spelled.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  }
  const std::string d = std::to_string(digit);
  const std::string parity = digit % 2 == 0 ? "even" : "odd";

  std::map<std::string, std::vector<Production>> r;
  r["STATEMENT"] = {{{S::nonterminal("INTRO"), S::nonterminal("VALUE")}, 0.99, ""},
                    {{S::word("Reply hazy, try again")}, 0.01, "hazy"}};
  r["INTRO"] = {{{S::word("It's")}, 0.138, ""},         {{S::word("It is")}, 0.086, ""},
                {{S::word("That's")}, 0.218, ""},       {{S::word("That is")}, 0.185, ""},
                {{S::word("Sure, it's")}, 0.096, ""},   {{S::word("Sure, it is")}, 0.02, ""},
                {{S::word("Sure, that's")}, 0.17, ""},  {{S::word("Sure, that is")}, 0.087, ""}};
  // As printed these weights sum to 1.78; the constructor renormalizes them.
  r["VALUE"] = {{{S::nonterminal("SAY-DIGIT")}, 0.56, "value:" + d},
                {{S::word("an"), S::nonterminal("EVEN-ODD"), S::word("number")}, 0.19, "parity:" + parity},
                {{S::word("spelled"), S::nonterminal("SPELL")}, 0.13, "spell:" + d},
                {{S::word("spelled with"), S::nonterminal("SPELL-LENGTH"), S::word("letters")}, 0.9,
                 "length:" + std::to_string(spell_length(digit))}};
  r["SAY-DIGIT"] = {{{S::nonterminal("DIGIT")}, 0.616, ""},
                    {{S::word("the number"), S::nonterminal("DIGIT")}, 0.384, ""}};
  r["DIGIT"] = {{{S::nonterminal("DIGIT-NAME")}, 0.323, ""}, {{S::nonterminal("DIGIT-VAL")}, 0.677, ""}};
  r["DIGIT-NAME"] = {{{S::word(name)}, 1.0, ""}};
  r["DIGIT-VAL"] = {{{S::word(d)}, 1.0, ""}};
  r["EVEN-ODD"] = {{{S::word(parity)}, 1.0, ""}};
  r["SPELL"] = {{{S::word(spelled)}, 1.0, ""}};
  r["SPELL-LENGTH"] = {{{S::word(std::to_string(spell_length(digit)))}, 1.0, ""}};
  return Pcfg("STATEMENT", std::move(r), /*renormalize=*/true);
}

namespace {

struct GrammarCache {
  std::array<Pcfg, 10> grammars;
  std::array<std::vector<SentenceInfo>, 10> supports;
  std::unordered_map<std::string, std::string> keys;

  static Pcfg make(int d) { return digit_grammar(d); }
  GrammarCache()
      : grammars{make(0), make(1), make(2), make(3), make(4), make(5), make(6), make(7), make(8), make(9)} {
    for (int d = 0; d < 10; ++d) {
      supports[static_cast<std::size_t>(d)] = grammars[static_cast<std::size_t>(d)].enumerate();
      for (const auto& s : supports[static_cast<std::size_t>(d)]) {
        auto [it, inserted] = keys.emplace(s.text, s.key);
        require(inserted || it->second == s.key, ErrorCode::ConfigInvalid, "inconsistent semantic keys");
      }
    }
  }
};

const GrammarCache& cache() {
  static const GrammarCache c;
  return c;
}

}  // namespace

double pcfg_inside_prob(int digit, std::span<const std::string> tokens) {
  require(digit >= 0 && digit <= 9, ErrorCode::InvalidArgument, "digit must be 0..9");
  return cache().grammars[static_cast<std::size_t>(digit)].inside_prob(tokens);
}

const std::vector<SentenceInfo>& pcfg_enumerate_support(int digit) {
  require(digit >= 0 && digit <= 9, ErrorCode::InvalidArgument, "digit must be 0..9");
  return cache().supports[static_cast<std::size_t>(digit)];
}

std::string semantic_key(const std::string& sentence) {
  const auto& keys = cache().keys;
  if (auto it = keys.find(sentence); it != keys.end()) return it->second;
  return {};
}

}  // namespace paircal
