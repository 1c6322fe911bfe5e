#pragma once

// Dynkin form of the Baker-Campbell-Hausdorff series, truncated at a given
// bracket weight. Coefficients are accumulated exactly and converted to
// double once.

#include <boost/rational.hpp>

#include <cstdint>
#include <map>
#include <vector>

namespace carnot::detail {

using Rational = boost::rational<std::int64_t>;

/// One right-nested bracket [a1,[a2,[...,[a_{m-1},a_m]]]] with letters
/// 0 = left factor U, 1 = right factor V.
struct BchWord {
  std::vector<std::uint8_t> letters;
  Rational coeff;
};

inline std::int64_t factorial(int k) {
  std::int64_t f = 1;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

/// All nonvanishing Dynkin words of weight <= max_weight with merged rational
/// coefficients:
///   log(e^U e^V) = sum_k (-1)^{k-1}/k sum_{r_i+s_i>0}
///       [U^{r_1} V^{s_1} ... U^{r_k} V^{s_k}] / (m * prod r_i! s_i!)
/// where m is the total weight and [..] is the right-nested bracket.
inline std::vector<BchWord> dynkin_words(int max_weight) {
  std::map<std::vector<std::uint8_t>, Rational> merged;

  // Depth-first over k and the pairs (r_i, s_i).
  std::vector<int> rs;  // flattened r_1, s_1, r_2, s_2, ...
  auto flush = [&](int k, int m) {
    std::vector<std::uint8_t> word;
    std::int64_t denom = m;
    for (int i = 0; i < k; ++i) {
      const int r = rs[2 * i], s = rs[2 * i + 1];
      word.insert(word.end(), static_cast<std::size_t>(r), std::uint8_t{0});
      word.insert(word.end(), static_cast<std::size_t>(s), std::uint8_t{1});
      denom *= factorial(r) * factorial(s);
    }
    if (word.size() >= 2 && word[word.size() - 1] == word[word.size() - 2]) return;
    Rational c(1, denom * k);
    if (k % 2 == 0) c = -c;
    merged[word] += c;
  };

  auto recurse = [&](auto&& self, int k, int m) -> void {
    if (k > 0) flush(k, m);
    for (int r = 0; m + r <= max_weight; ++r) {
      for (int s = 0; m + r + s <= max_weight; ++s) {
        if (r + s == 0) continue;
        rs.push_back(r);
        rs.push_back(s);
        self(self, k + 1, m + r + s);
        rs.pop_back();
        rs.pop_back();
      }
    }
  };
  recurse(recurse, 0, 0);

  std::vector<BchWord> out;
  for (auto& [word, c] : merged) {
    if (c.numerator() != 0) out.push_back({word, c});
  }
  return out;
}

/// Suffix trie over dynkin_words so shared inner brackets are evaluated once.
/// Nodes are stored parents-first; node j's value is
/// [letter_j, value(parent_j)] (or the bare letter at depth 1).
struct BchTrie {
  struct Node {
    int parent = -1;
    std::uint8_t letter = 0;
    double coeff = 0.0;
  };
  std::vector<Node> nodes;
};

inline BchTrie build_bch_trie(int max_weight) {
  BchTrie trie;
  std::map<std::pair<int, std::uint8_t>, int> child;
  for (const auto& w : dynkin_words(max_weight)) {
    int node = -1;
    for (auto it = w.letters.rbegin(); it != w.letters.rend(); ++it) {
      auto key = std::make_pair(node, *it);
      auto found = child.find(key);
      if (found == child.end()) {
        trie.nodes.push_back({node, *it, 0.0});
        const int id = static_cast<int>(trie.nodes.size()) - 1;
        child.emplace(key, id);
        node = id;
      } else {
        node = found->second;
      }
    }
    trie.nodes[static_cast<std::size_t>(node)].coeff =
        boost::rational_cast<double>(w.coeff);
  }
  return trie;
}

}  // namespace carnot::detail
