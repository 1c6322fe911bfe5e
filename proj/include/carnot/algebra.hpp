#pragma once

// Stratified Lie algebras given by structure constants over a graded basis.

#include "carnot/detail/bch_words.hpp"
#include "carnot/errors.hpp"

#include <boost/container/small_vector.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <memory>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

namespace carnot {

/// Coordinate storage. Builtin groups have n <= 12 so this never allocates.
using Coords = boost::container::small_vector<double, 12>;

class StratifiedAlgebra;
using AlgebraPtr = std::shared_ptr<const StratifiedAlgebra>;

/// One nonzero structure constant: [e_a, e_b] has coefficient c on e_k.
struct BracketEntry {
  int a = 0;
  int b = 0;
  int k = 0;
  double c = 0.0;

  friend bool operator==(const BracketEntry&, const BracketEntry&) = default;
};

/// Dense form of one bracket table row as it appears in group-spec files.
struct BracketRecord {
  int a = 0;
  int b = 0;
  std::vector<double> coeffs;
};

class StratifiedAlgebra : public std::enable_shared_from_this<StratifiedAlgebra> {
 public:
  /// Builds an algebra from sparse structure constants. Only structural
  /// checks happen here (positive layer sizes, indices in range); the Lie
  /// axioms are checked by validate().
  static AlgebraPtr make(std::vector<int> layer_dims, std::vector<BracketEntry> entries,
                         std::string name = {}) {
    if (layer_dims.empty()) throw MalformedInput("layer_dims must be nonempty");
    for (int d : layer_dims) {
      if (d <= 0) throw MalformedInput("layer dimensions must be positive");
    }
    const int n = std::accumulate(layer_dims.begin(), layer_dims.end(), 0);
    for (const auto& e : entries) {
      if (e.a < 0 || e.a >= n || e.b < 0 || e.b >= n || e.k < 0 || e.k >= n) {
        throw MalformedInput("bracket entry index out of range");
      }
      if (!std::isfinite(e.c)) throw MalformedInput("bracket coefficient is not finite");
    }
    entries = canonicalize(std::move(entries));

    std::vector<AlgebraPtr> chain;
    const int s = static_cast<int>(layer_dims.size());
    for (int i = 1; i <= s; ++i) {
      std::vector<int> dims(layer_dims.begin(), layer_dims.begin() + i);
      const int ni = std::accumulate(dims.begin(), dims.end(), 0);
      std::vector<BracketEntry> kept;
      for (const auto& e : entries) {
        if (e.a < ni && e.b < ni && e.k < ni) kept.push_back(e);
      }
      std::string qname = i == s ? name : name + "/pi" + std::to_string(i);
      chain.push_back(std::shared_ptr<StratifiedAlgebra>(
          new StratifiedAlgebra(std::move(dims), std::move(kept), chain, std::move(qname))));
    }
    return chain.back();
  }

  /// Builds from dense rows {a, b, coeffs}. When `fill_antisymmetric` is set,
  /// a pair (b, a) absent from the table is filled in as -[e_a, e_b]; pairs
  /// listed explicitly are kept verbatim so validate() can flag them.
  static AlgebraPtr from_records(std::vector<int> layer_dims,
                                 const std::vector<BracketRecord>& records,
                                 bool fill_antisymmetric, std::string name = {}) {
    const int n = std::accumulate(layer_dims.begin(), layer_dims.end(), 0);
    std::vector<BracketEntry> entries;
    std::vector<std::pair<int, int>> listed;
    for (const auto& rec : records) {
      if (static_cast<int>(rec.coeffs.size()) != n) {
        throw MalformedInput("bracket (" + std::to_string(rec.a) + "," + std::to_string(rec.b) +
                             ") has " + std::to_string(rec.coeffs.size()) +
                             " coefficients, expected " + std::to_string(n));
      }
      if (rec.a < 0 || rec.a >= n || rec.b < 0 || rec.b >= n) {
        throw MalformedInput("bracket basis index out of range");
      }
      listed.emplace_back(rec.a, rec.b);
      for (int k = 0; k < n; ++k) {
        const double c = rec.coeffs[static_cast<std::size_t>(k)];
        if (c != 0.0) entries.push_back({rec.a, rec.b, k, c});
      }
    }
    if (fill_antisymmetric) {
      for (const auto& rec : records) {
        if (rec.a == rec.b) continue;
        if (std::find(listed.begin(), listed.end(), std::make_pair(rec.b, rec.a)) != listed.end())
          continue;
        for (int k = 0; k < n; ++k) {
          const double c = rec.coeffs[static_cast<std::size_t>(k)];
          if (c != 0.0) entries.push_back({rec.b, rec.a, k, -c});
        }
      }
    }
    return make(std::move(layer_dims), std::move(entries), std::move(name));
  }

  const std::vector<int>& layer_dims() const { return layer_dims_; }
  int dim() const { return dim_; }
  int step() const { return static_cast<int>(layer_dims_.size()); }
  /// Q = sum_i i * n_i.
  int homogeneous_dim() const { return homogeneous_dim_; }
  /// 1-based layer index i; offset of layer i within the coordinate vector.
  int layer_offset(int i) const { return offsets_[static_cast<std::size_t>(i - 1)]; }
  int layer_size(int i) const { return layer_dims_[static_cast<std::size_t>(i - 1)]; }
  /// 1-based layer of a 0-based basis index.
  int layer_of(int index) const { return layer_of_[static_cast<std::size_t>(index)]; }
  const std::vector<BracketEntry>& entries() const { return entries_; }
  const std::string& name() const { return name_; }

  /// The step-i quotient pi_i(G), i.e. layers i+1..s dropped.
  AlgebraPtr quotient(int i) const {
    if (i < 1 || i > step()) throw InvalidArgument("quotient index out of range");
    if (i == step()) return shared_from_this();
    return lower_[static_cast<std::size_t>(i - 1)];
  }

  /// out += [u, v]. No size checks; the public bracket() does those.
  void bracket_accumulate(const double* u, const double* v, double* out) const {
    for (const auto& e : entries_) out[e.k] += e.c * u[e.a] * v[e.b];
  }

  Coords bracket(std::span<const double> u, std::span<const double> v) const {
    if (static_cast<int>(u.size()) != dim_ || static_cast<int>(v.size()) != dim_) {
      throw InvalidArgument("bracket: dimension mismatch");
    }
    Coords out(static_cast<std::size_t>(dim_), 0.0);
    bracket_accumulate(u.data(), v.data(), out.data());
    return out;
  }

  Coords bracket(const Coords& u, const Coords& v) const {
    return bracket(std::span<const double>(u.data(), u.size()),
                   std::span<const double>(v.data(), v.size()));
  }

  const detail::BchTrie& bch_trie() const { return trie_; }

  bool same_structure(const StratifiedAlgebra& o) const {
    return this == &o || (layer_dims_ == o.layer_dims_ && entries_ == o.entries_);
  }

 private:
  StratifiedAlgebra(std::vector<int> dims, std::vector<BracketEntry> entries,
                    std::vector<AlgebraPtr> lower, std::string name)
      : layer_dims_(std::move(dims)),
        entries_(std::move(entries)),
        lower_(std::move(lower)),
        name_(std::move(name)) {
    dim_ = 0;
    homogeneous_dim_ = 0;
    for (std::size_t i = 0; i < layer_dims_.size(); ++i) {
      offsets_.push_back(dim_);
      for (int j = 0; j < layer_dims_[i]; ++j) layer_of_.push_back(static_cast<int>(i) + 1);
      dim_ += layer_dims_[i];
      homogeneous_dim_ += static_cast<int>(i + 1) * layer_dims_[i];
    }
    trie_ = detail::build_bch_trie(step());
  }

  static std::vector<BracketEntry> canonicalize(std::vector<BracketEntry> in) {
    std::sort(in.begin(), in.end(), [](const BracketEntry& x, const BracketEntry& y) {
      return std::tie(x.a, x.b, x.k) < std::tie(y.a, y.b, y.k);
    });
    std::vector<BracketEntry> out;
    for (const auto& e : in) {
      if (!out.empty() && out.back().a == e.a && out.back().b == e.b && out.back().k == e.k) {
        out.back().c += e.c;
      } else {
        out.push_back(e);
      }
    }
    std::erase_if(out, [](const BracketEntry& e) { return e.c == 0.0; });
    return out;
  }

  std::vector<int> layer_dims_;
  std::vector<BracketEntry> entries_;
  std::vector<AlgebraPtr> lower_;
  std::string name_;
  std::vector<int> offsets_;
  std::vector<int> layer_of_;
  int dim_ = 0;
  int homogeneous_dim_ = 0;
  detail::BchTrie trie_;
};

// ---------------------------------------------------------------------------
// Validation

struct Violation {
  enum class Kind { Antisymmetry, Jacobi, Grading, Generation };
  Kind kind;
  std::vector<int> basis;  // offending basis tuple, or {j} for generation
  double magnitude = 0.0;
};

inline const char* to_string(Violation::Kind k) {
  switch (k) {
    case Violation::Kind::Antisymmetry: return "antisymmetry";
    case Violation::Kind::Jacobi: return "jacobi";
    case Violation::Kind::Grading: return "grading";
    case Violation::Kind::Generation: return "generation";
  }
  return "?";
}

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
};

namespace detail {

inline int matrix_rank(std::vector<std::vector<double>> rows, double tol) {
  int rank = 0;
  const std::size_t ncols = rows.empty() ? 0 : rows.front().size();
  for (std::size_t col = 0; col < ncols && rank < static_cast<int>(rows.size()); ++col) {
    std::size_t pivot = static_cast<std::size_t>(rank);
    for (std::size_t r = pivot; r < rows.size(); ++r) {
      if (std::abs(rows[r][col]) > std::abs(rows[pivot][col])) pivot = r;
    }
    if (std::abs(rows[pivot][col]) <= tol) continue;
    std::swap(rows[pivot], rows[static_cast<std::size_t>(rank)]);
    const auto& p = rows[static_cast<std::size_t>(rank)];
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (r == static_cast<std::size_t>(rank)) continue;
      const double f = rows[r][col] / p[col];
      for (std::size_t c = col; c < ncols; ++c) rows[r][c] -= f * p[c];
    }
    ++rank;
  }
  return rank;
}

}  // namespace detail

/// Checks antisymmetry, Jacobi, grading and generation ([V_1, V_j] spans
/// V_{j+1}) at absolute tolerance `tol`.
inline ValidationReport validate(const StratifiedAlgebra& alg, double tol = 1e-12) {
  ValidationReport report;
  const int n = alg.dim();
  const auto N = static_cast<std::size_t>(n);
  // dense constants c[a][b][k]
  std::vector<double> c(N * N * N, 0.0);
  auto at = [&](int a, int b, int k) -> double& {
    return c[(static_cast<std::size_t>(a) * N + static_cast<std::size_t>(b)) * N +
             static_cast<std::size_t>(k)];
  };
  for (const auto& e : alg.entries()) at(e.a, e.b, e.k) += e.c;

  for (int a = 0; a < n; ++a) {
    for (int b = a; b < n; ++b) {
      double worst = 0.0;
      for (int k = 0; k < n; ++k) worst = std::max(worst, std::abs(at(a, b, k) + at(b, a, k)));
      if (worst > tol) {
        report.violations.push_back({Violation::Kind::Antisymmetry, {b, a}, worst});
      }
    }
  }

  // [a,[b,c]] + [b,[c,a]] + [c,[a,b]]
  auto nested = [&](int x, int y, int z, int k) {
    double sum = 0.0;
    for (int m = 0; m < n; ++m) sum += at(y, z, m) * at(x, m, k);
    return sum;
  };
  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) {
      for (int cc = b + 1; cc < n; ++cc) {
        double worst = 0.0;
        for (int k = 0; k < n; ++k) {
          worst = std::max(worst,
                           std::abs(nested(a, b, cc, k) + nested(b, cc, a, k) + nested(cc, a, b, k)));
        }
        if (worst > tol) report.violations.push_back({Violation::Kind::Jacobi, {a, b, cc}, worst});
      }
    }
  }

  const int s = alg.step();
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      const int target = alg.layer_of(a) + alg.layer_of(b);
      double worst = 0.0;
      for (int k = 0; k < n; ++k) {
        if (alg.layer_of(k) != target) worst = std::max(worst, std::abs(at(a, b, k)));
      }
      if (worst > tol) report.violations.push_back({Violation::Kind::Grading, {a, b}, worst});
    }
  }

  for (int j = 1; j < s; ++j) {
    std::vector<std::vector<double>> rows;
    const int off1 = alg.layer_offset(1), offj = alg.layer_offset(j), offn = alg.layer_offset(j + 1);
    for (int a = off1; a < off1 + alg.layer_size(1); ++a) {
      for (int b = offj; b < offj + alg.layer_size(j); ++b) {
        std::vector<double> row;
        for (int k = offn; k < offn + alg.layer_size(j + 1); ++k) row.push_back(at(a, b, k));
        rows.push_back(std::move(row));
      }
    }
    const int rank = detail::matrix_rank(std::move(rows), 1e-9);
    if (rank != alg.layer_size(j + 1)) {
      report.violations.push_back(
          {Violation::Kind::Generation, {j}, static_cast<double>(alg.layer_size(j + 1) - rank)});
    }
  }
  return report;
}

// ---------------------------------------------------------------------------
// Builtin groups

/// Heisenberg algebra of dimension 2k+1: basis X_1..X_k, Y_1..Y_k, Z with
/// [X_j, Y_j] = Z.
inline AlgebraPtr heisenberg(int k) {
  if (k <= 0) throw InvalidArgument("heisenberg: parameter must be positive");
  const int z = 2 * k;
  std::vector<BracketEntry> e;
  for (int j = 0; j < k; ++j) {
    e.push_back({j, k + j, z, 1.0});
    e.push_back({k + j, j, z, -1.0});
  }
  return StratifiedAlgebra::make({2 * k, 1}, std::move(e), "heisenberg(" + std::to_string(k) + ")");
}

/// Engel algebra: X_1, X_2 | X_3 | X_4 with [X_1,X_2] = X_3, [X_1,X_3] = X_4.
inline AlgebraPtr engel() {
  std::vector<BracketEntry> e{{0, 1, 2, 1.0}, {1, 0, 2, -1.0}, {0, 2, 3, 1.0}, {2, 0, 3, -1.0}};
  return StratifiedAlgebra::make({2, 1, 1}, std::move(e), "engel");
}

/// Free step-2 nilpotent algebra on r generators; Z_{ij} (i < j) are ordered
/// lexicographically after the generators.
inline AlgebraPtr free_step2(int r) {
  if (r <= 0) throw InvalidArgument("free_step2: parameter must be positive");
  if (r == 1) return StratifiedAlgebra::make({1}, {}, "free_step2(1)");
  std::vector<BracketEntry> e;
  int z = r;
  for (int i = 0; i < r; ++i) {
    for (int j = i + 1; j < r; ++j) {
      e.push_back({i, j, z, 1.0});
      e.push_back({j, i, z, -1.0});
      ++z;
    }
  }
  return StratifiedAlgebra::make({r, r * (r - 1) / 2}, std::move(e),
                                 "free_step2(" + std::to_string(r) + ")");
}

/// Abelian R^n, the single-layer (s = 1) case.
inline AlgebraPtr euclidean(int n) {
  if (n <= 0) throw InvalidArgument("euclidean: parameter must be positive");
  return StratifiedAlgebra::make({n}, {}, "euclidean(" + std::to_string(n) + ")");
}

/// Parses "heisenberg(k)", "engel", "free_step2(r)" or "euclidean(n)".
inline AlgebraPtr builtin(std::string_view name) {
  auto open = name.find('(');
  std::string_view base = name.substr(0, open);
  int param = 0;
  bool has_param = false;
  if (open != std::string_view::npos) {
    auto close = name.find(')', open);
    if (close == std::string_view::npos || close + 1 != name.size()) {
      throw InvalidArgument("unknown group: " + std::string(name));
    }
    auto digits = name.substr(open + 1, close - open - 1);
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), param);
    if (ec != std::errc{} || ptr != digits.data() + digits.size()) {
      throw InvalidArgument("bad group parameter: " + std::string(name));
    }
    has_param = true;
  }
  AlgebraPtr alg;
  if (base == "heisenberg" && has_param) {
    alg = heisenberg(param);
  } else if (base == "engel" && !has_param) {
    alg = engel();
  } else if (base == "free_step2" && has_param) {
    alg = free_step2(param);
  } else if (base == "euclidean" && has_param) {
    alg = euclidean(param);
  } else {
    throw InvalidArgument("unknown group: " + std::string(name));
  }
  return alg;
}

}  // namespace carnot
