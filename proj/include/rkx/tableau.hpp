#pragma once

// Explicit embedded Runge-Kutta pair in Butcher form, plus the plain-text
// tableau file format:
//
//   RKPAIR <label> s=<int> p=<int> phat=<int>
//   c: <s entries>
//   A[2]: <1 entry>
//   ...
//   A[s]: <s-1 entries>
//   b: <s entries>
//   bhat: <s entries>
//
// Entries are `num/den` rationals, integers or decimal literals; `#` starts a
// comment. Rationals round-trip bit-exactly.

#include "rkx/numeric.hpp"

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace rkx {

class TableauError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class TableauParseError : public TableauError {
 public:
  TableauParseError(std::size_t line, std::string field, const std::string& what)
      : TableauError("line " + std::to_string(line) + " (" + field + "): " + what),
        line_(line),
        field_(std::move(field)) {}
  [[nodiscard]] std::size_t line() const noexcept { return line_; }
  [[nodiscard]] const std::string& field() const noexcept { return field_; }

 private:
  std::size_t line_;
  std::string field_;
};

/// Which weight vector of a pair to use.
enum class WeightSet { principal, embedded };

/// Relative tolerance for row-sum consistency of inexact tableaus.
inline constexpr double kRowSumTolerance = 1e-13;

class Tableau {
 public:
  /// `a_rows[i]` holds a(i,0..i-1); rows of length s are accepted too as
  /// long as the diagonal and upper part are zero. When `c` is omitted it is
  /// computed as the row sums of A; when given it must match them (exactly
  /// for exact tableaus, to kRowSumTolerance otherwise).
  ///
  /// `embedded_order == 0` declares a single method whose b_hat equals b.
  Tableau(std::string label, std::vector<std::vector<Coefficient>> a_rows,
          std::vector<Coefficient> b, std::vector<Coefficient> b_hat, int order,
          int embedded_order, std::optional<std::vector<Coefficient>> c = std::nullopt)
      : label_(std::move(label)),
        b_(std::move(b)),
        b_hat_(std::move(b_hat)),
        order_(order),
        embedded_order_(embedded_order) {
    const std::size_t s = b_.size();
    if (s == 0) throw TableauError("tableau needs at least one stage");
    if (b_hat_.size() != s) throw TableauError("b_hat length differs from b");
    if (a_rows.size() != s) throw TableauError("A must have s rows");
    if (order_ < 1) throw TableauError("order must be >= 1");
    if (embedded_order_ == 0) {
      if (!(b_hat_ == b_)) throw TableauError("phat=0 requires b_hat == b");
    } else if (!(order_ > embedded_order_ && embedded_order_ >= 1)) {
      throw TableauError("orders must satisfy p > phat >= 1");
    }
    a_.resize(s);
    for (std::size_t i = 0; i < s; ++i) {
      auto& row = a_rows[i];
      if (row.size() != i && row.size() != s)
        throw TableauError("A row " + std::to_string(i + 1) + " has wrong length");
      for (std::size_t j = i; j < row.size(); ++j)
        if (!row[j].is_zero())
          throw TableauError("A is not strictly lower triangular at (" + std::to_string(i + 1) +
                             "," + std::to_string(j + 1) + ")");
      row.resize(i);
      a_[i] = std::move(row);
    }
    std::vector<Coefficient> sums(s);
    for (std::size_t i = 0; i < s; ++i)
      for (const auto& v : a_[i]) sums[i] += v;
    if (!c) {
      c_ = std::move(sums);
    } else {
      if (c->size() != s) throw TableauError("c length differs from s");
      for (std::size_t i = 0; i < s; ++i) {
        const auto& ci = (*c)[i];
        bool ok;
        if (ci.is_exact() && sums[i].is_exact()) {
          ok = ci.rational() == sums[i].rational();
        } else {
          HighFloat scale = 1;
          for (const auto& v : a_[i]) scale = std::max(scale, HighFloat(abs(v.high())));
          ok = abs(ci.high() - sums[i].high()) <= HighFloat(kRowSumTolerance) * scale;
        }
        if (!ok) throw TableauError("row-sum violation: c[" + std::to_string(i + 1) + "] != sum_j A[" +
                                    std::to_string(i + 1) + "][j]");
      }
      c_ = std::move(*c);
    }
  }

  /// Convenience for a method without a distinct embedded solution.
  static Tableau single(std::string label, std::vector<std::vector<Coefficient>> a_rows,
                        std::vector<Coefficient> b, int order) {
    auto b_hat = b;
    return Tableau(std::move(label), std::move(a_rows), std::move(b), std::move(b_hat), order, 0);
  }

  [[nodiscard]] const std::string& label() const noexcept { return label_; }
  [[nodiscard]] std::size_t stages() const noexcept { return b_.size(); }
  [[nodiscard]] int order() const noexcept { return order_; }
  [[nodiscard]] int embedded_order() const noexcept { return embedded_order_; }

  [[nodiscard]] const Coefficient& a(std::size_t i, std::size_t j) const {
    static const Coefficient zero;
    return j < i ? a_[i][j] : zero;
  }
  [[nodiscard]] const std::vector<Coefficient>& a_row(std::size_t i) const { return a_[i]; }
  [[nodiscard]] const std::vector<Coefficient>& b() const noexcept { return b_; }
  [[nodiscard]] const std::vector<Coefficient>& b_hat() const noexcept { return b_hat_; }
  [[nodiscard]] const std::vector<Coefficient>& c() const noexcept { return c_; }
  [[nodiscard]] const std::vector<Coefficient>& weights(WeightSet w) const noexcept {
    return w == WeightSet::principal ? b_ : b_hat_;
  }

  [[nodiscard]] bool is_exact() const {
    auto exact = [](const std::vector<Coefficient>& v) {
      for (const auto& x : v)
        if (!x.is_exact()) return false;
      return true;
    };
    for (const auto& row : a_)
      if (!exact(row)) return false;
    return exact(b_) && exact(b_hat_) && exact(c_);
  }

  friend bool operator==(const Tableau& x, const Tableau& y) {
    return x.label_ == y.label_ && x.order_ == y.order_ && x.embedded_order_ == y.embedded_order_ &&
           x.a_ == y.a_ && x.b_ == y.b_ && x.b_hat_ == y.b_hat_ && x.c_ == y.c_;
  }

 private:
  std::string label_;
  std::vector<std::vector<Coefficient>> a_;
  std::vector<Coefficient> b_;
  std::vector<Coefficient> b_hat_;
  std::vector<Coefficient> c_;
  int order_;
  int embedded_order_;
};

inline std::string serialize_tableau(const Tableau& t) {
  for (char ch : t.label())
    if (std::isspace(static_cast<unsigned char>(ch)))
      throw TableauError("label must not contain whitespace: '" + t.label() + "'");
  std::ostringstream out;
  const std::size_t s = t.stages();
  out << "RKPAIR " << t.label() << " s=" << s << " p=" << t.order() << " phat=" << t.embedded_order()
      << '\n';
  auto line = [&out](const std::string& key, const std::vector<Coefficient>& v) {
    out << key << ':';
    for (const auto& x : v) out << ' ' << x.str();
    out << '\n';
  };
  line("c", t.c());
  for (std::size_t i = 1; i < s; ++i) line("A[" + std::to_string(i + 1) + "]", t.a_row(i));
  line("b", t.b());
  line("bhat", t.b_hat());
  return out.str();
}

namespace detail {

inline std::vector<std::string> split_ws(std::string_view s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    std::size_t j = i;
    while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) ++j;
    if (j > i) out.emplace_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

inline int parse_header_int(std::size_t line, const std::string& token, std::string_view key) {
  const std::string prefix = std::string(key) + "=";
  if (token.rfind(prefix, 0) != 0) throw TableauParseError(line, "header", "expected '" + prefix + "...'");
  try {
    std::size_t used = 0;
    const int v = std::stoi(token.substr(prefix.size()), &used);
    if (used != token.size() - prefix.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw TableauParseError(line, "header", "bad integer in '" + token + "'");
  }
}

}  // namespace detail

inline Tableau parse_tableau(std::string_view text) {
  std::vector<std::pair<std::size_t, std::string>> lines;
  {
    std::size_t lineno = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
      auto nl = text.find('\n', pos);
      if (nl == std::string_view::npos) nl = text.size();
      std::string_view l = text.substr(pos, nl - pos);
      ++lineno;
      if (auto hash = l.find('#'); hash != std::string_view::npos) l = l.substr(0, hash);
      if (!detail::split_ws(l).empty()) lines.emplace_back(lineno, std::string(l));
      pos = nl + 1;
    }
  }
  if (lines.empty()) throw TableauParseError(1, "header", "empty tableau text");

  const auto& [hline, htext] = lines.front();
  const auto head = detail::split_ws(htext);
  if (head.size() != 5 || head[0] != "RKPAIR")
    throw TableauParseError(hline, "header", "expected 'RKPAIR <label> s=<int> p=<int> phat=<int>'");
  const std::string label = head[1];
  const int s = detail::parse_header_int(hline, head[2], "s");
  const int p = detail::parse_header_int(hline, head[3], "p");
  const int phat = detail::parse_header_int(hline, head[4], "phat");
  if (s < 1) throw TableauParseError(hline, "header", "s must be >= 1");

  std::optional<std::vector<Coefficient>> c, b, b_hat;
  std::vector<std::optional<std::vector<Coefficient>>> rows(static_cast<std::size_t>(s));
  rows[0] = std::vector<Coefficient>{};
  std::size_t c_line = hline;

  for (std::size_t k = 1; k < lines.size(); ++k) {
    const auto& [ln, body] = lines[k];
    const auto colon = body.find(':');
    if (colon == std::string::npos) throw TableauParseError(ln, "?", "expected '<field>: <entries>'");
    auto key_tokens = detail::split_ws(std::string_view(body).substr(0, colon));
    if (key_tokens.size() != 1) throw TableauParseError(ln, "?", "malformed field name");
    const std::string key = key_tokens.front();
    const auto tokens = detail::split_ws(std::string_view(body).substr(colon + 1));
    std::vector<Coefficient> entries;
    entries.reserve(tokens.size());
    for (std::size_t e = 0; e < tokens.size(); ++e) {
      try {
        entries.push_back(parse_coefficient(tokens[e]));
      } catch (const std::invalid_argument& err) {
        throw TableauParseError(ln, key + " entry " + std::to_string(e + 1), err.what());
      }
    }
    auto expect_len = [&](std::size_t want) {
      if (entries.size() != want)
        throw TableauParseError(ln, key, "expected " + std::to_string(want) + " entries, got " +
                                             std::to_string(entries.size()));
    };
    auto once = [&](auto& slot) {
      if (slot) throw TableauParseError(ln, key, "duplicate field");
      slot = std::move(entries);
    };
    if (key == "c") {
      expect_len(static_cast<std::size_t>(s));
      c_line = ln;
      once(c);
    } else if (key == "b") {
      expect_len(static_cast<std::size_t>(s));
      once(b);
    } else if (key == "bhat") {
      expect_len(static_cast<std::size_t>(s));
      once(b_hat);
    } else if (key.size() > 3 && key.rfind("A[", 0) == 0 && key.back() == ']') {
      int i = 0;
      try {
        i = std::stoi(key.substr(2, key.size() - 3));
      } catch (const std::exception&) {
        throw TableauParseError(ln, key, "bad row index");
      }
      if (i < 2 || i > s) throw TableauParseError(ln, key, "row index out of range 2..s");
      if (entries.size() != static_cast<std::size_t>(i - 1)) {
        if (entries.size() >= static_cast<std::size_t>(i))
          throw TableauParseError(ln, key, "A is not strictly lower triangular (row " + std::to_string(i) +
                                               " has " + std::to_string(entries.size()) + " entries)");
        expect_len(static_cast<std::size_t>(i - 1));
      }
      once(rows[static_cast<std::size_t>(i - 1)]);
    } else {
      throw TableauParseError(ln, key, "unknown field");
    }
  }
  if (!c) throw TableauParseError(hline, "c", "missing field");
  if (!b) throw TableauParseError(hline, "b", "missing field");
  if (!b_hat) throw TableauParseError(hline, "bhat", "missing field");
  std::vector<std::vector<Coefficient>> a_rows;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (!rows[i]) throw TableauParseError(hline, "A[" + std::to_string(i + 1) + "]", "missing field");
    a_rows.push_back(std::move(*rows[i]));
  }
  try {
    return Tableau(label, std::move(a_rows), std::move(*b), std::move(*b_hat), p, phat, std::move(c));
  } catch (const TableauParseError&) {
    throw;
  } catch (const TableauError& err) {
    const std::string what = err.what();
    const std::string field = what.rfind("row-sum", 0) == 0 ? "c" : "header";
    throw TableauParseError(field == "c" ? c_line : hline, field, what);
  }
}

}  // namespace rkx
