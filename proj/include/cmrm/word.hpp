#pragma once

#include <complex>
#include <string>
#include <string_view>
#include <vector>

namespace cmrm {

enum class Family { A, B };

/// One generator letter a_i or b_j, possibly starred. B letters carry a group tag
/// distinguishing mutually free B families.
struct Letter {
  Family family = Family::A;
  int index = 0;
  bool starred = false;
  int group = 0;

  friend bool operator==(const Letter&, const Letter&) = default;
  friend auto operator<=>(const Letter&, const Letter&) = default;
};

using Word = std::vector<Letter>;

Letter adjoint(Letter l);
/// Reverse order and flip stars.
Word adjoint(const Word& w);
bool contains_family(const Word& w, Family f);

/// Text form: letters "a" / "b", optional 1-based index, optional "@group" for B,
/// optional "*". Example: "a b2* a2 b@1". Whitespace is optional between letters.
Word parse_word(std::string_view text);
std::string to_string(const Word& w);

/// Formal linear combination of words.
struct Polynomial {
  std::vector<std::pair<std::complex<double>, Word>> terms;

  static Polynomial letter(Letter l);
  static Polynomial word(Word w, std::complex<double> c = 1.0);

  Polynomial operator+(const Polynomial& o) const;
  Polynomial operator-(const Polynomial& o) const;
  Polynomial operator*(const Polynomial& o) const;
  Polynomial operator*(std::complex<double> c) const;
  Polynomial adjoint() const;
  /// Merge equal words and drop zero coefficients.
  Polynomial simplified() const;
};

Polynomial pow(const Polynomial& p, int e);

}  // namespace cmrm
