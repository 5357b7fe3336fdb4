#include "cmrm/word.hpp"

#include <algorithm>
#include <cctype>
#include <map>

#include "cmrm/error.hpp"

namespace cmrm {

Letter adjoint(Letter l) {
  l.starred = !l.starred;
  return l;
}

Word adjoint(const Word& w) {
  Word out;
  out.reserve(w.size());
  for (auto it = w.rbegin(); it != w.rend(); ++it) out.push_back(adjoint(*it));
  return out;
}

bool contains_family(const Word& w, Family f) {
  return std::any_of(w.begin(), w.end(), [f](const Letter& l) { return l.family == f; });
}

Word parse_word(std::string_view text) {
  Word w;
  std::size_t i = 0;
  auto read_int = [&](int& out) {
    std::size_t start = i;
    while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) ++i;
    if (start == i) return false;
    out = std::stoi(std::string(text.substr(start, i - start)));
    return true;
  };
  while (i < text.size()) {
    char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    Letter l;
    if (c == 'a') l.family = Family::A;
    else if (c == 'b') l.family = Family::B;
    else throw ConfigError("unexpected character '" + std::string(1, c) + "' in word \"" + std::string(text) + "\"");
    ++i;
    int idx = 1;
    if (read_int(idx) && idx < 1) throw ConfigError("letter indices are 1-based");
    l.index = idx - 1;
    if (i < text.size() && text[i] == '@') {
      ++i;
      if (!read_int(l.group)) throw ConfigError("missing group number after '@'");
    }
    if (i < text.size() && text[i] == '*') {
      l.starred = true;
      ++i;
    }
    w.push_back(l);
  }
  return w;
}

std::string to_string(const Word& w) {
  std::string s;
  for (const auto& l : w) {
    if (!s.empty()) s += ' ';
    s += l.family == Family::A ? 'a' : 'b';
    s += std::to_string(l.index + 1);
    if (l.family == Family::B && l.group) s += '@' + std::to_string(l.group);
    if (l.starred) s += '*';
  }
  return s;
}

Polynomial Polynomial::letter(Letter l) { return word({l}); }

Polynomial Polynomial::word(Word w, std::complex<double> c) {
  Polynomial p;
  p.terms.emplace_back(c, std::move(w));
  return p;
}

Polynomial Polynomial::operator+(const Polynomial& o) const {
  Polynomial p = *this;
  p.terms.insert(p.terms.end(), o.terms.begin(), o.terms.end());
  return p;
}

Polynomial Polynomial::operator-(const Polynomial& o) const { return *this + o * -1.0; }

Polynomial Polynomial::operator*(const Polynomial& o) const {
  Polynomial p;
  p.terms.reserve(terms.size() * o.terms.size());
  for (const auto& [c1, w1] : terms)
    for (const auto& [c2, w2] : o.terms) {
      Word w = w1;
      w.insert(w.end(), w2.begin(), w2.end());
      p.terms.emplace_back(c1 * c2, std::move(w));
    }
  return p;
}

Polynomial Polynomial::operator*(std::complex<double> c) const {
  Polynomial p = *this;
  for (auto& t : p.terms) t.first *= c;
  return p;
}

Polynomial Polynomial::adjoint() const {
  Polynomial p;
  for (const auto& [c, w] : terms) p.terms.emplace_back(std::conj(c), cmrm::adjoint(w));
  return p;
}

Polynomial Polynomial::simplified() const {
  std::map<Word, std::complex<double>> acc;
  std::vector<Word> order;
  for (const auto& [c, w] : terms) {
    auto [it, fresh] = acc.emplace(w, 0.0);
    if (fresh) order.push_back(w);
    it->second += c;
  }
  Polynomial p;
  for (const auto& w : order)
    if (acc[w] != 0.0) p.terms.emplace_back(acc[w], w);
  return p;
}

Polynomial pow(const Polynomial& p, int e) {
  if (e < 0) throw DomainError("negative polynomial power");
  Polynomial r = Polynomial::word({});
  for (int i = 0; i < e; ++i) r = r * p;
  return r;
}

}  // namespace cmrm
