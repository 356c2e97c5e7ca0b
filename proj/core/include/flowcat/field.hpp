#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <gmpxx.h>

#include "flowcat/errors.hpp"
#include "flowcat/exact_linalg.hpp"

namespace flowcat::linalg {

// Exact field coefficients for rank bookkeeping: the rationals and the prime
// fields.  Everything is dense Gaussian elimination at desk scale.

struct RationalField {
  using Elem = mpq_class;
  Elem from_int(const Int& v) const { return mpq_class(v); }
  Elem from_long(long v) const { return mpq_class(v); }
  Elem add(const Elem& a, const Elem& b) const { return a + b; }
  Elem sub(const Elem& a, const Elem& b) const { return a - b; }
  Elem mul(const Elem& a, const Elem& b) const { return a * b; }
  Elem neg(const Elem& a) const { return -a; }
  Elem inv(const Elem& a) const { return 1 / a; }
  bool is_zero(const Elem& a) const { return a == 0; }
  std::string describe() const { return "Q"; }
};

struct PrimeField {
  long p = 2;
  using Elem = long;

  Elem from_int(const Int& v) const {
    mpz_class r = v % p;
    long x = r.get_si();
    return x < 0 ? x + p : x;
  }
  Elem from_long(long v) const {
    long x = v % p;
    return x < 0 ? x + p : x;
  }
  Elem add(Elem a, Elem b) const { return (a + b) % p; }
  Elem sub(Elem a, Elem b) const { return ((a - b) % p + p) % p; }
  Elem mul(Elem a, Elem b) const { return (a * b) % p; }
  Elem neg(Elem a) const { return (p - a) % p; }
  Elem inv(Elem a) const {
    // extended Euclid; a must be nonzero mod p
    long t = 0, nt = 1, r = p, nr = a % p;
    while (nr != 0) {
      long q = r / nr;
      t -= q * nt;
      std::swap(t, nt);
      r -= q * nr;
      std::swap(r, nr);
    }
    if (r != 1) throw Error("PrimeField::inv of noninvertible element");
    return ((t % p) + p) % p;
  }
  bool is_zero(Elem a) const { return a % p == 0; }
  std::string describe() const { return "F" + std::to_string(p); }
};

template <class F>
struct FMat {
  std::size_t rows = 0, cols = 0;
  std::vector<typename F::Elem> a;

  FMat() = default;
  FMat(std::size_t r, std::size_t c) : rows(r), cols(c), a(r * c) {}

  typename F::Elem& at(std::size_t i, std::size_t j) { return a[i * cols + j]; }
  const typename F::Elem& at(std::size_t i, std::size_t j) const { return a[i * cols + j]; }
};

template <class F>
FMat<F> to_field(const F& k, const IntMatrix& m) {
  FMat<F> out(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) out.at(i, j) = k.from_int(m.at(i, j));
  return out;
}

template <class F>
FMat<F> fmul(const F& k, const FMat<F>& a, const FMat<F>& b) {
  if (a.cols != b.rows) throw Error("fmul: shape mismatch");
  FMat<F> c(a.rows, b.cols);
  for (std::size_t i = 0; i < a.rows; ++i)
    for (std::size_t t = 0; t < a.cols; ++t) {
      if (k.is_zero(a.at(i, t))) continue;
      for (std::size_t j = 0; j < b.cols; ++j)
        c.at(i, j) = k.add(c.at(i, j), k.mul(a.at(i, t), b.at(t, j)));
    }
  return c;
}

template <class F>
bool is_zero(const F& k, const FMat<F>& m) {
  for (const auto& v : m.a)
    if (!k.is_zero(v)) return false;
  return true;
}

// In-place reduction to row echelon form; returns pivot columns.
template <class F>
std::vector<std::size_t> row_reduce(const F& k, FMat<F>& m) {
  std::vector<std::size_t> pivots;
  std::size_t r = 0;
  for (std::size_t c = 0; c < m.cols && r < m.rows; ++c) {
    std::size_t p = r;
    while (p < m.rows && k.is_zero(m.at(p, c))) ++p;
    if (p == m.rows) continue;
    for (std::size_t j = 0; j < m.cols; ++j) std::swap(m.at(r, j), m.at(p, j));
    typename F::Elem piv_inv = k.inv(m.at(r, c));
    for (std::size_t j = c; j < m.cols; ++j) m.at(r, j) = k.mul(m.at(r, j), piv_inv);
    for (std::size_t i = 0; i < m.rows; ++i) {
      if (i == r || k.is_zero(m.at(i, c))) continue;
      typename F::Elem factor = m.at(i, c);
      for (std::size_t j = c; j < m.cols; ++j)
        m.at(i, j) = k.sub(m.at(i, j), k.mul(factor, m.at(r, j)));
    }
    pivots.push_back(c);
    ++r;
  }
  return pivots;
}

template <class F>
long rank(const F& k, FMat<F> m) {
  return static_cast<long>(row_reduce(k, m).size());
}

// Columns form a basis of the null space.
template <class F>
FMat<F> kernel(const F& k, FMat<F> m) {
  std::vector<std::size_t> pivots = row_reduce(k, m);
  std::vector<bool> is_pivot(m.cols, false);
  for (std::size_t c : pivots) is_pivot[c] = true;

  std::size_t nk = m.cols - pivots.size();
  FMat<F> out(m.cols, nk);
  std::size_t col = 0;
  for (std::size_t fc = 0; fc < m.cols; ++fc) {
    if (is_pivot[fc]) continue;
    out.at(fc, col) = k.from_long(1);
    for (std::size_t r = 0; r < pivots.size(); ++r)
      out.at(pivots[r], col) = k.neg(m.at(r, fc));
    ++col;
  }
  return out;
}

// Solve a x = b for one consistent solution; returns false when inconsistent.
template <class F>
bool solve(const F& k, const FMat<F>& a, const std::vector<typename F::Elem>& b,
           std::vector<typename F::Elem>& x) {
  FMat<F> aug(a.rows, a.cols + 1);
  for (std::size_t i = 0; i < a.rows; ++i) {
    for (std::size_t j = 0; j < a.cols; ++j) aug.at(i, j) = a.at(i, j);
    aug.at(i, a.cols) = b[i];
  }
  std::vector<std::size_t> pivots = row_reduce(k, aug);
  if (!pivots.empty() && pivots.back() == a.cols) return false;  // 0 = 1 row
  x.assign(a.cols, k.from_long(0));
  for (std::size_t r = 0; r < pivots.size(); ++r) x[pivots[r]] = aug.at(r, a.cols);
  return true;
}

// Which field a computation runs over; Integers is only meaningful for
// homology tables, never for spectral pages.
struct FieldSpec {
  enum class Kind { Integers, Rationals, Prime };
  Kind kind = Kind::Integers;
  long p = 0;

  static FieldSpec integers() { return {Kind::Integers, 0}; }
  static FieldSpec rationals() { return {Kind::Rationals, 0}; }
  static FieldSpec prime(long p) { return {Kind::Prime, p}; }

  // Accepts "Z", "Q", "Fp:5" (also "F5"); ParseError otherwise.
  static FieldSpec parse(const std::string& text);
  std::string to_string() const;
};

}  // namespace flowcat::linalg
