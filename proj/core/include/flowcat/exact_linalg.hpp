#pragma once

#include <cstddef>
#include <initializer_list>
#include <string>
#include <vector>

#include <gmpxx.h>

#include "flowcat/errors.hpp"

namespace flowcat::linalg {

using Int = mpz_class;

// Dense integer matrix with arbitrary-precision entries.  Row-major.
// Zero-row and zero-column shapes are legal and show up constantly as the
// boundary maps at the ends of a chain complex.
class IntMatrix {
 public:
  IntMatrix() = default;
  IntMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), a_(rows * cols) {}

  static IntMatrix identity(std::size_t n);
  static IntMatrix from_rows(std::initializer_list<std::initializer_list<long>> rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  Int& at(std::size_t i, std::size_t j) { return a_[i * cols_ + j]; }
  const Int& at(std::size_t i, std::size_t j) const { return a_[i * cols_ + j]; }

  bool is_zero() const;
  bool operator==(const IntMatrix& o) const {
    return rows_ == o.rows_ && cols_ == o.cols_ && a_ == o.a_;
  }

  IntMatrix transposed() const;
  std::string to_string() const;

  void swap_rows(std::size_t i, std::size_t j);
  void swap_cols(std::size_t i, std::size_t j);
  void negate_row(std::size_t i);
  void negate_col(std::size_t j);
  void add_row_multiple(std::size_t dst, std::size_t src, const Int& c);  // row dst += c*row src
  void add_col_multiple(std::size_t dst, std::size_t src, const Int& c);

 private:
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<Int> a_;
};

IntMatrix mul(const IntMatrix& a, const IntMatrix& b);

// Block [a | b], same row count.
IntMatrix hconcat(const IntMatrix& a, const IntMatrix& b);

// Fraction-free (Bareiss) determinant; matrix must be square.
Int determinant(const IntMatrix& m);

// U * M * V = D with U, V unimodular, D diagonal, d1 | d2 | ..., di >= 0,
// nonzero entries first.
struct SnfResult {
  IntMatrix D, U, V;
};

// Same, plus the inverses of the transforms (cheap to maintain during the
// reduction, and what kernel/cokernel computations actually consume).
struct SnfFull {
  IntMatrix D, U, V, U_inv, V_inv;
  std::size_t rank = 0;  // number of nonzero diagonal entries
};

SnfResult smith_normal_form(const IntMatrix& m);
SnfFull smith_normal_form_full(const IntMatrix& m);

// Columns form a basis of { x : M x = 0 }.  The basis spans a direct summand
// (kernels of integer matrices are saturated).
IntMatrix kernel_basis(const IntMatrix& m);

// Exact integer solve M * X = B.  Throws Error when no integer solution exists.
IntMatrix solve(const IntMatrix& m, const IntMatrix& b);

// Finitely generated abelian group: Z^free_rank + sum Z/torsion[i],
// torsion sorted with each entry dividing the next.
struct HomologyGroup {
  long free_rank = 0;
  std::vector<Int> torsion;

  bool trivial() const { return free_rank == 0 && torsion.empty(); }
  bool operator==(const HomologyGroup& o) const {
    return free_rank == o.free_rank && torsion == o.torsion;
  }
  std::string to_string() const;
};

// Homology at the middle of  C_{m+1} --d_in--> C_m --d_out--> C_{m-1}.
// Requires d_out * d_in = 0 (CompositionNonzero otherwise) and
// d_in.rows() == d_out.cols().
HomologyGroup homology_at(const IntMatrix& d_in, const IntMatrix& d_out);

// Cokernel of M as an abstract group (Z^rows / column span).
HomologyGroup cokernel(const IntMatrix& m);

}  // namespace flowcat::linalg
