#include "flowcat/exact_linalg.hpp"

#include <algorithm>
#include <sstream>

namespace flowcat::linalg {

IntMatrix IntMatrix::identity(std::size_t n) {
  IntMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m.at(i, i) = 1;
  return m;
}

IntMatrix IntMatrix::from_rows(std::initializer_list<std::initializer_list<long>> rows) {
  std::size_t r = rows.size();
  std::size_t c = r ? rows.begin()->size() : 0;
  IntMatrix m(r, c);
  std::size_t i = 0;
  for (const auto& row : rows) {
    if (row.size() != c) throw Error("from_rows: ragged rows");
    std::size_t j = 0;
    for (long v : row) m.at(i, j++) = v;
    ++i;
  }
  return m;
}

bool IntMatrix::is_zero() const {
  for (const auto& v : a_)
    if (v != 0) return false;
  return true;
}

IntMatrix IntMatrix::transposed() const {
  IntMatrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t.at(j, i) = at(i, j);
  return t;
}

std::string IntMatrix::to_string() const {
  std::ostringstream os;
  os << rows_ << "x" << cols_ << " [";
  for (std::size_t i = 0; i < rows_; ++i) {
    os << (i ? "; " : "");
    for (std::size_t j = 0; j < cols_; ++j) os << (j ? " " : "") << at(i, j).get_str();
  }
  os << "]";
  return os.str();
}

void IntMatrix::swap_rows(std::size_t i, std::size_t j) {
  if (i == j) return;
  for (std::size_t k = 0; k < cols_; ++k) std::swap(at(i, k), at(j, k));
}

void IntMatrix::swap_cols(std::size_t i, std::size_t j) {
  if (i == j) return;
  for (std::size_t k = 0; k < rows_; ++k) std::swap(at(k, i), at(k, j));
}

void IntMatrix::negate_row(std::size_t i) {
  for (std::size_t k = 0; k < cols_; ++k) at(i, k) = -at(i, k);
}

void IntMatrix::negate_col(std::size_t j) {
  for (std::size_t k = 0; k < rows_; ++k) at(k, j) = -at(k, j);
}

void IntMatrix::add_row_multiple(std::size_t dst, std::size_t src, const Int& c) {
  for (std::size_t k = 0; k < cols_; ++k) at(dst, k) += c * at(src, k);
}

void IntMatrix::add_col_multiple(std::size_t dst, std::size_t src, const Int& c) {
  for (std::size_t k = 0; k < rows_; ++k) at(k, dst) += c * at(k, src);
}

IntMatrix mul(const IntMatrix& a, const IntMatrix& b) {
  if (a.cols() != b.rows()) throw Error("mul: shape mismatch");
  IntMatrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const Int& aik = a.at(i, k);
      if (aik == 0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) c.at(i, j) += aik * b.at(k, j);
    }
  return c;
}

IntMatrix hconcat(const IntMatrix& a, const IntMatrix& b) {
  if (a.rows() != b.rows()) throw Error("hconcat: row mismatch");
  IntMatrix c(a.rows(), a.cols() + b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) c.at(i, j) = a.at(i, j);
    for (std::size_t j = 0; j < b.cols(); ++j) c.at(i, a.cols() + j) = b.at(i, j);
  }
  return c;
}

Int determinant(const IntMatrix& m) {
  if (m.rows() != m.cols()) throw Error("determinant: not square");
  std::size_t n = m.rows();
  if (n == 0) return 1;
  IntMatrix a = m;
  Int prev = 1;
  int sign = 1;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    if (a.at(k, k) == 0) {
      std::size_t p = k + 1;
      while (p < n && a.at(p, k) == 0) ++p;
      if (p == n) return 0;
      a.swap_rows(k, p);
      sign = -sign;
    }
    for (std::size_t i = k + 1; i < n; ++i)
      for (std::size_t j = k + 1; j < n; ++j) {
        Int num = a.at(i, j) * a.at(k, k) - a.at(i, k) * a.at(k, j);
        a.at(i, j) = num / prev;  // exact by Bareiss
      }
    prev = a.at(k, k);
  }
  return sign * a.at(n - 1, n - 1);
}

namespace {

// All elementary operations mirrored into the transforms and their inverses so
// that  U*M*V = A,  U*U_inv = I,  V_inv*V = I  stay true throughout.
struct SnfWork {
  IntMatrix A, U, V, Ui, Vi;

  explicit SnfWork(const IntMatrix& m)
      : A(m),
        U(IntMatrix::identity(m.rows())),
        V(IntMatrix::identity(m.cols())),
        Ui(IntMatrix::identity(m.rows())),
        Vi(IntMatrix::identity(m.cols())) {}

  void row_swap(std::size_t i, std::size_t j) {
    A.swap_rows(i, j);
    U.swap_rows(i, j);
    Ui.swap_cols(i, j);
  }
  void col_swap(std::size_t i, std::size_t j) {
    A.swap_cols(i, j);
    V.swap_cols(i, j);
    Vi.swap_rows(i, j);
  }
  void row_negate(std::size_t i) {
    A.negate_row(i);
    U.negate_row(i);
    Ui.negate_col(i);
  }
  void row_add(std::size_t dst, std::size_t src, const Int& c) {
    A.add_row_multiple(dst, src, c);
    U.add_row_multiple(dst, src, c);
    Ui.add_col_multiple(src, dst, -c);
  }
  void col_add(std::size_t dst, std::size_t src, const Int& c) {
    A.add_col_multiple(dst, src, c);
    V.add_col_multiple(dst, src, c);
    Vi.add_row_multiple(src, dst, -c);
  }
};

}  // namespace

SnfFull smith_normal_form_full(const IntMatrix& m) {
  SnfWork w(m);
  const std::size_t rows = m.rows(), cols = m.cols();
  const std::size_t nmin = std::min(rows, cols);

  std::size_t k = 0;
  while (k < nmin) {
    // Smallest nonzero |entry| in the trailing submatrix becomes the pivot.
    std::size_t pi = k, pj = k;
    Int best = 0;
    for (std::size_t i = k; i < rows; ++i)
      for (std::size_t j = k; j < cols; ++j) {
        const Int& v = w.A.at(i, j);
        if (v == 0) continue;
        Int av = abs(v);
        if (best == 0 || av < best) {
          best = av;
          pi = i;
          pj = j;
        }
      }
    if (best == 0) break;  // trailing submatrix is zero
    w.row_swap(k, pi);
    w.col_swap(k, pj);

    bool clean = true;
    // Euclidean reduction of column k and row k against the pivot.
    for (std::size_t i = k + 1; i < rows; ++i) {
      if (w.A.at(i, k) == 0) continue;
      Int q = w.A.at(i, k) / w.A.at(k, k);  // truncated division is fine here
      w.row_add(i, k, -q);
      if (w.A.at(i, k) != 0) clean = false;
    }
    for (std::size_t j = k + 1; j < cols; ++j) {
      if (w.A.at(k, j) == 0) continue;
      Int q = w.A.at(k, j) / w.A.at(k, k);
      w.col_add(j, k, -q);
      if (w.A.at(k, j) != 0) clean = false;
    }
    if (!clean) continue;  // remainders left; re-pick the pivot

    // Pivot must divide the whole trailing submatrix for the divisibility
    // chain; if not, fold the offending row in and restart this step.
    bool divides_all = true;
    for (std::size_t i = k + 1; i < rows && divides_all; ++i)
      for (std::size_t j = k + 1; j < cols; ++j)
        if (w.A.at(i, j) % w.A.at(k, k) != 0) {
          w.row_add(k, i, 1);
          divides_all = false;
          break;
        }
    if (!divides_all) continue;

    if (w.A.at(k, k) < 0) w.row_negate(k);
    ++k;
  }

  SnfFull out;
  out.rank = k;
  out.D = std::move(w.A);
  out.U = std::move(w.U);
  out.V = std::move(w.V);
  out.U_inv = std::move(w.Ui);
  out.V_inv = std::move(w.Vi);
  return out;
}

SnfResult smith_normal_form(const IntMatrix& m) {
  SnfFull f = smith_normal_form_full(m);
  return {std::move(f.D), std::move(f.U), std::move(f.V)};
}

IntMatrix kernel_basis(const IntMatrix& m) {
  // U m V = D, so m (V e_j) = 0 exactly for the zero diagonal columns.
  SnfFull f = smith_normal_form_full(m);
  std::size_t n = m.cols();
  IntMatrix k(n, n - f.rank);
  for (std::size_t j = f.rank; j < n; ++j)
    for (std::size_t i = 0; i < n; ++i) k.at(i, j - f.rank) = f.V.at(i, j);
  return k;
}

IntMatrix solve(const IntMatrix& m, const IntMatrix& b) {
  if (m.rows() != b.rows()) throw Error("solve: shape mismatch");
  SnfFull f = smith_normal_form_full(m);
  // m x = b  <=>  D (V^-1 x) = U b.
  IntMatrix ub = mul(f.U, b);
  IntMatrix y(m.cols(), b.cols());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const Int d = (i < std::min(m.rows(), m.cols())) ? f.D.at(i, i) : Int(0);
    for (std::size_t j = 0; j < b.cols(); ++j) {
      if (d == 0) {
        if (ub.at(i, j) != 0) throw Error("solve: inconsistent system");
      } else {
        if (ub.at(i, j) % d != 0) throw Error("solve: no integer solution");
        if (i < m.cols()) y.at(i, j) = ub.at(i, j) / d;
      }
    }
  }
  return mul(f.V, y);
}

std::string HomologyGroup::to_string() const {
  std::ostringstream os;
  bool first = true;
  if (free_rank > 0) {
    os << "Z";
    if (free_rank > 1) os << "^" << free_rank;
    first = false;
  }
  for (const auto& t : torsion) {
    os << (first ? "" : " + ") << "Z/" << t.get_str();
    first = false;
  }
  if (first) os << "0";
  return os.str();
}

HomologyGroup homology_at(const IntMatrix& d_in, const IntMatrix& d_out) {
  if (d_in.rows() != d_out.cols())
    throw Error("homology_at: ambient rank mismatch between d_in and d_out");
  if (!mul(d_out, d_in).is_zero())
    throw CompositionNonzero("d_out * d_in != 0");

  const std::size_t n = d_in.rows();
  SnfFull f = smith_normal_form_full(d_out);
  const std::size_t knl = n - f.rank;  // dim ker d_out

  // Coordinates of im(d_in) in the V-basis of the ambient group; the first
  // `rank` coordinates vanish because d_out * d_in = 0 and the corresponding
  // diagonal entries are nonzero.
  IntMatrix coords = mul(f.V_inv, d_in);
  IntMatrix rel(knl, d_in.cols());
  for (std::size_t i = 0; i < knl; ++i)
    for (std::size_t j = 0; j < d_in.cols(); ++j)
      rel.at(i, j) = coords.at(f.rank + i, j);

  return cokernel(rel);
}

HomologyGroup cokernel(const IntMatrix& m) {
  SnfFull f = smith_normal_form_full(m);
  HomologyGroup h;
  h.free_rank = static_cast<long>(m.rows() - f.rank);
  for (std::size_t i = 0; i < f.rank; ++i)
    if (f.D.at(i, i) > 1) h.torsion.push_back(f.D.at(i, i));
  return h;
}

}  // namespace flowcat::linalg
