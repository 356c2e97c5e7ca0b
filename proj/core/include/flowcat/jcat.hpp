#pragma once

#include <map>
#include <set>
#include <utility>
#include <vector>

#include "flowcat/errors.hpp"

namespace flowcat::jcat {

// A point of the morphism space attached to the integer pair n > m: a tuple of
// nonnegative reals t_i indexed by m < i < n, plus the compactification
// basepoint.  Coordinates not stored are zero; stored coordinates may be zero
// too (stratum membership reads exact zeros either way).
class JPoint {
 public:
  JPoint(int upper, int lower, std::map<int, double> coords = {});
  static JPoint infinity(int upper, int lower);

  int upper() const { return upper_; }
  int lower() const { return lower_; }
  bool is_infinity() const { return infinite_; }

  double coord(int i) const;
  void set_coord(int i, double t);

  // Indices with nonzero coordinate, ascending.
  std::vector<int> support() const;

  bool operator==(const JPoint& o) const;
  bool operator<(const JPoint& o) const;  // lexicographic, for containers

 private:
  int upper_, lower_;
  bool infinite_ = false;
  std::map<int, double> coords_;  // zeros dropped on normalization
  void normalize();
};

// A boundary stratum: the subset of coordinates pinned to zero.
struct JFace {
  int upper = 0, lower = 0;
  std::set<int> vanishing;  // subset of {lower+1, ..., upper-1}

  bool operator==(const JFace& o) const {
    return upper == o.upper && lower == o.lower && vanishing == o.vanishing;
  }
};

// dim J(n,m) = n - m - 1.  InvalidRange unless n > m.
int j_dimension(int n, int m);

// Addition of coordinate tuples; supports are disjoint so the sum is the
// union, with the break coordinate t_m pinned to zero.  The basepoint is
// absorbing.  IndexMismatch unless u.lower == v.upper.
JPoint compose(const JPoint& u, const JPoint& v);

// InfinityHasNoStratum on the basepoint.
JFace stratum_of(const JPoint& u);

// The face {t_i = 0, i in S} factors as a product of smaller morphism spaces;
// returns the ordered list of (upper, lower) pairs from the top down.
std::vector<std::pair<int, int>> face_factorization(const JFace& f);

}  // namespace flowcat::jcat
