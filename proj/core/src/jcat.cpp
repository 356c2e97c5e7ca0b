#include "flowcat/jcat.hpp"

#include <algorithm>
#include <sstream>

namespace flowcat::jcat {

namespace {
std::string pair_str(int n, int m) {
  std::ostringstream os;
  os << "(" << n << "," << m << ")";
  return os.str();
}
}  // namespace

JPoint::JPoint(int upper, int lower, std::map<int, double> coords)
    : upper_(upper), lower_(lower), coords_(std::move(coords)) {
  if (upper_ <= lower_) throw InvalidRange("JPoint requires upper > lower, got " + pair_str(upper_, lower_));
  for (const auto& [i, t] : coords_) {
    if (i <= lower_ || i >= upper_)
      throw InvalidRange("coordinate index outside window " + pair_str(upper_, lower_));
    if (t < 0) throw InvalidRange("negative coordinate");
  }
  normalize();
}

JPoint JPoint::infinity(int upper, int lower) {
  JPoint p(upper, lower);
  p.infinite_ = true;
  return p;
}

void JPoint::normalize() {
  for (auto it = coords_.begin(); it != coords_.end();)
    it = (it->second == 0.0) ? coords_.erase(it) : std::next(it);
}

double JPoint::coord(int i) const {
  auto it = coords_.find(i);
  return it == coords_.end() ? 0.0 : it->second;
}

void JPoint::set_coord(int i, double t) {
  if (infinite_) throw InvalidRange("cannot set coordinates on the basepoint");
  if (i <= lower_ || i >= upper_)
    throw InvalidRange("coordinate index outside window " + pair_str(upper_, lower_));
  if (t < 0) throw InvalidRange("negative coordinate");
  if (t == 0.0)
    coords_.erase(i);
  else
    coords_[i] = t;
}

std::vector<int> JPoint::support() const {
  std::vector<int> s;
  for (const auto& [i, t] : coords_) s.push_back(i);
  return s;
}

bool JPoint::operator==(const JPoint& o) const {
  return upper_ == o.upper_ && lower_ == o.lower_ && infinite_ == o.infinite_ &&
         coords_ == o.coords_;
}

bool JPoint::operator<(const JPoint& o) const {
  if (upper_ != o.upper_) return upper_ < o.upper_;
  if (lower_ != o.lower_) return lower_ < o.lower_;
  if (infinite_ != o.infinite_) return infinite_ < o.infinite_;
  return coords_ < o.coords_;
}

int j_dimension(int n, int m) {
  if (n <= m) throw InvalidRange("j_dimension requires n > m, got " + pair_str(n, m));
  return n - m - 1;
}

JPoint compose(const JPoint& u, const JPoint& v) {
  if (u.lower() != v.upper())
    throw IndexMismatch("compose: u.lower=" + std::to_string(u.lower()) +
                        " vs v.upper=" + std::to_string(v.upper()));
  if (u.is_infinity() || v.is_infinity())
    return JPoint::infinity(u.upper(), v.lower());

  std::map<int, double> coords;
  for (int i : u.support()) coords[i] = u.coord(i);
  for (int i : v.support()) coords[i] = v.coord(i);
  // t_{u.lower} stays zero: that is the stratum the image lands in.
  return JPoint(u.upper(), v.lower(), std::move(coords));
}

JFace stratum_of(const JPoint& u) {
  if (u.is_infinity())
    throw InfinityHasNoStratum("stratum_of on the basepoint of " + pair_str(u.upper(), u.lower()));
  JFace f;
  f.upper = u.upper();
  f.lower = u.lower();
  for (int i = u.lower() + 1; i < u.upper(); ++i)
    if (u.coord(i) == 0.0) f.vanishing.insert(i);
  return f;
}

std::vector<std::pair<int, int>> face_factorization(const JFace& f) {
  std::vector<int> cuts(f.vanishing.begin(), f.vanishing.end());
  std::sort(cuts.begin(), cuts.end(), std::greater<int>());
  std::vector<std::pair<int, int>> out;
  int top = f.upper;
  for (int c : cuts) {
    if (c <= f.lower || c >= f.upper)
      throw InvalidRange("vanishing index outside window " + pair_str(f.upper, f.lower));
    out.emplace_back(top, c);
    top = c;
  }
  out.emplace_back(top, f.lower);
  return out;
}

}  // namespace flowcat::jcat
