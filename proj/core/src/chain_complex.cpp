#include "flowcat/chain_complex.hpp"

#include <sstream>

namespace flowcat::linalg {

Report ChainComplex::d_squared_check() const {
  Report r;
  for (const auto& [d, m] : boundary) {
    bool shape = m.rows() == static_cast<std::size_t>(rank(d - 1)) &&
                 m.cols() == static_cast<std::size_t>(rank(d));
    if (!shape) {
      std::ostringstream os;
      os << "degree " << d << ": " << m.rows() << "x" << m.cols() << " vs ranks "
         << rank(d - 1) << "," << rank(d);
      r.add("shape", false, os.str());
    }
  }
  if (!r.ok()) return r;
  r.add("shape", true);

  for (int d = lo + 1; d <= hi(); ++d) {
    IntMatrix prod = mul(boundary_or_zero(d), boundary_or_zero(d + 1));
    std::ostringstream name;
    name << "d2[" << d + 1 << "->" << d - 1 << "]";
    r.add(name.str(), prod.is_zero(), prod.is_zero() ? "" : prod.to_string());
  }
  return r;
}

HomologyGroup ChainComplex::homology_at_degree(int d) const {
  return flowcat::linalg::homology_at(boundary_or_zero(d + 1), boundary_or_zero(d));
}

std::vector<HomologyGroup> ChainComplex::homology() const {
  std::vector<HomologyGroup> out;
  for (int d = lo; d <= hi(); ++d) out.push_back(homology_at_degree(d));
  return out;
}

}  // namespace flowcat::linalg
