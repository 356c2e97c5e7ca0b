#include "flowcat/field.hpp"

namespace flowcat::linalg {

namespace {
bool is_prime(long n) {
  if (n < 2) return false;
  for (long d = 2; d * d <= n; ++d)
    if (n % d == 0) return false;
  return true;
}
}  // namespace

FieldSpec FieldSpec::parse(const std::string& text) {
  if (text == "Z") return integers();
  if (text == "Q") return rationals();
  std::string num;
  if (text.rfind("Fp:", 0) == 0)
    num = text.substr(3);
  else if (text.size() > 1 && text[0] == 'F')
    num = text.substr(1);
  else
    throw ParseError("unknown coefficient spec '" + text + "'");
  long p = 0;
  try {
    p = std::stol(num);
  } catch (const std::exception&) {
    throw ParseError("bad prime in coefficient spec '" + text + "'");
  }
  if (!is_prime(p)) throw ParseError("not a prime: " + num);
  return prime(p);
}

std::string FieldSpec::to_string() const {
  switch (kind) {
    case Kind::Integers: return "Z";
    case Kind::Rationals: return "Q";
    case Kind::Prime: return "Fp:" + std::to_string(p);
  }
  return "?";
}

}  // namespace flowcat::linalg
