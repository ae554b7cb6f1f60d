#include "wonder/time.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>

namespace wonder {

Micros from_ms(double ms) { return Micros{std::llround(ms * 1000.0)}; }

double to_ms(Micros t) { return static_cast<double>(t.count()) / 1000.0; }

std::string format_ms(Micros t) {
  const long long us = t.count();
  const long long mag = std::llabs(us);
  char buf[48];
  std::snprintf(buf, sizeof buf, "%s%lld.%03lld", us < 0 ? "-" : "", mag / 1000, mag % 1000);
  return buf;
}

}  // namespace wonder
