#pragma once

#include <chrono>
#include <cstdint>
#include <string>

namespace wonder {

/// Simulation time and delays are integer microseconds; rendering is in
/// milliseconds with exactly three decimals.
using Micros = std::chrono::microseconds;

Micros from_ms(double ms);
std::string format_ms(Micros t);
double to_ms(Micros t);

}  // namespace wonder
