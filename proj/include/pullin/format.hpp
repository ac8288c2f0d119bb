#pragma once

#include <string>

namespace pullin {

// 17 significant digits: round-trip exact for binary64.
std::string num17(double x);

}  // namespace pullin
