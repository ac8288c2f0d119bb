#include "pullin/format.hpp"

#include <cstdio>

namespace pullin {

std::string num17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

}  // namespace pullin
