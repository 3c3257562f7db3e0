#include "paratomo/smooth_field.hpp"

#include <cstdio>

namespace paratomo {

std::string describe_field(const SmoothField& f) {
    std::string s;
    char buf[96];
    std::snprintf(buf, sizeof buf, "%.17g", f.constant);
    s += buf;
    for (std::size_t i = 0; i < f.bumps.size(); ++i) {
        std::snprintf(buf, sizeof buf, "+%.17g*gauss(%.17g;%.17g,%.17g)", f.bump_coef[i],
                      f.bumps[i].width, f.bumps[i].center[0], f.bumps[i].center[1]);
        s += buf;
    }
    for (std::size_t i = 0; i < f.modes.size(); ++i) {
        std::snprintf(buf, sizeof buf, "+%.17g*cos(%.17g,%.17g;%.17g)", f.mode_coef[i],
                      f.modes[i].k[0], f.modes[i].k[1], f.modes[i].phase);
        s += buf;
    }
    return s;
}

}  // namespace paratomo
