#include "pivotwalk/geometry.hpp"

namespace pw {

double GromovConstants::required_L0() const {
    return std::max({L1, L2, L3, 16 * D0 + 8 * F0 + 2 * G0 + 16 * delta + 2, 16 * D3});
}

GromovConstants GromovConstants::from(double C0, double delta, std::optional<double> L0) {
    if (C0 < 0 || delta < 0) throw std::invalid_argument("constants must be nonnegative");
    GromovConstants k;
    k.delta = delta;
    k.C0 = C0;
    k.D0 = 2 * C0;
    k.E0 = k.D0 + 4 * delta;
    k.L1 = 4 * k.D0 + 6 * delta + 1;
    k.F0 = 2 * k.E0 + 3 * delta;
    k.L2 = 2 * k.E0 + 6 * delta + 1;
    k.G0 = 3 * k.F0 + 2 * delta;
    k.L3 = 4 * k.F0 + 3 * delta + 1;
    k.D3 = 2 * k.F0;
    k.L0 = L0 ? *L0 : k.required_L0();
    k.check();
    return k;
}

void GromovConstants::check() const {
    auto fail = [](const char* what) { throw std::logic_error(std::string("constant ladder broken: ") + what); };
    if (delta < 0 || C0 < 0) fail("negative input");
    if (D0 != 2 * C0) fail("D0 = 2 C0");
    if (E0 != D0 + 4 * delta) fail("E0 = D0 + 4 delta");
    if (L1 != 4 * D0 + 6 * delta + 1) fail("L1 = 4 D0 + 6 delta + 1");
    if (F0 != 2 * E0 + 3 * delta) fail("F0 = 2 E0 + 3 delta");
    if (L2 != 2 * E0 + 6 * delta + 1) fail("L2 = 2 E0 + 6 delta + 1");
    if (G0 != 3 * F0 + 2 * delta) fail("G0 = 3 F0 + 2 delta");
    if (L3 != 4 * F0 + 3 * delta + 1) fail("L3 = 4 F0 + 3 delta + 1");
    if (D3 != 2 * F0) fail("D3 = 2 F0");
    if (!(L0 >= required_L0())) fail("L0 below the required threshold");
}

}  // namespace pw
