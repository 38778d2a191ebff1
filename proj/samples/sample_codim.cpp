// Prints c_m(UT_2, *) for the orthogonal involution next to the
// asymptotic target, and the Z_2-graded version for comparison.

#include <iostream>

#include "utstar/codimension.hpp"

int main() {
  using namespace utstar;
  auto z2 = ElementaryGrading(GroupSpec::cyclic(2), 2, {GroupElement::cyclic(1)});
  for (int m = 1; m <= 6; ++m) {
    auto plain = codim_value(2, m, InvolutionKind::Orthogonal);
    auto graded = codim_value(2, m, InvolutionKind::Orthogonal, z2);
    std::cout << "m=" << m << "  c_m(UT_2,*)=" << plain << "  c_m(UT_2,Z2,*)=" << graded
              << "  target=" << to_string(star_target(2, m)) << "\n";
  }
}
