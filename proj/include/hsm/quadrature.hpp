#pragma once

#include <vector>

namespace hsm {

struct GaussLegendre {
  std::vector<double> nodes;    // increasing, in (-1, 1)
  std::vector<double> weights;  // sum to 2
};

GaussLegendre gauss_legendre(int order);

}  // namespace hsm
