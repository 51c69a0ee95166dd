#include "quadrature_rules.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <stdexcept>

namespace conefreq::detail {

namespace {

template <unsigned N>
Rule1D make_gauss() {
  using G = boost::math::quadrature::gauss<double, N>;
  const auto& x = G::abscissa();
  const auto& w = G::weights();
  Rule1D rule;
  // Boost stores the nonnegative half of a symmetric rule.
  for (std::size_t i = x.size(); i-- > 0;) {
    if (x[i] == 0.0) continue;
    rule.nodes.push_back(0.5 * (1.0 - x[i]));
    rule.weights.push_back(0.5 * w[i]);
  }
  for (std::size_t i = 0; i < x.size(); ++i) {
    rule.nodes.push_back(0.5 * (1.0 + x[i]));
    rule.weights.push_back(0.5 * w[i]);
  }
  return rule;
}

}  // namespace

const Rule1D& gauss_legendre(int n) {
  static const Rule1D g2 = make_gauss<2>();
  static const Rule1D g3 = make_gauss<3>();
  static const Rule1D g4 = make_gauss<4>();
  static const Rule1D g5 = make_gauss<5>();
  static const Rule1D g6 = make_gauss<6>();
  static const Rule1D g8 = make_gauss<8>();
  switch (n) {
    case 2: return g2;
    case 3: return g3;
    case 4: return g4;
    case 5: return g5;
    case 6: return g6;
    case 8: return g8;
    default: throw std::invalid_argument("unsupported Gauss-Legendre order");
  }
}

const TriangleRule& triangle_rule_degree5() {
  static const TriangleRule rule = [] {
    TriangleRule r;
    const double a1 = 0.059715871789769820, b1 = 0.470142064105115090;
    const double w1 = 0.132394152788506181;
    const double a2 = 0.797426985353087322, b2 = 0.101286507323456339;
    const double w2 = 0.125939180544827153;
    r.bary = {{1.0 / 3, 1.0 / 3, 1.0 / 3},
              {a1, b1, b1}, {b1, a1, b1}, {b1, b1, a1},
              {a2, b2, b2}, {b2, a2, b2}, {b2, b2, a2}};
    r.weights = {0.225, w1, w1, w1, w2, w2, w2};
    return r;
  }();
  return rule;
}

}  // namespace conefreq::detail
