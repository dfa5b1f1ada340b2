// Applies one operator to a few functions and compares the monomial images
// against their closed form.

#include <cstdio>

#include "kfrac/kfrac.hpp"

int main() {
  const kfrac::OperatorParams p{/*alpha=*/1.5, /*beta=*/-0.5, /*eta=*/-0.3, /*mu=*/0.4, /*k=*/1.0};
  const double t = 1.25;
  const kfrac::OperatorInstance op(p, t);

  for (double sigma : {0.0, 0.5, 1.0, 2.0}) {
    const auto f = kfrac::Expr::power(kfrac::Expr::identity(), (p.k + 1.0) * sigma);
    const double value = op.apply(f).value;
    const double exact = kfrac::monomial_image(p, t, sigma);
    std::printf("sigma=%-4g quadrature=%.15g closed-form=%.15g\n", sigma, value, exact);
  }

  const auto g = kfrac::Expr::parse("(+ 1 (exp (scale -1 x)))");
  std::printf("I[%s] = %.15g\n", g.to_string().c_str(), op.apply(g).value);
}
