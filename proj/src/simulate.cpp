#include "robsens/simulate.hpp"

#include <cmath>

#include "robsens/errors.hpp"
#include "robsens/logistic.hpp"
#include "robsens/rng.hpp"

namespace robsens {

void SimSpec::validate() const {
  if (n < 2) throw ConfigError("simulation needs n >= 2");
}

SimulatedData generate(const SimSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  for (int attempt = 0; attempt < 100; ++attempt) {
    std::vector<Observation> rows(spec.n);
    std::vector<double> u(spec.n);
    int n1 = 0;
    for (int i = 0; i < spec.n; ++i) {
      const double x = rng.uniform();
      u[i] = x <= 0.7 ? rng.uniform() : 100.0 * rng.uniform();
      const int z = rng.uniform() < sigmoid(0.1 * u[i] - x) ? 1 : 0;
      const double y0 = 2.0 * x + 3.0 * u[i];
      rows[i] = {z == 1 ? y0 + 5.0 : y0, z, {x}};
      n1 += z;
    }
    if (n1 == 0 || n1 == spec.n) continue;
    SimulatedData out;
    out.data = Dataset(std::move(rows), {"x"});
    out.u.resize(spec.n);
    for (int i = 0; i < spec.n; ++i)
      out.u[i] = u[out.data.original_index()[i]];
    return out;
  }
  throw DegenerateArmError("simulation kept producing single-arm samples");
}

}  // namespace robsens
