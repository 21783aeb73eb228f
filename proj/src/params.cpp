#include "rndrace/params.hpp"

#include <cmath>
#include <sstream>

#include "rndrace/error.hpp"

namespace rndrace {

namespace {

void require_positive(double value, const char* name) {
  if (!std::isfinite(value) || value <= 0.0) {
    std::ostringstream os;
    os << name << " must be a finite positive number (got " << value << ")";
    throw ValidationError(os.str());
  }
}

}  // namespace

void ModelParams::validate() const {
  if (!(prior_feasible > 0.0 && prior_feasible < 1.0)) {
    throw ValidationError("alpha must lie in (0,1)");
  }
  require_positive(stage1_rate, "H");
  require_positive(stage2_rate, "mu");
  require_positive(reward1, "p1");
  require_positive(reward2, "p2");
  require_positive(cost_rate, "c");
}

ModelParams reference_params(double cost_rate) {
  return ModelParams{0.8, 1.0, 0.5, 1.0, 0.2, cost_rate};
}

std::string to_string(const ModelParams& p) {
  std::ostringstream os;
  os << "alpha=" << p.prior_feasible << " H=" << p.stage1_rate
     << " mu=" << p.stage2_rate << " p1=" << p.reward1 << " p2=" << p.reward2
     << " c=" << p.cost_rate;
  return os.str();
}

}  // namespace rndrace
