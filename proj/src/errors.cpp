#include "ovfl/errors.hpp"

#include <sstream>
#include <utility>

namespace ovfl {

namespace {

std::string singularity_message(int index, double gap) {
    std::ostringstream os;
    os.precision(17);
    os << "nonpositive gap " << gap << " at vehicle " << index;
    return os.str();
}

std::string stiffness_message(double t, double step) {
    std::ostringstream os;
    os.precision(17);
    os << "step size underflow (h = " << step << ") at t = " << t;
    return os.str();
}

std::string monotonicity_message(double t, double drop) {
    std::ostringstream os;
    os.precision(17);
    os << "relative gap velocity decreased by " << drop << " at t = " << t;
    return os.str();
}

} // namespace

SingularityError::SingularityError(int index, double gap)
    : Error(singularity_message(index, gap)), index_(index), gap_(gap) {}

StiffnessError::StiffnessError(double t, double step, std::vector<double> last_state)
    : Error(stiffness_message(t, step)), t_(t), step_(step), state_(std::move(last_state)) {}

MonotonicityViolation::MonotonicityViolation(double t, double drop)
    : Error(monotonicity_message(t, drop)), t_(t), drop_(drop) {}

} // namespace ovfl
