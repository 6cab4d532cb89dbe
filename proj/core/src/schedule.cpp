#include <cmath>
#include <stdexcept>

#include "ttalab/corruption.hpp"

namespace ttalab {

SeveritySchedule SeveritySchedule::static_level(int s) {
  SeveritySchedule sch;
  sch.mode = Mode::Static;
  sch.level = s;
  validate_schedule(sch);
  return sch;
}

SeveritySchedule SeveritySchedule::dynamic(int s, double omega, double phi, bool literal_sign) {
  SeveritySchedule sch;
  sch.mode = Mode::Dynamic;
  sch.level = s;
  sch.omega = omega;
  sch.phi = phi;
  sch.literal_sign = literal_sign;
  validate_schedule(sch);
  return sch;
}

void validate_schedule(const SeveritySchedule& schedule) {
  if (schedule.level < 1 || schedule.level > 5) {
    throw std::invalid_argument("severity schedule: level must be in 1..5");
  }
  if (!std::isfinite(schedule.omega) || !std::isfinite(schedule.phi)) {
    throw std::invalid_argument("severity schedule: non-finite parameters");
  }
}

double severity_at(const SeveritySchedule& schedule, int t) {
  if (t < 0) throw std::invalid_argument("severity_at: negative frame index");
  if (schedule.mode == SeveritySchedule::Mode::Static) {
    return schedule.level;
  }
  if (schedule.literal_sign) {
    return t == 0 ? 0.0 : static_cast<double>(schedule.level);
  }
  return schedule.level * std::abs(std::sin(schedule.omega * t + schedule.phi));
}

}  // namespace ttalab
