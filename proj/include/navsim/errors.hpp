#pragma once

#include <stdexcept>
#include <string>

namespace navsim {

/// Base of every error raised by the library. Each concrete error names one
/// failure condition so callers can catch exactly what they can recover from.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define NAVSIM_DEFINE_ERROR(Name)                                   \
  class Name : public Error {                                       \
   public:                                                          \
    explicit Name(const std::string& what) : Error(#Name ": " + what) {} \
  }

// gridmap
NAVSIM_DEFINE_ERROR(OutOfBounds);
NAVSIM_DEFINE_ERROR(SeedNotTraversable);
NAVSIM_DEFINE_ERROR(PoseOutOfBounds);
NAVSIM_DEFINE_ERROR(MapFormatError);

// planner
NAVSIM_DEFINE_ERROR(NoVisibleSkeleton);
NAVSIM_DEFINE_ERROR(SkeletonDisconnected);
NAVSIM_DEFINE_ERROR(GoalUnreachable);
NAVSIM_DEFINE_ERROR(DescentStuck);

// commonsense
NAVSIM_DEFINE_ERROR(NoFrontiers);
NAVSIM_DEFINE_ERROR(TableFormatError);

// perception
NAVSIM_DEFINE_ERROR(BackendUnavailable);

// sim / harness
NAVSIM_DEFINE_ERROR(EpisodeOver);
NAVSIM_DEFINE_ERROR(ScenarioInvalid);
NAVSIM_DEFINE_ERROR(EmptyResults);
NAVSIM_DEFINE_ERROR(InvalidShortest);

#undef NAVSIM_DEFINE_ERROR

}  // namespace navsim
