#pragma once

#include <stdexcept>
#include <string>

namespace petrigame {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// petri-core
struct StepNotEnabled : Error { using Error::Error; };
struct SafetyViolation : Error { using Error::Error; };
struct NotFreeChoice : Error { using Error::Error; };
struct UnknownRole : Error { using Error::Error; };
struct UnknownTransition : Error { using Error::Error; };
struct UnknownPlace : Error { using Error::Error; };
struct InvalidNet : Error { using Error::Error; };

// statespace
struct StateSpaceExceeded : Error { using Error::Error; };
struct NotAWorkflowNet : Error { using Error::Error; };

// game
struct InitialIsFinal : Error { using Error::Error; };

// strategy / devices
struct InvalidDistribution : Error { using Error::Error; };
struct MalformedHistory : Error { using Error::Error; };
struct NonStationaryStrategy : Error { using Error::Error; };

// equilibrium
struct UnsupportedDevice : Error { using Error::Error; };
struct SolverNonconvergence : Error { using Error::Error; };
struct EffortExhausted : Error { using Error::Error; };
struct HypothesisViolated : Error { using Error::Error; };

// cli-io
struct ParseError : Error { using Error::Error; };
struct UnsupportedFeature : Error { using Error::Error; };
struct SchemaError : Error { using Error::Error; };

}  // namespace petrigame
