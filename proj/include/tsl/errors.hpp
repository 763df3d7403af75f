#pragma once

#include <stdexcept>
#include <string>

namespace tsl {

/** Base class for every error thrown by the toolkit. */
class Error : public std::runtime_error {
public:
	using std::runtime_error::runtime_error;
};

#define TSL_ERROR_TYPE(Name)   \
	class Name : public Error  \
	{                          \
	public:                    \
		using Error::Error;    \
	};

// graph
TSL_ERROR_TYPE(InvalidGraph)
TSL_ERROR_TYPE(DisconnectedGraph)

// measures / transport
TSL_ERROR_TYPE(InvalidMeasure)
TSL_ERROR_TYPE(UnbalancedInput)
TSL_ERROR_TYPE(NonPositiveLambda)
TSL_ERROR_TYPE(LengthMismatch)

// numerics
TSL_ERROR_TYPE(NonFiniteState)
TSL_ERROR_TYPE(TooFewSamples)
TSL_ERROR_TYPE(NotHermitian)
TSL_ERROR_TYPE(NoConvergence)
TSL_ERROR_TYPE(DimensionMismatch)

// flow dynamics
TSL_ERROR_TYPE(NegativeMassBlowup)
TSL_ERROR_TYPE(ExternalFlowsPresent)

// reaction networks
TSL_ERROR_TYPE(NegativeConcentration)
TSL_ERROR_TYPE(NonPositiveEntry)
TSL_ERROR_TYPE(EmptyImbalance)
TSL_ERROR_TYPE(ZeroFlux)
TSL_ERROR_TYPE(ParseError)

// quantum
TSL_ERROR_TYPE(DimensionCap)
TSL_ERROR_TYPE(IncompleteProjectors)
TSL_ERROR_TYPE(DegenerateSpectrum)
TSL_ERROR_TYPE(UnpairedJump)

// cross-cutting: a proven inequality failed beyond tolerance
TSL_ERROR_TYPE(InvariantViolation)

// command line / scenarios
TSL_ERROR_TYPE(ConfigError)
TSL_ERROR_TYPE(ScenarioError)
TSL_ERROR_TYPE(IoError)

#undef TSL_ERROR_TYPE

}  // namespace tsl
