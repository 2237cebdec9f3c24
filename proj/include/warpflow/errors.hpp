#pragma once

#include <stdexcept>
#include <string>

namespace warpflow {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define WARPFLOW_ERROR(Name)                                   \
    class Name : public Error {                                \
    public:                                                    \
        explicit Name(const std::string& what) : Error(what) {} \
    }

WARPFLOW_ERROR(DomainError);
WARPFLOW_ERROR(OrderError);
WARPFLOW_ERROR(PreconditionError);
WARPFLOW_ERROR(HypothesisError);
WARPFLOW_ERROR(UnsupportedModel);
WARPFLOW_ERROR(StiffnessError);
WARPFLOW_ERROR(InconclusiveError);
WARPFLOW_ERROR(DegenerateSegment);
WARPFLOW_ERROR(DegenerateGrid);
WARPFLOW_ERROR(StepTooLarge);
WARPFLOW_ERROR(DomainExit);
WARPFLOW_ERROR(GraphLost);
WARPFLOW_ERROR(InitialConditionError);
WARPFLOW_ERROR(WindowTooShort);
WARPFLOW_ERROR(ConfigError);

#undef WARPFLOW_ERROR

} // namespace warpflow
