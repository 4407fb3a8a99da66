#pragma once

#include <stdexcept>
#include <string>

namespace growfrag {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

#define GROWFRAG_ERROR(Name)            \
    struct Name : Error {               \
        using Error::Error;             \
    }

GROWFRAG_ERROR(InvalidModel);
GROWFRAG_ERROR(DomainError);
GROWFRAG_ERROR(NoCriticalPoint);
GROWFRAG_ERROR(LadderExhausted);
GROWFRAG_ERROR(ZeroRate);
GROWFRAG_ERROR(InfiniteActivity);
GROWFRAG_ERROR(Diverges);
GROWFRAG_ERROR(MomentError);
GROWFRAG_ERROR(NotAlive);
GROWFRAG_ERROR(BarrierNotArmed);
GROWFRAG_ERROR(Empty);
GROWFRAG_ERROR(TooFewSamples);
GROWFRAG_ERROR(ConfigError);

#undef GROWFRAG_ERROR

// Thrown by the simulator when a population outgrows its cap. The time of
// the last fully processed event is kept so partial results can be flagged.
struct PopulationCap : Error {
    PopulationCap(const std::string& what, double reached_time)
        : Error(what), time(reached_time) {}
    double time;
};

}  // namespace growfrag
