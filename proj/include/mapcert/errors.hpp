#ifndef MAPCERT_ERRORS_HPP
#define MAPCERT_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace mapcert {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// interval kernel
struct DivisionByZeroInterval : Error {
    DivisionByZeroInterval() : Error("division by an interval containing zero") {}
};
struct DegenerateSplit : Error {
    DegenerateSplit() : Error("widest enclosure is below the split floor") {}
};
struct InvariantViolation : Error {
    using Error::Error;
};

// generating functions
struct OutOfDomain : Error {
    using Error::Error;
};
struct ParseError : Error {
    using Error::Error;
};

// implicit map
struct NoUniqueSolution : Error {
    using Error::Error;
};
struct EmptySolution : Error {
    using Error::Error;
};
struct SingularImplicit : Error {
    SingularImplicit() : Error("0 in s1(y,x): implicit derivative undefined") {}
};

// pipeline
struct ResourceLimit : Error {
    using Error::Error;
};
struct EmptyInvariantSet : Error {
    EmptyInvariantSet() : Error("every cell escapes: invariant set enclosure is empty") {}
};

} // namespace mapcert

#endif
