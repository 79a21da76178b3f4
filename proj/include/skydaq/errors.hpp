#pragma once

#include <stdexcept>
#include <string>

namespace skydaq {

// Base of every error thrown by this library, so front-ends can catch one type.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Precondition violation: argument outside its documented domain.
struct DomainError : Error {
    using Error::Error;
};

// --- solar geometry ---

// Sun at (or numerically indistinguishable from) the zenith: azimuth undefined,
// or an inverse-trig argument strayed too far outside [-1, 1] to be noise.
struct DegeneratePosition : Error {
    using Error::Error;
};
// Sun never sets on the requested day.
struct PolarDay : Error {
    using Error::Error;
};
// Sun never rises on the requested day.
struct PolarNight : Error {
    using Error::Error;
};
// Observation window is empty (start would not precede end).
struct EmptyWindow : Error {
    using Error::Error;
};

// --- frame processing ---

struct ShapeMismatch : Error {
    using Error::Error;
};
struct EmptyStack : Error {
    using Error::Error;
};
// A frame coincides with the stack reference exactly: correlation undefined.
struct DegenerateStack : Error {
    DegenerateStack(const std::string& msg, int index) : Error(msg), frame_index(index) {}
    int frame_index = -1;
};

// --- exposure fusion ---

struct ChannelMismatch : Error {
    using Error::Error;
};
struct EmptyRing : Error {
    using Error::Error;
};
// Ring mean too close to zero to divide by when chaining gain factors.
struct DivisionDegenerate : Error {
    using Error::Error;
};

// --- dataset io ---

struct IoError : Error {
    using Error::Error;
};
struct ParseError : Error {
    ParseError(const std::string& msg, long line) : Error(msg), line_number(line) {}
    long line_number = 0;
};
struct SchemaMismatch : Error {
    using Error::Error;
};
struct NonMonotoneTimestamps : Error {
    using Error::Error;
};
struct BadDimensions : Error {
    using Error::Error;
};
struct BadBitDepth : Error {
    using Error::Error;
};
struct UnparsableFilename : Error {
    using Error::Error;
};
struct TargetOutOfRange : Error {
    using Error::Error;
};

// Wraps an error from one stage of a multi-stage pipeline with the stage name.
struct StageError : Error {
    StageError(const std::string& stage, const std::string& msg)
        : Error(stage + ": " + msg), stage_name(stage) {}
    std::string stage_name;
};

}  // namespace skydaq
