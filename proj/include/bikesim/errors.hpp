#pragma once

#include <stdexcept>
#include <string>

namespace bikesim {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Newton iteration on the ground-contact constraint did not converge.
class NonConvergence : public Error {
public:
    using Error::Error;
};

// Yaw-roll-pitch extraction hit its singular configuration.
class GimbalDegeneracy : public Error {
public:
    using Error::Error;
};

class OutOfRange : public Error {
public:
    using Error::Error;
};

class EndOfPath : public Error {
public:
    using Error::Error;
};

class InvalidInput : public Error {
public:
    using Error::Error;
};

class EpisodeFinished : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

} // namespace bikesim
