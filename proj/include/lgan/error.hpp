#pragma once

#include <stdexcept>
#include <string>

namespace lgan {

// Base of every error the library throws. The CLI maps subclasses of
// UserError to exit code 1 and anything else to exit code 2.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class UserError : public Error {
public:
    using Error::Error;
};

class InvalidPixel : public UserError {
public:
    using UserError::UserError;
};

class ShapeError : public UserError {
public:
    using UserError::UserError;
};

class SpecError : public UserError {
public:
    using UserError::UserError;
};

class WiringError : public UserError {
public:
    using UserError::UserError;
};

class IOError : public UserError {
public:
    using UserError::UserError;
};

class ManifestError : public UserError {
public:
    using UserError::UserError;
};

class EmptyManifest : public ManifestError {
public:
    using ManifestError::ManifestError;
};

class MissingFile : public ManifestError {
public:
    using ManifestError::ManifestError;
};

class EmptyMask : public UserError {
public:
    using UserError::UserError;
};

class EmptyReport : public UserError {
public:
    using UserError::UserError;
};

class CheckpointError : public UserError {
public:
    using UserError::UserError;
};

// Training produced NaN or Inf; the run aborts instead of logging it.
class NonFiniteLoss : public Error {
public:
    using Error::Error;
};

}  // namespace lgan
