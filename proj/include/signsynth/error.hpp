#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace signsynth {

/// Root of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid argument to a primitive (zero dimension, degenerate polygon, ...).
class ArgumentError : public Error {
public:
    using Error::Error;
};

/// Augmentation parameter outside its allowed range.
class ParameterError : public Error {
public:
    using Error::Error;
};

/// Sprite does not fit inside the destination at the requested offset.
class PlacementError : public Error {
public:
    using Error::Error;
};

/// Asset content that cannot be used (empty sprite, obstacle too small, ...).
class AssetError : public Error {
public:
    using Error::Error;
};

/// Empty mask handed to cutout extraction.
class ExtractionError : public Error {
public:
    using Error::Error;
};

/// Bad configuration: missing files, unknown names, infeasible targets.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Malformed structured input. `offset()` is the byte offset when known.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t offset = npos)
        : Error(what), offset_(offset) {}

    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

/// Filesystem or codec failure while reading or writing.
class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace signsynth
