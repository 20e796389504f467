#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace tsg {

// Row-major so that node/edge rows are contiguous for gather/scatter.
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vec = Eigen::VectorXd;
using RowVec = Eigen::Matrix<double, 1, Eigen::Dynamic>;

using Rng = std::mt19937_64;

inline constexpr double kPi = 3.14159265358979323846;

/// Base for all errors raised by the library. `kind()` is a stable,
/// machine-readable category used by the CLI error object.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& what)
        : std::runtime_error(what), kind_(std::move(kind)) {}
    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line)
        : Error("parse_error", what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& what) : Error("validation_error", what) {}
};

class ShapeError : public Error {
public:
    explicit ShapeError(const std::string& what) : Error("shape_error", what) {}
};

/// Normalizes an angle to (-pi, pi].
double normalize_angle(double a);

/// Derives an independent generator from a base seed and a stream index.
Rng derive_rng(std::uint64_t seed, std::uint64_t stream);

/// 64-bit FNV-1a over raw bytes.
std::uint64_t fnv1a64(const void* data, std::size_t size, std::uint64_t h = 0xcbf29ce484222325ULL);

}  // namespace tsg
