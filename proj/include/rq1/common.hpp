#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace rq1
{

using Index = std::int32_t;
using Vector3 = Eigen::Vector3d;
using Matrix3 = Eigen::Matrix3d;

/// Base class of all errors raised by the library.
class Error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error
{
public:
  using Error::Error;
};

/// Topology could not be built (duplicate cells, non-manifold faces, ...).
class MeshInvalid : public Error
{
public:
  using Error::Error;
};

class SingularMap : public Error
{
public:
  using Error::Error;
};

/// A physical point does not lie in the requested cell.
class OutOfCell : public Error
{
public:
  using Error::Error;
};

class ParseError : public Error
{
public:
  ParseError(const std::string& what, std::size_t line)
      : Error("line " + std::to_string(line) + ": " + what), line_(line)
  {
  }
  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

} // namespace rq1
