#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace cpi {

using Complex = std::complex<double>;

using ArrayXd = Eigen::ArrayXd;
using ArrayXcd = Eigen::ArrayXcd;
using ArrayXXd = Eigen::ArrayXXd;
using MatrixXd = Eigen::MatrixXd;
using MatrixXcd = Eigen::MatrixXcd;
using VectorXd = Eigen::VectorXd;
using VectorXcd = Eigen::VectorXcd;
using MaskXX = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
inline constexpr Scalar kPi = Scalar(3.141592653589793238462643383279502884L);

// Error hierarchy. The CLI maps each class to an exit code.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidGeometry : public Error {
public:
    using Error::Error;
};

class UnderResolved : public Error {
public:
    using Error::Error;
};

class EmptyOverlap : public Error {
public:
    using Error::Error;
};

class OutOfRange : public Error {
public:
    using Error::Error;
};

class DegenerateStatistics : public Error {
public:
    using Error::Error;
};

class MissingFeatureScale : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    ParseError(int line, const std::string& msg)
        : Error("line " + std::to_string(line) + ": " + msg), line_(line) {}
    int line() const { return line_; }

private:
    int line_;
};

class ValidationError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace cpi
