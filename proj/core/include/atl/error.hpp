#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace atl {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input, shape or contract violation. CLI maps this to exit code 2.
class DataError : public Error {
public:
    using Error::Error;
};

/// Training produced a non-finite or exploding loss. CLI maps this to exit code 3.
class TrainError : public Error {
public:
    using Error::Error;
};

class ShapeMismatch : public DataError {
public:
    ShapeMismatch(std::size_t expect_rows, std::size_t expect_cols,
                  std::size_t got_rows, std::size_t got_cols,
                  const std::string& context)
        : DataError(context + ": expected " + std::to_string(expect_rows) + "x" +
                    std::to_string(expect_cols) + ", got " + std::to_string(got_rows) +
                    "x" + std::to_string(got_cols)) {}
};

class LengthMismatch : public DataError {
public:
    LengthMismatch(std::size_t a, std::size_t b, const std::string& context)
        : DataError(context + ": length mismatch " + std::to_string(a) + " vs " +
                    std::to_string(b)) {}
};

class EmptyInput : public DataError {
public:
    explicit EmptyInput(const std::string& context) : DataError(context + ": empty input") {}
};

class MissingColumn : public DataError {
public:
    explicit MissingColumn(const std::string& column_name)
        : DataError("missing or misplaced column '" + column_name + "'"), column(column_name) {}
    std::string column;
};

class GapInTimestamps : public DataError {
public:
    explicit GapInTimestamps(std::size_t row_index)
        : DataError("gap in hourly timestamps at row " + std::to_string(row_index)),
          row(row_index) {}
    std::size_t row;
};

class NonNumericCell : public DataError {
public:
    NonNumericCell(std::size_t row_index, const std::string& column_name)
        : DataError("non-numeric cell at row " + std::to_string(row_index) + ", column '" +
                    column_name + "'"),
          row(row_index), column(column_name) {}
    std::size_t row;
    std::string column;
};

class ValueOutOfRange : public DataError {
public:
    ValueOutOfRange(std::size_t row_index, const std::string& column_name,
                    const std::string& detail)
        : DataError("value out of range at row " + std::to_string(row_index) + ", column '" +
                    column_name + "': " + detail),
          row(row_index), column(column_name) {}
    std::size_t row;
    std::string column;
};

class SeriesTooShort : public DataError {
public:
    SeriesTooShort(std::size_t required_len, std::size_t actual_len)
        : DataError("series too short: need " + std::to_string(required_len) + " rows, have " +
                    std::to_string(actual_len)),
          required(required_len), actual(actual_len) {}
    std::size_t required;
    std::size_t actual;
};

class WidthMismatch : public DataError {
public:
    WidthMismatch(std::size_t expected_width, std::size_t actual_width,
                  const std::string& context)
        : DataError(context + ": input width " + std::to_string(actual_width) +
                    " does not match model width " + std::to_string(expected_width)),
          expected(expected_width), actual(actual_width) {}
    std::size_t expected;
    std::size_t actual;
};

class ConstantVector : public DataError {
public:
    explicit ConstantVector(const std::string& context)
        : DataError(context + ": correlation undefined for a constant vector") {}
};

class TooLargeToEnumerate : public DataError {
public:
    TooLargeToEnumerate(std::size_t units, std::size_t limit)
        : DataError("RBM with " + std::to_string(units) +
                    " total units exceeds enumeration bound of " + std::to_string(limit)) {}
};

class DivergedLoss : public TrainError {
public:
    DivergedLoss(double loss_value, const std::string& context)
        : TrainError(context + ": loss diverged (value " + std::to_string(loss_value) + ")") {}
};

class NonFiniteValue : public Error {
public:
    explicit NonFiniteValue(const std::string& context)
        : Error(context + ": non-finite value encountered") {}
};

}  // namespace atl
