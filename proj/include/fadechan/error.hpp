// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace fadechan {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
public:
    using Error::Error;
};

// Invalid user input; carries the dotted path of the offending field.
class InputError : public Error {
public:
    InputError(std::string field, const std::string& what)
        : Error(field.empty() ? what : field + ": " + what), field_(std::move(field)) {}
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

// A model left its validity range (rejection rate, non-PSD covariance, ...).
class DiagnosticError : public Error {
public:
    using Error::Error;
};

// Numerical integration ran out of its evaluation budget.
class BudgetExceeded : public Error {
public:
    BudgetExceeded(const std::string& what, double best_estimate, double error_estimate)
        : Error(what), best_(best_estimate), err_(error_estimate) {}
    double best_estimate() const noexcept { return best_; }
    double error_estimate() const noexcept { return err_; }

private:
    double best_;
    double err_;
};

}  // namespace fadechan
