#pragma once

#include <stdexcept>
#include <string>

namespace levyruin {

// Argument outside the analytic domain of a function (MGF abscissa, sign of p, ...).
class DomainError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Model is in the wrong fluctuation regime for the requested quantity.
class RegimeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Inconsistent estimator configuration.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A Monte Carlo budget (replicas, attempts, grid extent) was exhausted.
class BudgetError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class RejectionBudgetError : public BudgetError {
public:
    using BudgetError::BudgetError;
};

class GridError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NoHitsError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace levyruin
