#pragma once

#include <stdexcept>
#include <string>

namespace lpsnet
{
    // Structural problem with a network model or model file (CLI exit code 2).
    class ModelError : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;
    };

    // I - P^T (or I - P) is numerically singular.
    class SingularMatrixError : public ModelError
    {
    public:
        using ModelError::ModelError;
    };

    // Requested quantity does not exist for this model, e.g. approximations of an unstable system.
    class UnstableModelError : public ModelError
    {
    public:
        using ModelError::ModelError;
    };

    // Non-finite state, failed solve, or other numerical breakdown (CLI exit code 3).
    class NumericError : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;
    };
} // namespace lpsnet
