#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace netpanel {

/// Input data or configuration violates a model invariant. Carries every
/// violation found, not just the first one.
class ValidationError : public std::runtime_error
{
public:
    explicit ValidationError(std::vector<std::string> issues);
    explicit ValidationError(const std::string& issue)
        : ValidationError(std::vector<std::string>{issue})
    {
    }

    const std::vector<std::string>& issues() const noexcept { return issues_; }

private:
    std::vector<std::string> issues_;
};

/// A numerical routine cannot proceed (singular system, persistent invalid
/// likelihood region, ...).
class NumericalError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

} // namespace netpanel
